"""Identify an unknown FIR system with the four linear filters and watch them converge.

Run: python3 demos/identify_system.py
"""
import numpy as np

from kapa import LinearFilterConfig, SignalBuffer, learning_curve, make_regressors, run_linear

rng = np.random.default_rng(0)
L = 10

# white excitation through a hidden 10-tap system, no measurement noise
x = SignalBuffer(rng.standard_normal(6000) * 0.1)
w_true = rng.standard_normal(L) * 0.5
d = SignalBuffer(make_regressors(x, L) @ w_true)
power = np.mean(d.samples ** 2)

for algo in ("lms", "newton_lms", "apa", "napa"):
    run = run_linear(LinearFilterConfig(order_L=L, window_K=10, step_eta=0.2, algorithm=algo), x, d)
    curve = learning_curve(run.e, 500)
    # a few points of the learning curve, relative to the desired-signal power
    points = "  ".join(f"{i:>5d}:{m / power:8.1e}" for i, m in curve[::3])
    err = np.max(np.abs(run.state.weights - w_true))
    print(f"{algo:>10s}  weight error {err:.1e}   {points}")

# the window size trades speed for cost; K=1 collapses back to the single-sample rule
for K in (1, 2, 5, 10):
    run = run_linear(LinearFilterConfig(order_L=L, window_K=K, step_eta=0.2, algorithm="apa"), x, d)
    first_below = next((i for i, m in learning_curve(run.e, 200) if m < 1e-3 * power), None)
    print(f"apa K={K:<2d} reaches 0.1% of signal power at sample {first_below}")
