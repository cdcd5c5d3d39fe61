"""A saturating system defeats linear filters; the Gaussian-kernel filters track it.

Run: python3 demos/kernel_vs_linear.py
"""
import numpy as np

from kapa import (
    KernelFilterConfig,
    KernelSpec,
    LinearFilterConfig,
    SignalBuffer,
    make_regressors,
    run_kernel,
    run_linear,
)

rng = np.random.default_rng(1)
L, n = 5, 4000
x = SignalBuffer(rng.standard_normal(n) * 0.3)
w = rng.standard_normal(L)
d = SignalBuffer(np.tanh(make_regressors(x, L) @ w))

tail = slice(n - 1000, n)
for algo in ("apa", "napa"):
    run = run_linear(LinearFilterConfig(order_L=L, window_K=5, algorithm=algo), x, d)
    print(f"{algo:>6s}  tail MSE {np.mean(run.e[tail] ** 2):.2e}")

for algo in ("kapa", "nkapa"):
    cfg = KernelFilterConfig(kernel=KernelSpec("gaussian", gaussian_a=1.0), order_L=L, window_K=5, algorithm=algo)
    run = run_kernel(cfg, x, d)
    print(f"{algo:>6s}  tail MSE {np.mean(run.e[tail] ** 2):.2e}   dictionary {run.dictionary_size}")

# with the linear kernel the kernel filter is the linear one in disguise
lin = run_linear(LinearFilterConfig(order_L=L, window_K=5, algorithm="napa"), x, d)
dual = run_kernel(KernelFilterConfig(kernel=KernelSpec("linear"), order_L=L, window_K=5, algorithm="nkapa"), x, d)
print(f"linear-kernel NKAPA vs NAPA: max |dy| = {np.max(np.abs(lin.y - dual.y)):.1e}")

# a dictionary cap bounds memory and per-step cost
cfg = KernelFilterConfig(kernel=KernelSpec("gaussian"), order_L=L, window_K=5, dict_cap=500, algorithm="nkapa")
run = run_kernel(cfg, x, d)
print(f"nkapa, cap 500: tail MSE {np.mean(run.e[tail] ** 2):.2e}, evictions {run.state.evictions}")
