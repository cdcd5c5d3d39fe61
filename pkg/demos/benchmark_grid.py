"""A small version of the enhancement benchmark on synthetic tones and noises.

Run: python3 demos/benchmark_grid.py
The full grid is `kapa benchmark --synthetic` (about 80 s).
"""
from collections import defaultdict

from kapa.benchmark import grid_to_csv, run_grid, synthetic_grid

for variant in ("linear", "nonlinear"):
    grid = synthetic_grid(length=3000, seed=0, noise_types=["white", "car"], snr_levels_db=[0.0, 10.0], variant=variant)
    rows = run_grid(grid)
    table = defaultdict(dict)
    for name, snr, rep in rows:
        table[(name, snr)][rep.algorithm] = rep.output_snr_db
    print(f"{variant} target: output SNR (dB)")
    print(f"{'cell':>12s}" + "".join(f"{a:>9s}" for a in grid.algorithms))
    for (name, snr), cells in table.items():
        print(f"{name:>7s} {snr:3g}dB" + "".join(f"{cells[a]:9.2f}" for a in grid.algorithms))
    print()

print(grid_to_csv(rows[:4], include_runtime=False))
