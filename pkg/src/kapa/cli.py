"""Command-line front end: ``kapa enhance | benchmark | metrics``.

Enhancement is supervised: the filter sees the noisy signal as input and the
clean recording as its desired signal, and the enhanced output is the filter
output. There is no blind (reference-free) mode.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import (
    DEFAULT_ALGORITHMS,
    NOISE_TYPES,
    SNR_LEVELS_DB,
    FilterSettings,
    corpus_grid,
    enhance,
    grid_to_csv,
    run_grid,
    synthetic_grid,
)
from .kernel_filters import KERNEL_ALGORITHMS
from .kernels import FAMILIES, KernelSpec
from .linear_filters import ALGORITHMS as LINEAR_ALGORITHMS
from .metrics import curve_to_csv, learning_curve, mse, output_snr_db, spectrogram_csv, spectrogram_to_csv
from .signal_io import read_wav, write_wav

ALL_ALGORITHMS = LINEAR_ALGORITHMS + KERNEL_ALGORITHMS

SUPERVISED_NOTE = (
    "Enhancement is supervised: the noisy WAV is the filter input and the clean WAV "
    "is the desired signal; the enhanced WAV is the filter output."
)

# config-file keys that differ from argparse dests
CONFIG_ALIASES = {
    "algorithm": "algo",
    "gaussian_a": "a",
    "poly_degree": "p",
    "order_L": "L",
    "window_K": "K",
    "step_eta": "eta",
    "reg_epsilon": "epsilon",
    "dict_cap": "dict_cap",
    "in": "input",
}


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        values[CONFIG_ALIASES.get(key, key)] = value
    return values


def _add_filter_args(p):
    g = p.add_argument_group("filter hyperparameters")
    g.add_argument("--L", type=int, default=10, help="filter order / regressor length (default 10)")
    g.add_argument("--K", type=int, default=10, help="projection window (default 10)")
    g.add_argument("--eta", type=float, default=0.2, help="step size (default 0.2)")
    g.add_argument("--epsilon", type=float, default=1e-3, help="regularization for normalized variants (default 1e-3)")
    g.add_argument("--kernel", choices=FAMILIES, default="gaussian", help="kernel family (default gaussian)")
    g.add_argument("--a", type=float, default=1.0, help="gaussian width a in exp(-a|u-v|^2) (default 1.0)")
    g.add_argument("--p", type=int, default=2, help="polynomial degree (default 2)")
    g.add_argument("--dict-cap", type=int, default=None, help="cap on kernel dictionary size (default: unbounded)")


def _settings(args) -> FilterSettings:
    return FilterSettings(
        order_L=args.L,
        window_K=args.K,
        step_eta=args.eta,
        reg_epsilon=args.epsilon,
        kernel=KernelSpec(args.kernel, gaussian_a=args.a, poly_degree=args.p),
        dict_cap=args.dict_cap,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kapa",
        description="Linear and kernel affine projection filters for speech enhancement. " + SUPERVISED_NOTE,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="flat key=value file; command-line flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="enhance a noisy WAV against its clean reference", description=SUPERVISED_NOTE)
    p.add_argument("--in", dest="input", required=True, help="noisy input WAV")
    p.add_argument("--clean", required=True, help="clean (desired) WAV")
    p.add_argument("--out", required=True, help="enhanced output WAV")
    p.add_argument("--algo", choices=ALL_ALGORITHMS, default="kapa")
    p.add_argument("--error-out", help="error-signal WAV (default <out>_error.wav)")
    p.add_argument("--report", help="report CSV (default <out>_report.csv)")
    p.add_argument("--run-csv", help="also write the per-sample k,y,e trace")
    p.add_argument("--curve-window", type=int, default=256)
    _add_filter_args(p)

    p = sub.add_parser("benchmark", help="run the noise type x SNR x algorithm grid", description=SUPERVISED_NOTE)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--synthetic", action="store_true", help="use the built-in synthetic tones and noise types")
    src.add_argument("--corpus", help="directory with clean/*.wav and noise/<type>.wav")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length", type=int, default=10000, help="samples per synthetic cell (default 10000)")
    p.add_argument("--variant", choices=("linear", "nonlinear"), default="linear",
                   help="nonlinear: desired signal is a saturated copy of the clean tones (synthetic only)")
    p.add_argument("--noise-types", default=",".join(NOISE_TYPES), help="comma list (synthetic only)")
    p.add_argument("--snr-levels", default=",".join(f"{s:g}" for s in SNR_LEVELS_DB))
    p.add_argument("--algos", default=",".join(DEFAULT_ALGORITHMS))
    p.add_argument("--timing", action="store_true",
                   help="fill the runtime_ms column (wall-clock, so the CSV is no longer reproducible)")
    p.add_argument("--out", help="CSV path (default stdout)")
    _add_filter_args(p)

    p = sub.add_parser("metrics", help="SNR and MSE of an estimate against a reference")
    p.add_argument("reference")
    p.add_argument("estimate")
    p.add_argument("--dof", type=int, default=0, help="degrees of freedom subtracted in the MSE denominator")
    p.add_argument("--curve", help="write a learning-curve CSV of (estimate - reference)")
    p.add_argument("--window", type=int, default=256)
    p.add_argument("--spectrogram", help="write the estimate's spectrogram CSV")
    p.add_argument("--frame", type=int, default=256)
    p.add_argument("--hop", type=int, default=None)
    return parser


def _split_list(text, cast=str):
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise UsageError(f"empty list: {text!r}")
    try:
        return [cast(t) for t in items]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def cmd_enhance(args) -> int:
    noisy = read_wav(args.input)
    clean = read_wav(args.clean)
    config = _settings(args).config_for(args.algo)
    run, report = enhance(config, noisy, clean, curve_window=args.curve_window)
    out = Path(args.out)
    write_wav(out, noisy.with_samples(run.y))
    write_wav(Path(args.error_out) if args.error_out else _sibling(out, "_error.wav"), noisy.with_samples(run.e))
    report_path = Path(args.report) if args.report else _sibling(out, "_report.csv")
    report_path.write_text(report.to_csv())
    if args.run_csv:
        run.write_csv(args.run_csv)
    sys.stdout.write(report.to_text())
    return 0


def cmd_benchmark(args) -> int:
    algos = _split_list(args.algos)
    for a in algos:
        if a not in ALL_ALGORITHMS:
            raise UsageError(f"unknown algorithm {a!r}; choose from {', '.join(ALL_ALGORITHMS)}")
    snrs = _split_list(args.snr_levels, float)
    common = dict(snr_levels_db=snrs, algorithms=algos, settings=_settings(args))
    if args.synthetic:
        kinds = _split_list(args.noise_types)
        for k in kinds:
            if k not in NOISE_TYPES:
                raise UsageError(f"unknown noise type {k!r}; choose from {', '.join(NOISE_TYPES)}")
        grid = synthetic_grid(length=args.length, seed=args.seed, noise_types=kinds, variant=args.variant, **common)
    else:
        grid = corpus_grid(args.corpus, seed=args.seed, **common)

    def progress(name, snr, rep):
        print(f"{name:>12s} {snr:5g} dB {rep.algorithm:>10s}  out {rep.output_snr_db:9.3f} dB", file=sys.stderr)

    text = grid_to_csv(run_grid(grid, progress=progress), include_runtime=args.timing)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_metrics(args) -> int:
    ref = read_wav(args.reference)
    est = read_wav(args.estimate)
    snr = output_snr_db(ref, est)
    print("SNR: inf" if math.isinf(snr) and snr > 0 else f"SNR: {snr:.3f} dB")
    print(f"MSE: {mse(est, ref, args.dof):.6e}")
    if args.curve:
        Path(args.curve).write_text(curve_to_csv(learning_curve(est.samples - ref.samples, args.window)))
    if args.spectrogram:
        spec = spectrogram_csv(est, args.frame, args.hop)
        Path(args.spectrogram).write_text(spectrogram_to_csv(spec, est.sample_rate_hz))
    return 0


COMMANDS = {"enhance": cmd_enhance, "benchmark": cmd_benchmark, "metrics": cmd_metrics}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre_parser = argparse.ArgumentParser(add_help=False)
    pre_parser.add_argument("--config")
    pre, rest = pre_parser.parse_known_args(argv)
    command = next((t for t in rest if t in COMMANDS), None)
    try:
        if pre.config and command:
            overrides = read_config(pre.config)
            sub = parser._subparsers._group_actions[0].choices[command]
            known = {a.dest for a in sub._actions}
            unknown = sorted(set(overrides) - known)
            if unknown:
                raise UsageError(f"unknown config keys: {', '.join(unknown)}")
            for action in sub._actions:
                if action.dest in overrides:
                    raw = overrides[action.dest]
                    if action.nargs == 0:
                        # store_true flags
                        action.default = raw.lower() in ("1", "true", "yes", "on")
                    else:
                        action.default = action.type(raw) if action.type else raw
                    # a config value satisfies required flags
                    action.required = False
    except (UsageError, OSError, ValueError) as exc:
        print(f"kapa: error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"kapa {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"kapa {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
