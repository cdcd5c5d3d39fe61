"""Error and SNR measures, learning curves and spectrogram data."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import get_window

from .signal_io import SignalBuffer

__all__ = [
    "EnhancementReport",
    "mse",
    "snr_db",
    "output_snr_db",
    "learning_curve",
    "spectrogram_csv",
    "spectrogram_to_csv",
    "curve_to_csv",
]


def _values(x) -> np.ndarray:
    if isinstance(x, SignalBuffer):
        return x.samples
    return np.asarray(x, dtype=np.float64).reshape(-1)


def mse(estimates, truths, dof_p: int = 0) -> float:
    """Sum of squared differences divided by ``n - dof_p``.

    ``dof_p=0`` is the plain mean; a positive ``dof_p`` discounts fitted
    degrees of freedom as in regression residual variance.
    """
    a, b = _values(estimates), _values(truths)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    n = a.shape[0]
    if dof_p < 0 or n - dof_p < 1:
        raise ValueError(f"need n - dof_p >= 1 (n={n}, dof_p={dof_p})")
    r = a - b
    return float(np.sum(r * r) / (n - dof_p))


def snr_db(signal, noise) -> float:
    """``10 log10(sum s^2 / sum v^2)``; returns ``math.inf`` when the noise is silent."""
    s, v = _values(signal), _values(noise)
    if s.shape != v.shape:
        raise ValueError(f"length mismatch: {s.shape[0]} vs {v.shape[0]}")
    pv = float(np.sum(v * v))
    if pv == 0.0:
        return math.inf
    ps = float(np.sum(s * s))
    if ps == 0.0:
        return -math.inf
    return 10.0 * math.log10(ps / pv)


def output_snr_db(clean, enhanced) -> float:
    """SNR of ``clean`` against the residual ``enhanced - clean``."""
    c, y = _values(clean), _values(enhanced)
    if c.shape != y.shape:
        raise ValueError(f"length mismatch: {c.shape[0]} vs {y.shape[0]}")
    return snr_db(c, y - c)


def learning_curve(errors, window: int):
    """Windowed mean squared error.

    Points are emitted every ``max(1, window // 2)`` samples; each point is
    ``(index, mean(e^2 over errors[index - window:index]))`` with the first at
    ``index = window``. A window longer than the sequence yields one point
    covering everything.
    """
    if int(window) != window or window < 1:
        raise ValueError(f"window must be a positive integer, got {window!r}")
    window = int(window)
    e = _values(errors)
    n = e.shape[0]
    if n == 0:
        return []
    if window >= n:
        return [(n, float(np.mean(e * e)))]
    hop = max(1, window // 2)
    sq = e * e
    vals = np.lib.stride_tricks.sliding_window_view(sq, window)[::hop].mean(axis=1)
    ends = np.arange(window, n + 1, hop)
    return [(int(i), float(v)) for i, v in zip(ends, vals)]


def spectrogram_csv(buf, frame: int = 256, hop: Optional[int] = None) -> np.ndarray:
    """Hann-windowed magnitude spectra, one row per frame, ``frame // 2 + 1`` bins.

    ``hop`` defaults to ``frame // 2``.
    """
    x = _values(buf)
    if frame < 2:
        raise ValueError(f"frame must be >= 2, got {frame}")
    hop = frame // 2 if hop is None else hop
    if not 1 <= hop <= frame:
        raise ValueError(f"hop must satisfy 1 <= hop <= frame, got {hop}")
    if x.shape[0] < frame:
        raise ValueError(f"buffer shorter than one frame ({x.shape[0]} < {frame})")
    frames = np.lib.stride_tricks.sliding_window_view(x, frame)[::hop]
    win = get_window("hann", frame)
    return np.abs(np.fft.rfft(frames * win, axis=1))


def spectrogram_to_csv(spec: np.ndarray, sample_rate_hz: Optional[int] = None) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    bins = spec.shape[1]
    if sample_rate_hz:
        frame = 2 * (bins - 1)
        writer.writerow([f"{i * sample_rate_hz / frame:g}" for i in range(bins)])
    for row in spec:
        writer.writerow([repr(float(v)) for v in row])
    return out.getvalue()


def curve_to_csv(curve) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["index", "mse"])
    for i, v in curve:
        writer.writerow([i, repr(float(v))])
    return out.getvalue()


@dataclass
class EnhancementReport:
    """Metrics for one filter run plus the full configuration that produced it."""

    algorithm: str
    config: dict
    input_snr_db: float
    output_snr_db: float
    mse_final: float
    learning_curve: list = field(default_factory=list)
    dictionary_size: Optional[int] = None
    runtime_ms: Optional[float] = None

    CSV_FIELDS = ("algorithm", "input_snr_db", "output_snr_db", "mse_final", "dictionary_size", "config")

    def csv_row(self) -> list:
        return [
            self.algorithm,
            f"{self.input_snr_db:.4f}",
            f"{self.output_snr_db:.4f}",
            f"{self.mse_final:.6e}",
            "" if self.dictionary_size is None else self.dictionary_size,
            " ".join(f"{k}={v}" for k, v in self.config.items()),
        ]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.CSV_FIELDS)
        writer.writerow(self.csv_row())
        return out.getvalue()

    def to_text(self) -> str:
        lines = [
            f"algorithm:      {self.algorithm}",
            f"input SNR:      {self.input_snr_db:.4f} dB",
            f"output SNR:     {self.output_snr_db:.4f} dB",
            f"final MSE:      {self.mse_final:.6e}",
        ]
        if self.dictionary_size is not None:
            lines.append(f"dictionary:     {self.dictionary_size} centers")
        if self.runtime_ms is not None:
            lines.append(f"runtime:        {self.runtime_ms:.1f} ms")
        lines.append("config:         " + " ".join(f"{k}={v}" for k, v in self.config.items()))
        return "\n".join(lines) + "\n"
