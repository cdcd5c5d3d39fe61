"""Audio buffers, WAV I/O, tapped-delay-line regressors and noise mixing."""
from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "SignalBuffer",
    "WavFormatError",
    "read_wav",
    "write_wav",
    "mix_at_snr",
    "make_regressors",
    "TestbedSpec",
    "synth_testbed",
]


class WavFormatError(ValueError):
    """Raised for WAV files this module cannot decode (non-PCM, multi-channel, odd widths)."""


@dataclass(frozen=True)
class SignalBuffer:
    """Mono sampled signal with its sample rate.

    ``samples`` is stored as a read-only float64 array.
    """

    samples: np.ndarray
    sample_rate_hz: int = 8000

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64).reshape(-1)
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        if int(self.sample_rate_hz) != self.sample_rate_hz or self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be a positive integer, got {self.sample_rate_hz!r}")
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.shape[0]

    def with_samples(self, samples) -> "SignalBuffer":
        return SignalBuffer(samples, self.sample_rate_hz)


def read_wav(path) -> SignalBuffer:
    """Read a mono 8- or 16-bit PCM WAV file, normalized to [-1, 1].

    16-bit samples are divided by 32768; unsigned 8-bit samples are centred
    on 128 and divided by 128.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such WAV file: {path}")
    try:
        with wave.open(str(path), "rb") as w:
            channels = w.getnchannels()
            width = w.getsampwidth()
            rate = w.getframerate()
            frames = w.readframes(w.getnframes())
    except wave.Error as exc:
        # the stdlib reader only accepts format code 1, everything else lands here
        raise WavFormatError(f"{path}: non-PCM or malformed WAV ({exc})") from exc
    except EOFError as exc:
        raise WavFormatError(f"{path}: truncated WAV header") from exc
    if channels != 1:
        raise WavFormatError(f"{path}: multi-channel unsupported ({channels} channels)")
    if width == 2:
        samples = np.frombuffer(frames, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 1:
        samples = (np.frombuffer(frames, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    else:
        raise WavFormatError(f"{path}: unsupported sample width {8 * width} bits")
    return SignalBuffer(samples, rate)


def write_wav(path, buf: SignalBuffer) -> None:
    """Write ``buf`` as 16-bit PCM mono, clamping samples to [-1, 1]."""
    x = buf.samples
    if x.size == 0:
        raise ValueError("empty buffer")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite sample in buffer")
    q = np.clip(np.round(np.clip(x, -1.0, 1.0) * 32768.0), -32768, 32767).astype("<i2")
    path = Path(path)
    try:
        fh = open(path, "wb")
    except OSError as exc:
        raise OSError(f"cannot write WAV file {path}: {exc.strerror}") from exc
    with fh, wave.open(fh, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(buf.sample_rate_hz)
        w.writeframes(q.tobytes())


def _power(x: np.ndarray) -> float:
    return float(np.mean(x * x))


def mix_at_snr(clean: SignalBuffer, noise: SignalBuffer, target_snr_db: float):
    """Add ``noise`` to ``clean`` scaled so the mixture has the requested SNR.

    The noise is cut to the clean length (its first ``len(clean)`` samples are
    kept). Returns ``(noisy, scale)`` with ``noisy = clean + scale * noise``.
    """
    if clean.sample_rate_hz != noise.sample_rate_hz:
        raise ValueError(
            f"sample-rate mismatch: clean {clean.sample_rate_hz} Hz, noise {noise.sample_rate_hz} Hz"
        )
    n = len(clean)
    if len(noise) < n:
        raise ValueError(f"noise shorter than clean ({len(noise)} < {n} samples)")
    s = clean.samples
    v = noise.samples[:n]
    p_clean = _power(s) if n else 0.0
    p_noise = _power(v) if n else 0.0
    if p_clean == 0.0:
        raise ValueError("zero-power clean signal")
    if p_noise == 0.0:
        raise ValueError("zero-power noise")
    scale = float(np.sqrt(p_clean / (p_noise * 10.0 ** (target_snr_db / 10.0))))
    return clean.with_samples(s + scale * v), scale


def make_regressors(buf, order_L: int) -> np.ndarray:
    """Tapped-delay-line regressors, one row per sample.

    Row ``k`` is ``[x[k], x[k-1], ..., x[k-L+1]]`` with zeros before the first
    sample, so the output has ``len(buf)`` rows and ``order_L`` columns.

    >>> make_regressors(SignalBuffer([1.0, 2.0, 3.0]), 2).tolist()
    [[1.0, 0.0], [2.0, 1.0], [3.0, 2.0]]
    """
    if int(order_L) != order_L or order_L < 1:
        raise ValueError(f"order_L must be a positive integer, got {order_L!r}")
    order_L = int(order_L)
    x = buf.samples if isinstance(buf, SignalBuffer) else np.asarray(buf, dtype=np.float64).reshape(-1)
    n = x.shape[0]
    padded = np.concatenate([np.zeros(order_L - 1), x])
    # sliding_window_view yields oldest-first windows; flip to newest-first
    windows = np.lib.stride_tricks.sliding_window_view(padded, order_L)[:n]
    return np.ascontiguousarray(windows[:, ::-1])


@dataclass(frozen=True)
class TestbedSpec:
    """Settings for the synthetic clean/noise pair.

    ``tones`` is a sequence of ``(frequency_hz, amplitude, phase_rad)``. The
    default amplitudes sum to a 0.5 peak (-6 dBFS), a typical level for
    peak-normalized speech files.
    """

    __test__ = False  # not a pytest class

    length: int
    seed: int = 0
    tones: Sequence[tuple] = ((250.0, 0.24, 0.0), (625.0, 0.16, 0.7), (1375.0, 0.10, 1.9))
    sample_rate_hz: int = 8000


def synth_testbed(spec: TestbedSpec):
    """Deterministic stand-in for a corpus clean/noise pair.

    The clean signal is the sum of the configured sinusoids. The noise is a
    seeded standard-normal sequence rescaled to unit mean power.
    """
    if spec.length < 1:
        raise ValueError(f"length must be >= 1, got {spec.length}")
    t = np.arange(spec.length) / spec.sample_rate_hz
    clean = np.zeros(spec.length)
    for freq, amp, phase in spec.tones:
        clean += amp * np.sin(2.0 * np.pi * freq * t + phase)
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal(spec.length)
    noise /= np.sqrt(np.mean(noise * noise))
    return SignalBuffer(clean, spec.sample_rate_hz), SignalBuffer(noise, spec.sample_rate_hz)
