"""Linear adaptive FIR filters: LMS, regularized Newton LMS, APA and normalized APA.

Every algorithm is written against the same block primitives (stacked
regressor predictions, regressor Gram matrix, dense solve, correction), with
the single-regressor algorithms using a one-row block. The projection
algorithms with a window of one are then the same floating-point computation
as their single-regressor counterparts.
"""
from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .signal_io import SignalBuffer, make_regressors

__all__ = [
    "ALGORITHMS",
    "LinearFilterConfig",
    "LinearFilterState",
    "FilterRun",
    "predict",
    "lms_step",
    "newton_lms_step",
    "apa_step",
    "napa_step",
    "run_linear",
]

ALGORITHMS = ("lms", "newton_lms", "apa", "napa")


@dataclass(frozen=True)
class LinearFilterConfig:
    order_L: int = 10
    step_eta: float = 0.2
    reg_epsilon: float = 1e-3
    window_K: int = 10
    algorithm: str = "apa"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown linear algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if int(self.order_L) != self.order_L or self.order_L < 1:
            raise ValueError(f"order_L must be a positive integer, got {self.order_L}")
        if int(self.window_K) != self.window_K or self.window_K < 1:
            raise ValueError(f"window_K must be a positive integer, got {self.window_K}")
        if not self.step_eta >= 0:
            raise ValueError(f"step_eta must be non-negative, got {self.step_eta}")
        if not self.reg_epsilon >= 0:
            raise ValueError(f"reg_epsilon must be non-negative, got {self.reg_epsilon}")

    def to_params(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "L": self.order_L,
            "K": self.window_K,
            "eta": self.step_eta,
            "epsilon": self.reg_epsilon,
        }


@dataclass
class LinearFilterState:
    """Weights plus the most recent ``window_K`` (regressor, desired) pairs.

    A state is owned by one caller at a time; the step functions mutate it in
    place and also return it.
    """

    config: LinearFilterConfig
    weights: np.ndarray = None
    history: deque = None
    step_count: int = 0

    def __post_init__(self):
        if self.weights is None:
            self.weights = np.zeros(self.config.order_L)
        else:
            self.weights = np.array(self.weights, dtype=np.float64).reshape(-1)
            if self.weights.shape[0] != self.config.order_L:
                raise ValueError(f"weights length {self.weights.shape[0]} != order_L {self.config.order_L}")
        if self.history is None:
            self.history = deque(maxlen=self.config.window_K)


@dataclass
class FilterRun:
    """Outcome of running a filter over a whole signal."""

    y: np.ndarray
    e: np.ndarray
    state: object
    config: object
    dictionary_size: Optional[int] = None
    summary: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        """CSV text with header ``k,y,e`` (``k`` counts from 1).

        Kernel runs append a ``# final:`` line with the dictionary summary.
        """
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["k", "y", "e"])
        for k, (yk, ek) in enumerate(zip(self.y, self.e), start=1):
            writer.writerow([k, repr(float(yk)), repr(float(ek))])
        if self.summary:
            out.write("# final: " + " ".join(f"{k}={v}" for k, v in self.summary.items()) + "\n")
        return out.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def _as_regressor(state, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if u.shape[0] != state.config.order_L:
        raise ValueError(f"length mismatch: regressor has {u.shape[0]} taps, filter order is {state.config.order_L}")
    return u


def _check_finite(u: np.ndarray, d: float) -> float:
    d = float(d)
    if not (np.isfinite(d) and np.all(np.isfinite(u))):
        raise ValueError("non-finite input to filter step")
    return d


# block primitives; Ut holds one regressor per row (the transpose of U(k))

def _block_predict(Ut: np.ndarray, w: np.ndarray) -> np.ndarray:
    return Ut @ w


def _block_gram(Ut: np.ndarray) -> np.ndarray:
    return Ut @ Ut.T


def _block_solve(G: np.ndarray, reg_epsilon: float, e: np.ndarray) -> np.ndarray:
    A = G + reg_epsilon * np.eye(G.shape[0])
    try:
        return np.linalg.solve(A, e)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"singular projection system (epsilon={reg_epsilon})") from exc


def _block_correct(w: np.ndarray, eta: float, Ut: np.ndarray, z: np.ndarray) -> np.ndarray:
    return w + eta * (Ut.T @ z)


def predict(state: LinearFilterState, u) -> float:
    """Filter output ``w . u`` for the current weights."""
    u = _as_regressor(state, u)
    return float(_block_predict(u[None, :], state.weights)[0])


def _single_step(state, u, d, normalized):
    u = _as_regressor(state, u)
    d = _check_finite(u, d)
    cfg = state.config
    Ut = u[None, :]
    y = _block_predict(Ut, state.weights)
    e = np.array([d]) - y
    z = _block_solve(_block_gram(Ut), cfg.reg_epsilon, e) if normalized else e
    state.weights = _block_correct(state.weights, cfg.step_eta, Ut, z)
    state.history.append((u, d))
    state.step_count += 1
    return state, float(y[0]), float(e[0])


def lms_step(state: LinearFilterState, u, d):
    """One LMS update ``w += eta * u * (d - u.w)``.

    Returns ``(state, y, e)`` where ``y`` uses the pre-update weights.
    """
    return _single_step(state, u, d, normalized=False)


def newton_lms_step(state: LinearFilterState, u, d):
    """Regularized Newton (NLMS-type) update ``w += eta * u * e / (u.u + epsilon)``."""
    return _single_step(state, u, d, normalized=True)


def _window_step(state, u, d, normalized):
    u = _as_regressor(state, u)
    d = _check_finite(u, d)
    cfg = state.config
    state.history.append((u, d))
    # oldest column first, current sample last
    Ut = np.array([h[0] for h in state.history])
    dv = np.array([h[1] for h in state.history])
    yv = _block_predict(Ut, state.weights)
    ev = dv - yv
    z = _block_solve(_block_gram(Ut), cfg.reg_epsilon, ev) if normalized else ev
    state.weights = _block_correct(state.weights, cfg.step_eta, Ut, z)
    state.step_count += 1
    return state, float(yv[-1]), float(ev[-1])


def apa_step(state: LinearFilterState, u, d):
    """Affine projection update over the ``min(k, K)`` most recent pairs.

    ``w += eta * U (d_vec - U^T w)``; the returned ``y`` and ``e`` belong to
    the current sample.
    """
    return _window_step(state, u, d, normalized=False)


def napa_step(state: LinearFilterState, u, d):
    """Normalized affine projection: ``w += eta * U (U^T U + eps I)^-1 (d_vec - U^T w)``.

    The ``K' x K'`` system is solved densely at each step.
    """
    if not state.config.reg_epsilon > 0:
        raise ValueError("napa requires reg_epsilon > 0")
    return _window_step(state, u, d, normalized=True)


STEP_FUNCTIONS = {
    "lms": lms_step,
    "newton_lms": newton_lms_step,
    "apa": apa_step,
    "napa": napa_step,
}


def _check_pair(input: SignalBuffer, desired: SignalBuffer):
    if len(input) != len(desired):
        raise ValueError(f"length mismatch: input {len(input)} samples, desired {len(desired)} samples")
    if input.sample_rate_hz != desired.sample_rate_hz:
        raise ValueError(f"sample-rate mismatch: {input.sample_rate_hz} vs {desired.sample_rate_hz} Hz")
    if len(input) == 0:
        raise ValueError("empty signal")


def run_linear(config: LinearFilterConfig, input: SignalBuffer, desired: SignalBuffer) -> FilterRun:
    """Adapt over the whole signal, starting from zero weights."""
    _check_pair(input, desired)
    if config.algorithm in ("napa", "newton_lms") and not config.reg_epsilon > 0:
        raise ValueError(f"{config.algorithm} requires reg_epsilon > 0")
    step = STEP_FUNCTIONS[config.algorithm]
    state = LinearFilterState(config)
    X = make_regressors(input, config.order_L)
    dv = desired.samples
    n = X.shape[0]
    y = np.empty(n)
    e = np.empty(n)
    for k in range(n):
        _, y[k], e[k] = step(state, X[k], dv[k])
    return FilterRun(y=y, e=e, state=state, config=config)
