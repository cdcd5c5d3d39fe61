"""Kernel affine projection (KAPA) and its normalized form (NKAPA).

The filter is a kernel expansion ``f(u) = sum_j a_j kappa(u, c_j)`` over a
dictionary that gains one center per sample. At step ``k`` the new center
enters with a zero coefficient, the ``min(k, K)`` newest units are scored by
the network as it stood before the step, and only their coefficients move.
Older coefficients are frozen for good.

Sums over the dictionary are accumulated strictly in center order. Because
frozen coefficients never change, each windowed unit keeps a running sum over
the frozen part of the dictionary and only the last ``K`` terms are added per
step. That keeps a step linear in the dictionary size while reproducing the
left-to-right sum bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernels import KernelSpec, kernel_row_taps
from .linear_filters import FilterRun, _check_pair
from .signal_io import SignalBuffer, make_regressors

__all__ = [
    "KERNEL_ALGORITHMS",
    "KernelFilterConfig",
    "KernelFilterState",
    "kapa_predict",
    "kapa_step",
    "nkapa_step",
    "run_kernel",
]

KERNEL_ALGORITHMS = ("kapa", "nkapa")


@dataclass(frozen=True)
class KernelFilterConfig:
    kernel: KernelSpec = KernelSpec()
    step_eta: float = 0.2
    reg_epsilon: float = 1e-3
    window_K: int = 10
    order_L: int = 10
    dict_cap: Optional[int] = None
    algorithm: str = "kapa"

    def __post_init__(self):
        if self.algorithm not in KERNEL_ALGORITHMS:
            raise ValueError(f"unknown kernel algorithm {self.algorithm!r}; expected one of {KERNEL_ALGORITHMS}")
        if int(self.order_L) != self.order_L or self.order_L < 1:
            raise ValueError(f"order_L must be a positive integer, got {self.order_L}")
        if int(self.window_K) != self.window_K or self.window_K < 1:
            raise ValueError(f"window_K must be a positive integer, got {self.window_K}")
        if not self.step_eta >= 0:
            raise ValueError(f"step_eta must be non-negative, got {self.step_eta}")
        if not self.reg_epsilon >= 0:
            raise ValueError(f"reg_epsilon must be non-negative, got {self.reg_epsilon}")
        if self.algorithm == "nkapa" and not self.reg_epsilon > 0:
            raise ValueError("nkapa requires reg_epsilon > 0")
        if self.dict_cap is not None and self.dict_cap < self.window_K:
            raise ValueError(f"dict_cap ({self.dict_cap}) must be >= window_K ({self.window_K})")

    def to_params(self) -> dict:
        params = {
            "algorithm": self.algorithm,
            "L": self.order_L,
            "K": self.window_K,
            "eta": self.step_eta,
            "epsilon": self.reg_epsilon,
        }
        params.update(self.kernel.to_params())
        if self.dict_cap is not None:
            params["dict_cap"] = self.dict_cap
        return params


class KernelFilterState:
    """Dictionary of centers and coefficients plus the active-window bookkeeping.

    Attributes
    ----------
    step_count : int
        Number of samples processed.
    centers : ndarray, shape (m, L)
        Stored input vectors, oldest first (read-only view).
    coeffs : ndarray, shape (m,)
        Expansion coefficients aligned with ``centers`` (read-only view).
    """

    def __init__(self, order_L: int, window_K: int, dict_cap: Optional[int] = None):
        self.order_L = int(order_L)
        self.window_K = int(window_K)
        self.dict_cap = dict_cap
        self.step_count = 0
        self.evictions = 0
        alloc = 64 if dict_cap is None else max(2 * dict_cap, 64)
        # tap-major so each tap is a contiguous row
        self._centers_t = np.zeros((self.order_L, alloc))
        self._coeffs = np.zeros(alloc)
        self._lo = 0
        self._hi = 0
        # per window unit, oldest first
        self._win_desired = np.zeros(0)
        self._win_frozen_sum = np.zeros(0)
        self._win_gram = np.zeros((0, 0))

    @classmethod
    def for_config(cls, config: KernelFilterConfig) -> "KernelFilterState":
        return cls(config.order_L, config.window_K, config.dict_cap)

    def __len__(self) -> int:
        return self._hi - self._lo

    @property
    def centers(self) -> np.ndarray:
        v = self._centers_t[:, self._lo:self._hi].T
        v.flags.writeable = False
        return v

    @property
    def coeffs(self) -> np.ndarray:
        v = self._coeffs[self._lo:self._hi]
        v.flags.writeable = False
        return v

    @property
    def window_gram(self) -> np.ndarray:
        """Kernel Gram matrix of the current window's centers."""
        return self._win_gram.copy()

    def _append(self, u: np.ndarray) -> None:
        alloc = self._coeffs.shape[0]
        if self._hi == alloc:
            size = len(self)
            if self._lo > 0 and 2 * size <= alloc:
                self._centers_t[:, :size] = self._centers_t[:, self._lo:self._hi]
                self._coeffs[:size] = self._coeffs[self._lo:self._hi]
            else:
                grown = max(2 * alloc, 64)
                c = np.zeros((self.order_L, grown))
                a = np.zeros(grown)
                c[:, :size] = self._centers_t[:, self._lo:self._hi]
                a[:size] = self._coeffs[self._lo:self._hi]
                self._centers_t, self._coeffs = c, a
            self._lo, self._hi = 0, size
        self._centers_t[:, self._hi] = u
        self._coeffs[self._hi] = 0.0
        self._hi += 1


def _seq_sum(terms: np.ndarray) -> float:
    # left-to-right; np.sum would use pairwise summation
    return float(np.cumsum(terms)[-1]) if terms.shape[0] else 0.0


def kapa_predict(state: KernelFilterState, kernel: KernelSpec, u) -> float:
    """Network output at ``u``; zero for an empty dictionary."""
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if u.shape[0] != state.order_L:
        raise ValueError(f"length mismatch: regressor has {u.shape[0]} taps, filter order is {state.order_L}")
    if len(state) == 0:
        return 0.0
    return _seq_sum(state.coeffs * kernel_row_taps(kernel, state._centers_t[:, state._lo:state._hi], u))


def _kernel_step(state: KernelFilterState, config: KernelFilterConfig, u, d, normalized: bool):
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if u.shape[0] != state.order_L:
        raise ValueError(f"length mismatch: regressor has {u.shape[0]} taps, filter order is {state.order_L}")
    d = float(d)
    if not (np.isfinite(d) and np.all(np.isfinite(u))):
        raise ValueError("non-finite input to filter step")
    K = state.window_K
    kernel = config.kernel

    evicted = False
    if state.dict_cap is not None and len(state) >= state.dict_cap:
        # the oldest center is outside the window, hence frozen
        state._lo += 1
        state.evictions += 1
        evicted = True

    centers_t = state._centers_t[:, state._lo:state._hi]
    coeffs = state._coeffs
    p = len(state)  # position the new center will take
    row = kernel_row_taps(kernel, centers_t, u)
    self_k = kernel_row_taps(kernel, u[:, None], u)[0]

    # window before this step: positions p - n_old .. p - 1
    n_old = state._win_desired.shape[0]
    w0 = max(0, p + 1 - K)  # first position of the new window
    drop = n_old - (p - w0)  # old units leaving the window (0 or 1)
    F_old = state._win_frozen_sum
    G_old = state._win_gram
    if evicted:
        F_keep = np.array([
            _seq_sum(coeffs[state._lo:state._lo + w0] * kernel_row_taps(kernel, centers_t[:, :w0], centers_t[:, j]))
            for j in range(w0, p)
        ])
    elif drop:
        # the departing unit's coefficient is final; fold it into the frozen sums
        a_out = coeffs[state._lo + w0 - 1]
        F_keep = F_old[drop:] + a_out * G_old[drop:, 0]
    else:
        F_keep = F_old
    F_new = _seq_sum(coeffs[state._lo:state._lo + w0] * row[:w0])

    n_win = p - w0 + 1
    G = np.empty((n_win, n_win))
    G[:-1, :-1] = G_old[drop:, drop:]
    G[-1, :-1] = row[w0:]
    G[:-1, -1] = row[w0:]
    G[-1, -1] = self_k
    F = np.append(F_keep, F_new)
    dw = np.append(state._win_desired[drop:], d)

    lo = state._lo + w0
    a_win = coeffs[lo:lo + n_win - 1]  # the new unit's coefficient is zero and excluded
    terms = np.empty((n_win, n_win))
    terms[:, 0] = F
    terms[:, 1:] = a_win[None, :] * G[:, :-1]
    y = np.cumsum(terms, axis=1)[:, -1]
    e = dw - y

    if normalized:
        A = G + config.reg_epsilon * np.eye(n_win)
        try:
            z = np.linalg.solve(A, e)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(f"singular window system (epsilon={config.reg_epsilon})") from exc
    else:
        z = e

    state._append(u)
    # _append may compact the buffer
    lo = state._hi - n_win
    state._coeffs[lo:state._hi] += config.step_eta * z
    state._win_desired = dw
    state._win_frozen_sum = F
    state._win_gram = G
    state.step_count += 1
    return state, float(y[-1]), float(e[-1])


def kapa_step(state: KernelFilterState, config: KernelFilterConfig, u, d):
    """One KAPA step ``a_n += eta * (d(n) - f(u(n)))`` over the active window.

    Returns ``(state, y, e)`` for the newest unit, scored before the update.
    """
    return _kernel_step(state, config, u, d, normalized=False)


def nkapa_step(state: KernelFilterState, config: KernelFilterConfig, u, d):
    """Normalized KAPA: the windowed errors pass through ``(G + eps I)^-1`` first."""
    if not config.reg_epsilon > 0:
        raise ValueError("nkapa requires reg_epsilon > 0")
    return _kernel_step(state, config, u, d, normalized=True)


def run_kernel(config: KernelFilterConfig, input: SignalBuffer, desired: SignalBuffer) -> FilterRun:
    """Adapt a kernel filter over a whole signal from an empty dictionary."""
    _check_pair(input, desired)
    step = nkapa_step if config.algorithm == "nkapa" else kapa_step
    state = KernelFilterState.for_config(config)
    X = make_regressors(input, config.order_L)
    dv = desired.samples
    n = X.shape[0]
    y = np.empty(n)
    e = np.empty(n)
    for k in range(n):
        _, y[k], e[k] = step(state, config, X[k], dv[k])
    summary = {
        "dictionary_size": len(state),
        "kernel": config.kernel.family,
        **{k: v for k, v in config.kernel.to_params().items() if k != "kernel"},
        "coeff_l1": repr(float(np.sum(np.abs(state.coeffs)))),
    }
    return FilterRun(y=y, e=e, state=state, config=config, dictionary_size=len(state), summary=summary)
