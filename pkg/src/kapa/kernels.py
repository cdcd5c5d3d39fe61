"""Positive-definite kernels on regressor vectors and Gram matrices.

All kernel arithmetic goes through :func:`kernel_row_taps`, which accumulates
the per-tap terms strictly in tap order. Every other routine (single-pair
evaluation, Gram assembly, the kernel filters) therefore sees bit-identical
kernel values for the same pair of vectors, in either argument order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["KernelSpec", "kernel_eval", "kernel_row", "kernel_row_taps", "gram"]

FAMILIES = ("gaussian", "polynomial", "linear")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and parameters.

    gaussian:   exp(-gaussian_a * ||u - v||^2)
    polynomial: (u.v + 1) ** poly_degree
    linear:     u.v   (reduces the kernel filters to their linear counterparts)
    """

    family: str = "gaussian"
    gaussian_a: float = 1.0
    poly_degree: int = 2

    poly_offset = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "gaussian" and not self.gaussian_a > 0:
            raise ValueError(f"gaussian_a must be > 0, got {self.gaussian_a}")
        if self.family == "polynomial" and (int(self.poly_degree) != self.poly_degree or self.poly_degree < 1):
            raise ValueError(f"poly_degree must be a positive integer, got {self.poly_degree}")

    def to_params(self) -> dict:
        """Flat ``key=value`` form used in reports and config files."""
        params = {"kernel": self.family}
        if self.family == "gaussian":
            params["gaussian_a"] = self.gaussian_a
        elif self.family == "polynomial":
            params["poly_degree"] = self.poly_degree
        return params

    def __str__(self):
        return " ".join(f"{k}={v}" for k, v in self.to_params().items())


def kernel_row_taps(spec: KernelSpec, centers_t: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Like :func:`kernel_row` but with centers stored tap-major, shape ``(L, m)``.

    Terms are accumulated over taps in order, one contiguous row at a time.
    """
    L, m = centers_t.shape
    if u.shape != (L,):
        raise ValueError(f"length mismatch: centers have {L} taps, u has shape {u.shape}")
    if m == 0:
        return np.zeros(0)
    if L == 0:
        raise ValueError("regressors must have at least one tap")
    acc = np.empty(m)
    if spec.family == "gaussian":
        tmp = np.empty(m)
        np.subtract(centers_t[0], u[0], out=acc)
        np.multiply(acc, acc, out=acc)
        for i in range(1, L):
            np.subtract(centers_t[i], u[i], out=tmp)
            np.multiply(tmp, tmp, out=tmp)
            np.add(acc, tmp, out=acc)
        np.multiply(acc, -spec.gaussian_a, out=acc)
        return np.exp(acc, out=acc)
    np.multiply(centers_t[0], u[0], out=acc)
    for i in range(1, L):
        acc += centers_t[i] * u[i]
    if spec.family == "polynomial":
        acc += spec.poly_offset
        return np.power(acc, spec.poly_degree, out=acc)
    return acc


def kernel_row(spec: KernelSpec, centers: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Kernel values between ``u`` and every row of ``centers``."""
    centers = np.asarray(centers, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if centers.ndim != 2 or u.ndim != 1 or centers.shape[1] != u.shape[0]:
        raise ValueError(f"length mismatch: centers {centers.shape}, u {u.shape}")
    return kernel_row_taps(spec, centers.T, u)


def kernel_eval(spec: KernelSpec, u, v) -> float:
    """Evaluate the kernel on a single pair.

    >>> kernel_eval(KernelSpec("polynomial", poly_degree=2), [1.0], [2.0])
    9.0
    """
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")
    return float(kernel_row(spec, v[None, :], u)[0])


def gram(spec: KernelSpec, U) -> np.ndarray:
    """Gram matrix ``G[i, j] = kernel(U[i], U[j])``.

    Each unordered pair is evaluated once and mirrored, so the result is
    exactly symmetric.
    """
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2:
        raise ValueError("U must be a sequence of equal-length regressors")
    n = U.shape[0]
    if n == 0:
        raise ValueError("empty regressor sequence")
    G = np.empty((n, n))
    for i in range(n):
        row = kernel_row(spec, U[i:], U[i])
        G[i, i:] = row
        G[i:, i] = row
    return G
