"""Floating point comparison rules shared by every module."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative singular-value floor for invertibility and kernel computations.
RANK_RTOL = 1e-8


@dataclass(frozen=True)
class Tolerance:
    """Mixed absolute/relative elementwise tolerance.

    Two arrays ``a`` and ``b`` are close when
    ``|a - b| <= abs + rel * max(|a|, |b|)`` holds entrywise.
    """

    abs: float = 1e-9
    rel: float = 1e-9

    def __post_init__(self):
        if not (math.isfinite(self.abs) and math.isfinite(self.rel)):
            raise ValueError("tolerances must be finite")
        if self.abs < 0 or self.rel < 0:
            raise ValueError("tolerances must be non-negative")

    def excess(self, a, b) -> float:
        """Largest amount by which any entry violates the rule (<= 0 means close)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.size == 0 and b.size == 0:
            return -self.abs
        bound = self.abs + self.rel * np.maximum(np.abs(a), np.abs(b))
        return float(np.max(np.abs(a - b) - bound))

    def close(self, a, b) -> bool:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.shape != b.shape:
            return False
        return self.excess(a, b) <= 0.0


DEFAULT_TOL = Tolerance()


def max_abs(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_invertible(m: np.ndarray, rtol: float = RANK_RTOL) -> bool:
    """Square and smallest singular value above ``rtol`` times the largest."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        return False
    if not np.all(np.isfinite(m)):
        return False
    sv = np.linalg.svd(m, compute_uv=False)
    return bool(sv[0] > 0 and sv[-1] > rtol * sv[0])


def _threshold(sv: np.ndarray, rtol: float) -> float:
    # Unit floor: a matrix whose entries are all rounding noise has rank 0.
    return rtol * max(float(sv[0]) if sv.size else 0.0, 1.0)


def kernel(m: np.ndarray, n: int, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the null space of ``m`` (``* x n``).

    Singular values at or below ``rtol * max(sigma_max, 1)`` count as zero.
    """
    m = np.asarray(m, dtype=float).reshape(-1, n)
    if m.shape[0] == 0:
        return np.eye(n)
    _, sv, vt = np.linalg.svd(m)
    r = int(np.sum(sv > _threshold(sv, rtol)))
    return vt[r:].T.copy()


def rank(m: np.ndarray, rtol: float = RANK_RTOL) -> int:
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0
    sv = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(sv > _threshold(sv, rtol)))
