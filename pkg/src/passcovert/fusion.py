"""Exact system DEP under strict-majority fusion of independent local decisions."""
from __future__ import annotations

from math import comb

import numpy as np

from . import _kernels
from .errors import EmptyWardenSet, IndexOutOfRange, ProbOutOfRange
from .local_detect import profile_arrays


def majority_threshold(M: int) -> int:
    return M // 2 + 1


def _check_probs(p):
    p = np.ascontiguousarray(np.asarray(p, dtype=float).reshape(-1))
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise ProbOutOfRange(f"probabilities must lie in [0, 1], got {p.tolist()}")
    return p


def esp(x) -> np.ndarray:
    """Elementary symmetric polynomials xi_0..xi_M of ``x`` (coefficients of prod(1 + x_m z))."""
    x = np.ascontiguousarray(np.asarray(x, dtype=float).reshape(-1))
    if np.any(~np.isfinite(x)):
        raise ValueError("esp needs finite entries")
    return _kernels.esp(x)


def pgf_coeffs(p) -> np.ndarray:
    """Poisson-binomial pmf: coefficient i of prod_m [(1 - p_m) + p_m z].

    Use p = local false-alarm probabilities for the alarm count and
    p = 1 - local miss probabilities for the detection count.
    """
    c = _kernels.poibin_pmf(_check_probs(p))
    return np.maximum(c, 0.0)


def pgf_coeffs_via_esp(p) -> np.ndarray:
    """Same pmf through the alternating ESP representation (kept as a cross-check)."""
    p = _check_probs(p)
    xi = esp(p)
    M = len(p)
    out = np.empty(M + 1)
    for i in range(M + 1):
        s = 0.0
        for k in range(i, M + 1):
            s += (-1) ** (k + i) * comb(k, i) * xi[k]
        out[i] = s
    return np.maximum(out, 0.0)


def majority_tail(coeffs, T: int, side="upper") -> float:
    coeffs = np.asarray(coeffs, dtype=float)
    M = len(coeffs) - 1
    if not 0 <= T <= M + 1:
        raise IndexOutOfRange(f"T={T} outside [0, {M + 1}]")
    if side == "upper":
        return float(np.sum(coeffs[T:]))
    if side == "lower":
        return float(np.sum(coeffs[:T]))
    raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")


def dep_components(tau, profiles, T=None):
    """System (P_FA, P_MD) at thresholds ``tau`` (scalar or array)."""
    if len(profiles) == 0:
        raise EmptyWardenSet("need at least one warden")
    T = majority_threshold(len(profiles)) if T is None else T
    scalar = np.ndim(tau) == 0
    taus = np.ascontiguousarray(np.atleast_1d(np.asarray(tau, dtype=float)))
    fa, md = _kernels.dep_components(taus, *profile_arrays(profiles), T)
    if scalar:
        return float(fa[0]), float(md[0])
    return np.asarray(fa), np.asarray(md)


def dep_exact(tau, profiles):
    """P_FA + P_MD with T = floor(M/2) + 1; raw sum, may exceed 1 near the edges."""
    fa, md = dep_components(tau, profiles)
    return fa + md


def shifted_esp(a, c: float, k: int) -> float:
    """xi_k(a - c) via sum_r (-c)^r C(M-k+r, r) xi_{k-r}(a)."""
    a = np.asarray(a, dtype=float).reshape(-1)
    M = len(a)
    if not 0 <= k <= M:
        raise IndexOutOfRange(f"k={k} outside [0, {M}]")
    xi = esp(a)
    return float(sum((-c) ** r * comb(M - k + r, r) * xi[k - r] for r in range(k + 1)))


def fa_tail_via_esp(p, T: int) -> float:
    """P(at least T alarms) = sum_{k>=T} (-1)^(k+T) C(k-1, T-1) xi_k(p); T >= 1."""
    p = _check_probs(p)
    if T < 1:
        raise IndexOutOfRange("T must be >= 1 for the ESP tail form")
    xi = esp(p)
    return float(sum((-1) ** (k + T) * comb(k - 1, T - 1) * xi[k] for k in range(T, len(p) + 1)))
