"""Per-warden false-alarm / miss-detection probabilities of the energy detector.

Under randomised jamming P_J ~ U[0, P_J_max] the averaged energy at warden m is
P_J A_J + sigma^2 (H0) or P_C A_C + P_J A_J + sigma^2 (H1), so both error
probabilities are piecewise affine in the threshold with breakpoints

    alpha1 = sigma^2 + P_J_max A_J
    alpha2 = sigma^2 + P_C A_C
    alpha3 = alpha1 + alpha2 - sigma^2
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateJamming, ParamOutOfRange


@dataclass(frozen=True)
class WardenProfile:
    A_C: float
    A_J: float
    sigma_w_sq: float
    P_C: float
    P_J_max: float
    alpha1: float
    alpha2: float
    alpha3: float

    @property
    def span(self) -> float:
        """Width P_J_max * A_J of both linear regimes (reciprocal of the slope)."""
        return self.P_J_max * self.A_J

    @property
    def degenerate(self) -> bool:
        return self.span == 0.0


def make_profile(A_C, A_J, sigma_w_sq, P_C, P_J_max, allow_degenerate=False) -> WardenProfile:
    """Build a warden profile with its breakpoint triplet.

    With ``allow_degenerate`` a zero jamming span is accepted and the local
    probabilities become step functions (see :func:`p_fa`, :func:`p_md`).
    """
    vals = dict(A_C=A_C, A_J=A_J, sigma_w_sq=sigma_w_sq, P_C=P_C, P_J_max=P_J_max)
    for name, v in vals.items():
        if not (np.isfinite(v) and v >= 0):
            raise ParamOutOfRange(f"{name} must be finite and >= 0, got {v}")
    span = P_J_max * A_J
    if span == 0 and not allow_degenerate:
        raise DegenerateJamming("P_J_max * A_J = 0: the warden's H0 statistic is deterministic")
    a1 = sigma_w_sq + span
    a2 = sigma_w_sq + P_C * A_C
    a3 = a1 + a2 - sigma_w_sq
    return WardenProfile(float(A_C), float(A_J), float(sigma_w_sq), float(P_C), float(P_J_max), a1, a2, a3)


def p_fa(tau, w: WardenProfile):
    """Local false-alarm probability. The constant branches own the breakpoints
    (the function is continuous there) so the plateaus are reproduced exactly."""
    tau = np.asarray(tau, dtype=float)
    if w.degenerate:
        out = np.where(tau <= w.sigma_w_sq, 1.0, 0.0)
    else:
        lin = (w.alpha1 - tau) / w.span
        out = np.where(tau <= w.sigma_w_sq, 1.0, np.where(tau < w.alpha1, lin, 0.0))
    return out[()] if out.ndim == 0 else out


def p_md(tau, w: WardenProfile):
    tau = np.asarray(tau, dtype=float)
    if w.degenerate:
        out = np.where(tau > w.alpha2, 1.0, 0.0)
    else:
        lin = (tau - w.alpha2) / w.span
        out = np.where(tau <= w.alpha2, 0.0, np.where(tau < w.alpha3, lin, 1.0))
    return out[()] if out.ndim == 0 else out


def profile_arrays(profiles):
    """Pack profiles into contiguous (sigma, alpha1, alpha2, alpha3, span) arrays for the kernels."""
    sigma = np.array([w.sigma_w_sq for w in profiles], dtype=float)
    a1 = np.array([w.alpha1 for w in profiles], dtype=float)
    a2 = np.array([w.alpha2 for w in profiles], dtype=float)
    a3 = np.array([w.alpha3 for w in profiles], dtype=float)
    span = np.array([w.span for w in profiles], dtype=float)
    return sigma, a1, a2, a3, span


def local_error_matrix(tau, profiles):
    """(G, M) arrays of p_fa and p_md for thresholds ``tau`` and every warden."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    pf = np.column_stack([p_fa(tau, w) for w in profiles]) if profiles else np.empty((len(tau), 0))
    pm = np.column_stack([p_md(tau, w) for w in profiles]) if profiles else np.empty((len(tau), 0))
    return pf, pm


def min_single_warden_error(w: WardenProfile) -> float:
    """min_tau p_fa + p_md for one warden: max(0, (alpha1 - alpha2) / span)."""
    if w.degenerate:
        return 0.0 if w.alpha2 > w.sigma_w_sq else 1.0
    return max(0.0, (w.alpha1 - w.alpha2) / w.span)
