"""Closed-form piecewise DEP over the breakpoint-partitioned threshold axis, and the
optimal-threshold search.

The piecewise evaluator needs a common noise power and a common local slope
b = 1/(P_J_max A_J) across wardens (the common-shift ESP identity only works
for a uniform shift). Arbitrary geometry goes through ``fusion.dep_exact``.

Index sets at threshold tau (closed on the left, matching the local forms):

    J  = {m : alpha1_m > tau}     wardens whose false-alarm probability is still linear
    L  = {m : alpha2_m <= tau}    wardens whose miss probability has left 0   (k = |L|)
    G  = {m : alpha3_m <= tau}    wardens whose miss probability is saturated (s = |G|)
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from . import _kernels
from .errors import (DegenerateJamming, EmptyWardenSet, HeterogeneousSlope, NonFiniteGradient,
                     ParamOutOfRange, SelectorInvalid)
from ._kernels._fallback import candidate_thresholds
from .fusion import dep_exact, majority_threshold
from .local_detect import profile_arrays

SLOPE_RTOL = 1e-9
SELECTORS = ("M", "k", "J", "k-s")
GOLDEN_RTOL = 1e-6


@dataclass(frozen=True)
class BreakpointTable:
    alpha1: np.ndarray
    alpha2: np.ndarray
    alpha3: np.ndarray
    order1: np.ndarray
    order2: np.ndarray
    order3: np.ndarray
    sigma_sq: float
    ordering_case: str

    @property
    def M(self):
        return len(self.alpha1)

    def extrema(self):
        return {
            "a1min": self.alpha1[0], "a1max": self.alpha1[-1],
            "a2min": self.alpha2[0], "a2max": self.alpha2[-1],
            "a3min": self.alpha3[0], "a3max": self.alpha3[-1],
        }


@dataclass(frozen=True)
class NormalizedConstants:
    a: np.ndarray
    c: np.ndarray
    b: np.ndarray
    homogeneous_slope: bool

    @property
    def slope(self) -> float:
        if not self.homogeneous_slope:
            raise HeterogeneousSlope("local slopes differ across wardens")
        return float(self.b[0])


def ordering_case(profiles) -> str:
    a1 = min(w.alpha1 for w in profiles)
    a2 = min(w.alpha2 for w in profiles)
    return "A2first" if a2 <= a1 else "A1first"


def build_breakpoints(profiles) -> BreakpointTable:
    if len(profiles) == 0:
        raise EmptyWardenSet("need at least one warden")
    if any(w.degenerate for w in profiles):
        raise DegenerateJamming("breakpoint analysis needs P_J_max * A_J > 0 at every warden")
    a = [np.array([getattr(w, f"alpha{i}") for w in profiles]) for i in (1, 2, 3)]
    orders = [np.argsort(v, kind="stable") for v in a]
    sig = [w.sigma_w_sq for w in profiles]
    return BreakpointTable(
        a[0][orders[0]], a[1][orders[1]], a[2][orders[2]], orders[0], orders[1], orders[2],
        float(min(sig)), ordering_case(profiles),
    )


def normalized_constants(profiles) -> NormalizedConstants:
    span = np.array([w.span for w in profiles])
    if np.any(span <= 0):
        raise DegenerateJamming("normalization needs P_J_max * A_J > 0")
    b = 1.0 / span
    a = np.array([w.alpha1 for w in profiles]) * b
    c = np.array([w.alpha2 for w in profiles]) * b
    homog = bool(np.all(np.abs(b - b[0]) <= SLOPE_RTOL * abs(b[0])))
    return NormalizedConstants(a, c, b, homog)


def index_functions(tau, table: BreakpointTable):
    """(l, k, s): how many wardens have alpha1, alpha2, alpha3 <= tau."""
    return (
        int(np.searchsorted(table.alpha1, tau, side="right")),
        int(np.searchsorted(table.alpha2, tau, side="right")),
        int(np.searchsorted(table.alpha3, tau, side="right")),
    )


def _selected(tau, selector, profiles, consts):
    a1 = np.array([w.alpha1 for w in profiles])
    a2 = np.array([w.alpha2 for w in profiles])
    a3 = np.array([w.alpha3 for w in profiles])
    if selector == "M":
        return consts.a
    if selector == "J":
        return consts.a[a1 > tau]
    if selector == "k":
        return 1.0 + consts.c[a2 <= tau]
    if selector == "k-s":
        return 1.0 + consts.c[(a2 <= tau) & ~(a3 <= tau)]
    raise SelectorInvalid(f"selector must be one of {SELECTORS}, got {selector!r}")


def _exact_esp(vec):
    """ESPs of ``vec`` (Fractions) in exact arithmetic."""
    xi = [Fraction(1)] + [Fraction(0)] * len(vec)
    for v in vec:
        for k in range(len(xi) - 1, 0, -1):
            xi[k] += v * xi[k - 1]
    return xi


def _shifted(xi, n, x, shift):
    """xi_x(vec - shift) from the ESPs ``xi`` of the length-n vector ``vec``."""
    if x < 0 or x > n:
        return Fraction(0)
    return sum((-shift) ** r * comb(n - x + r, r) * xi[x - r] for r in range(x + 1))


def _psi(x, vec, shift):
    """xi_x(vec - shift) by the common-shift expansion; 0 when x exceeds the vector length."""
    vec = [Fraction(float(v)) for v in vec]
    return float(_shifted(_exact_esp(vec), len(vec), x, Fraction(float(shift))))


def psi_poly(tau, x, selector, consts: NormalizedConstants, profiles) -> float:
    """psi_tau(x, y) = sum_r (-b tau)^r C(y - x + r, r) xi_{x-r}(a_(y)) for the selected vector."""
    if selector not in SELECTORS:
        raise SelectorInvalid(f"selector must be one of {SELECTORS}, got {selector!r}")
    b = consts.slope
    return _psi(x, _selected(tau, selector, profiles, consts), b * tau)


def _check_piecewise(profiles):
    if len(profiles) == 0:
        raise EmptyWardenSet("need at least one warden")
    consts = normalized_constants(profiles)
    if not consts.homogeneous_slope:
        raise HeterogeneousSlope("piecewise DEP needs a common P_J_max * A_J across wardens")
    sig = np.array([w.sigma_w_sq for w in profiles])
    if np.any(sig != sig[0]):
        raise ParamOutOfRange("piecewise DEP needs a common warden noise power")
    return consts


# The alternating sums below cancel heavily (terms reach ~1e8 for M = 8 while the
# result is a probability), so they run in exact rational arithmetic on the float
# inputs and round once at the end.
def _fa_term(tau, vec, shift, T):
    """P(at least T alarms) among wardens with linear false-alarm probabilities vec - shift."""
    n = len(vec)
    if n < T:
        return Fraction(0)
    xi = _exact_esp([Fraction(float(v)) for v in vec])
    return sum((-1) ** (j + T) * comb(j - 1, T - 1) * _shifted(xi, n, j, shift) for j in range(T, n + 1))


def _md_term(tau, vec, shift, n_ones, T):
    """P(at most T-1 detections) when n_ones wardens always detect and the rest detect
    with probabilities vec - shift; saturated wardens are dropped (they never detect)."""
    m = len(vec)
    n = n_ones + m
    xi_vec = _exact_esp([Fraction(float(v)) for v in vec])
    psi = [_shifted(xi_vec, m, l, shift) for l in range(m + 1)]
    xi = [sum((comb(n_ones, j - l) * psi[l] for l in range(m + 1) if 0 <= j - l <= n_ones), Fraction(0))
          for j in range(n + 1)]
    total = Fraction(0)
    for i in range(min(T, n + 1)):
        total += sum(((-1) ** (j + i) * comb(j, i) * xi[j] for j in range(i, n + 1)), Fraction(0))
    return total


def _piecewise_one(tau, profiles, table, consts, T):
    e = table.extrema()
    sigma = table.sigma_sq
    if tau <= sigma or tau >= e["a3max"]:
        return 1.0
    shift = Fraction(float(consts.slope * tau))
    a1 = np.array([w.alpha1 for w in profiles])
    a2 = np.array([w.alpha2 for w in profiles])
    a3 = np.array([w.alpha3 for w in profiles])

    def phi_all():
        return _fa_term(tau, consts.a, shift, T)

    def phi_active():
        return _fa_term(tau, consts.a[a1 > tau], shift, T)

    def psi_md(drop_saturated):
        lin = a2 <= tau
        if drop_saturated:
            lin = lin & ~(a3 <= tau)
        n_ones = int(np.sum(~(a2 <= tau)))
        return _md_term(tau, 1.0 + consts.c[lin], shift, n_ones, T)

    return float(_piecewise_exact(tau, e, table.ordering_case, phi_all, phi_active, psi_md))


def _piecewise_exact(tau, e, ordering, phi_all, phi_active, psi_md):
    upper_mid = min(e["a1max"], e["a3min"])
    if ordering == "A2first":
        if tau < e["a2min"]:
            return phi_all()
        if tau < e["a1min"]:
            return phi_all() + psi_md(False)
        if tau < upper_mid:
            return phi_active() + psi_md(False)
        if tau < e["a1max"]:
            return phi_active() + psi_md(True)
        return psi_md(True)
    if tau < e["a1min"]:
        return phi_all()
    if tau < e["a2min"]:
        return phi_active()
    if tau < upper_mid:
        return phi_active() + psi_md(False)
    if tau < e["a1max"]:
        return phi_active() + psi_md(True)
    return psi_md(True)


def dep_piecewise(tau, profiles):
    """Piecewise closed-form DEP; requires a common slope and noise power."""
    consts = _check_piecewise(profiles)
    table = build_breakpoints(profiles)
    T = majority_threshold(len(profiles))
    if np.ndim(tau) == 0:
        return _piecewise_one(float(tau), profiles, table, consts, T)
    taus = np.asarray(tau, dtype=float)
    return np.array([_piecewise_one(float(t), profiles, table, consts, T) for t in taus.ravel()]).reshape(taus.shape)


@dataclass
class DepCurve:
    taus: np.ndarray
    values: np.ndarray
    breakpoints: np.ndarray
    tau_star: float
    g_star: float
    ordering_case: str
    source: str = "exact_grid"
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# tau_star={self.tau_star:.17g}; g_star={self.g_star:.17g}; ordering_case={self.ordering_case}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau", "p_dep"])
        for t, v in zip(self.taus, self.values):
            w.writerow([f"{t:.17g}", f"{v:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DepCurve":
        lines = text.splitlines()
        head = dict(kv.strip().split("=", 1) for kv in lines[0].lstrip("# ").split(";"))
        rows = list(csv.reader(lines[2:]))
        taus = np.array([float(r[0]) for r in rows])
        vals = np.array([float(r[1]) for r in rows])
        return cls(taus, vals, np.array([]), float(head["tau_star"]), float(head["g_star"]), head["ordering_case"])


def curve_breakpoints(profiles) -> np.ndarray:
    sigma, a1, a2, a3, _ = profile_arrays(profiles)
    return np.unique(np.concatenate([sigma, a1, a2, a3]))


def candidate_grid(profiles, grid_density=64) -> np.ndarray:
    """Breakpoints plus ``grid_density`` equally spaced interior points per interval."""
    sigma, a1, a2, a3, _ = profile_arrays(profiles)
    return candidate_thresholds(sigma, a1, a2, a3, grid_density)[1]


def min_dep_value(profiles, grid_density=64):
    """(tau_star, g_star) without tabulating the curve; the optimizer's hot path."""
    if len(profiles) == 0:
        raise EmptyWardenSet("need at least one warden")
    T = majority_threshold(len(profiles))
    return _kernels.min_dep_search(*profile_arrays(profiles), T, int(grid_density), GOLDEN_RTOL)


def min_dep_threshold(profiles, grid_density=64):
    """Minimise the exact DEP over tau.

    Candidates are all breakpoints plus an interior grid; the best candidate is
    refined by one golden-section pass between its neighbours. Ties go to the
    smaller tau. Returns (tau_star, g_star, DepCurve).
    """
    tau_star, g_star = min_dep_value(profiles, grid_density)
    taus = candidate_grid(profiles, grid_density)
    vals = dep_exact(taus, profiles)
    curve = DepCurve(taus, vals, curve_breakpoints(profiles), tau_star, g_star, ordering_case(profiles))
    return tau_star, g_star, curve


def min_dep(profiles, grid_density=64) -> float:
    return min_dep_value(profiles, grid_density)[1]


def dep_gradient(profiles_fn, x0, tau_star, fd_step=1e-6, floor=1e-12, engine="exact"):
    """Central-difference gradient of DEP(tau_star; profiles_fn(x)) with tau_star held fixed."""
    evaluate = dep_exact if engine == "exact" else dep_piecewise
    x0 = np.asarray(x0, dtype=float)
    grad = np.zeros_like(x0)
    for i in range(len(x0)):
        h = max(fd_step * abs(x0[i]), floor)
        xp, xm = x0.copy(), x0.copy()
        xp[i] += h
        xm[i] -= h
        fp = evaluate(tau_star, profiles_fn(xp))
        fm = evaluate(tau_star, profiles_fn(xm))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteGradient(f"non-finite DEP while differentiating coordinate {i}")
        grad[i] = (fp - fm) / (2.0 * h)
    if not np.all(np.isfinite(grad)):
        raise NonFiniteGradient("gradient has non-finite entries")
    return grad
