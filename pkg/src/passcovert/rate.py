"""Bob's SINR, quadrature average covert rate over the jamming fraction, and the MM minorizer."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParamOutOfRange

LN2 = math.log(2.0)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self):
        return len(self.nodes)


@lru_cache(maxsize=32)
def _legendre_nodes(n: int):
    # Newton on P_n with the Tricomi initial guess; roots of P_n on [-1, 1]
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]


def gauss_legendre(order=32) -> QuadratureRule:
    """Gauss-Legendre rule mapped to [0, 1]; weights sum to one."""
    if order < 1:
        raise ParamOutOfRange(f"quadrature order must be >= 1, got {order}")
    if order == 1:
        return QuadratureRule(np.array([0.5]), np.array([1.0]))
    x, w = _legendre_nodes(int(order))
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)


def tanh_sinh(order=32, t_max=3.0) -> QuadratureRule:
    """Double-exponential rule on [0, 1] with ``order`` midpoint-offset nodes in
    [-t_max, t_max]. Nodes crowd both endpoints doubly exponentially, which keeps
    the rate integrand accurate when xi I >> sigma_b^2 puts its log singularity
    just left of xi = 0 (Gauss-Legendre loses ~1e-3 bits there)."""
    if order < 1:
        raise ParamOutOfRange(f"quadrature order must be >= 1, got {order}")
    h = 2.0 * t_max / order
    t = (np.arange(order) - 0.5 * (order - 1)) * h
    u = 0.5 * np.pi * np.sinh(t)
    nodes = 1.0 / (1.0 + np.exp(-2.0 * u))  # (1 + tanh u) / 2 without cancellation near 0
    weights = 0.25 * np.pi * h * np.cosh(t) / np.cosh(u) ** 2
    weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)


RULES = {"tanh_sinh": tanh_sinh, "gauss_legendre": gauss_legendre}
DEFAULT_RULE = "tanh_sinh"


def make_rule(kind: str = DEFAULT_RULE, order: int = 32) -> QuadratureRule:
    try:
        return RULES[kind](order)
    except KeyError:
        raise ParamOutOfRange(f"unknown quadrature rule {kind!r}; choose from {sorted(RULES)}") from None


@dataclass(frozen=True)
class LinkBudget:
    S: float
    I: float
    sigma_b_sq: float

    def __post_init__(self):
        if self.S < 0 or self.I < 0 or not self.sigma_b_sq > 0:
            raise ParamOutOfRange(f"invalid link budget {self}")


def link_budget(design, scenario) -> LinkBudget:
    from .system import channel_gains  # local import: system depends on piecewise_dep only

    _, _, bob_C, bob_J = channel_gains(design, scenario.geom)
    return LinkBudget(design.P_C * bob_C, design.P_J_max * bob_J, scenario.sigma_b_sq)


def sinr(budget: LinkBudget, xi):
    """S / (xi I + sigma_b^2), xi = P_J / P_J_max in [0, 1]."""
    return budget.S / (np.asarray(xi, dtype=float) * budget.I + budget.sigma_b_sq)


def avg_covert_rate(budget: LinkBudget, rule: QuadratureRule | None = None) -> float:
    rule = rule or make_rule()
    if budget.I == 0.0:
        return math.log2(1.0 + budget.S / budget.sigma_b_sq)
    return float(np.dot(rule.weights, np.log2(1.0 + sinr(budget, rule.nodes))))


def mm_rate_surrogate(budget: LinkBudget, anchor: LinkBudget, rule: QuadratureRule | None = None):
    """Concave minorizer of the average rate, tight at ``anchor``.

    Returns (value, dF/dS, dF/dI). The -ln(xi I + sigma^2) term is linearised at
    the anchor interference, which under-estimates it because -ln is convex.
    """
    rule = rule or make_rule()
    w, x = rule.weights, rule.nodes
    s2 = budget.sigma_b_sq
    D = x * anchor.I + s2
    num = budget.S + x * budget.I + s2
    val = np.dot(w, np.log(num) - np.log(D) - (x / D) * (budget.I - anchor.I)) / LN2
    dS = np.dot(w, 1.0 / num) / LN2
    dI = np.dot(w, x / num - x / D) / LN2
    return float(val), float(dS), float(dI)
