"""Average-covert-rate maximisation under the worst-case covertness constraint.

The solver alternates an MM surrogate refresh with block-coordinate ascent:

* outer loop: anchor the concave rate minorizer at the current design, find the
  DEP-minimising threshold tau* and the DEP gradient at fixed tau* (Danskin),
  which gives an affine inner model of the covertness constraint;
* power block: projected gradient ascent over (P_C, P_J_max, radiation
  parameters) on the minorizer, subject to the power budget, parameter boxes and
  the affine covertness model;
* position block: one proximal gradient step on the PA coordinates, projected
  onto the ordered-spacing polytope intersected with the affine model.

Every accepted block step is re-checked against the true constraint
min_tau DEP >= 1 - epsilon and shrunk toward its start until it holds.

All block arithmetic runs in scaled coordinates: powers divided by P_max,
positions divided by the carrier wavelength, radiation parameters as-is
(rho for the equal law, logits otherwise).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (InfeasibleGeometry, NoFeasibleGridPoint, NoFeasiblePower, NonFiniteGradient, ParamOutOfRange,
                     RejectionBudgetExceeded)
from .radiation import RadiationSpec, _general
from .rate import LinkBudget, avg_covert_rate, mm_rate_surrogate
from .system import (DesignPoint, Scenario, channel_gains, min_dep_from_gains, profiles_from_gains,
                     raw_waveguide_gains, waveguide_gains)

LOGIT_BOX = 10.0
RHO_FLOOR = 1e-3  # equal-law lower bound, as a fraction of 1/N
PJ_FLOOR = 1e-6  # P_J_max lower bound, as a fraction of P_max (keeps the jamming span non-zero)


@dataclass(frozen=True)
class OptimizerConfig:
    epsilon: float = 0.1
    K_max: int = 30
    T_max: int = 5
    delta_out: float = 1e-4
    delta_in: float = 1e-7
    multistart: int = 1
    proximal_weight: float = 1.0
    fd_step: float = 1e-6
    value_fd_step: float = 1e-4
    screen_init: bool = True
    rng_seed: int = 0
    max_inner_steps: int = 40
    max_shrink: int = 30

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ParamOutOfRange(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.delta_out <= 0 or self.delta_in <= 0 or self.fd_step <= 0:
            raise ParamOutOfRange("tolerances must be > 0")
        if self.K_max < 0 or self.T_max < 1 or self.multistart < 1:
            raise ParamOutOfRange("iteration counts must be K_max >= 0, T_max >= 1, multistart >= 1")
        if self.proximal_weight < 0:
            raise ParamOutOfRange("proximal_weight must be >= 0")


@dataclass
class OptimizerTrace:
    records: list = field(default_factory=list)
    start: int = 0
    starts: list = field(default_factory=list)

    FIELDS = ("iteration", "surrogate", "acr", "g", "slack", "tau_star",
              "power_step", "position_step", "power_stall", "position_stall")

    def rows(self):
        return [[r[k] for k in self.FIELDS] for r in self.records]


# ---------------------------------------------------------------- parameterisation

def _logit(p):
    p = np.clip(p, 1e-300, 1 - 1e-16)
    return np.clip(np.log(p) - np.log1p(-p), -LOGIT_BOX, LOGIT_BOX)


def _expit(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


class DesignSpace:
    """Maps a DesignPoint to and from a flat scaled vector
    [P_C, P_J, theta_C..., theta_J..., x_C..., x_J...]."""

    def __init__(self, scenario: Scenario):
        self.sc = scenario
        self.model = scenario.model
        self.nC, self.nJ = scenario.n_C, scenario.n_J
        self.tC = self.nC if self.model == "general" else 1
        self.tJ = self.nJ if self.model == "general" else 1
        self.lam = scenario.geom.wavelength
        self.P = scenario.P_max
        o = 2
        self.s_theta_C = slice(o, o + self.tC)
        self.s_theta_J = slice(o + self.tC, o + self.tC + self.tJ)
        o += self.tC + self.tJ
        self.s_xC = slice(o, o + self.nC)
        self.s_xJ = slice(o + self.nC, o + self.nC + self.nJ)
        self.size = o + self.nC + self.nJ
        self.s_power = slice(0, o)

    def _theta(self, spec: RadiationSpec):
        if self.model == "equal":
            return np.array([spec.rho])
        if self.model == "proportional":
            return _logit(np.array([spec.delta_sq]))
        return _logit(np.array(spec.delta))

    def _spec(self, theta, n):
        if self.model == "equal":
            return RadiationSpec("equal", n, rho=float(theta[0]))
        if self.model == "proportional":
            return RadiationSpec("proportional", n, delta_sq=float(_expit(theta[0])))
        return RadiationSpec("general", n, delta=tuple(float(v) for v in _expit(theta)))

    def pack(self, d: DesignPoint) -> np.ndarray:
        v = np.empty(self.size)
        v[0] = d.P_C / self.P
        v[1] = d.P_J_max / self.P
        v[self.s_theta_C] = self._theta(d.radiation_C)
        v[self.s_theta_J] = self._theta(d.radiation_J)
        v[self.s_xC] = d.x_C / self.lam
        v[self.s_xJ] = d.x_J / self.lam
        return v

    def unpack(self, v) -> DesignPoint:
        v = np.array(v, dtype=float)
        for sl, n in ((self.s_theta_C, self.nC), (self.s_theta_J, self.nJ)):
            v[sl] = np.clip(v[sl], *self.theta_box(n))
        return DesignPoint(
            P_C=float(v[0] * self.P), P_J_max=float(v[1] * self.P),
            radiation_C=self._spec(v[self.s_theta_C], self.nC),
            radiation_J=self._spec(v[self.s_theta_J], self.nJ),
            x_C=v[self.s_xC] * self.lam, x_J=v[self.s_xJ] * self.lam,
        )

    def theta_box(self, n):
        if self.model == "equal":
            return RHO_FLOOR / n, 1.0 / n
        return -LOGIT_BOX, LOGIT_BOX

    def power_box(self):
        lo = np.empty(2 + self.tC + self.tJ)
        hi = np.empty_like(lo)
        lo[:2] = [0.0, PJ_FLOOR]
        hi[:2] = [1.0, 1.0]
        lo[2:2 + self.tC], hi[2:2 + self.tC] = self.theta_box(self.nC)
        lo[2 + self.tC:], hi[2 + self.tC:] = self.theta_box(self.nJ)
        return lo, hi

    # --- scenario evaluations on the scaled vector (no validation: FD probes may leave the box)

    def fractions(self, theta, n):
        if self.model == "equal":
            return np.full(n, float(theta[0]))
        if self.model == "proportional":
            d2 = float(_expit(theta[0]))
            return d2 * (1.0 - d2) ** np.arange(n)
        return _general(_expit(theta))

    def gains(self, v):
        geom = self.sc.geom
        users = np.vstack([geom.wardens, geom.bob[None, :]])
        gc = raw_waveguide_gains(v[self.s_xC] * self.lam, "C", self.fractions(v[self.s_theta_C], self.nC), geom, users)
        gj = raw_waveguide_gains(v[self.s_xJ] * self.lam, "J", self.fractions(v[self.s_theta_J], self.nJ), geom, users)
        return gc[:-1], gj[:-1], float(gc[-1]), float(gj[-1])

    def budget(self, v) -> LinkBudget:
        _, _, bC, bJ = self.gains(v)
        return LinkBudget(max(v[0], 0.0) * self.P * bC, max(v[1], 0.0) * self.P * bJ, self.sc.sigma_b_sq)

    def covertness(self, v):
        A_C, A_J, _, _ = self.gains(v)
        return min_dep_from_gains(A_C, A_J, v[0] * self.P, v[1] * self.P, self.sc.sigma_w_sq, self.sc.grid_density)

    def profiles(self, v):
        A_C, A_J, _, _ = self.gains(v)
        return profiles_from_gains(A_C, A_J, max(v[0], 0.0) * self.P, max(v[1], 0.0) * self.P, self.sc.sigma_w_sq)


# ---------------------------------------------------------------- projections

def isotonic_nondecreasing(y):
    """Least-squares projection onto non-decreasing sequences (pool adjacent violators)."""
    vals, wts, lens = [], [], []
    for v in np.asarray(y, dtype=float):
        vals.append(v)
        wts.append(1.0)
        lens.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            w = wts[-2] + wts[-1]
            vals[-2] = (wts[-2] * vals[-2] + wts[-1] * vals[-1]) / w
            wts[-2] = w
            lens[-2] += lens[-1]
            vals.pop(), wts.pop(), lens.pop()
    return np.repeat(vals, lens)


def project_spacing(x, length, dx_min):
    """Nearest point of {0 <= x_1, x_{n+1} - x_n >= dx_min, x_N <= length}."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    upper = length - (n - 1) * dx_min
    if upper < 0:
        raise InfeasibleGeometry(f"{n} PAs at spacing {dx_min} do not fit in {length}")
    offs = dx_min * np.arange(n)
    y = np.clip(isotonic_nondecreasing(x - offs), 0.0, upper)
    return y + offs


def _halfspace(v, a, b):
    """Project onto {v : a.v >= b}."""
    viol = b - a @ v
    nrm = a @ a
    if viol <= 0 or nrm == 0:
        return v
    return v + (viol / nrm) * a


def dykstra(v, projectors, iters=200, tol=1e-13):
    """Projection onto an intersection of convex sets by Dykstra's alternating scheme."""
    x = np.array(v, dtype=float)
    incs = [np.zeros_like(x) for _ in projectors]
    for _ in range(iters):
        prev = x.copy()
        moved = 0.0
        for i, proj in enumerate(projectors):
            y = proj(x + incs[i])
            new_inc = x + incs[i] - y
            moved = max(moved, np.max(np.abs(new_inc - incs[i])))
            incs[i] = new_inc
            x = y
        # x alone can sit still while the correction terms are still moving
        if max(moved, np.max(np.abs(x - prev))) <= tol * max(1.0, np.max(np.abs(x))):
            break
    return x


# ---------------------------------------------------------------- initialisation

def _equispaced(n, length):
    """Cell-centred equal spacing: keeps every PA off the guide ends."""
    return length * (np.arange(n) + 0.5) / n


def _sample_spacing(rng, n, length, dx_min):
    upper = length - (n - 1) * dx_min
    return np.sort(rng.uniform(0.0, upper, n)) + dx_min * np.arange(n)


def max_covert_power(scenario: Scenario, design: DesignPoint, epsilon, iters=60):
    """Largest P_C in [0, P_max - P_J_max] keeping min_tau DEP >= 1 - epsilon (bisection;
    min DEP is non-increasing in P_C)."""
    A_C, A_J, _, _ = channel_gains(design, scenario.geom)
    target = 1.0 - epsilon

    def ok(pc):
        return min_dep_from_gains(A_C, A_J, pc, design.P_J_max, scenario.sigma_w_sq, scenario.grid_density)[1] >= target

    if not ok(0.0):
        raise NoFeasiblePower("covertness fails even with P_C = 0")
    hi = scenario.P_max - design.P_J_max
    if ok(hi):
        return hi
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def feasible_init(scenario: Scenario, config: OptimizerConfig, rng_seed=None, start=0) -> DesignPoint:
    """Start 0: the best point of a coarse equispaced screen (``screen_init``), or, when
    that is off or finds nothing covert, cell-centred PAs with P_J_max = 0.4 P_max and
    default radiation. Later starts draw positions, P_J_max and radiation parameters from a seeded RNG.
    P_C is then the largest covert value (bisection)."""
    L, dx = scenario.geom.length, scenario.dx_min
    for n in (scenario.n_C, scenario.n_J):
        if (n - 1) * dx > L:
            raise InfeasibleGeometry(f"{n} PAs at spacing {dx} do not fit on a {L} m guide")
    model = scenario.model
    if start == 0 and config.screen_init:
        try:
            return coarse_to_fine_grid(scenario, config.epsilon)[0]
        except NoFeasibleGridPoint:
            pass
    if start == 0:
        xC, xJ = _equispaced(scenario.n_C, L), _equispaced(scenario.n_J, L)
        pj = 0.4 * scenario.P_max
        radC = RadiationSpec.default(model, scenario.n_C)
        radJ = RadiationSpec.default(model, scenario.n_J)
    else:
        seed = config.rng_seed if rng_seed is None else rng_seed
        rng = np.random.default_rng([int(seed), int(start)])
        xC = _sample_spacing(rng, scenario.n_C, L, dx)
        xJ = _sample_spacing(rng, scenario.n_J, L, dx)
        pj = float(rng.uniform(0.05, 0.95)) * scenario.P_max
        radC = _random_radiation(rng, model, scenario.n_C)
        radJ = _random_radiation(rng, model, scenario.n_J)
    d = DesignPoint(0.0, pj, radC, radJ, xC, xJ)
    pc = max_covert_power(scenario, d, config.epsilon)
    return replace(d, P_C=pc)


def _random_radiation(rng, model, n):
    if model == "equal":
        return RadiationSpec("equal", n, rho=float(rng.uniform(0.5, 1.0)) / n)
    if model == "proportional":
        return RadiationSpec("proportional", n, delta_sq=float(rng.uniform(0.1, 0.9)))
    return RadiationSpec("general", n, delta=tuple(np.sqrt(rng.uniform(0.1, 0.9, n))))


# ---------------------------------------------------------------- blocks

@dataclass
class _Anchor:
    v: np.ndarray
    budget: LinkBudget
    tau_star: float
    g: float
    grad: np.ndarray  # DEP gradient at fixed tau_star, scaled coordinates


def _danskin(space: DesignSpace, v, config) -> _Anchor:
    """Anchor data for the affine covertness model.

    The DEP minimiser usually sits on a breakpoint that moves with the design, where
    DEP(tau*, .) has a kink and a fixed-tau* difference quotient can even have the
    wrong sign. The model therefore differences the value function min_tau DEP
    itself (tau re-minimised at every probe), with a step well above the
    golden-section resolution."""
    tau, g = space.covertness(v)
    grad = value_gradient(space, v, config.value_fd_step)
    return _Anchor(v.copy(), space.budget(v), tau, g, grad)


def value_gradient(space: DesignSpace, v, h, idx=None):
    """Central differences of min_tau DEP over coordinates ``idx`` (default: all)."""
    idx = range(len(v)) if idx is None else idx
    grad = np.zeros(len(idx))
    for n, i in enumerate(idx):
        vp, vm = v.copy(), v.copy()
        vp[i] += h
        vm[i] -= h
        grad[n] = (space.covertness(vp)[1] - space.covertness(vm)[1]) / (2 * h)
    if not np.all(np.isfinite(grad)):
        raise NonFiniteGradient("covertness gradient has non-finite entries")
    return grad


def _surrogate(space, v, anchor, rule):
    return mm_rate_surrogate(space.budget(v), anchor.budget, rule)


def _linear_rhs(anchor, config, v, block):
    """Affine covertness model g + d.(v - v_k) >= 1 - eps restricted to ``block``,
    with the other coordinates frozen at their values in ``v``."""
    d = anchor.grad
    other = np.ones(len(v), dtype=bool)
    other[block] = False
    rhs = (1.0 - config.epsilon) - anchor.g - d[other] @ (v[other] - anchor.v[other])
    return d[block], rhs + d[block] @ anchor.v[block]


def _safeguard(space, start, cand, anchor, rule, config, f_start):
    """Shrink cand toward start until true covertness holds and the surrogate has not dropped."""
    target = 1.0 - config.epsilon
    for j in range(config.max_shrink + 1):
        v = start + 0.5 ** j * (cand - start)
        if space.covertness(v)[1] >= target and _surrogate(space, v, anchor, rule)[0] >= f_start:
            return v, j
    return start.copy(), -1


def _restore_power(space, v, config, iters=50):
    """Lower P_C (scaled) by bisection until true covertness holds; min DEP is
    non-increasing in P_C and equals 1 at P_C = 0, so this always succeeds."""
    target = 1.0 - config.epsilon
    if space.covertness(v)[1] >= target:
        return v
    return _bisect_pc(space, v, 0.0, v[0], target, iters)


def _fit_covert_power(space, v, config, iters=50):
    """Largest covert P_C at the other coordinates of v, inside the budget."""
    target = 1.0 - config.epsilon
    if space.covertness(v)[1] < target:
        return _bisect_pc(space, v, 0.0, v[0], target, iters)
    top = 1.0 - v[1]
    u = v.copy()
    u[0] = top
    if space.covertness(u)[1] >= target:
        return u
    return _bisect_pc(space, v, v[0], top, target, iters)


def _bisect_pc(space, v, lo, hi, target, iters):
    u = v.copy()
    for _ in range(iters):
        u[0] = 0.5 * (lo + hi)
        if space.covertness(u)[1] >= target:
            lo = u[0]
        else:
            hi = u[0]
    u[0] = lo
    return u


def _fd_bob_gains(space, v, idx, h):
    """Central differences of Bob's C and J gains with respect to coordinates ``idx``."""
    gC = np.zeros(len(idx))
    gJ = np.zeros(len(idx))
    for n, i in enumerate(idx):
        vp, vm = v.copy(), v.copy()
        vp[i] += h
        vm[i] -= h
        _, _, cp, jp = space.gains(vp)
        _, _, cm, jm = space.gains(vm)
        gC[n] = (cp - cm) / (2 * h)
        gJ[n] = (jp - jm) / (2 * h)
    return gC, gJ


def _power_gradient(space, v, anchor, rule, config):
    val, dS, dI = _surrogate(space, v, anchor, rule)
    _, _, bC, bJ = space.gains(v)
    P = space.P
    g = np.zeros(space.s_power.stop)
    g[0] = dS * P * bC
    g[1] = dI * P * bJ
    idx = list(range(2, space.s_power.stop))
    h = config.fd_step if space.model != "equal" else config.fd_step * 1e-2
    dgc, dgj = _fd_bob_gains(space, v, idx, h)
    for n, i in enumerate(idx):
        if i < space.s_theta_J.start:
            g[i] = dS * v[0] * P * dgc[n]
        else:
            g[i] = dI * v[1] * P * dgj[n]
    return val, g


def power_block_update(space: DesignSpace, v, anchor: _Anchor, config: OptimizerConfig, rule=None):
    """Projected-gradient ascent of the rate minorizer over powers and radiation parameters.

    Returns (new scaled vector, step norm, stalled flag)."""
    rule = rule or space.sc.rate_rule()
    blk = space.s_power
    lo, hi = space.power_box()
    a_lin, b_lin = _linear_rhs(anchor, config, v, blk)
    budget = np.zeros(blk.stop)
    budget[:2] = -1.0  # -(P_C + P_J) >= -1
    projectors = [
        lambda u: _halfspace(u, a_lin, b_lin),
        lambda u: _halfspace(u, budget, -1.0),
        lambda u: np.clip(u, lo, hi),
    ]

    def proj(u):
        u = np.clip(dykstra(u, projectors), lo, hi)
        excess = u[0] + u[1] - 1.0
        if excess > 0:  # Dykstra converges only to tolerance; keep the budget exact
            cut = min(excess, u[0])
            u[0] -= cut
            u[1] -= excess - cut
        return u

    start = v.copy()
    cur = v.copy()
    f_start, grad = _power_gradient(space, cur, anchor, rule, config)
    f_cur = f_start
    t = 0.1 / max(np.max(np.abs(grad)), 1e-300)
    for _ in range(config.max_inner_steps):
        moved = False
        while t * np.max(np.abs(grad)) > 1e-14:
            u = cur.copy()
            u[blk] = proj(cur[blk] + t * grad)
            f_new = _surrogate(space, u, anchor, rule)[0]
            if f_new >= f_cur + 1e-4 * grad @ (u[blk] - cur[blk]) and f_new >= f_cur:
                moved = True
                break
            t *= 0.5
        if not moved:
            break
        step = np.linalg.norm(u[blk] - cur[blk])
        cur, f_cur = u, f_new
        if step < config.delta_in:
            break
        t *= 2.0
        _, grad = _power_gradient(space, cur, anchor, rule, config)
    if np.array_equal(cur, start):
        return start, 0.0, False
    fixed = _restore_power(space, cur, config)
    if _surrogate(space, fixed, anchor, rule)[0] >= f_start:
        return fixed, float(np.linalg.norm(fixed - start)), False
    out, j = _safeguard(space, start, cur, anchor, rule, config, f_start)
    return out, float(np.linalg.norm(out - start)), j < 0


def position_block_update(space: DesignSpace, v, anchor: _Anchor, config: OptimizerConfig, rule=None):
    """One proximal linearised ascent step on the PA coordinates.

    The step follows the surrogate gradient plus, when covertness is active, the
    multiplier-weighted covertness gradient, so moves that cost covert power are
    priced in. Each trial point gets the largest covert P_C before the surrogate
    test. Returns (new scaled vector, step norm, stalled flag)."""
    rule = rule or space.sc.rate_rule()
    blk = np.r_[np.arange(space.s_xC.start, space.s_xC.stop), np.arange(space.s_xJ.start, space.s_xJ.stop)]
    f0, dS, dI = _surrogate(space, v, anchor, rule)
    gC, gJ = _fd_bob_gains(space, v, blk, config.fd_step)
    grad = dS * v[0] * space.P * gC + dI * v[1] * space.P * gJ
    slack = space.covertness(v)[1] - (1.0 - config.epsilon)
    if slack <= 1e-6 and v[0] > 0:
        probe = np.r_[0, blk]
        dg = value_gradient(space, v, config.value_fd_step, probe)
        if dg[0] < 0:
            _, _, bC, _ = space.gains(v)
            grad = grad + (dS * space.P * bC / -dg[0]) * dg[1:]
    gmax = np.max(np.abs(grad))
    if not np.isfinite(gmax) or gmax == 0.0:
        return v.copy(), 0.0, False
    L = space.sc.geom.length / space.lam
    dx = space.sc.dx_min / space.lam
    nC = space.nC

    def proj_spacing(u):
        return np.r_[project_spacing(u[:nC], L, dx), project_spacing(u[nC:], L, dx)]

    t = 0.1 / gmax
    mu = config.proximal_weight
    x0 = v[blk]
    for _ in range(60):
        step = grad / (1.0 / t + mu)
        if np.max(np.abs(step)) < 1e-14:
            break
        cand = v.copy()
        cand[blk] = proj_spacing(x0 + step)
        if not np.array_equal(cand, v):
            cand = _fit_covert_power(space, cand, config)
            if _surrogate(space, cand, anchor, rule)[0] > f0:
                return cand, float(np.linalg.norm(cand - v)), False
        t *= 0.5
    return v.copy(), 0.0, True


# ---------------------------------------------------------------- driver

def _run(space: DesignSpace, init: DesignPoint, config: OptimizerConfig, rule):
    v = space.pack(init)
    trace = OptimizerTrace()
    acr = avg_covert_rate(space.budget(v), rule)
    last_sur = -math.inf
    for k in range(config.K_max):
        anchor = _danskin(space, v, config)
        cur = v.copy()
        ps = xs = 0.0
        pstall = xstall = False
        for _ in range(config.T_max):
            cur, ps, pstall = power_block_update(space, cur, anchor, config, rule)
            cur, xs, xstall = position_block_update(space, cur, anchor, config, rule)
            if ps < config.delta_in and xs < config.delta_in:
                break
        sur = _surrogate(space, cur, anchor, rule)[0]
        new_acr = avg_covert_rate(space.budget(cur), rule)
        tau, g = space.covertness(cur)
        if sur < last_sur or new_acr < acr or g < 1.0 - config.epsilon:
            break  # reject: only monotone, covert iterates are accepted
        trace.records.append({
            "iteration": k, "surrogate": sur, "acr": new_acr, "g": g,
            "slack": g - (1.0 - config.epsilon), "tau_star": tau,
            "power_step": ps, "position_step": xs, "power_stall": pstall, "position_stall": xstall,
        })
        last_sur = sur
        done = abs(new_acr - acr) <= config.delta_out * max(abs(acr), 1e-300)
        v, acr = cur, new_acr
        if done:
            break
    return space.unpack(v), acr, trace


def optimize(scenario: Scenario, config: OptimizerConfig):
    """Multistart MM-BCD-SCA. Returns (best DesignPoint, its OptimizerTrace); ties go to
    the lower start index. ``trace.starts`` lists the final ACR of every start."""
    space = DesignSpace(scenario)
    rule = scenario.rate_rule()
    best = None
    starts = []
    for s in range(config.multistart):
        init = feasible_init(scenario, config, config.rng_seed, start=s)
        design, acr, trace = _run(space, init, config, rule)
        starts.append(acr)
        if best is None or acr > best[1]:
            best = (design, acr, trace, s)
    design, _, trace, s = best
    trace.start = s
    trace.starts = starts
    return design, trace


def design_acr(scenario: Scenario, design: DesignPoint, rule=None) -> float:
    from .rate import link_budget

    return avg_covert_rate(link_budget(design, scenario), rule or scenario.rate_rule())


# ---------------------------------------------------------------- baselines

def equispaced_placements(length, n, centers, pitches, dx_min):
    """Symmetric equispaced families x_i = center + (i - (n-1)/2) pitch that fit on the guide."""
    out = []
    for p in pitches:
        if n > 1 and p < dx_min * (1 - 1e-12):
            continue
        for c in centers:
            x = c + (np.arange(n) - (n - 1) / 2.0) * p
            if x[0] >= -1e-12 and x[-1] <= length + 1e-12:
                out.append(np.clip(x, 0.0, length))
    return out


def lattice_placements(length, n, pitch, dx_min):
    """Every ordered n-subset of the lattice {0, pitch, ..., length} with spacing >= dx_min."""
    from itertools import combinations

    pts = np.arange(int(math.floor(length / pitch + 1e-9)) + 1) * pitch
    out = []
    for comb_ in combinations(range(len(pts)), n):
        x = pts[list(comb_)]
        if n == 1 or np.min(np.diff(x)) >= dx_min * (1 - 1e-12):
            out.append(x)
    return out


def _ratio_limit(A_C, A_J, sigma_w_sq, target, grid_density, rtol=1e-6):
    """Largest P_C / P_J_max with min_tau DEP >= target (inf if no warden sees the covert guide)."""
    if np.all(np.asarray(A_C) == 0):
        return math.inf

    def ok(r):
        return min_dep_from_gains(A_C, A_J, r, 1.0, sigma_w_sq, grid_density)[1] >= target

    hi = 1.0
    while ok(hi):
        hi *= 2.0
        if hi > 1e12:
            return math.inf
    lo = 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _best_powers(scenario, gains, r_max, epsilon, power_pitch, rule):
    """Best grid (P_C, P_J_max) for one placement: for each P_J on the grid the covert-optimal
    P_C is the largest grid value with P_C / P_J <= r_max inside the budget (rate grows with P_C)."""
    A_C, A_J, bC, bJ = gains
    P = scenario.P_max
    n = int(round(P / power_pitch))
    k = np.arange(1, n + 1)
    pj = k * power_pitch
    jmax = np.minimum(np.floor(r_max * pj / power_pitch + 1e-9) if math.isfinite(r_max) else n, n - k).astype(int)
    ok = jmax >= 0
    if not np.any(ok):
        return None
    pj, jmax = pj[ok], jmax[ok]
    pc = jmax * power_pitch
    S = pc[:, None] * bC
    I = pj[:, None] * bJ
    rates = np.log2(1.0 + S / (rule.nodes[None, :] * I + scenario.sigma_b_sq)) @ rule.weights
    order = np.argsort(-rates, kind="stable")
    target = 1.0 - epsilon
    for i in order:
        j = int(jmax[i])
        # the ratio bound is only accurate to the bisection tolerance: try one grid step up first
        for jj in (j + 1, j):
            if jj < 0 or jj * power_pitch + pj[i] > P * (1 + 1e-12):
                continue
            pcv = jj * power_pitch
            if min_dep_from_gains(A_C, A_J, pcv, pj[i], scenario.sigma_w_sq, scenario.grid_density)[1] >= target:
                S1 = pcv * bC
                rate = avg_covert_rate(LinkBudget(S1, pj[i] * bJ, scenario.sigma_b_sq), rule)
                return rate, pcv, float(pj[i])
        # fall through to the next-best power pair
    return None


def grid_search_baseline(scenario: Scenario, epsilon, placements_C, placements_J, power_pitch=None):
    """Exhaustive search over the given placement lists and the power grid.

    Radiation stays at the model defaults. Returns (DesignPoint, ACR)."""
    if not placements_C or not placements_J:
        raise NoFeasibleGridPoint("empty placement grid")
    rule = scenario.rate_rule()
    power_pitch = power_pitch or scenario.P_max / 100.0
    radC = RadiationSpec.default(scenario.model, scenario.n_C)
    radJ = RadiationSpec.default(scenario.model, scenario.n_J)
    geom = scenario.geom
    users = np.vstack([geom.wardens, geom.bob[None, :]])
    gC = [waveguide_gains(x, "C", radC.fractions(), geom, users) for x in placements_C]
    gJ = [waveguide_gains(x, "J", radJ.fractions(), geom, users) for x in placements_J]
    best = None
    for i, gc in enumerate(gC):
        for j, gj in enumerate(gJ):
            r_max = _ratio_limit(gc[:-1], gj[:-1], scenario.sigma_w_sq, 1.0 - epsilon, scenario.grid_density)
            res = _best_powers(scenario, (gc[:-1], gj[:-1], gc[-1], gj[-1]), r_max, epsilon, power_pitch, rule)
            if res is not None and (best is None or res[0] > best[0]):
                best = (res[0], res[1], res[2], i, j)
    if best is None:
        raise NoFeasibleGridPoint("no grid point satisfies the covertness constraint")
    rate, pc, pj, i, j = best
    design = DesignPoint(pc, pj, radC, radJ, placements_C[i], placements_J[j])
    return design, rate


def coarse_to_fine_grid(scenario: Scenario, epsilon, n_centers=9, n_pitches=4, levels=2, power_pitch=None):
    """Equispaced (center, pitch) families, refined around the incumbent with halved steps.
    Each refined grid contains the incumbent, so refinement never lowers the result."""
    L, dx = scenario.geom.length, scenario.dx_min

    def fam(n, centers, pitches):
        return equispaced_placements(L, n, centers, pitches, dx)

    def pitch_range(n):
        pmax = L / (n - 1) if n > 1 else 0.0
        return np.linspace(dx, pmax, n_pitches) if n > 1 else np.array([0.0])

    cents = np.linspace(0.0, L, n_centers)
    pC, pJ = pitch_range(scenario.n_C), pitch_range(scenario.n_J)
    placC, placJ = fam(scenario.n_C, cents, pC), fam(scenario.n_J, cents, pJ)
    design, rate = grid_search_baseline(scenario, epsilon, placC, placJ, power_pitch)
    dc = cents[1] - cents[0] if len(cents) > 1 else L
    dpC = pC[1] - pC[0] if len(pC) > 1 else 0.0
    dpJ = pJ[1] - pJ[0] if len(pJ) > 1 else 0.0
    for _ in range(levels):
        dc, dpC, dpJ = dc / 2, dpC / 2, dpJ / 2

        def local(x, dp):
            c = 0.5 * (x[0] + x[-1])
            p = (x[-1] - x[0]) / (len(x) - 1) if len(x) > 1 else 0.0
            return c + dc * np.array([-1.0, 0.0, 1.0]), np.maximum(p + dp * np.array([-1.0, 0.0, 1.0]), 0.0)

        cC, ppC = local(design.x_C, dpC)
        cJ, ppJ = local(design.x_J, dpJ)
        placC = fam(scenario.n_C, cC, ppC) or [design.x_C]
        placJ = fam(scenario.n_J, cJ, ppJ) or [design.x_J]
        d2, r2 = grid_search_baseline(scenario, epsilon, placC, placJ, power_pitch)
        if r2 > rate:
            design, rate = d2, r2
    return design, rate


def random_search_baseline(scenario: Scenario, epsilon, trials=100, rng_seed=0, min_accept_rate=1e-4):
    """Uniform feasible designs by rejection: positions uniform on the spacing polytope,
    (P_C, P_J_max, unused) ~ Dirichlet(1, 1, 1) P_max, radiation parameters uniform in their boxes.
    Returns (mean ACR, best DesignPoint, best ACR)."""
    if trials < 1:
        raise ParamOutOfRange("trials must be >= 1")
    rng = np.random.default_rng(int(rng_seed))
    rule = scenario.rate_rule()
    L, dx = scenario.geom.length, scenario.dx_min
    max_attempts = int(math.ceil(trials / min_accept_rate))
    rates, best = [], None
    attempts = 0
    while len(rates) < trials:
        attempts += 1
        if attempts > max_attempts:
            raise RejectionBudgetExceeded(f"acceptance rate below {min_accept_rate}")
        pc, pj, _ = rng.dirichlet([1.0, 1.0, 1.0]) * scenario.P_max
        d = DesignPoint(
            float(pc), float(pj),
            _box_radiation(rng, scenario.model, scenario.n_C), _box_radiation(rng, scenario.model, scenario.n_J),
            _sample_spacing(rng, scenario.n_C, L, dx), _sample_spacing(rng, scenario.n_J, L, dx),
        )
        A_C, A_J, bC, bJ = channel_gains(d, scenario.geom)
        if min_dep_from_gains(A_C, A_J, d.P_C, d.P_J_max, scenario.sigma_w_sq, scenario.grid_density)[1] < 1.0 - epsilon:
            continue
        rate = avg_covert_rate(LinkBudget(d.P_C * bC, d.P_J_max * bJ, scenario.sigma_b_sq), rule)
        rates.append(rate)
        if best is None or rate > best[1]:
            best = (d, rate)
    return float(np.mean(rates)), best[0], best[1]


def _box_radiation(rng, model, n):
    if model == "equal":
        return RadiationSpec("equal", n, rho=float(rng.uniform(RHO_FLOOR, 1.0)) / n)
    if model == "proportional":
        return RadiationSpec("proportional", n, delta_sq=float(_expit(rng.uniform(-LOGIT_BOX, LOGIT_BOX))))
    return RadiationSpec("general", n, delta=tuple(float(v) for v in _expit(rng.uniform(-LOGIT_BOX, LOGIT_BOX, n))))
