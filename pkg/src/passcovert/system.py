"""Scenario and design-point containers, and the maps from a design to warden
profiles, Bob's link budget and the covertness value g = min_tau DEP."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import InfeasibleGeometry, ParamOutOfRange
from .geometry import SystemGeometry, effective_gain, freespace_channel, pa_positions, waveguide_phase
from .local_detect import make_profile
from .fusion import majority_threshold
from .piecewise_dep import GOLDEN_RTOL
from .radiation import RadiationSpec
from .rate import RULES, make_rule


@dataclass(frozen=True)
class Scenario:
    geom: SystemGeometry
    P_max: float
    sigma_w_sq: float
    sigma_b_sq: float
    n_C: int = 4
    n_J: int = 4
    model: str = "equal"
    dx_min: float | None = None
    quad_order: int = 32
    grid_density: int = 64
    quad_rule: str = "tanh_sinh"

    def __post_init__(self):
        if not self.P_max > 0:
            raise ParamOutOfRange(f"P_max must be > 0, got {self.P_max}")
        if not (self.sigma_w_sq > 0 and self.sigma_b_sq > 0):
            raise ParamOutOfRange("noise powers must be > 0")
        if self.quad_rule not in RULES:
            raise ParamOutOfRange(f"unknown quadrature rule {self.quad_rule!r}")
        if self.n_C < 1 or self.n_J < 1:
            raise ParamOutOfRange("each waveguide needs at least one PA")
        if self.dx_min is None:
            object.__setattr__(self, "dx_min", 0.15 * self.geom.guided_wavelength)
        for n in (self.n_C, self.n_J):
            if (n - 1) * self.dx_min > self.geom.length:
                raise InfeasibleGeometry(
                    f"{n} PAs at spacing {self.dx_min} do not fit on a {self.geom.length} m guide"
                )

    def rate_rule(self):
        return make_rule(self.quad_rule, self.quad_order)

    @property
    def M(self):
        return self.geom.n_wardens

    def with_wardens(self, wardens):
        return replace(self, geom=self.geom.with_wardens(wardens))


@dataclass(frozen=True)
class DesignPoint:
    P_C: float
    P_J_max: float
    radiation_C: RadiationSpec
    radiation_J: RadiationSpec
    x_C: np.ndarray = field(compare=False)
    x_J: np.ndarray = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "x_C", np.asarray(self.x_C, dtype=float).copy())
        object.__setattr__(self, "x_J", np.asarray(self.x_J, dtype=float).copy())

    def violations(self, scenario: Scenario, tol=1e-12):
        """Human-readable list of violated power/placement constraints (empty if feasible)."""
        out = []
        if self.P_C < -tol or self.P_J_max < -tol:
            out.append("negative power")
        if self.P_C + self.P_J_max > scenario.P_max + tol:
            out.append("power budget exceeded")
        L = scenario.geom.length
        for name, x in (("x_C", self.x_C), ("x_J", self.x_J)):
            if np.any(x < -tol) or np.any(x > L + tol):
                out.append(f"{name} outside [0, L]")
            if len(x) > 1 and np.min(np.diff(x)) < scenario.dx_min - 1e-9 * scenario.dx_min:
                out.append(f"{name} spacing below minimum")
        return out

    def to_dict(self):
        return {
            "P_C": float(self.P_C), "P_J_max": float(self.P_J_max),
            "radiation_C": self.radiation_C.to_dict(), "radiation_J": self.radiation_J.to_dict(),
            "x_C": [float(v) for v in self.x_C], "x_J": [float(v) for v in self.x_J],
        }


def waveguide_gains(x, side, rho, geom: SystemGeometry, users):
    """Effective gains |sum sqrt(rho) h omega|^2 from one waveguide to each row of ``users``."""
    pts = pa_positions(x, side, geom)
    h = freespace_channel(pts, np.atleast_2d(users), geom.wavelength)
    omega = waveguide_phase(x, geom.guided_wavelength)
    return effective_gain(h, rho, omega)


def raw_waveguide_gains(x, side, rho, geom: SystemGeometry, users):
    """waveguide_gains without range checks on x or rho (finite-difference probes may step
    just outside the feasible box)."""
    x = np.asarray(x, dtype=float)
    y = -geom.offset if side == "C" else geom.offset
    pts = np.column_stack([x, np.full(len(x), y), np.full(len(x), geom.height)])
    h = freespace_channel(pts, np.atleast_2d(users), geom.wavelength)
    return effective_gain(h, rho, waveguide_phase(x, geom.guided_wavelength))


def channel_gains(design: DesignPoint, geom: SystemGeometry):
    """Unit-power gains: (A_C per warden, A_J per warden, Bob's C gain, Bob's J gain)."""
    rho_C = design.radiation_C.fractions()
    rho_J = design.radiation_J.fractions()
    users = np.vstack([geom.wardens, geom.bob[None, :]])
    gc = waveguide_gains(design.x_C, "C", rho_C, geom, users)
    gj = waveguide_gains(design.x_J, "J", rho_J, geom, users)
    return gc[:-1], gj[:-1], float(gc[-1]), float(gj[-1])


def breakpoint_arrays(A_C, A_J, P_C, P_J_max, sigma_w_sq):
    """Kernel-ready (sigma, alpha1, alpha2, alpha3, span) with the same arithmetic as make_profile."""
    A_C = np.asarray(A_C, dtype=float)
    A_J = np.asarray(A_J, dtype=float)
    span = P_J_max * A_J
    sigma = np.full(len(A_J), float(sigma_w_sq))
    a1 = sigma + span
    a2 = sigma + P_C * A_C
    a3 = a1 + a2 - sigma
    return sigma, a1, a2, a3, span


def min_dep_from_gains(A_C, A_J, P_C, P_J_max, sigma_w_sq, grid_density=64):
    """(tau_star, g) straight from gains, skipping profile objects."""
    T = majority_threshold(len(A_J))
    arrs = breakpoint_arrays(A_C, A_J, P_C, P_J_max, sigma_w_sq)
    return _kernels.min_dep_search(*arrs, T, int(grid_density), GOLDEN_RTOL)


def profiles_from_gains(A_C, A_J, P_C, P_J_max, sigma_w_sq):
    return [make_profile(ac, aj, sigma_w_sq, P_C, P_J_max, allow_degenerate=True) for ac, aj in zip(A_C, A_J)]


def warden_profiles(design: DesignPoint, scenario: Scenario):
    A_C, A_J, _, _ = channel_gains(design, scenario.geom)
    return profiles_from_gains(A_C, A_J, design.P_C, design.P_J_max, scenario.sigma_w_sq)


def covertness(design: DesignPoint, scenario: Scenario):
    """(tau_star, g) where g = min over tau of the system DEP; covert iff g >= 1 - epsilon."""
    A_C, A_J, _, _ = channel_gains(design, scenario.geom)
    return min_dep_from_gains(A_C, A_J, design.P_C, design.P_J_max, scenario.sigma_w_sq, scenario.grid_density)


def min_dep_from_ratio(A_C, A_J, ratio, sigma_w_sq, grid_density=64):
    """min_tau DEP as a function of P_C / P_J_max alone (the absolute scale cancels)."""
    return min_dep_from_gains(A_C, A_J, ratio, 1.0, sigma_w_sq, grid_density)[1]
