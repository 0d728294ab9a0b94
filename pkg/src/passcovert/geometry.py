"""Node coordinates and line-of-sight channels for a dual-waveguide pinching-antenna array.

Waveguide C (covert) runs along y = -D and waveguide J (jamming) along y = +D,
both at height H and spanning x in [0, L]. Ground nodes have z = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDistance, LengthMismatch, OutOfWaveguide, ParamOutOfRange

SPEED_OF_LIGHT = 299_792_458.0
MIN_DISTANCE = 1e-9


def _frozen_array(values, ndim):
    arr = np.array(values, dtype=float)
    if ndim == 2 and arr.size == 0:
        arr = arr.reshape(0, 3)
    if arr.ndim != ndim or arr.shape[-1] != 3:
        raise ParamOutOfRange(f"expected {'a 3-vector' if ndim == 1 else 'an (M, 3) array'}, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemGeometry:
    length: float
    height: float
    offset: float
    wavelength: float
    n_eff: float
    bob: np.ndarray
    wardens: np.ndarray
    guided_wavelength: float | None = None
    eta: float = field(init=False)

    def __post_init__(self):
        if not self.length > 0:
            raise ParamOutOfRange(f"waveguide length must be > 0, got {self.length}")
        if not self.height >= 0:
            raise ParamOutOfRange(f"height must be >= 0, got {self.height}")
        if not self.offset >= 0:
            raise ParamOutOfRange(f"lateral offset must be >= 0, got {self.offset}")
        if not self.wavelength > 0:
            raise ParamOutOfRange(f"wavelength must be > 0, got {self.wavelength}")
        if not self.n_eff >= 1:
            raise ParamOutOfRange(f"effective index must be >= 1, got {self.n_eff}")
        lam_g = self.wavelength / self.n_eff
        if self.guided_wavelength is None:
            object.__setattr__(self, "guided_wavelength", lam_g)
        elif abs(self.guided_wavelength - lam_g) > 1e-12 * lam_g:
            raise ParamOutOfRange(
                f"guided wavelength {self.guided_wavelength} != wavelength / n_eff = {lam_g}"
            )
        bob = _frozen_array(self.bob, 1)
        wardens = _frozen_array(self.wardens, 2)
        if bob[2] != 0.0 or np.any(wardens[:, 2] != 0.0):
            raise ParamOutOfRange("ground nodes must have z = 0 exactly")
        object.__setattr__(self, "bob", bob)
        object.__setattr__(self, "wardens", wardens)
        object.__setattr__(self, "eta", self.wavelength**2 / (16.0 * np.pi**2))

    @classmethod
    def from_frequency(cls, carrier_frequency, **kwargs):
        return cls(wavelength=SPEED_OF_LIGHT / carrier_frequency, **kwargs)

    @property
    def n_wardens(self):
        return len(self.wardens)

    def with_wardens(self, wardens):
        return SystemGeometry(
            length=self.length, height=self.height, offset=self.offset,
            wavelength=self.wavelength, n_eff=self.n_eff, bob=self.bob, wardens=wardens,
        )


def pa_positions(x_coords, side, geom: SystemGeometry) -> np.ndarray:
    """Return the (N, 3) coordinates of PAs at ``x_coords`` on waveguide ``side`` ('C' or 'J')."""
    x = np.asarray(x_coords, dtype=float).reshape(-1)
    if np.any(x < 0) or np.any(x > geom.length):
        raise OutOfWaveguide(f"PA x-coordinates must lie in [0, {geom.length}], got {x.tolist()}")
    if side == "C":
        y = -geom.offset
    elif side == "J":
        y = geom.offset
    else:
        raise ValueError(f"side must be 'C' or 'J', got {side!r}")
    pts = np.empty((len(x), 3))
    pts[:, 0] = x
    pts[:, 1] = y
    pts[:, 2] = geom.height
    return pts


def distances(pa_pts, users) -> np.ndarray:
    """Euclidean distances, shape (U, N) for U users and N PAs."""
    pa = np.asarray(pa_pts, dtype=float).reshape(-1, 3)
    us = np.asarray(users, dtype=float).reshape(-1, 3)
    diff = us[:, None, :] - pa[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def freespace_channel(pa_pts, user, wavelength) -> np.ndarray:
    """LoS channel entries sqrt(eta) * exp(-j 2 pi d / lambda) / d for one user.

    ``user`` may also be an (U, 3) array, in which case the result is (U, N).
    """
    user = np.asarray(user, dtype=float)
    d = distances(pa_pts, user)
    if np.any(d < MIN_DISTANCE):
        raise DegenerateDistance("a PA coincides with the user position")
    eta = wavelength**2 / (16.0 * np.pi**2)
    h = np.sqrt(eta) * np.exp(-2j * np.pi / wavelength * d) / d
    return h[0] if user.ndim == 1 else h


def waveguide_phase(x_coords, guided_wavelength) -> np.ndarray:
    x = np.asarray(x_coords, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("PA coordinates must be finite")
    # exact reduction keeps |exp(.)| == 1 and full periods landing on 1+0j
    turns = np.mod(x / guided_wavelength, 1.0)
    return np.exp(-2j * np.pi * turns)


def effective_gain(h, rho, omega):
    """|sum_n sqrt(rho_n) h_n omega_n|^2, vectorised over leading axes of ``h``."""
    h = np.asarray(h)
    rho = np.asarray(rho, dtype=float)
    omega = np.asarray(omega)
    if h.shape[-1] != rho.shape[-1] or rho.shape[-1] != omega.shape[-1]:
        raise LengthMismatch(f"lengths differ: h {h.shape}, rho {rho.shape}, omega {omega.shape}")
    amp = h @ (np.sqrt(rho) * omega)
    return np.abs(amp) ** 2
