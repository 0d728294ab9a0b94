"""Per-PA radiated-power fractions under the general, proportional and equal laws."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParamOutOfRange

MODELS = ("general", "proportional", "equal")


def fractions_general(delta) -> np.ndarray:
    """rho_n = delta_n^2 * prod_{i<n} (1 - delta_i^2) for coupling strengths ``delta``."""
    d = np.asarray(delta, dtype=float).reshape(-1)
    if np.any(~(d > 0)) or np.any(~(d < 1)):
        raise ParamOutOfRange(f"coupling strengths must lie in (0, 1), got {d.tolist()}")
    return _general(d)


def _general(d):
    d2 = d * d
    remaining = np.concatenate(([1.0], np.cumprod(1.0 - d2)[:-1]))
    return d2 * remaining


def fractions_proportional(delta_sq, n) -> np.ndarray:
    if not 0 < delta_sq < 1:
        raise ParamOutOfRange(f"delta^2 must lie in (0, 1), got {delta_sq}")
    if n < 1:
        raise ParamOutOfRange(f"PA count must be >= 1, got {n}")
    return delta_sq * (1.0 - delta_sq) ** np.arange(n)


def fractions_equal(rho, n) -> np.ndarray:
    if n < 1:
        raise ParamOutOfRange(f"PA count must be >= 1, got {n}")
    if not 0 < rho <= 1.0 / n:
        raise ParamOutOfRange(f"equal fraction must lie in (0, 1/{n}], got {rho}")
    return np.full(n, float(rho))


def residual_power(fractions) -> float:
    """Fraction of the injected power that leaves the far end of the guide (diagnostic only)."""
    return float(max(0.0, 1.0 - np.sum(fractions)))


@dataclass(frozen=True)
class RadiationSpec:
    model: str
    n: int
    delta: tuple | None = None
    delta_sq: float | None = None
    rho: float | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ParamOutOfRange(f"unknown radiation model {self.model!r}; expected one of {MODELS}")
        if self.model == "general":
            if self.delta is None or len(self.delta) != self.n:
                raise ParamOutOfRange(f"general model needs {self.n} coupling strengths")
            object.__setattr__(self, "delta", tuple(float(v) for v in self.delta))
        elif self.model == "proportional" and self.delta_sq is None:
            raise ParamOutOfRange("proportional model needs delta_sq")
        elif self.model == "equal" and self.rho is None:
            raise ParamOutOfRange("equal model needs rho")
        self.fractions()  # validates ranges

    def fractions(self) -> np.ndarray:
        if self.model == "general":
            return fractions_general(self.delta)
        if self.model == "proportional":
            return fractions_proportional(self.delta_sq, self.n)
        return fractions_equal(self.rho, self.n)

    @classmethod
    def default(cls, model, n):
        """Defaults used when a scenario names a model without parameters.

        equal radiates everything (rho = 1/N); proportional taps half the
        remaining power per PA; general uses a rising taper whose last PA
        takes half of what is left.
        """
        if model == "equal":
            return cls("equal", n, rho=1.0 / n)
        if model == "proportional":
            return cls("proportional", n, delta_sq=0.5)
        taper = np.sqrt(np.linspace(0.2, 0.5, n)) if n > 1 else np.array([np.sqrt(0.5)])
        return cls("general", n, delta=tuple(taper))

    def params(self) -> np.ndarray:
        if self.model == "general":
            return np.array(self.delta)
        if self.model == "proportional":
            return np.array([self.delta_sq])
        return np.array([self.rho])

    def to_dict(self):
        out = {"model": self.model}
        if self.model == "general":
            out["delta"] = list(self.delta)
        elif self.model == "proportional":
            out["delta_sq"] = self.delta_sq
        else:
            out["rho"] = self.rho
        return out
