"""Ideal polytropic gas: equation of state, characteristic speeds, sonic regions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DomainError

#: |M - 1| below this counts as transonic.
TOL_MACH = 1e-9


@dataclass(frozen=True)
class GasParams:
    """Physical constants of the gas.

    ``A`` only fixes the origin of the entropy scale and cancels in every
    entropy difference.
    """

    R: float = 1.0
    gamma: float = 1.4
    mu: float = 1.0
    kappa: float = 1.0
    A: float = 1.0

    def __post_init__(self):
        for name in ("R", "mu", "kappa", "A"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.gamma > 1:
            raise DomainError(f"gamma must exceed 1, got {self.gamma!r}")

    def to_dict(self) -> dict:
        return {"R": self.R, "gamma": self.gamma, "mu": self.mu, "kappa": self.kappa, "A": self.A}


@dataclass(frozen=True)
class ThermoState:
    """A point (v, u, theta) of phase space.

    Validity (v > 0, theta > 0) is checked by the operations, not here, so that
    out-of-domain states can be represented and rejected explicitly.
    """

    v: float
    u: float
    theta: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.v, self.u, self.theta)

    def to_dict(self) -> dict:
        return {"v": self.v, "u": self.u, "theta": self.theta}

    @classmethod
    def from_seq(cls, seq) -> "ThermoState":
        v, u, theta = (float(x) for x in seq)
        return cls(v, u, theta)


class EOSValues(NamedTuple):
    p: float
    e: float
    s_entropy: float


class Regime(str, Enum):
    SUBSONIC = "subsonic"
    TRANSONIC = "transonic"
    SUPERSONIC = "supersonic"


@dataclass(frozen=True)
class SonicRegion:
    regime: Regime
    positive: bool
    mach: float

    @property
    def tag(self) -> str:
        return f"{self.regime.value}{'+' if self.positive else '-'}"


def check_state(s: ThermoState) -> None:
    if not (s.v > 0 and s.theta > 0) or not all(map(math.isfinite, s.as_tuple())):
        raise DomainError(f"invalid state {s}: need v > 0, theta > 0")


def pressure(v, theta, g: GasParams):
    return g.R * theta / v


def entropy(v, theta, g: GasParams):
    """Entropy from ``p = A v^-gamma exp((gamma-1) s / R)``."""
    p = g.R * theta / v
    return g.R / (g.gamma - 1.0) * np.log(p * v**g.gamma / g.A)


def sound_speed(theta, g: GasParams):
    return np.sqrt(g.R * g.gamma * theta)


def eval_eos(s: ThermoState, g: GasParams) -> EOSValues:
    check_state(s)
    p = g.R * s.theta / s.v
    e = g.R * s.theta / (g.gamma - 1.0)
    return EOSValues(p, e, float(entropy(s.v, s.theta, g)))


def state_from_entropy(p: float, s_entropy: float, u: float, g: GasParams) -> ThermoState:
    """Invert the equation of state: (p, s) -> (v, theta)."""
    if not p > 0:
        raise DomainError("pressure must be positive")
    v = (g.A * math.exp((g.gamma - 1.0) * s_entropy / g.R) / p) ** (1.0 / g.gamma)
    return ThermoState(v, u, p * v / g.R)


def char_speeds(s: ThermoState, g: GasParams) -> tuple[float, float, float]:
    """Characteristic speeds (lambda_1, lambda_2, lambda_3) in Lagrangian coordinates."""
    check_state(s)
    c = math.sqrt(g.R * g.gamma * s.theta)
    return (-c / s.v, 0.0, c / s.v)


def lam(i: int, v, theta, g: GasParams):
    """lambda_i(v, theta) for i in {1, 3}; vectorised."""
    c = np.sqrt(g.R * g.gamma * theta)
    if i == 1:
        return -c / v
    if i == 3:
        return c / v
    raise ValueError(f"family must be 1 or 3, got {i}")


def mach(s: ThermoState, g: GasParams) -> float:
    check_state(s)
    return abs(s.u) / math.sqrt(g.R * g.gamma * s.theta)


def classify(s: ThermoState, g: GasParams, tol: float = TOL_MACH) -> SonicRegion:
    m = mach(s, g)
    if abs(m - 1.0) <= tol:
        regime = Regime.TRANSONIC
    elif m < 1.0:
        regime = Regime.SUBSONIC
    else:
        regime = Regime.SUPERSONIC
    return SonicRegion(regime, s.u > 0, m)
