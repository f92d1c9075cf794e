"""Least-squares decay fits in log-log or semilog coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientData

MIN_SAMPLES = 8


@dataclass(frozen=True)
class DecaySeries:
    times: np.ndarray
    values: np.ndarray
    fit_kind: str
    slope: float
    intercept: float
    r2: float
    window: tuple[float, float]

    def to_dict(self) -> dict:
        return {"fit_kind": self.fit_kind, "slope": self.slope, "intercept": self.intercept,
                "r2": self.r2, "window": list(self.window), "n": int(self.times.size)}


def fit_decay(times, values, kind: str = "power", window=None) -> DecaySeries:
    """Fit log y = slope * X + intercept, X = log t (power) or t (exponential).

    Only samples with t inside ``window`` (inclusive) enter the fit; at least
    eight are needed and all of them must be positive.
    """
    if kind not in ("power", "exponential"):
        raise ValueError(f"unknown fit kind {kind!r}")
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-D of equal length")
    if window is None:
        window = (float(t.min()), float(t.max())) if t.size else (0.0, 0.0)
    lo, hi = map(float, window)
    m = (t >= lo * (1 - 1e-12)) & (t <= hi * (1 + 1e-12))
    t, y = t[m], y[m]
    if t.size < MIN_SAMPLES:
        raise InsufficientData(f"{t.size} samples in window {window}, need {MIN_SAMPLES}")
    if not np.all(y > 0) or not np.all(np.isfinite(y)):
        raise InsufficientData("fit needs finite positive values in the window")
    if kind == "power" and not np.all(t > 0):
        raise InsufficientData("power fit needs positive times")
    X = np.log(t) if kind == "power" else t
    Y = np.log(y)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return DecaySeries(t, y, kind, float(slope), float(intercept), r2, (lo, hi))
