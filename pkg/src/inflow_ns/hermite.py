"""Piecewise quintic Hermite interpolation from values and two derivatives."""

from __future__ import annotations

import numpy as np


class QuinticHermite:
    """C^2 piecewise quintic through nodes with prescribed y, y', y''.

    ``y``, ``dy``, ``d2y`` have shape ``(..., n)``; evaluation returns shape
    ``(..., len(xq))``. Queries outside ``[x[0], x[-1]]`` are clamped to the
    end intervals (i.e. extrapolated by the end polynomials); callers are
    expected to handle the exterior themselves.
    """

    def __init__(self, x, y, dy, d2y):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ValueError("need at least two nodes")
        order = np.argsort(x)
        self.x = x[order]
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("nodes must be distinct")
        self.y = np.asarray(y, dtype=float)[..., order]
        self.dy = np.asarray(dy, dtype=float)[..., order]
        self.d2y = np.asarray(d2y, dtype=float)[..., order]

    def __call__(self, xq, nu: int = 0):
        """Evaluate the interpolant (``nu=0``) or its first derivative (``nu=1``)."""
        xq = np.asarray(xq, dtype=float)
        i = np.clip(np.searchsorted(self.x, xq, side="right") - 1, 0, self.x.size - 2)
        x0 = self.x[i]
        h = self.x[i + 1] - x0
        t = (xq - x0) / h
        t2 = t * t
        t3 = t2 * t
        t4 = t3 * t
        t5 = t4 * t
        y, dy, d2y = self.y, self.dy, self.d2y
        if nu == 1:
            h0 = (-30 * t2 + 60 * t3 - 30 * t4) / h
            h1 = (1 - 18 * t2 + 32 * t3 - 15 * t4) / h
            h2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4) / h
            h3 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4) / h
            h4 = (-12 * t2 + 28 * t3 - 15 * t4) / h
            h5 = -h0
        elif nu == 0:
            h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
            h1 = t - 6 * t3 + 8 * t4 - 3 * t5
            h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5)
            h3 = 0.5 * (t3 - 2 * t4 + t5)
            h4 = -4 * t3 + 7 * t4 - 3 * t5
            h5 = 10 * t3 - 15 * t4 + 6 * t5
        else:
            raise ValueError("nu must be 0 or 1")
        return (
            y[..., i] * h0
            + h * dy[..., i] * h1
            + h * h * d2y[..., i] * h2
            + h * h * d2y[..., i + 1] * h3
            + h * dy[..., i + 1] * h4
            + y[..., i + 1] * h5
        )
