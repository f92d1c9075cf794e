"""Vectorised adaptive Gauss-Kronrod (7-15) quadrature over a panel set.

Several integrands sharing one expensive evaluation are integrated at
once: ``fun(x)`` returns an array of shape ``(m, len(x))``.  Panels whose
Kronrod-Gauss difference exceeds the share of the tolerance of any
integrand are bisected.
"""

from __future__ import annotations

import numpy as np

_XK = np.array([
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245, 0.405845151377397166906606412076961,
    0.586087235467691130294144845693013, 0.741531185599394439863864773280788,
    0.864864423359769072789712788640926, 0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
# Gauss nodes are the odd-indexed Kronrod nodes
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
    0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]


CHUNK = 4096  # panels per call of the integrand


def _panel_sums(fun, a, b):
    if a.size > CHUNK:
        parts = [_panel_sums(fun, a[i:i + CHUNK], b[i:i + CHUNK]) for i in range(0, a.size, CHUNK)]
        return (np.concatenate([p[0] for p in parts], axis=1),
                np.concatenate([p[1] for p in parts], axis=1))
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    x = (mid[:, None] + half[:, None] * _XK[None, :]).ravel()
    fx = np.asarray(fun(x), dtype=float)
    m = fx.shape[0]
    fx = fx.reshape(m, a.size, 15)
    k = half[None, :] * (fx @ _WK)
    gs = half[None, :] * (fx @ _WG)
    return k, np.abs(k - gs)


def integrate_panels(fun, edges, rtol: float = 1e-10, atol: float = 1e-300,
                     max_rounds: int = 40, max_panels: int = 2_000_000):
    """Integrate every row of ``fun`` over the union of panels ``edges``.

    Returns ``(values, errors)``, each of shape ``(m,)``.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    k, e = _panel_sums(fun, a, b)
    for _ in range(max_rounds):
        total = k.sum(axis=1)
        tol = np.maximum(rtol * np.abs(total), atol)
        if np.all(e.sum(axis=1) <= tol):
            break
        # per row, split the largest-error panels until what is left fits
        # in half the budget
        flag = np.zeros(a.size, dtype=bool)
        for r in np.flatnonzero(e.sum(axis=1) > tol):
            order = np.argsort(e[r])
            rest = np.cumsum(e[r, order])
            flag[order[rest > 0.5 * tol[r]]] = True
        if not np.any(flag) or a.size + flag.sum() > max_panels:
            break
        am, bm = a[flag], b[flag]
        cm = 0.5 * (am + bm)
        na = np.concatenate([am, cm])
        nb = np.concatenate([cm, bm])
        kn, en = _panel_sums(fun, na, nb)
        keep = ~flag
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        k = np.concatenate([k[:, keep], kn], axis=1)
        e = np.concatenate([e[:, keep], en], axis=1)
    return k.sum(axis=1), e.sum(axis=1)


def panel_edges(x_far: float, width: float = 1.0, x_inf: float = 1e15, ratio: float = 1.5,
                breaks=()):
    """Uniform panels on [0, x_far] followed by geometric panels out to ``x_inf``.

    ``breaks`` are extra edges, typically points where an integrand is only
    piecewise smooth.
    """
    n = max(1, int(np.ceil(x_far / width)))
    dense = np.linspace(0.0, x_far, n + 1)
    k = int(np.ceil(np.log(x_inf / x_far) / np.log(ratio)))
    tail = x_far * ratio ** np.arange(1, k + 1)
    edges = np.concatenate([dense, tail, [x for x in breaks if 0 < x < x_inf]])
    return np.unique(edges)
