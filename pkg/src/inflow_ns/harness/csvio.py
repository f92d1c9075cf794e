"""CSV emission with round-trip float formatting and fixed headers."""

from __future__ import annotations

import csv
import json
import os

import numpy as np

INTERACTIONS_HEADER = ["t"] + [f"I{k}" for k in range(1, 13)] + ["G_L1", "H_L1", "G_L2", "H_L2"]
NORMS_HEADER = ["t", "sup_phi", "sup_psi", "sup_theta", "l2", "h1", "energy"]
PROFILES_HEADER = ["t", "xi", "v", "u", "theta", "V", "U", "Theta", "phi", "psi", "vartheta"]


def fmt(x) -> str:
    """Shortest decimal that reads back to the same double."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_rows(path, header, rows) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def read_rows(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(x) for x in row] for row in r]
    return header, np.array(rows) if rows else np.zeros((0, len(header)))


def write_json(path, obj) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def profile_rows(state, field):
    """Rows of profiles.csv for one solver state and its superposition field."""
    t = state.t
    for k in range(field.xi.size):
        yield (t, field.xi[k], state.v[k], state.u[k], state.theta[k], field.V[k], field.U[k],
               field.Theta[k], state.v[k] - field.V[k], state.u[k] - field.U[k],
               state.theta[k] - field.Theta[k])
