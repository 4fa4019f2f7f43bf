"""Backend selection and problem packing for the quotient minimizer.

Two interchangeable kernel backends exist: a jitted one (numba) and a
vectorized pure-numpy one.  The ANISO_BACKEND environment variable
picks one at import time ("numba" or "numpy"); unset, the jitted
backend is used when importable and numpy otherwise.
"""

from __future__ import annotations

import importlib
import os

import numpy as np

from ..errors import PreconditionError

_CACHE: dict = {}


def load_backend(name: str | None = None):
    """Import and return a kernel backend module by name.

    With name None the ANISO_BACKEND environment variable decides,
    falling back to numba-if-available.
    """
    if name is None:
        name = os.environ.get("ANISO_BACKEND", "")
    name = name.strip().lower()
    if name not in ("", "numba", "numpy"):
        raise PreconditionError(
            f"unknown backend {name!r}: expected 'numba' or 'numpy'")
    if name == "":
        try:
            importlib.import_module("numba")
            name = "numba"
        except ImportError:
            name = "numpy"
    if name not in _CACHE:
        _CACHE[name] = importlib.import_module(f"._{name}", __package__)
    return _CACHE[name]


_impl = load_backend()
BACKEND = _impl.NAME
num_den = _impl.num_den
quotient_and_grad = _impl.quotient_and_grad
descent = _impl.descent


def make_problem(n: int, a: float, b: float, p: float, kappa: float,
                 weight_bps, weight_vals):
    """Pack a quotient problem into the flat arrays the kernels take.

    Cells are the uniform n-cell grid refined by the weight breakpoints;
    each cell records its host grid interval, its endpoints as fractions
    of that interval, its length, and its weight value.
    """
    h = 1.0 / n
    nodes = np.linspace(0.0, 1.0, n + 1)
    wb = np.asarray(weight_bps, dtype=np.float64)
    ts = np.union1d(nodes, wb)
    tl, tr = ts[:-1], ts[1:]
    mid = 0.5 * (tl + tr)
    widx = np.clip(np.searchsorted(wb, mid, side="right") - 1,
                   0, len(weight_vals) - 1)
    w = np.asarray(weight_vals, dtype=np.float64)[widx]
    node = np.clip(np.searchsorted(nodes, mid, side="right") - 1,
                   0, n - 1).astype(np.int64)
    # roundoff can push these a few ulp outside [0, 1], and a fraction
    # beyond the interval turns a nonnegative candidate into a negative
    # power base inside the kernels
    ul = np.clip((tl - nodes[node]) / h, 0.0, 1.0)
    ur = np.clip((tr - nodes[node]) / h, 0.0, 1.0)
    return (h, a ** p, b ** p, float(p), float(kappa), node, ul, ur,
            tr - tl, w)


def starts_for(n: int, seed: int):
    """Multistart profiles: five spread hats plus one seeded random profile.

    The random profile is drawn on a fixed 17-node lattice and then
    interpolated onto the grid, so refining the grid does not change
    the shape being started from.
    """
    nodes = np.linspace(0.0, 1.0, n + 1)
    out = [np.maximum(0.0, 1.0 - np.abs(nodes - c) / 0.3)
           for c in (0.1, 0.3, 0.5, 0.7, 0.9)]
    rng = np.random.default_rng((int(seed), 0))
    lattice = np.linspace(0.0, 1.0, 17)
    out.append(np.interp(nodes, lattice, rng.uniform(0.0, 1.0, 17)))
    return out
