"""Independent cross-checks for the exact machinery.

Everything in this module recomputes a quantity by brute force, on
purpose through different code paths than the exact implementations:
sampling plus sorting for rearrangements, midpoint quadrature on a
refined grid for energies, central differences for gradients.  Tests
freeze values produced here against the exact routines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .pwa import PiecewiseAffine, AnisotropicNorm, WeightFunction


@dataclass(frozen=True)
class OracleConfig:
    """Resolution knobs for the brute-force checks."""

    samples: int = 100000
    quadrature_points: int = 65536
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.samples < 1000:
            raise PreconditionError("need at least 1000 samples")
        if self.quadrature_points < 256:
            raise PreconditionError("need at least 256 quadrature points")
        if not (np.isfinite(self.fd_step) and self.fd_step > 0.0):
            raise PreconditionError("finite-difference step must be positive")


def _sample_values(f: PiecewiseAffine, t):
    # np.interp on the raw knot arrays, deliberately not pwa.evaluate
    return np.interp(t, f.breakpoints, f.values)


def sampled_rearrangement(f: PiecewiseAffine, cfg: OracleConfig = OracleConfig(),
                          decreasing: bool = True):
    """Step-function rearrangement from midpoint samples.

    Samples f at n cell midpoints, sorts, and returns the sorted value
    per cell.  The result approximates the exact rearrangement within
    a few Lipschitz constants divided by n in sup distance.
    """
    n = cfg.samples
    t = (np.arange(n) + 0.5) / n
    vals = np.sort(_sample_values(f, t))
    if decreasing:
        vals = vals[::-1]
    return vals.copy()


def step_sup_distance(step_values, g: PiecewiseAffine) -> float:
    """Sup distance between a uniform step function and g at cell midpoints."""
    n = step_values.size
    t = (np.arange(n) + 0.5) / n
    return float(np.max(np.abs(step_values - _sample_values(g, t))))


def quadrature_energy(f: PiecewiseAffine, norm: AnisotropicNorm,
                      cfg: OracleConfig = OracleConfig()) -> float:
    """Midpoint-rule slope cost on a uniform grid refined by f's knots.

    Slopes are recovered per cell from two interior samples, so jump
    knots never contaminate a neighboring cell.  Since the slope cost
    is constant on every refined cell, the midpoint rule is exact up
    to rounding and must agree with the closed-form energy.
    """
    edges = np.union1d(np.linspace(0.0, 1.0, cfg.quadrature_points + 1),
                       f.breakpoints)
    lens = np.diff(edges)
    keep = lens > 0.0
    lo = edges[:-1][keep]
    ln = lens[keep]
    vl = _sample_values(f, lo + 0.25 * ln)
    vr = _sample_values(f, lo + 0.75 * ln)
    slopes = (vr - vl) / (0.5 * ln)
    return float(np.sum(norm.slope_cost(slopes) * ln))


def quadrature_weighted_p(f: PiecewiseAffine, m: WeightFunction, p: float,
                          cfg: OracleConfig = OracleConfig()) -> float:
    """Quadrature value of the weighted p-integral of a nonnegative f.

    Five-point Gauss rule per refined cell; exact for p = 2 and 3,
    accurate to roughly 1e-10 for fractional p at these resolutions.
    """
    edges = np.union1d(np.union1d(np.linspace(0.0, 1.0, cfg.quadrature_points + 1),
                                  f.breakpoints), m.breakpoints)
    lens = np.diff(edges)
    keep = lens > 0.0
    lo = edges[:-1][keep]
    ln = lens[keep]
    nodes, weights = np.polynomial.legendre.leggauss(5)
    total = 0.0
    wmid = m.piece_values_at(lo + 0.5 * ln)
    for x, w in zip(nodes, weights):
        t = lo + (0.5 + 0.5 * x) * ln
        v = np.maximum(_sample_values(f, t), 0.0)
        total += 0.5 * w * float(np.sum(wmid * ln * v ** p))
    return total


def fd_gradient(objective, point, cfg: OracleConfig = OracleConfig()):
    """Central-difference gradient of a scalar objective.

    Components where a probe evaluation fails or returns a non-finite
    value are reported as NaN rather than raising.
    """
    x = np.asarray(point, dtype=np.float64).copy()
    h = cfg.fd_step
    out = np.empty_like(x)
    for i in range(x.size):
        xi = x[i]
        try:
            x[i] = xi + h
            up = float(objective(x))
            x[i] = xi - h
            dn = float(objective(x))
            g = (up - dn) / (2.0 * h)
            out[i] = g if np.isfinite(g) else np.nan
        except Exception:
            out[i] = np.nan
        finally:
            x[i] = xi
    return out
