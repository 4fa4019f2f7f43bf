"""Level-set bookkeeping and exact monotone rearrangements.

A piecewise-affine function is sliced into bands between consecutive
critical values (the clustered breakpoint values).  Inside a band the
level sets are a fixed number of transversal crossings, alternating in
direction; those crossing branches drive everything else: the
distribution function, the exact rearrangements, and the per-band
inequality bookkeeping downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BandBoundaryError, PreconditionError, VerificationFailure
from .pwa import MIN_GAP, PiecewiseAffine, WeightFunction, _assemble, reverse

CLUSTER_TOL = 1e-12


# ---------------------------------------------------------------------------
# level-set measures
# ---------------------------------------------------------------------------

def superlevel_measure(f: PiecewiseAffine, lam: float, strict: bool = True) -> float:
    """Exact measure of {f > lam} (strict) or {f >= lam}."""
    bp, vv = f.breakpoints, f.values
    total = 0.0
    for i in range(bp.size - 1):
        dt = bp[i + 1] - bp[i]
        if dt <= 0.0:
            continue
        v0, v1 = vv[i], vv[i + 1]
        if strict:
            in0, in1 = v0 > lam, v1 > lam
        else:
            in0, in1 = v0 >= lam, v1 >= lam
        if in0 and in1:
            total += dt
        elif in0 or in1:
            # one endpoint above, one below: the piece crosses lam once
            tau = (lam - v0) / (v1 - v0)
            total += dt * (tau if in0 else 1.0 - tau)
    return total


def critical_values(f: PiecewiseAffine, tol: float = CLUSTER_TOL):
    """Sorted distinct breakpoint values, clustered within tol.

    Each cluster is represented by its smallest member.  The first and
    last entries are the global min and max of f.
    """
    if tol < 0.0:
        raise PreconditionError("tolerance must be nonnegative")
    vals = np.sort(f.values)
    reps = [float(vals[0])]
    for v in vals[1:]:
        if v - reps[-1] > tol:
            reps.append(float(v))
    return np.array(reps)


# ---------------------------------------------------------------------------
# distribution function
# ---------------------------------------------------------------------------

class DistributionFunction:
    """The map lam -> |{f > lam}| for a piecewise-affine f.

    Stored as knot pairs (level, measure) with the level repeated where
    the measure jumps (a plateau of f).  Affine between knots, right
    continuous at jumps, 1 below the minimum and 0 at and above the
    maximum.
    """

    __slots__ = ("levels", "measures")

    def __init__(self, levels, measures):
        lv = np.array(levels, dtype=np.float64)
        mu = np.array(measures, dtype=np.float64)
        if lv.size != mu.size or lv.size < 2:
            raise PreconditionError("need matching level and measure knots")
        if np.any(np.diff(lv) < 0.0):
            raise PreconditionError("levels must be nondecreasing")
        if np.any(np.diff(mu) > 1e-12):
            raise PreconditionError("measures must be nonincreasing")
        lv.setflags(write=False)
        mu.setflags(write=False)
        self.levels = lv
        self.measures = mu

    def __call__(self, lam):
        lam_arr = np.asarray(lam, dtype=np.float64)
        lv, mu = self.levels, self.measures
        idx = np.searchsorted(lv, lam_arr, side="right") - 1
        below = idx < 0
        above = idx >= lv.size - 1
        idx = np.clip(idx, 0, lv.size - 2)
        t0 = lv[idx]
        dt = lv[idx + 1] - t0
        w = np.where(dt > 0.0, (lam_arr - t0) / np.where(dt > 0.0, dt, 1.0), 0.0)
        w = np.clip(w, 0.0, 1.0)
        out = mu[idx] * (1.0 - w) + mu[idx + 1] * w
        out = np.where(below | (lam_arr < lv[0]), 1.0, out)
        out = np.where(above | (lam_arr >= lv[-1]), mu[-1], out)
        return float(out) if out.ndim == 0 else out


def distribution(f: PiecewiseAffine) -> DistributionFunction:
    """Exact distribution function of f, with plateau jumps as repeats."""
    crit = critical_values(f)
    levels = []
    measures = []
    for c in crit:
        weak = superlevel_measure(f, c, strict=False)
        strict_m = superlevel_measure(f, c, strict=True)
        levels.append(c)
        measures.append(weak)
        if weak - strict_m > 0.0:
            levels.append(c)
            measures.append(strict_m)
    # the left knot of the minimum must carry full measure
    measures[0] = 1.0
    return DistributionFunction(levels, measures)


# ---------------------------------------------------------------------------
# branches and bands
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Branch:
    """One transversal crossing of a level: where, how steep, which way."""

    segment_index: int
    rho: float
    slope: float
    sign: int


@dataclass(frozen=True)
class Band:
    """Levels (lo, hi) between consecutive critical values.

    branches samples the crossing set at the band midpoint; the branch
    count and the sign pattern are constant across the band interior.
    preimage_measure is |{lo < f < hi}| and image_measure is the length
    of the interval the band occupies in the rearrangement; the two are
    equal by equimeasurability.
    """

    lo: float
    hi: float
    branches: tuple
    count: int
    orientation: str
    preimage_measure: float
    image_measure: float

    @property
    def height(self) -> float:
        return self.hi - self.lo

    @property
    def first_sign(self) -> int:
        return self.branches[0].sign if self.branches else 0


def level_preimages(f: PiecewiseAffine, lam: float):
    """Crossings of level lam, left to right, with slopes and directions.

    lam must avoid every critical value by more than the cluster
    tolerance; exactly-critical levels raise BandBoundaryError.  Levels
    outside the value range have no crossings and return an empty list.
    """
    crit = critical_values(f)
    if np.any(np.abs(crit - lam) <= CLUSTER_TOL):
        raise BandBoundaryError(
            f"level {lam!r} sits on a band boundary; query strictly inside a band")
    if lam < crit[0] or lam > crit[-1]:
        return []
    bp, vv = f.breakpoints, f.values
    out = []
    for i in range(bp.size - 1):
        dt = bp[i + 1] - bp[i]
        if dt <= 0.0:
            continue
        v0, v1 = vv[i], vv[i + 1]
        if not (min(v0, v1) < lam < max(v0, v1)):
            continue
        slope = (v1 - v0) / dt
        tau = bp[i] + (lam - v0) / slope
        out.append(Branch(i, float(tau), float(slope), 1 if slope > 0 else -1))
    out.sort(key=lambda br: br.rho)
    return out


def band_decomposition(f: PiecewiseAffine):
    """All bands of f, bottom to top, with verified structure.

    Verifies on each band: crossing directions alternate, crossings are
    strictly ordered, bands lying outside the boundary-value range have
    an even crossing count, and the preimage measure computed from the
    level-set geometry matches the measure from the crossing slopes.
    """
    crit = critical_values(f)
    u0, u1 = float(f.values[0]), float(f.values[-1])
    lo_bd, hi_bd = min(u0, u1), max(u0, u1)
    bands = []
    for lo, hi in zip(crit[:-1], crit[1:]):
        mid = 0.5 * (lo + hi)
        branches = level_preimages(f, mid)
        if not branches:
            raise VerificationFailure(
                f"band ({lo}, {hi}) inside the value range has no crossings")
        first = branches[0].sign
        for j, br in enumerate(branches):
            if br.sign != first * (-1) ** j:
                raise VerificationFailure("crossing directions must alternate")
        for b0, b1 in zip(branches[:-1], branches[1:]):
            if not b0.rho < b1.rho:
                raise VerificationFailure("crossings must be strictly ordered")
        outside = (lo >= hi_bd - CLUSTER_TOL) or (hi <= lo_bd + CLUSTER_TOL)
        if outside and len(branches) % 2 != 0:
            raise VerificationFailure(
                "bands outside the boundary range must have an even crossing count")
        h = hi - lo
        from_slopes = h * sum(1.0 / abs(br.slope) for br in branches)
        direct = (superlevel_measure(f, lo, strict=True)
                  - superlevel_measure(f, hi, strict=False))
        if abs(direct - from_slopes) > 1e-9 * max(1.0, direct):
            raise VerificationFailure(
                f"band measure mismatch: {direct} from level sets, "
                f"{from_slopes} from slopes")
        bands.append(Band(float(lo), float(hi), tuple(branches), len(branches),
                          "rising" if first > 0 else "falling",
                          float(direct), float(from_slopes)))
    return bands


# ---------------------------------------------------------------------------
# exact rearrangements
# ---------------------------------------------------------------------------

def decreasing_rearrangement(f: PiecewiseAffine) -> PiecewiseAffine:
    """The nonincreasing function on [0, 1] equimeasurable with f.

    Built exactly from the distribution function: the knot at level c
    sits at position |{f > c}|, and a plateau of f becomes a flat piece
    of the same length.  Inside a band the result is affine with slope
    -1 / sum_j (1 / |slope_j|) over the band's crossing slopes.
    """
    crit = critical_values(f)
    xs = []
    vs = []
    for c in crit[::-1]:
        strict_m = superlevel_measure(f, c, strict=True)
        weak = superlevel_measure(f, c, strict=False)
        xs.append(strict_m)
        vs.append(float(c))
        if weak - strict_m > 0.0:
            xs.append(weak)
            vs.append(float(c))
    xs[0] = 0.0
    xs[-1] = 1.0
    return _assemble(xs, vs, allow_jumps=False)


def increasing_rearrangement(f: PiecewiseAffine) -> PiecewiseAffine:
    """The nondecreasing rearrangement: the decreasing one reflected."""
    return reverse(decreasing_rearrangement(f))


def rearranged_weight(m: WeightFunction, decreasing: bool = True) -> WeightFunction:
    """Rearrange a piecewise-constant weight by sorting its pieces."""
    pieces = sorted(((v, hi - lo) for lo, hi, v in m.pieces()),
                    key=lambda t: t[0], reverse=decreasing)
    bps = [0.0]
    vals = []
    for v, ln in pieces:
        bps.append(bps[-1] + ln)
        vals.append(v)
    bps[-1] = 1.0
    return WeightFunction(bps, vals)
