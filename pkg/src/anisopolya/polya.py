"""Anisotropic rearrangement inequalities with equality diagnostics.

The rearrangement of a function never costs more anisotropic energy
than the function itself, and the deficit can be localized: an excess
set where the rearrangement overshoots the boundary values carries an
extra charge, and each level band contributes a nonnegative gap that is
strictly positive whenever the band is crossed more than once.  The
routines here compute those bounds exactly and certify every identity
they rely on, raising VerificationFailure instead of returning a bad
report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (PreconditionError, VerificationFailure,
                     WrongOrientationError)
from .pwa import (AnisotropicNorm, PiecewiseAffine, WeightFunction,
                  anisotropic_energy, concat_scaled, derivative_segments,
                  is_monotone, p_derivative_norm, restrict_rescaled,
                  weighted_p_integral)
from .rearrange import (Band, band_decomposition, decreasing_rearrangement,
                        increasing_rearrangement, rearranged_weight,
                        superlevel_measure)

# a bound may undershoot by this relative slack before it counts as violated
GAP_TOL = 1e-10
# reports flag equality when the gap is this small relative to max(1, lhs)
EQUALITY_TOL = 1e-9
# exact algebraic identities must match to this relative tolerance
IDENTITY_TOL = 1e-12
# identities comparing a function against its reflection cross two knot
# layouts whose roundoff is amplified by the exponent; see min_inequality
REFLECT_TOL = 1e-9


@dataclass(frozen=True)
class ExcessSet:
    """Where a monotone rearrangement overshoots the boundary values."""

    intervals: tuple
    measure: float


@dataclass(frozen=True)
class InequalityReport:
    """One verified bound: left side, right side, and diagnostics."""

    lhs: float
    rhs: float
    gap: float
    excess_term: float
    excess_measure: float
    equality: bool
    monotone_classification: str
    orientation: str
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "excess_measure": self.excess_measure,
            "equality": self.equality,
            "monotone": self.monotone_classification,
            "orientation": self.orientation,
            "seed": self.seed,
        }


def _monotone_class(f: PiecewiseAffine) -> str:
    # slope noise below 1e-12 of the steepest piece reads as flat
    return is_monotone(f, tol=1e-12 * max(f.lipschitz, 1.0))


def _check_gap(lhs: float, gap: float, what: str) -> None:
    if gap < -GAP_TOL * max(1.0, abs(lhs)):
        raise VerificationFailure(
            f"{what} violated: gap {gap} below tolerance at lhs {lhs}")


def _is_equality(lhs: float, gap: float) -> bool:
    return abs(gap) <= EQUALITY_TOL * max(1.0, abs(lhs))


# ---------------------------------------------------------------------------
# excess sets
# ---------------------------------------------------------------------------

def excess_set_decreasing(f: PiecewiseAffine) -> ExcessSet:
    """Where the decreasing rearrangement exits the boundary-value range.

    Needs f(0) >= f(1).  The set is {x : g(x) > f(0)} united with
    {x : g(x) < f(1)} for g the decreasing rearrangement: a left
    interval and a right interval, either possibly empty.
    """
    u0, u1 = float(f.values[0]), float(f.values[-1])
    if u0 < u1:
        raise WrongOrientationError(
            "decreasing excess set needs f(0) >= f(1)")
    x_left = superlevel_measure(f, u0, strict=True)
    x_right = superlevel_measure(f, u1, strict=False)
    intervals = []
    if x_left > 0.0:
        intervals.append((0.0, x_left))
    if x_right < 1.0:
        intervals.append((x_right, 1.0))
    return ExcessSet(tuple(intervals), x_left + (1.0 - x_right))


def excess_set_increasing(f: PiecewiseAffine) -> ExcessSet:
    """Mirror of excess_set_decreasing; needs f(0) <= f(1).

    The set is {x : g(x) < f(0)} united with {x : g(x) > f(1)} for g
    the increasing rearrangement.
    """
    u0, u1 = float(f.values[0]), float(f.values[-1])
    if u0 > u1:
        raise WrongOrientationError(
            "increasing excess set needs f(0) <= f(1)")
    x_left = 1.0 - superlevel_measure(f, u0, strict=False)
    x_right = superlevel_measure(f, u1, strict=True)
    intervals = []
    if x_left > 0.0:
        intervals.append((0.0, x_left))
    if x_right > 0.0:
        intervals.append((1.0 - x_right, 1.0))
    return ExcessSet(tuple(intervals), x_left + x_right)


def _p_energy_on(g: PiecewiseAffine, intervals, p: float) -> float:
    """Integral of |g'|^p over a union of intervals."""
    total = 0.0
    for seg in derivative_segments(g):
        for lo, hi in intervals:
            overlap = min(seg.hi, hi) - max(seg.lo, lo)
            if overlap > 0.0:
                total += abs(seg.slope) ** p * overlap
    return total


# ---------------------------------------------------------------------------
# gamma weights and per-band bookkeeping
# ---------------------------------------------------------------------------

def gamma_weights(band: Band, norm: AnisotropicNorm):
    """Per-crossing rate weights on a band, certified two ways.

    A rising crossing is charged the rise weight a^p, a falling one the
    fall weight b^p.  The same values are recomputed from the closed
    alternating-sign formula in the crossing index and both routes must
    agree exactly.
    """
    ap, bp_ = norm.rise_weight, norm.fall_weight
    s = band.first_sign
    out = []
    for j, br in enumerate(band.branches, start=1):
        by_sign = ap if br.sign > 0 else bp_
        by_formula = (0.5 * (1.0 - s * (-1.0) ** j) * ap
                      + 0.5 * (1.0 - s * (-1.0) ** (j + 1)) * bp_)
        if by_formula != by_sign:
            raise VerificationFailure(
                f"crossing weight mismatch on branch {j}: "
                f"{by_formula} by formula, {by_sign} by direction")
        out.append(by_sign)
    return np.array(out)


def band_refined_gap(band: Band, norm: AnisotropicNorm) -> float:
    """Band share of the energy drop under rearrangement.

    Exact cost of the band's crossings minus the cost the same levels
    carry in the rearrangement (all crossings merged into one slope,
    weighted by the summed crossing weights).  Zero for a single
    crossing, strictly positive for two or more when p > 1.
    """
    gam = gamma_weights(band, norm)
    h = band.height
    p = norm.p
    slopes = np.array([abs(br.slope) for br in band.branches])
    lhs = h * float(np.sum(gam * slopes ** (p - 1.0)))
    rhs = float(np.sum(gam)) * h * float(np.sum(1.0 / slopes)) ** (1.0 - p)
    return lhs - rhs


def band_sum_check(band: Band, norm: AnisotropicNorm,
                   f: PiecewiseAffine) -> bool:
    """Structural weight checks for one band against its host function.

    Outside the boundary-value range the crossing count must be even
    and the summed weights must reach a^p + b^p.  A band starting
    inside the range must open with the crossing that points from f(0)
    toward f(1): falling when f(0) >= f(1), rising when f(0) <= f(1).
    """
    gam = gamma_weights(band, norm)
    u0, u1 = float(f.values[0]), float(f.values[-1])
    lo_bd, hi_bd = min(u0, u1), max(u0, u1)
    outside = (band.lo >= hi_bd - 1e-12) or (band.hi <= lo_bd + 1e-12)
    if outside:
        if band.count % 2 != 0:
            return False
        if float(np.sum(gam)) < norm.rise_weight + norm.fall_weight - 1e-12:
            return False
    else:
        first = band.branches[0]
        if u0 >= u1 and gam[0] != norm.fall_weight:
            return False
        if u0 <= u1 and gam[0] != norm.rise_weight:
            return False
        if u0 > u1 and first.sign != -1:
            return False
        if u0 < u1 and first.sign != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# the three bounds
# ---------------------------------------------------------------------------

def refined_bound(f: PiecewiseAffine, norm: AnisotropicNorm,
                  seed=None) -> InequalityReport:
    """Energy of f against the rearranged energy plus the excess charge.

    Orientation follows the boundary values: f(0) >= f(1) compares with
    the decreasing rearrangement and charges the rise weight on the
    excess set; otherwise the mirrored setup.  The verified bound is

        energy(f) >= fall^p * K + rise^p * E    (decreasing case)

    with K the p-integral of the rearranged slope and E its share over
    the excess set.
    """
    u0, u1 = float(f.values[0]), float(f.values[-1])
    lhs = anisotropic_energy(f, norm)
    p = norm.p
    if u0 >= u1:
        orientation = "down"
        g = decreasing_rearrangement(f)
        excess = excess_set_decreasing(f)
        k_term = norm.fall_weight * p_derivative_norm(g, p)
        e_energy = _p_energy_on(g, excess.intervals, p)
        excess_term = norm.rise_weight * e_energy
    else:
        orientation = "up"
        g = increasing_rearrangement(f)
        excess = excess_set_increasing(f)
        k_term = norm.rise_weight * p_derivative_norm(g, p)
        e_energy = _p_energy_on(g, excess.intervals, p)
        excess_term = norm.fall_weight * e_energy
    rhs = k_term + excess_term
    gap = lhs - rhs
    _check_gap(lhs, gap, "refined rearrangement bound")
    return InequalityReport(lhs, rhs, gap, excess_term, excess.measure,
                            _is_equality(lhs, gap), _monotone_class(f),
                            orientation, seed)


def polya_inequality(f: PiecewiseAffine, norm: AnisotropicNorm,
                     seed=None) -> InequalityReport:
    """Plain rearrangement bound: energy(f) >= energy of the rearrangement.

    The right side is certified against the closed form: a decreasing
    rearrangement only falls, so its energy is the fall weight times
    the p-integral of its slope (mirrored in the increasing case).
    """
    u0, u1 = float(f.values[0]), float(f.values[-1])
    lhs = anisotropic_energy(f, norm)
    if u0 >= u1:
        orientation = "down"
        g = decreasing_rearrangement(f)
        rhs = norm.fall_weight * p_derivative_norm(g, norm.p)
    else:
        orientation = "up"
        g = increasing_rearrangement(f)
        rhs = norm.rise_weight * p_derivative_norm(g, norm.p)
    direct = anisotropic_energy(g, norm)
    if abs(direct - rhs) > IDENTITY_TOL * max(1.0, abs(rhs)):
        raise VerificationFailure(
            f"one-sided energy identity failed: {direct} direct vs {rhs} closed form")
    gap = lhs - rhs
    _check_gap(lhs, gap, "rearrangement bound")
    return InequalityReport(lhs, rhs, gap, 0.0, 0.0,
                            _is_equality(lhs, gap), _monotone_class(f),
                            orientation, seed)


def min_inequality(f: PiecewiseAffine, norm: AnisotropicNorm,
                   seed=None) -> InequalityReport:
    """Two-sided floor: energy(f) >= min(rise, fall)^p * K.

    K is the p-integral of the rearranged slope, identical for both
    monotone rearrangements.  The right side is certified against the
    cheaper of the two rearranged energies computed directly.
    """
    lhs = anisotropic_energy(f, norm)
    g_dn = decreasing_rearrangement(f)
    g_up = increasing_rearrangement(f)
    k = p_derivative_norm(g_dn, norm.p)
    k_up = p_derivative_norm(g_up, norm.p)
    # the orientations are reflections; knot positions 1 - t round
    # differently and the length roundoff is amplified by p - 1 through
    # slope^p * length, so this cross-route identity gets the looser
    # tolerance shared by the other reflection-crossing checks
    if abs(k - k_up) > REFLECT_TOL * max(1.0, k):
        raise VerificationFailure(
            f"rearranged slope integral differs between orientations: {k} vs {k_up}")
    rhs = min(norm.rise_weight, norm.fall_weight) * k
    direct = min(anisotropic_energy(g_dn, norm), anisotropic_energy(g_up, norm))
    if abs(direct - rhs) > REFLECT_TOL * max(1.0, abs(rhs)):
        raise VerificationFailure(
            f"two-sided floor identity failed: {direct} direct vs {rhs} closed form")
    gap = lhs - rhs
    _check_gap(lhs, gap, "two-sided energy floor")
    orientation = "down" if norm.fall_weight <= norm.rise_weight else "up"
    return InequalityReport(lhs, rhs, gap, 0.0, 0.0,
                            _is_equality(lhs, gap), _monotone_class(f),
                            orientation, seed)


# ---------------------------------------------------------------------------
# split rearrangement and weighted ordering
# ---------------------------------------------------------------------------

def split_rearrange(f: PiecewiseAffine, kappa: float,
                    mode: str = "down") -> PiecewiseAffine:
    """Rearrange f separately on (0, kappa) and (kappa, 1).

    Each half is rearranged within its own interval (down: both halves
    nonincreasing; up: both nondecreasing) and the halves are glued
    back.  The glue point may carry a jump, encoded as a repeated
    breakpoint; continuity across kappa is not required.
    """
    if not (0.0 < kappa < 1.0):
        raise PreconditionError("split point must lie strictly inside (0, 1)")
    if mode not in ("down", "up"):
        raise PreconditionError("mode must be 'down' or 'up'")
    left = restrict_rescaled(f, 0.0, kappa)
    right = restrict_rescaled(f, kappa, 1.0)
    if mode == "down":
        left = decreasing_rearrangement(left)
        right = decreasing_rearrangement(right)
    else:
        left = increasing_rearrangement(left)
        right = increasing_rearrangement(right)
    return concat_scaled(left, right, kappa)


def hardy_littlewood_check(f: PiecewiseAffine, m: WeightFunction, p: float,
                           seed=None) -> InequalityReport:
    """Similarly-ordered pairing beats the original pairing.

    Verifies integral of m_dn * (f_dn)^p >= integral of m * f^p, where
    both factors are rearranged decreasingly.  Needs f >= 0.
    """
    lhs = weighted_p_integral(decreasing_rearrangement(f),
                              rearranged_weight(m, decreasing=True), p)
    rhs = weighted_p_integral(f, m, p)
    gap = lhs - rhs
    _check_gap(lhs, gap, "ordered-pairing bound")
    return InequalityReport(lhs, rhs, gap, 0.0, 0.0,
                            _is_equality(lhs, gap), _monotone_class(f),
                            "down", seed)
