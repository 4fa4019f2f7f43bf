"""Rayleigh-type quotient over the nonnegative cone and its minimizer.

The quotient of a nonnegative candidate is its anisotropic slope cost
plus a boundary charge, divided by its weighted p-mass against a
sign-changing weight.  Rearrangement competitors never increase the
quotient, which is why minimizers come out monotone (no boundary
charge) or unimodal with an interior peak (with one); the projected
descent below recovers exactly that structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InfeasibleError, PreconditionError
from .pwa import (AnisotropicNorm, PiecewiseAffine, WeightFunction,
                  anisotropic_energy, concat_scaled, restrict_rescaled,
                  weighted_p_integral)
from .rearrange import (decreasing_rearrangement, increasing_rearrangement,
                        rearranged_weight)

MAX_ITER = 50000
STALL_WINDOW = 50
STALL_RTOL = 1e-10
STEP0 = 0.1


@dataclass(frozen=True)
class QuotientProblem:
    """Slope cost, sign-changing weight, boundary charge, and grid size."""

    norm: AnisotropicNorm
    weight: WeightFunction
    kappa: float
    grid_size: int

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and self.kappa >= 0.0):
            raise PreconditionError("boundary charge kappa must be >= 0")
        if int(self.grid_size) != self.grid_size or self.grid_size < 8:
            raise PreconditionError("grid size must be an integer >= 8")

    def to_dict(self) -> dict:
        return {"norm": self.norm.to_dict(), "weight": self.weight.to_dict(),
                "kappa": self.kappa, "grid_size": self.grid_size}

    @classmethod
    def from_dict(cls, d) -> "QuotientProblem":
        try:
            return cls(AnisotropicNorm.from_dict(d["norm"]),
                       WeightFunction.from_dict(d["weight"]),
                       float(d["kappa"]), int(d["grid_size"]))
        except (KeyError, TypeError) as exc:
            raise PreconditionError(
                f"problem object needs norm, weight, kappa, grid_size: {exc}")

    def packed(self):
        return kernels.make_problem(self.grid_size, self.norm.a, self.norm.b,
                                    self.norm.p, self.kappa,
                                    self.weight.breakpoints,
                                    self.weight.values)


@dataclass(frozen=True)
class MinimizerReport:
    """Outcome of the multistart minimization."""

    phi: PiecewiseAffine
    lambda_plus: float
    structure: str
    alpha: float | None
    iterations: int
    converged: bool
    start_index: int

    def to_dict(self) -> dict:
        return {
            "lambda_plus": self.lambda_plus,
            "structure": self.structure,
            "alpha": self.alpha,
            "iterations": self.iterations,
            "converged": self.converged,
            "start_index": self.start_index,
            "phi": self.phi.to_dict(),
        }


@dataclass(frozen=True)
class CompetitorReport:
    """Quotient of a candidate against its rearranged competitor."""

    original: float
    competitor: float
    gap: float
    admissible: bool
    mode: str
    alpha: float | None = None


# ---------------------------------------------------------------------------
# quotient evaluation
# ---------------------------------------------------------------------------

def rayleigh_quotient(phi: PiecewiseAffine, prob: QuotientProblem) -> float:
    """Exact quotient of a nonnegative piecewise-affine candidate.

    Raises InfeasibleError when the weighted p-mass is not positive,
    since the quotient only orders candidates on the positive-mass cone.
    """
    p = prob.norm.p
    den = weighted_p_integral(phi, prob.weight, p)
    if den <= 0.0:
        raise InfeasibleError(
            f"candidate has nonpositive weighted mass {den}")
    num = anisotropic_energy(phi, prob.norm)
    num += prob.kappa * (float(phi.values[0]) ** p + float(phi.values[-1]) ** p)
    return num / den


def first_global_max(phi: PiecewiseAffine) -> float:
    """Leftmost point where phi attains its maximum.

    The maximum of a piecewise-affine function sits at a breakpoint;
    for a flat top this returns the plateau's left endpoint.
    """
    idx = int(np.argmax(phi.values))
    return float(phi.breakpoints[idx])


# ---------------------------------------------------------------------------
# rearranged competitors
# ---------------------------------------------------------------------------

def unimodal_competitor(phi: PiecewiseAffine, m: WeightFunction, alpha: float):
    """Candidate and weight rearranged toward a single peak at alpha.

    Left of alpha both are rearranged increasingly, right of alpha
    decreasingly.  When alpha is a global max of phi the result is
    continuous and peaks exactly at alpha.
    """
    if not (0.0 < alpha < 1.0):
        raise PreconditionError("peak location must lie strictly inside (0, 1)")
    left = increasing_rearrangement(restrict_rescaled(phi, 0.0, alpha))
    right = decreasing_rearrangement(restrict_rescaled(phi, alpha, 1.0))
    phi_r = concat_scaled(left, right, alpha)

    lo_w, hi_w = _split_weight(m, alpha)
    lo_w = _sorted_weight(lo_w, decreasing=False)
    hi_w = _sorted_weight(hi_w, decreasing=True)
    m_r = _concat_weights(lo_w, hi_w, alpha)
    return phi_r, m_r


def _split_weight(m: WeightFunction, alpha: float):
    """Restrict a weight to each side of alpha, rescaled to [0, 1]."""
    left_bp = [0.0]
    left_v = []
    right_bp = [0.0]
    right_v = []
    for lo, hi, v in m.pieces():
        llo, lhi = max(lo, 0.0), min(hi, alpha)
        if lhi - llo > 0.0:
            left_bp.append(lhi / alpha)
            left_v.append(v)
        rlo, rhi = max(lo, alpha), min(hi, 1.0)
        if rhi - rlo > 0.0:
            right_bp.append((rhi - alpha) / (1.0 - alpha))
            right_v.append(v)
    left_bp[-1] = 1.0
    right_bp[-1] = 1.0
    return _weight_nocheck(left_bp, left_v), _weight_nocheck(right_bp, right_v)


def _weight_nocheck(bps, vals) -> WeightFunction:
    # a one-sided restriction may be entirely nonpositive; bypass the
    # positivity invariant, the glued competitor weight restores it
    w = object.__new__(WeightFunction)
    bp = np.array(bps, dtype=np.float64)
    vv = np.array(vals, dtype=np.float64)
    bp.setflags(write=False)
    vv.setflags(write=False)
    w.breakpoints = bp
    w.values = vv
    return w


def _sorted_weight(m: WeightFunction, decreasing: bool) -> WeightFunction:
    # like rearranged_weight but tolerates all-nonpositive restrictions
    # and sliver pieces, which validated weights may not carry
    pieces = sorted(((v, hi - lo) for lo, hi, v in m.pieces()),
                    key=lambda t: t[0], reverse=decreasing)
    bps = [0.0]
    vals = []
    for v, ln in pieces:
        bps.append(bps[-1] + ln)
        vals.append(v)
    bps[-1] = 1.0
    return _weight_nocheck(bps, vals)


def _concat_weights(left: WeightFunction, right: WeightFunction,
                    alpha: float) -> WeightFunction:
    bps = np.concatenate([left.breakpoints * alpha,
                          alpha + right.breakpoints[1:] * (1.0 - alpha)])
    vals = np.concatenate([left.values, right.values])
    keep = np.diff(bps) > 0.0
    return _weight_nocheck(np.concatenate([[0.0], bps[1:][keep]]),
                           vals[keep])


def competitor_improves(phi: PiecewiseAffine, prob: QuotientProblem,
                        mode: str = "unimodal") -> CompetitorReport:
    """Compare a candidate's quotient with its rearranged competitor.

    unimodal mode rearranges toward the candidate's first global max;
    monotone mode uses the cheap monotone rearrangement (decreasing
    when falling is cheaper than rising, i.e. a >= b, else increasing)
    and pairs it with the same-ordered weight.  A competitor whose
    weighted mass is not positive makes the comparison inconclusive,
    reported via admissible=False rather than an error.
    """
    if mode not in ("unimodal", "monotone"):
        raise PreconditionError("mode must be 'unimodal' or 'monotone'")
    original = rayleigh_quotient(phi, prob)
    alpha = None
    if mode == "unimodal":
        alpha = first_global_max(phi)
        if not (0.0 < alpha < 1.0):
            # peak at the boundary: fall back to the matching monotone shape
            if alpha <= 0.0:
                comp_phi = decreasing_rearrangement(phi)
                comp_w = rearranged_weight(prob.weight, decreasing=True)
            else:
                comp_phi = increasing_rearrangement(phi)
                comp_w = rearranged_weight(prob.weight, decreasing=False)
        else:
            comp_phi, comp_w = unimodal_competitor(phi, prob.weight, alpha)
    else:
        decreasing = prob.norm.a >= prob.norm.b
        comp_phi = (decreasing_rearrangement(phi) if decreasing
                    else increasing_rearrangement(phi))
        comp_w = rearranged_weight(prob.weight, decreasing=decreasing)
    comp_prob = QuotientProblem(prob.norm, comp_w, prob.kappa, prob.grid_size)
    try:
        competitor = rayleigh_quotient(comp_phi, comp_prob)
    except InfeasibleError:
        return CompetitorReport(original, float("nan"), float("nan"),
                                False, mode, alpha)
    return CompetitorReport(original, competitor, original - competitor,
                            True, mode, alpha)


# ---------------------------------------------------------------------------
# structure classification and minimization
# ---------------------------------------------------------------------------

def classify_structure(values, rel: float = 1e-6):
    """Shape of a nodal profile: trend pattern of its significant slopes.

    Slopes below rel times the steepest slope read as flat.  Returns
    (kind, alpha) where kind is increasing, decreasing, unimodal,
    constant, or other, and alpha is the leftmost peak node for the
    unimodal kind (None otherwise).
    """
    values = np.asarray(values, dtype=np.float64)
    s = np.diff(values)
    m = float(np.abs(s).max()) if s.size else 0.0
    if m == 0.0:
        return "constant", None
    tol = rel * m
    trend = np.where(s > tol, 1, np.where(s < -tol, -1, 0))
    trend = trend[trend != 0]
    if trend.size == 0:
        return "constant", None
    if np.all(trend > 0):
        return "increasing", None
    if np.all(trend < 0):
        return "decreasing", None
    flips = np.nonzero(np.diff(trend))[0]
    if flips.size == 1 and trend[0] > 0:
        nodes = np.linspace(0.0, 1.0, values.size)
        return "unimodal", float(nodes[int(np.argmax(values))])
    return "other", None


def minimize_quotient(prob: QuotientProblem, seed: int = 0) -> MinimizerReport:
    """Multistart projected descent for the smallest quotient value.

    Runs the descent kernel from five spread hat profiles plus one
    seeded random profile, skipping starts without positive weighted
    mass, and keeps the best end value (ties to the earliest start).
    The winner is renormalized to unit weighted p-mass exactly and its
    reported value is recomputed from the exact quotient.
    """
    packed = prob.packed()
    n = prob.grid_size
    best = None
    for k, start in enumerate(kernels.starts_for(n, seed)):
        cand = np.maximum(start, 0.0)
        if kernels.num_den(cand, *packed)[1] <= 0.0:
            continue
        phi, r, iters, conv = kernels.descent(cand, *packed, MAX_ITER,
                                              STALL_WINDOW, STALL_RTOL, STEP0)
        if best is None or r < best[1]:
            best = (phi, r, iters, conv, k)
    if best is None:
        raise InfeasibleError(
            "no start profile has positive weighted mass for this weight")
    phi_vec, _, iters, conv, start_idx = best
    nodes = np.linspace(0.0, 1.0, n + 1)
    phi_pwa = PiecewiseAffine(nodes, np.maximum(phi_vec, 0.0))
    # exact renormalization to unit weighted p-mass
    den = weighted_p_integral(phi_pwa, prob.weight, prob.norm.p)
    if den <= 0.0:
        raise InfeasibleError("descent returned a candidate without mass")
    phi_pwa = PiecewiseAffine(nodes, phi_pwa.values * den ** (-1.0 / prob.norm.p))
    lam = rayleigh_quotient(phi_pwa, prob)
    kind, alpha = classify_structure(phi_pwa.values)
    return MinimizerReport(phi_pwa, lam, kind, alpha, iters, conv, start_idx)
