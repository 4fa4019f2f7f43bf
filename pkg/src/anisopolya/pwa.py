"""Piecewise-affine functions on [0, 1] and two-sided slope costs.

The objects here are continuous piecewise-affine functions given by
breakpoints and nodal values, piecewise-constant weights, and an
anisotropic slope cost that charges rising and falling slopes at
different rates.  Everything downstream (rearrangements, inequality
reports, the quotient minimizer) is built on these.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError

# breakpoint gaps tighter than this are rejected outright, never merged
MIN_GAP = 1e-12


@dataclass(frozen=True)
class AnisotropicNorm:
    """Two-sided slope cost: rising slopes pay a^p, falling slopes pay b^p.

    The cost density of a slope s is  a^p * max(s, 0)^p + b^p * max(-s, 0)^p.
    """

    a: float
    b: float
    p: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0.0):
            raise PreconditionError("rise rate a must be finite and positive")
        if not (np.isfinite(self.b) and self.b > 0.0):
            raise PreconditionError("fall rate b must be finite and positive")
        if not (np.isfinite(self.p) and self.p > 1.0):
            raise PreconditionError("exponent p must be finite and exceed 1")

    @property
    def rise_weight(self) -> float:
        return self.a ** self.p

    @property
    def fall_weight(self) -> float:
        return self.b ** self.p

    def slope_cost(self, s):
        """Cost density of slope(s) s; accepts scalars or arrays."""
        s = np.asarray(s, dtype=np.float64)
        up = np.maximum(s, 0.0)
        dn = np.maximum(-s, 0.0)
        out = self.rise_weight * up ** self.p + self.fall_weight * dn ** self.p
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "p": self.p}

    @classmethod
    def from_dict(cls, d) -> "AnisotropicNorm":
        try:
            return cls(float(d["a"]), float(d["b"]), float(d["p"]))
        except (KeyError, TypeError) as exc:
            raise PreconditionError(f"norm object needs numeric fields a, b, p: {exc}")


@dataclass(frozen=True)
class SegmentSlope:
    """One affine piece: the open interval (lo, hi) and the slope on it."""

    lo: float
    hi: float
    slope: float

    @property
    def length(self) -> float:
        return self.hi - self.lo


class PiecewiseAffine:
    """Continuous piecewise-affine function on [0, 1].

    Breakpoints run from 0 to 1 and are strictly increasing.  With
    allow_jumps=True a breakpoint may repeat once; the repeat encodes a
    jump at that point and the function is right-continuous there.
    Gaps below MIN_GAP that are not exact repeats are rejected, not
    merged, so callers see their bad input instead of a silent fixup.
    """

    __slots__ = ("breakpoints", "values")

    def __init__(self, breakpoints, values, allow_jumps: bool = False):
        bp = np.array(breakpoints, dtype=np.float64)
        vv = np.array(values, dtype=np.float64)
        if bp.ndim != 1 or vv.ndim != 1 or bp.size != vv.size:
            raise PreconditionError("breakpoints and values must be 1-d and equal length")
        if bp.size < 2:
            raise PreconditionError("need at least two breakpoints")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vv))):
            raise PreconditionError("breakpoints and values must be finite")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise PreconditionError("breakpoints must start at 0 and end at 1")
        gaps = np.diff(bp)
        if allow_jumps:
            if np.any(gaps < 0.0):
                raise PreconditionError("breakpoints must be nondecreasing")
            tiny = (gaps > 0.0) & (gaps < MIN_GAP)
            if np.any(tiny):
                raise PreconditionError(
                    f"breakpoint gap below {MIN_GAP:g} is rejected, not merged")
            dup = gaps == 0.0
            if np.any(dup[:-1] & dup[1:]):
                raise PreconditionError("a breakpoint may repeat at most once")
        else:
            if np.any(gaps < MIN_GAP):
                raise PreconditionError(
                    f"breakpoints must be strictly increasing with gaps >= {MIN_GAP:g}")
        bp.setflags(write=False)
        vv.setflags(write=False)
        self.breakpoints = bp
        self.values = vv

    # -- introspection ------------------------------------------------

    @property
    def has_jumps(self) -> bool:
        return bool(np.any(np.diff(self.breakpoints) == 0.0))

    @property
    def lipschitz(self) -> float:
        """Largest absolute slope over the genuine (positive-length) pieces."""
        segs = derivative_segments(self)
        return max((abs(s.slope) for s in segs), default=0.0)

    def value_range(self):
        return float(self.values.min()), float(self.values.max())

    def __call__(self, t):
        return evaluate(self, t)

    def __repr__(self):
        return (f"PiecewiseAffine({np.array2string(self.breakpoints, threshold=8)}, "
                f"{np.array2string(self.values, threshold=8)})")

    # -- serialization ------------------------------------------------

    def to_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(),
                "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d, allow_jumps: bool = False) -> "PiecewiseAffine":
        try:
            return cls(d["breakpoints"], d["values"], allow_jumps=allow_jumps)
        except (KeyError, TypeError) as exc:
            raise PreconditionError(
                f"function object needs array fields breakpoints, values: {exc}")


class WeightFunction:
    """Piecewise-constant weight on [0, 1]; may change sign.

    Defined by k+1 breakpoints and k piece values.  At least one piece
    must carry a positive value, otherwise every nonnegative candidate
    has nonpositive weighted mass and the quotient problems downstream
    are empty.
    """

    __slots__ = ("breakpoints", "values")

    def __init__(self, breakpoints, values):
        bp = np.array(breakpoints, dtype=np.float64)
        vv = np.array(values, dtype=np.float64)
        if bp.ndim != 1 or vv.ndim != 1 or bp.size != vv.size + 1:
            raise PreconditionError("need k+1 breakpoints for k weight pieces")
        if vv.size < 1:
            raise PreconditionError("need at least one weight piece")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vv))):
            raise PreconditionError("weight breakpoints and values must be finite")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise PreconditionError("weight breakpoints must start at 0 and end at 1")
        if np.any(np.diff(bp) < MIN_GAP):
            raise PreconditionError(
                f"weight breakpoints must be strictly increasing with gaps >= {MIN_GAP:g}")
        if not np.any(vv > 0.0):
            from .errors import InfeasibleError
            raise InfeasibleError("weight must be positive on at least one piece")
        bp.setflags(write=False)
        vv.setflags(write=False)
        self.breakpoints = bp
        self.values = vv

    def piece_values_at(self, t):
        """Piece value containing each query point (pieces are half-open)."""
        t = np.asarray(t, dtype=np.float64)
        idx = np.clip(np.searchsorted(self.breakpoints, t, side="right") - 1,
                      0, self.values.size - 1)
        out = self.values[idx]
        return float(out) if out.ndim == 0 else out

    def pieces(self):
        """List of (lo, hi, value) triples."""
        bp = self.breakpoints
        return [(float(bp[i]), float(bp[i + 1]), float(self.values[i]))
                for i in range(self.values.size)]

    def to_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(),
                "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d) -> "WeightFunction":
        try:
            return cls(d["breakpoints"], d["values"])
        except (KeyError, TypeError) as exc:
            raise PreconditionError(
                f"weight object needs array fields breakpoints, values: {exc}")


# ---------------------------------------------------------------------------
# evaluation and differentiation
# ---------------------------------------------------------------------------

def evaluate(f: PiecewiseAffine, t):
    """Value of f at t (scalar or array); t must lie in [0, 1].

    At a jump breakpoint the right-hand value is returned; at t = 1 the
    final value is returned.
    """
    tt = np.asarray(t, dtype=np.float64)
    if np.any(tt < -MIN_GAP) or np.any(tt > 1.0 + MIN_GAP):
        raise DomainError("evaluation point outside [0, 1]")
    tt = np.clip(tt, 0.0, 1.0)
    bp, vv = f.breakpoints, f.values
    idx = np.searchsorted(bp, tt, side="right") - 1
    idx = np.clip(idx, 0, bp.size - 2)
    t0 = bp[idx]
    dt = bp[idx + 1] - t0
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(dt > 0.0, (tt - t0) / np.where(dt > 0.0, dt, 1.0), 0.0)
    out = f.values[idx] * (1.0 - w) + f.values[idx + 1] * w
    # at t == 1 searchsorted lands on the last piece already; at an exact
    # interior jump location side="right" lands past the repeat, giving
    # the right-hand value
    return float(out) if out.ndim == 0 else out


def derivative_segments(f: PiecewiseAffine):
    """Affine pieces of f as SegmentSlope records, jumps excluded."""
    bp, vv = f.breakpoints, f.values
    out = []
    for i in range(bp.size - 1):
        dt = bp[i + 1] - bp[i]
        if dt <= 0.0:
            continue
        out.append(SegmentSlope(float(bp[i]), float(bp[i + 1]),
                                float((vv[i + 1] - vv[i]) / dt)))
    return out


def anisotropic_energy(f: PiecewiseAffine, norm: AnisotropicNorm) -> float:
    """Total two-sided slope cost of f, exactly (jumps carry no cost)."""
    total = 0.0
    for seg in derivative_segments(f):
        total += norm.slope_cost(seg.slope) * seg.length
    return total


def p_derivative_norm(f: PiecewiseAffine, p: float) -> float:
    """Integral of |f'|^p over [0, 1], exactly."""
    if not (np.isfinite(p) and p > 1.0):
        raise PreconditionError("exponent p must be finite and exceed 1")
    total = 0.0
    for seg in derivative_segments(f):
        total += abs(seg.slope) ** p * seg.length
    return total


def is_monotone(f: PiecewiseAffine, tol: float = 0.0) -> str:
    """Classify f as increasing, decreasing, constant, or none.

    Slopes with |slope| <= tol count as flat.  A jump counts as a step
    in its own direction regardless of tol.
    """
    if tol < 0.0:
        raise PreconditionError("tolerance must be nonnegative")
    has_up = False
    has_dn = False
    bp, vv = f.breakpoints, f.values
    for i in range(bp.size - 1):
        dt = bp[i + 1] - bp[i]
        dv = vv[i + 1] - vv[i]
        if dt <= 0.0:
            if dv > 0.0:
                has_up = True
            elif dv < 0.0:
                has_dn = True
            continue
        s = dv / dt
        if s > tol:
            has_up = True
        elif s < -tol:
            has_dn = True
    if has_up and has_dn:
        return "none"
    if has_up:
        return "increasing"
    if has_dn:
        return "decreasing"
    return "constant"


# ---------------------------------------------------------------------------
# exact weighted p-integrals
# ---------------------------------------------------------------------------

def _segment_p_mean(A, B, p):
    """Exact mean of v^p over a cell where v runs affinely from A to B.

    Needs A, B >= 0.  Uses the closed form (B^{p+1} - A^{p+1}) /
    ((p+1)(B-A)) and switches to a series in (B-A)/(A+B) when the
    endpoints nearly coincide, where the closed form loses digits.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    mid = 0.5 * (A + B)
    d = B - A
    out = np.zeros(np.broadcast(A, B).shape)
    pos = mid > 0.0
    if not np.any(pos):
        return float(out) if out.ndim == 0 else out
    Ap, Bp, midp, dp_ = (np.atleast_1d(x)[np.atleast_1d(pos)] for x in (A, B, mid, d))
    x = dp_ / midp
    near = np.abs(x) <= 1e-2
    res = np.empty_like(midp)
    if np.any(near):
        c2 = p * (p - 1.0) / 24.0
        c4 = p * (p - 1.0) * (p - 2.0) * (p - 3.0) / 1920.0
        xs = x[near]
        res[near] = midp[near] ** p * (1.0 + c2 * xs * xs + c4 * xs ** 4)
    far = ~near
    if np.any(far):
        res[far] = (Bp[far] ** (p + 1.0) - Ap[far] ** (p + 1.0)) / ((p + 1.0) * dp_[far])
    flat = np.atleast_1d(out)
    flat[np.atleast_1d(pos)] = res
    out = flat.reshape(np.broadcast(A, B).shape)
    return float(out) if out.ndim == 0 else out


def _cell_grid(f: PiecewiseAffine, extra=None):
    """Union of f's knots with optional extra knots, as unique cell edges."""
    pieces = [np.unique(f.breakpoints)]
    if extra is not None:
        pieces.append(np.unique(np.asarray(extra, dtype=np.float64)))
    ts = np.unique(np.concatenate(pieces))
    return ts


def _values_on_cells(f: PiecewiseAffine, ts):
    """Endpoint values of f on each cell [ts_i, ts_{i+1}], one-sided at jumps.

    Each cell must lie inside a single affine piece of f, which holds
    whenever ts contains all of f's knots.  The piece is identified by
    the cell midpoint, so values at a jump location come from the
    correct side.
    """
    bp, vv = f.breakpoints, f.values
    lo = ts[:-1]
    hi = ts[1:]
    mid = 0.5 * (lo + hi)
    idx = np.clip(np.searchsorted(bp, mid, side="right") - 1, 0, bp.size - 2)
    t0 = bp[idx]
    dt = bp[idx + 1] - t0
    safe = np.where(dt > 0.0, dt, 1.0)
    wl = np.clip((lo - t0) / safe, 0.0, 1.0)
    wh = np.clip((hi - t0) / safe, 0.0, 1.0)
    A = vv[idx] * (1.0 - wl) + vv[idx + 1] * wl
    B = vv[idx] * (1.0 - wh) + vv[idx + 1] * wh
    return A, B


def weighted_p_integral(f: PiecewiseAffine, m: WeightFunction, p: float) -> float:
    """Exact integral of m * f^p over [0, 1] for nonnegative f.

    Computed cell by cell on the merged knot grid of f and m, using the
    exact antiderivative of an affine function raised to the power p.
    """
    if not (np.isfinite(p) and p > 1.0):
        raise PreconditionError("exponent p must be finite and exceed 1")
    if float(f.values.min()) < -MIN_GAP:
        raise PreconditionError("weighted p-integral needs a nonnegative function")
    ts = _cell_grid(f, m.breakpoints)
    A, B = _values_on_cells(f, ts)
    A = np.maximum(A, 0.0)
    B = np.maximum(B, 0.0)
    lens = np.diff(ts)
    w = m.piece_values_at(0.5 * (ts[:-1] + ts[1:]))
    means = _segment_p_mean(A, B, p)
    return float(np.sum(w * lens * means))


# ---------------------------------------------------------------------------
# structural surgery: reverse, restrict, concatenate
# ---------------------------------------------------------------------------

def _assemble(ts, vs, allow_jumps: bool = True) -> PiecewiseAffine:
    """Build a PiecewiseAffine from raw knots, folding sub-MIN_GAP gaps.

    Knots closer than MIN_GAP to their predecessor are snapped onto it
    (becoming an exact repeat when their values differ, or dropped when
    they agree), so numerically degenerate cells never reach the
    constructor.  Exact repeats of repeats collapse to one jump.
    """
    out_t = [float(ts[0])]
    out_v = [float(vs[0])]
    for t, v in zip(ts[1:], vs[1:]):
        t = float(t)
        v = float(v)
        gap = t - out_t[-1]
        if gap < MIN_GAP:
            if v == out_v[-1]:
                continue
            if not allow_jumps:
                # fold the knot away; the value drift is below slope * MIN_GAP
                out_v[-1] = v
                continue
            t = out_t[-1]
            if len(out_t) >= 2 and out_t[-2] == t:
                # already a jump here: extend it instead of stacking repeats
                out_v[-1] = v
                continue
            out_t.append(t)
            out_v.append(v)
        else:
            out_t.append(t)
            out_v.append(v)
    out_t[0] = 0.0
    if out_t[-1] != 1.0:
        # the end knot may have been folded into its predecessor
        if 1.0 - out_t[-1] < MIN_GAP:
            end = out_t[-1]
            for i in range(len(out_t) - 1, -1, -1):
                if out_t[i] != end:
                    break
                out_t[i] = 1.0
        else:
            out_t.append(1.0)
            out_v.append(out_v[-1])
    if len(out_t) >= 3 and out_t[-1] == out_t[-2] == out_t[-3]:
        del out_t[-2], out_v[-2]
    return PiecewiseAffine(out_t, out_v, allow_jumps=allow_jumps)


def reverse(f: PiecewiseAffine) -> PiecewiseAffine:
    """The reflection t -> f(1 - t)."""
    bp = (1.0 - f.breakpoints)[::-1].copy()
    vv = f.values[::-1].copy()
    bp[0] = 0.0
    bp[-1] = 1.0
    return PiecewiseAffine(bp, vv, allow_jumps=f.has_jumps)


def restrict_rescaled(f: PiecewiseAffine, lo: float, hi: float) -> PiecewiseAffine:
    """f restricted to [lo, hi] and rescaled to live on [0, 1].

    Endpoint values are taken one-sidedly (from inside the window), so
    a jump sitting exactly at lo or hi does not leak the outside value.
    """
    if not (0.0 <= lo < hi <= 1.0):
        raise PreconditionError("need 0 <= lo < hi <= 1")
    bp, vv = f.breakpoints, f.values
    ts = [lo]
    vs = [None]
    for i in range(bp.size):
        if lo < bp[i] < hi:
            ts.append(float(bp[i]))
            vs.append(float(vv[i]))
    ts.append(hi)
    vs.append(None)
    # value at lo: right limit; at hi: left limit
    vs[0] = _one_sided_value(f, lo, side="right")
    vs[-1] = _one_sided_value(f, hi, side="left")
    scale = hi - lo
    st = [(t - lo) / scale for t in ts]
    return _assemble(st, vs, allow_jumps=True)


def _one_sided_value(f: PiecewiseAffine, t: float, side: str) -> float:
    """Limit of f at t from the requested side (value itself at 0 or 1)."""
    bp, vv = f.breakpoints, f.values
    if side == "right":
        if t >= 1.0:
            return float(vv[-1])
        idx = int(np.searchsorted(bp, t, side="right")) - 1
        idx = min(max(idx, 0), bp.size - 2)
    else:
        if t <= 0.0:
            return float(vv[0])
        idx = int(np.searchsorted(bp, t, side="left")) - 1
        idx = min(max(idx, 0), bp.size - 2)
        if bp[idx + 1] < t:
            idx = min(idx + 1, bp.size - 2)
    t0, t1 = bp[idx], bp[idx + 1]
    if t1 <= t0:
        return float(vv[idx + 1] if side == "right" else vv[idx])
    w = (t - t0) / (t1 - t0)
    w = min(max(w, 0.0), 1.0)
    return float(vv[idx] * (1.0 - w) + vv[idx + 1] * w)


def concat_scaled(left: PiecewiseAffine, right: PiecewiseAffine,
                  kappa: float) -> PiecewiseAffine:
    """Glue left (squeezed onto [0, kappa]) and right (onto [kappa, 1]).

    A value mismatch at kappa becomes a jump (repeated breakpoint).
    """
    if not (0.0 < kappa < 1.0):
        raise PreconditionError("need 0 < kappa < 1")
    lt = left.breakpoints * kappa
    rt = kappa + right.breakpoints * (1.0 - kappa)
    ts = np.concatenate([lt, rt])
    vs = np.concatenate([left.values, right.values])
    return _assemble(ts, vs, allow_jumps=True)
