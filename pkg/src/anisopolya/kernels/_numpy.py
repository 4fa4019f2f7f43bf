"""Pure-numpy kernels for the discretized quotient and its minimizer.

Mirror of kernels._numba; the two backends must stay in lockstep.  Any
behavioral change there must land here too.  Scatter sums use add.at,
which accumulates in index order, so results track the jitted loops up
to summation rounding.
"""

import numpy as np

NAME = "numpy"

POLISH_FLOOR = 1e-7
POLISH_FAC = 0.7


def _seg_mean_pow_vec(A, B, p):
    """Vectorized exact mean of v^p on cells running affinely A -> B >= 0."""
    mid = 0.5 * (A + B)
    d = B - A
    out = np.zeros_like(mid)
    pos = mid > 0.0
    if not np.any(pos):
        return out
    midp = mid[pos]
    dp_ = d[pos]
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
        Ap = A[pos][far]
        Bp = B[pos][far]
        res[far] = (Bp ** (p + 1.0) - Ap ** (p + 1.0)) / ((p + 1.0) * dp_[far])
    out[pos] = res
    return out


def _cell_values(phi, node, ul, ur):
    A = phi[node] * (1.0 - ul) + phi[node + 1] * ul
    B = phi[node] * (1.0 - ur) + phi[node + 1] * ur
    return A, B


def num_den(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w):
    """Quotient numerator and denominator at a nodal candidate."""
    s = np.diff(phi) / h
    up = np.maximum(s, 0.0)
    dn = np.maximum(-s, 0.0)
    num = h * float(np.sum(a_p * up ** p + b_p * dn ** p))
    num += kappa * (phi[0] ** p + phi[-1] ** p)
    A, B = _cell_values(phi, node, ul, ur)
    den = float(np.sum(w * ln * _seg_mean_pow_vec(A, B, p)))
    return num, den


def quotient_and_grad(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
                      gnum=None, gden=None, grad=None):
    """Quotient value plus its exact nodal gradient (quotient rule)."""
    n = phi.shape[0] - 1
    if gnum is None:
        gnum = np.empty(n + 1)
    if gden is None:
        gden = np.empty(n + 1)
    if grad is None:
        grad = np.empty(n + 1)
    s = np.diff(phi) / h
    up = np.maximum(s, 0.0)
    dn = np.maximum(-s, 0.0)
    num = h * float(np.sum(a_p * up ** p + b_p * dn ** p))
    num += kappa * (phi[0] ** p + phi[-1] ** p)
    wp = np.where(s > 0.0, p * a_p * up ** (p - 1.0),
                  np.where(s < 0.0, -p * b_p * dn ** (p - 1.0), 0.0))
    gnum[:] = 0.0
    gnum[:-1] -= wp
    gnum[1:] += wp
    gnum[0] += kappa * p * phi[0] ** (p - 1.0)
    gnum[n] += kappa * p * phi[n] ** (p - 1.0)
    A, B = _cell_values(phi, node, ul, ur)
    I = _seg_mean_pow_vec(A, B, p)
    cl = w * ln
    den = float(np.sum(cl * I))
    d = B - A
    mid = 0.5 * (A + B)
    wide = np.abs(d) > 1e-7 * (A + B + 1e-300)
    safe_d = np.where(wide, d, 1.0)
    g_near = np.where(mid > 0.0, 0.5 * p * mid ** (p - 1.0), 0.0)
    dIdB = np.where(wide, (B ** p - I) / safe_d, g_near)
    dIdA = np.where(wide, (I - A ** p) / safe_d, g_near)
    gden[:] = 0.0
    np.add.at(gden, node, (dIdA * (1.0 - ul) + dIdB * (1.0 - ur)) * cl)
    np.add.at(gden, node + 1, (dIdA * ul + dIdB * ur) * cl)
    R = num / den
    grad[:] = (gnum - R * gden) / den
    return R


def _shifted_quotient(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
                      slope_num, bb):
    """Quotient at phi + bb, reusing the shift-invariant slope cost."""
    num = slope_num + kappa * ((phi[0] + bb) ** p + (phi[-1] + bb) ** p)
    A, B = _cell_values(phi, node, ul, ur)
    den = float(np.sum(w * ln * _seg_mean_pow_vec(A + bb, B + bb, p)))
    if den <= 0.0:
        return np.inf
    return num / den


def _shift_polish(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w, R, target):
    """Best constant shift within the nonnegativity range; see _numba twin."""
    lo = float(np.min(phi))
    s = np.diff(phi) / h
    up = np.maximum(s, 0.0)
    dn = np.maximum(-s, 0.0)
    slope_num = h * float(np.sum(a_p * up ** p + b_p * dn ** p))
    scale = 1.0 + abs(phi[0])
    bestb = 0.0
    bestR = R
    for sgn in (1.0, -1.0):
        b = 0.125 * scale
        improved_this_sign = False
        for _ in range(60):
            bb = sgn * b
            if bb <= -lo:
                break
            Rt = _shifted_quotient(phi, h, a_p, b_p, p, kappa, node, ul, ur,
                                   ln, w, slope_num, bb)
            if Rt < bestR:
                bestR = Rt
                bestb = bb
                improved_this_sign = True
                if bestR <= target:
                    break
                b *= 2.0
            else:
                break
        if improved_this_sign:
            break
    if bestb != 0.0:
        phi += bestb
    return bestR


def descent(phi0, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
            max_iter, window, rtol, step0):
    """Projected descent on the nonnegative cone; see the _numba twin."""
    phi = np.maximum(phi0, 0.0)
    num, den = num_den(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w)
    if den <= 0.0:
        # infeasible start; callers screen for this, but the two
        # backends can disagree on a knife-edge denominator
        return phi, np.inf, 0, False
    phi = phi * den ** (-1.0 / p)
    gnum = np.empty_like(phi)
    gden = np.empty_like(phi)
    grad = np.empty_like(phi)
    R = quotient_and_grad(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
                          gnum, gden, grad)
    hist = np.full(window + 1, np.inf)
    hist[0] = R
    tau = step0
    have_pair = False
    prev_phi = np.empty_like(phi)
    prev_grad = np.empty_like(phi)
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        if have_pair:
            dp = phi - prev_phi
            dg = grad - prev_grad
            sy = float(np.dot(dp, dg))
            yy = float(np.dot(dg, dg))
            ss = float(np.dot(dp, dp))
            if sy > 0.0 and yy > 0.0:
                tau = sy / yy
            elif ss > 0.0 and sy > 0.0:
                tau = ss / sy
            else:
                tau *= 2.0
        prev_phi[:] = phi
        prev_grad[:] = grad
        accepted = False
        for _ in range(60):
            trial = np.maximum(phi - tau * grad, 0.0)
            tn, td = num_den(trial, h, a_p, b_p, p, kappa, node, ul, ur, ln, w)
            if td > 0.0 and tn / td < R:
                phi = trial
                R = tn / td
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            converged = True
            break
        if R > POLISH_FLOOR:
            target = max(POLISH_FAC * R, POLISH_FLOOR)
            R = _shift_polish(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
                              R, target)
        num, den = num_den(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w)
        c = den ** (-1.0 / p)
        phi = phi * c
        prev_phi *= c
        prev_grad /= c
        R = quotient_and_grad(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
                              gnum, gden, grad)
        have_pair = True
        hist[it % (window + 1)] = R
        old = hist[(it + 1) % (window + 1)]
        if it > window and (old - R) <= rtol * abs(old):
            converged = True
            break
    return phi, R, it, converged
