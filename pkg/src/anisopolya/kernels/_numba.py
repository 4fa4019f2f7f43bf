"""Jitted kernels for the discretized quotient and its minimizer.

Mirror of kernels._numpy; the two backends must stay in lockstep.  The
discrete candidate is a nodal vector on a uniform grid, affine between
nodes; the weight is piecewise constant, so the denominator is summed
over merged cells that never straddle a weight breakpoint.
"""

import numpy as np
from numba import njit

NAME = "numba"

# the constant-shift polish stops chasing once the quotient is this small,
# and per call only needs to beat this fraction of the incoming value
POLISH_FLOOR = 1e-7
POLISH_FAC = 0.7


@njit(cache=True)
def _seg_mean_pow(A, B, p):
    """Exact mean of v^p on a cell where v runs affinely from A to B >= 0."""
    d = B - A
    mid = 0.5 * (A + B)
    if mid <= 0.0:
        return 0.0
    x = d / mid
    if abs(x) <= 1e-2:
        c2 = p * (p - 1.0) / 24.0
        c4 = p * (p - 1.0) * (p - 2.0) * (p - 3.0) / 1920.0
        return mid ** p * (1.0 + c2 * x * x + c4 * x ** 4)
    return (B ** (p + 1.0) - A ** (p + 1.0)) / ((p + 1.0) * d)


@njit(cache=True)
def num_den(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w):
    """Quotient numerator and denominator at a nodal candidate."""
    n = phi.shape[0] - 1
    num = 0.0
    for i in range(n):
        s = (phi[i + 1] - phi[i]) / h
        if s > 0.0:
            num += h * a_p * s ** p
        elif s < 0.0:
            num += h * b_p * (-s) ** p
    num += kappa * (phi[0] ** p + phi[n] ** p)
    den = 0.0
    for c in range(node.shape[0]):
        i = node[c]
        A = phi[i] * (1.0 - ul[c]) + phi[i + 1] * ul[c]
        B = phi[i] * (1.0 - ur[c]) + phi[i + 1] * ur[c]
        den += w[c] * ln[c] * _seg_mean_pow(A, B, p)
    return num, den


@njit(cache=True)
def quotient_and_grad(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
                      gnum, gden, grad):
    """Quotient value plus its exact nodal gradient (quotient rule)."""
    n = phi.shape[0] - 1
    num = 0.0
    for i in range(n + 1):
        gnum[i] = 0.0
        gden[i] = 0.0
    for i in range(n):
        s = (phi[i + 1] - phi[i]) / h
        if s > 0.0:
            num += h * a_p * s ** p
            wp = p * a_p * s ** (p - 1.0)
        elif s < 0.0:
            num += h * b_p * (-s) ** p
            wp = -p * b_p * (-s) ** (p - 1.0)
        else:
            wp = 0.0
        gnum[i] -= wp
        gnum[i + 1] += wp
    num += kappa * (phi[0] ** p + phi[n] ** p)
    gnum[0] += kappa * p * phi[0] ** (p - 1.0)
    gnum[n] += kappa * p * phi[n] ** (p - 1.0)
    den = 0.0
    for c in range(node.shape[0]):
        i = node[c]
        A = phi[i] * (1.0 - ul[c]) + phi[i + 1] * ul[c]
        B = phi[i] * (1.0 - ur[c]) + phi[i + 1] * ur[c]
        I = _seg_mean_pow(A, B, p)
        den += w[c] * ln[c] * I
        d = B - A
        mid = 0.5 * (A + B)
        if abs(d) > 1e-7 * (A + B + 1e-300):
            dIdB = (B ** p - I) / d
            dIdA = (I - A ** p) / d
        else:
            g = 0.5 * p * mid ** (p - 1.0) if mid > 0.0 else 0.0
            dIdB = g
            dIdA = g
        cl = w[c] * ln[c]
        gden[i] += (dIdA * (1.0 - ul[c]) + dIdB * (1.0 - ur[c])) * cl
        gden[i + 1] += (dIdA * ul[c] + dIdB * ur[c]) * cl
    R = num / den
    for i in range(n + 1):
        grad[i] = (gnum[i] - R * gden[i]) / den
    return R


@njit(cache=True)
def _shifted_quotient(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
                      slope_num, bb):
    """Quotient at phi + bb, reusing the shift-invariant slope cost."""
    n = phi.shape[0] - 1
    num = slope_num + kappa * ((phi[0] + bb) ** p + (phi[n] + bb) ** p)
    den = 0.0
    for c in range(node.shape[0]):
        i = node[c]
        A = phi[i] * (1.0 - ul[c]) + phi[i + 1] * ul[c] + bb
        B = phi[i] * (1.0 - ur[c]) + phi[i + 1] * ur[c] + bb
        den += w[c] * ln[c] * _seg_mean_pow(A, B, p)
    if den <= 0.0:
        return np.inf
    return num / den


@njit(cache=True)
def _shift_polish(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w, R, target):
    """Best constant shift within the nonnegativity range.

    Shifting by a constant leaves the slope cost alone and, for a
    sign-changing weight, moves the denominator, so this is the one
    direction plain descent crawls along.  Greedy doubling bracket per
    direction, restricted to shifts that keep every node positive
    without clipping; stops once the quotient reaches target.  Mutates
    phi in place and returns the new quotient.
    """
    n = phi.shape[0] - 1
    lo = phi[0]
    for i in range(n + 1):
        if phi[i] < lo:
            lo = phi[i]
    slope_num = 0.0
    for i in range(n):
        s = (phi[i + 1] - phi[i]) / h
        if s > 0.0:
            slope_num += h * a_p * s ** p
        elif s < 0.0:
            slope_num += h * b_p * (-s) ** p
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
        for i in range(n + 1):
            phi[i] += bestb
    return bestR


@njit(cache=True)
def descent(phi0, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
            max_iter, window, rtol, step0):
    """Projected descent on the nonnegative cone with secant stepping.

    Each iteration: secant (curvature-along-last-move) step size with a
    monotone halving safeguard, clip at zero, then the constant-shift
    polish, then renormalization to unit denominator.  The secant pair
    survives renormalization because the quotient is 0-homogeneous, so
    scaling the point by c scales its gradient by 1/c.  Stops when no
    halving helps or when the quotient stalls relative to itself over
    the trailing window.
    """
    n = phi0.shape[0] - 1
    phi = phi0.copy()
    for i in range(n + 1):
        if phi[i] < 0.0:
            phi[i] = 0.0
    num, den = num_den(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w)
    if den <= 0.0:
        # infeasible start; callers screen for this, but the two
        # backends can disagree on a knife-edge denominator
        return phi, np.inf, 0, False
    c = den ** (-1.0 / p)
    for i in range(n + 1):
        phi[i] *= c
    gnum = np.empty(n + 1)
    gden = np.empty(n + 1)
    grad = np.empty(n + 1)
    trial = np.empty(n + 1)
    prev_phi = np.empty(n + 1)
    prev_grad = np.empty(n + 1)
    R = quotient_and_grad(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
                          gnum, gden, grad)
    hist = np.full(window + 1, np.inf)
    hist[0] = R
    tau = step0
    have_pair = False
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        if have_pair:
            sy = 0.0
            yy = 0.0
            ss = 0.0
            for i in range(n + 1):
                dp = phi[i] - prev_phi[i]
                dg = grad[i] - prev_grad[i]
                sy += dp * dg
                yy += dg * dg
                ss += dp * dp
            if sy > 0.0 and yy > 0.0:
                tau = sy / yy          # short secant step: stable on stiff modes
            elif ss > 0.0 and sy > 0.0:
                tau = ss / sy
            else:
                tau *= 2.0
        for i in range(n + 1):
            prev_phi[i] = phi[i]
            prev_grad[i] = grad[i]
        accepted = False
        for _ in range(60):
            for i in range(n + 1):
                t = phi[i] - tau * grad[i]
                trial[i] = t if t > 0.0 else 0.0
            tn, td = num_den(trial, h, a_p, b_p, p, kappa, node, ul, ur, ln, w)
            if td > 0.0 and tn / td < R:
                for i in range(n + 1):
                    phi[i] = trial[i]
                R = tn / td
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            converged = True
            break
        if R > POLISH_FLOOR:
            target = POLISH_FAC * R
            if target < POLISH_FLOOR:
                target = POLISH_FLOOR
            R = _shift_polish(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
                              R, target)
        num, den = num_den(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w)
        c = den ** (-1.0 / p)
        for i in range(n + 1):
            phi[i] *= c
            prev_phi[i] *= c
            prev_grad[i] /= c
        R = quotient_and_grad(phi, h, a_p, b_p, p, kappa, node, ul, ur, ln, w,
                              gnum, gden, grad)
        have_pair = True
        hist[it % (window + 1)] = R
        old = hist[(it + 1) % (window + 1)]
        if it > window and (old - R) <= rtol * abs(old):
            converged = True
            break
    return phi, R, it, converged
