"""Core piecewise-affine machinery: validation, evaluation, exact integrals."""

import numpy as np
import pytest

from anisopolya import (AnisotropicNorm, DomainError, InfeasibleError,
                        PiecewiseAffine, PreconditionError, WeightFunction,
                        anisotropic_energy, derivative_segments, evaluate,
                        is_monotone, p_derivative_norm, weighted_p_integral)
from anisopolya.pwa import (_segment_p_mean, concat_scaled, reverse,
                            restrict_rescaled, _one_sided_value)
from anisopolya import oracle


def tent():
    return PiecewiseAffine([0.0, 0.5, 1.0], [0.0, 1.0, 0.0])


def skew():
    return PiecewiseAffine([0.0, 0.5, 1.0], [0.5, 1.0, 0.0])


# ---------------------------------------------------------------- validation

def test_breakpoints_must_span_unit_interval():
    with pytest.raises(PreconditionError):
        PiecewiseAffine([0.1, 1.0], [0.0, 1.0])
    with pytest.raises(PreconditionError):
        PiecewiseAffine([0.0, 0.9], [0.0, 1.0])


def test_tiny_gap_rejected_not_merged():
    with pytest.raises(PreconditionError):
        PiecewiseAffine([0.0, 0.5, 0.5 + 1e-13, 1.0], [0.0, 1.0, 1.0, 0.0])


def test_decreasing_breakpoints_rejected():
    with pytest.raises(PreconditionError):
        PiecewiseAffine([0.0, 0.6, 0.4, 1.0], [0.0, 1.0, 1.0, 0.0])


def test_jump_needs_flag():
    with pytest.raises(PreconditionError):
        PiecewiseAffine([0.0, 0.5, 0.5, 1.0], [1.0, 0.25, 0.5, 0.5])
    f = PiecewiseAffine([0.0, 0.5, 0.5, 1.0], [1.0, 0.25, 0.5, 0.5],
                        allow_jumps=True)
    assert f.has_jumps


def test_triple_repeat_rejected():
    with pytest.raises(PreconditionError):
        PiecewiseAffine([0.0, 0.5, 0.5, 0.5, 1.0], [1.0, 0.5, 0.3, 0.2, 0.0],
                        allow_jumps=True)


def test_nonfinite_rejected():
    with pytest.raises(PreconditionError):
        PiecewiseAffine([0.0, 1.0], [0.0, np.inf])


def test_norm_validation():
    with pytest.raises(PreconditionError):
        AnisotropicNorm(0.0, 1.0, 2.0)
    with pytest.raises(PreconditionError):
        AnisotropicNorm(1.0, -1.0, 2.0)
    with pytest.raises(PreconditionError):
        AnisotropicNorm(1.0, 1.0, 1.0)


def test_weight_needs_positive_piece():
    with pytest.raises(InfeasibleError):
        WeightFunction([0.0, 0.5, 1.0], [-1.0, 0.0])
    w = WeightFunction([0.0, 0.5, 1.0], [1.0, -1.0])
    assert w.piece_values_at(0.25) == 1.0
    assert w.piece_values_at(0.75) == -1.0


# ---------------------------------------------------------------- evaluation

def test_evaluate_exact_at_breakpoints_and_between():
    f = skew()
    assert evaluate(f, 0.0) == 0.5
    assert evaluate(f, 0.5) == 1.0
    assert evaluate(f, 1.0) == 0.0
    assert evaluate(f, 0.25) == pytest.approx(0.75, abs=1e-15)
    got = evaluate(f, np.array([0.0, 0.5, 1.0]))
    assert np.allclose(got, [0.5, 1.0, 0.0], atol=0.0)


def test_evaluate_domain_error():
    with pytest.raises(DomainError):
        evaluate(tent(), -0.01)
    with pytest.raises(DomainError):
        evaluate(tent(), 1.01)


def test_evaluate_jump_is_right_continuous():
    f = PiecewiseAffine([0.0, 0.5, 0.5, 1.0], [1.0, 0.25, 0.5, 0.5],
                        allow_jumps=True)
    assert evaluate(f, 0.5) == 0.5
    assert _one_sided_value(f, 0.5, "left") == 0.25
    assert _one_sided_value(f, 0.5, "right") == 0.5
    assert evaluate(f, 1.0) == 0.5


def test_derivative_segments_skip_jumps():
    f = PiecewiseAffine([0.0, 0.5, 0.5, 1.0], [1.0, 0.25, 0.5, 0.5],
                        allow_jumps=True)
    segs = derivative_segments(f)
    assert len(segs) == 2
    assert segs[0].slope == pytest.approx(-1.5)
    assert segs[1].slope == 0.0


# ---------------------------------------------------------------- energies

def test_tent_energy_closed_form():
    # slopes are +2 then -2, each on length 1/2:
    # 1^2 * 2^2 * 1/2 + 2^2 * 2^2 * 1/2 = 2 + 8
    assert anisotropic_energy(tent(), AnisotropicNorm(1.0, 2.0, 2.0)) == pytest.approx(10.0, rel=1e-14)


def test_line_energy_uses_fall_weight():
    # pure fall with slope -1: b^p * 1
    f = PiecewiseAffine([0.0, 1.0], [1.0, 0.0])
    assert anisotropic_energy(f, AnisotropicNorm(2.0, 3.0, 2.0)) == pytest.approx(9.0, rel=1e-14)


def test_p_derivative_norm_tent():
    assert p_derivative_norm(tent(), 2.0) == pytest.approx(4.0, rel=1e-14)
    with pytest.raises(PreconditionError):
        p_derivative_norm(tent(), 1.0)


def test_energy_matches_quadrature_oracle():
    rng = np.random.default_rng(7)
    cfg = oracle.OracleConfig(samples=1000, quadrature_points=4096)
    for _ in range(25):
        k = rng.integers(1, 9)
        bp = np.concatenate([[0.0], np.sort(rng.uniform(0.02, 0.98, k)), [1.0]])
        if np.any(np.diff(bp) < 1e-6):
            continue
        vv = rng.uniform(0.0, 1.0, k + 2)
        f = PiecewiseAffine(bp, vv)
        norm = AnisotropicNorm(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0),
                               rng.uniform(1.2, 3.0))
        exact = anisotropic_energy(f, norm)
        quad = oracle.quadrature_energy(f, norm, cfg)
        assert quad == pytest.approx(exact, rel=1e-10, abs=1e-12)


# ---------------------------------------------------------------- monotone

def test_is_monotone_buckets():
    assert is_monotone(tent()) == "none"
    assert is_monotone(PiecewiseAffine([0.0, 1.0], [0.0, 1.0])) == "increasing"
    assert is_monotone(PiecewiseAffine([0.0, 0.5, 1.0], [1.0, 0.5, 0.5]), tol=0.0) == "decreasing"
    assert is_monotone(PiecewiseAffine([0.0, 1.0], [0.3, 0.3])) == "constant"


def test_is_monotone_tolerance_flattens_small_slopes():
    f = PiecewiseAffine([0.0, 0.5, 1.0], [0.0, 1.0, 1.0 - 1e-9])
    assert is_monotone(f) == "none"
    assert is_monotone(f, tol=1e-6) == "increasing"


def test_is_monotone_counts_jumps():
    f = PiecewiseAffine([0.0, 0.5, 0.5, 1.0], [0.0, 0.2, 0.1, 0.3],
                        allow_jumps=True)
    assert is_monotone(f) == "none"
    g = PiecewiseAffine([0.0, 0.5, 0.5, 1.0], [0.0, 0.2, 0.4, 0.6],
                        allow_jumps=True)
    assert is_monotone(g) == "increasing"


# ---------------------------------------------------------------- integrals

def test_segment_p_mean_exact_and_series_agree():
    # quadratic: mean of t^2 over [A, B] is (A^2 + AB + B^2) / 3
    assert _segment_p_mean(0.0, 1.0, 2.0) == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert _segment_p_mean(2.0, 2.0, 3.0) == pytest.approx(8.0, rel=1e-14)
    # just inside the series branch: must match the closed form to full depth
    p = 1.7
    A, B = 1.0, 1.0 + 0.99e-2
    closed = (B ** (p + 1.0) - A ** (p + 1.0)) / ((p + 1.0) * (B - A))
    assert _segment_p_mean(A, B, p) == pytest.approx(closed, rel=1e-12)


def test_weighted_p_integral_tent_unit_weight():
    # integral of tent^2 = 2 * int_0^{1/2} (2t)^2 dt = 1/3
    m = WeightFunction([0.0, 1.0], [1.0])
    assert weighted_p_integral(tent(), m, 2.0) == pytest.approx(1.0 / 3.0, rel=1e-14)


def test_weighted_p_integral_sign_changing():
    # tent is symmetric, weight +1/-1 on halves: halves cancel exactly
    m = WeightFunction([0.0, 0.5, 1.0], [1.0, -1.0])
    assert weighted_p_integral(tent(), m, 2.0) == pytest.approx(0.0, abs=1e-15)


def test_weighted_p_integral_rejects_negative_function():
    m = WeightFunction([0.0, 1.0], [1.0])
    f = PiecewiseAffine([0.0, 1.0], [-0.5, 1.0])
    with pytest.raises(PreconditionError):
        weighted_p_integral(f, m, 2.0)


def test_weighted_p_integral_matches_quadrature():
    rng = np.random.default_rng(11)
    cfg = oracle.OracleConfig(samples=1000, quadrature_points=8192)
    for _ in range(20):
        k = rng.integers(1, 8)
        bp = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, k)), [1.0]])
        if np.any(np.diff(bp) < 1e-6):
            continue
        f = PiecewiseAffine(bp, rng.uniform(0.0, 2.0, k + 2))
        mb = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 0.9, 2)), [1.0]])
        if np.any(np.diff(mb) < 1e-6):
            continue
        m = WeightFunction(mb, rng.uniform(-1.0, 2.0, 3) + np.array([0.5, 0.0, 0.0]))
        for p in (1.5, 2.0, 3.0):
            exact = weighted_p_integral(f, m, p)
            quad = oracle.quadrature_weighted_p(f, m, p, cfg)
            assert quad == pytest.approx(exact, rel=1e-9, abs=1e-9)


# ---------------------------------------------------------------- surgery

def test_reverse_reflects():
    f = skew()
    g = reverse(f)
    for t in np.linspace(0.0, 1.0, 17):
        assert evaluate(g, t) == pytest.approx(evaluate(f, 1.0 - t), abs=1e-12)
    assert np.array_equal(reverse(g).breakpoints, f.breakpoints)
    assert np.array_equal(reverse(g).values, f.values)


def test_restrict_rescaled_halves():
    f = skew()
    left = restrict_rescaled(f, 0.0, 0.5)
    assert np.allclose(left.breakpoints, [0.0, 1.0])
    assert np.allclose(left.values, [0.5, 1.0])
    right = restrict_rescaled(f, 0.5, 1.0)
    assert np.allclose(right.values, [1.0, 0.0])


def test_restrict_takes_inside_limits_at_jump():
    f = PiecewiseAffine([0.0, 0.5, 0.5, 1.0], [1.0, 0.25, 0.5, 0.75],
                        allow_jumps=True)
    left = restrict_rescaled(f, 0.0, 0.5)
    assert evaluate(left, 1.0) == pytest.approx(0.25)
    right = restrict_rescaled(f, 0.5, 1.0)
    assert evaluate(right, 0.0) == pytest.approx(0.5)


def test_concat_scaled_makes_jump():
    left = PiecewiseAffine([0.0, 1.0], [1.0, 0.25])
    right = PiecewiseAffine([0.0, 1.0], [0.5, 0.25])
    f = concat_scaled(left, right, 0.5)
    assert f.has_jumps
    assert evaluate(f, 0.5) == pytest.approx(0.5)
    assert _one_sided_value(f, 0.5, "left") == pytest.approx(0.25)


def test_roundtrip_dicts():
    f = skew()
    g = PiecewiseAffine.from_dict(f.to_dict())
    assert np.array_equal(g.breakpoints, f.breakpoints)
    n = AnisotropicNorm(1.5, 0.5, 2.5)
    assert AnisotropicNorm.from_dict(n.to_dict()) == n
    with pytest.raises(PreconditionError):
        PiecewiseAffine.from_dict({"breakpoints": [0, 1]})
