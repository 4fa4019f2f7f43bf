"""Brute-force oracle behavior: sampling, quadrature, finite differences."""

import numpy as np
import pytest

from anisopolya import AnisotropicNorm, PiecewiseAffine, PreconditionError
from anisopolya import oracle


def test_config_validation():
    with pytest.raises(PreconditionError):
        oracle.OracleConfig(samples=10)
    with pytest.raises(PreconditionError):
        oracle.OracleConfig(quadrature_points=16)
    with pytest.raises(PreconditionError):
        oracle.OracleConfig(fd_step=0.0)


def test_sampled_rearrangement_of_monotone_is_identity_like():
    # an already-decreasing function equals its decreasing rearrangement,
    # so sorted samples must track the function itself
    f = PiecewiseAffine([0.0, 0.4, 1.0], [1.0, 0.6, 0.0])
    cfg = oracle.OracleConfig(samples=20000, quadrature_points=256)
    vals = oracle.sampled_rearrangement(f, cfg, decreasing=True)
    assert oracle.step_sup_distance(vals, f) <= 10.0 * f.lipschitz / cfg.samples


def test_sampled_rearrangement_increasing_mode():
    f = PiecewiseAffine([0.0, 0.4, 1.0], [0.0, 0.6, 1.0])
    cfg = oracle.OracleConfig(samples=20000, quadrature_points=256)
    vals = oracle.sampled_rearrangement(f, cfg, decreasing=False)
    assert oracle.step_sup_distance(vals, f) <= 10.0 * f.lipschitz / cfg.samples


def test_quadrature_energy_tent_exact():
    f = PiecewiseAffine([0.0, 0.5, 1.0], [0.0, 1.0, 0.0])
    got = oracle.quadrature_energy(f, AnisotropicNorm(1.0, 2.0, 2.0),
                                   oracle.OracleConfig(quadrature_points=1024))
    assert got == pytest.approx(10.0, rel=1e-12)


def test_quadrature_energy_with_jump_excludes_jump():
    f = PiecewiseAffine([0.0, 0.5, 0.5, 1.0], [1.0, 0.0, 1.0, 0.0],
                        allow_jumps=True)
    # two falls of slope -2, each costing 2^2 * 1/2; the upward jump is free
    got = oracle.quadrature_energy(f, AnisotropicNorm(1.0, 1.0, 2.0),
                                   oracle.OracleConfig(quadrature_points=1024))
    assert got == pytest.approx(4.0, rel=1e-10)


def test_fd_gradient_quadratic():
    def obj(x):
        return float(x[0] ** 2 + 3.0 * x[1])

    g = oracle.fd_gradient(obj, np.array([2.0, 5.0]))
    assert g[0] == pytest.approx(4.0, rel=1e-7)
    assert g[1] == pytest.approx(3.0, rel=1e-9)


def test_fd_gradient_marks_failures_nan():
    def obj(x):
        if x[0] > 1.0:
            raise ValueError("outside")
        return float(x[0])

    g = oracle.fd_gradient(obj, np.array([1.0, 0.0]))
    assert np.isnan(g[0])
    assert g[1] == pytest.approx(0.0, abs=1e-9)
