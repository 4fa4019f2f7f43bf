"""Bands, distribution functions, and exact monotone rearrangements."""

import numpy as np
import pytest

from anisopolya import BandBoundaryError, PiecewiseAffine, is_monotone
from anisopolya import oracle
from anisopolya.pwa import WeightFunction, evaluate
from anisopolya.rearrange import (band_decomposition, critical_values,
                                  decreasing_rearrangement, distribution,
                                  increasing_rearrangement, level_preimages,
                                  rearranged_weight, superlevel_measure)


def tent():
    return PiecewiseAffine([0.0, 0.5, 1.0], [0.0, 1.0, 0.0])


def skew():
    return PiecewiseAffine([0.0, 0.5, 1.0], [0.5, 1.0, 0.0])


def random_pwa(rng, pieces=8, vmax=1.0):
    while True:
        k = int(rng.integers(1, pieces))
        bp = np.concatenate([[0.0], np.sort(rng.uniform(0.0, 1.0, k)), [1.0]])
        if np.all(np.diff(bp) > 1e-4):
            return PiecewiseAffine(bp, rng.uniform(0.0, vmax, k + 2))


# ------------------------------------------------------------- level sets

def test_superlevel_measure_tent():
    f = tent()
    assert superlevel_measure(f, 0.5) == pytest.approx(0.5, abs=1e-15)
    assert superlevel_measure(f, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert superlevel_measure(f, 1.0) == 0.0
    assert superlevel_measure(f, 1.0, strict=False) == 0.0
    assert superlevel_measure(f, 0.0, strict=False) == 1.0


def test_superlevel_measure_plateau():
    f = PiecewiseAffine([0.0, 0.25, 0.75, 1.0], [0.0, 1.0, 1.0, 0.0])
    assert superlevel_measure(f, 1.0) == 0.0
    assert superlevel_measure(f, 1.0, strict=False) == pytest.approx(0.5)


def test_critical_values_cluster():
    f = PiecewiseAffine([0.0, 0.3, 0.6, 1.0], [0.0, 0.5, 0.5 + 1e-14, 1.0])
    crit = critical_values(f)
    assert crit.size == 3
    assert crit[1] == 0.5


# ------------------------------------------------------------ distribution

def test_distribution_skew_worked_values():
    # skew has one falling crossing below 0.5 and a rising+falling pair
    # above, so the measure falls at rate 1/2 then 3/2
    mu = distribution(skew())
    assert mu(0.25) == pytest.approx(1.0 - 0.25 / 2.0, abs=1e-14)
    assert mu(0.75) == pytest.approx(1.5 * (1.0 - 0.75), abs=1e-14)
    assert mu(0.5) == pytest.approx(0.75, abs=1e-14)
    assert mu(-0.2) == 1.0
    assert mu(1.0) == 0.0
    assert mu(2.0) == 0.0


def test_distribution_constant_function():
    f = PiecewiseAffine([0.0, 1.0], [0.3, 0.3])
    mu = distribution(f)
    assert mu(0.2999) == 1.0
    assert mu(0.3) == 0.0
    assert mu(0.5) == 0.0


def test_distribution_tent():
    mu = distribution(tent())
    for lam in (0.1, 0.5, 0.9):
        assert mu(lam) == pytest.approx(1.0 - lam, abs=1e-14)


# ---------------------------------------------------------------- branches

def test_level_preimages_tent():
    br = level_preimages(tent(), 0.5)
    assert len(br) == 2
    assert br[0].sign == 1 and br[1].sign == -1
    assert br[0].rho == pytest.approx(0.25)
    assert br[1].rho == pytest.approx(0.75)
    assert br[0].slope == pytest.approx(2.0)


def test_level_preimages_boundary_error():
    with pytest.raises(BandBoundaryError):
        level_preimages(tent(), 1.0)
    with pytest.raises(BandBoundaryError):
        level_preimages(skew(), 0.5)
    assert level_preimages(tent(), 1.5) == []


def test_band_decomposition_tent():
    bands = band_decomposition(tent())
    assert len(bands) == 1
    b = bands[0]
    assert (b.lo, b.hi) == (0.0, 1.0)
    assert b.count == 2
    assert b.orientation == "rising"
    assert b.preimage_measure == pytest.approx(1.0, abs=1e-12)
    assert b.image_measure == pytest.approx(1.0, abs=1e-12)


def test_band_decomposition_skew():
    bands = band_decomposition(skew())
    assert len(bands) == 2
    low, high = bands
    assert low.count == 1 and low.orientation == "falling"
    assert high.count == 2 and high.orientation == "rising"
    assert low.preimage_measure == pytest.approx(0.25, abs=1e-12)
    assert high.preimage_measure == pytest.approx(0.75, abs=1e-12)


def test_band_outside_boundary_range_even_count():
    # dips below both boundary values, rises above both
    f = PiecewiseAffine([0.0, 0.25, 0.5, 0.75, 1.0],
                        [0.5, 1.0, 0.2, 0.8, 0.3])
    for band in band_decomposition(f):
        outside = band.lo >= 0.5 or band.hi <= 0.3
        if outside:
            assert band.count % 2 == 0


# ---------------------------------------------------------- rearrangements

def test_decreasing_rearrangement_tent_exact():
    g = decreasing_rearrangement(tent())
    assert np.allclose(g.breakpoints, [0.0, 1.0], atol=0.0)
    assert np.allclose(g.values, [1.0, 0.0], atol=0.0)


def test_decreasing_rearrangement_skew_exact():
    # derived by hand from the band slopes: one falling branch of slope 2
    # below level 1/2, branches {2, -2} above, so the rearrangement falls
    # at rate 2/3 on (0, 3/4) and rate 2 on (3/4, 1)
    g = decreasing_rearrangement(skew())
    assert np.allclose(g.breakpoints, [0.0, 0.75, 1.0], atol=1e-14)
    assert np.allclose(g.values, [1.0, 0.5, 0.0], atol=1e-14)


def test_increasing_is_reflected_decreasing():
    f = skew()
    up = increasing_rearrangement(f)
    dn = decreasing_rearrangement(f)
    for x in np.linspace(0.0, 1.0, 33):
        assert evaluate(up, x) == pytest.approx(evaluate(dn, 1.0 - x), abs=1e-12)
    assert is_monotone(up) in ("increasing", "constant")


def test_plateau_becomes_flat_piece():
    f = PiecewiseAffine([0.0, 0.25, 0.75, 1.0], [0.0, 1.0, 1.0, 0.0])
    g = decreasing_rearrangement(f)
    assert np.allclose(g.breakpoints, [0.0, 0.5, 1.0], atol=1e-14)
    assert np.allclose(g.values, [1.0, 1.0, 0.0], atol=1e-14)


def test_rearrangement_of_monotone_is_itself():
    f = PiecewiseAffine([0.0, 0.4, 1.0], [0.9, 0.5, 0.1])
    g = decreasing_rearrangement(f)
    for x in np.linspace(0.0, 1.0, 41):
        assert evaluate(g, x) == pytest.approx(evaluate(f, x), abs=1e-12)


def test_equimeasurability_random_battery():
    rng = np.random.default_rng(23)
    for _ in range(100):
        f = random_pwa(rng)
        g = decreasing_rearrangement(f)
        u = increasing_rearrangement(f)
        lo, hi = f.value_range()
        for lam in rng.uniform(lo - 0.05, hi + 0.05, 20):
            mf = superlevel_measure(f, lam)
            assert superlevel_measure(g, lam) == pytest.approx(mf, abs=1e-10)
            assert superlevel_measure(u, lam) == pytest.approx(mf, abs=1e-10)
        assert is_monotone(g) in ("decreasing", "constant")
        assert g.value_range() == pytest.approx(f.value_range(), abs=1e-12)


def test_rearrangement_matches_sampling_oracle():
    rng = np.random.default_rng(31)
    cfg = oracle.OracleConfig(samples=50000, quadrature_points=256)
    for _ in range(10):
        f = random_pwa(rng)
        g = decreasing_rearrangement(f)
        step = oracle.sampled_rearrangement(f, cfg, decreasing=True)
        bound = 10.0 * max(f.lipschitz, 1.0) / cfg.samples
        assert oracle.step_sup_distance(step, g) <= bound


def test_jump_function_rearranges():
    f = PiecewiseAffine([0.0, 0.5, 0.5, 1.0], [1.0, 0.25, 0.5, 0.5],
                        allow_jumps=True)
    g = decreasing_rearrangement(f)
    assert is_monotone(g) == "decreasing"
    for lam in (0.3, 0.45, 0.75, 0.9):
        assert superlevel_measure(g, lam) == pytest.approx(
            superlevel_measure(f, lam), abs=1e-12)


def test_rearranged_weight_sorts_pieces():
    m = WeightFunction([0.0, 0.25, 0.5, 1.0], [-1.0, 2.0, 0.5])
    dn = rearranged_weight(m, decreasing=True)
    assert np.allclose(dn.values, [2.0, 0.5, -1.0])
    assert np.allclose(dn.breakpoints, [0.0, 0.25, 0.75, 1.0])
    up = rearranged_weight(m, decreasing=False)
    assert np.allclose(up.values, [-1.0, 0.5, 2.0])
