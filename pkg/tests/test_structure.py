import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsvlab import ensemble, spectra, structure

PHI = (1 + math.sqrt(5)) / 2


def test_torus_examples():
    assert structure.torus_norm([0.5, 1.2]) == pytest.approx(math.sqrt(0.29), rel=1e-14)
    assert structure.torus_norm([3.0, -2.0, 0.0]) == 0.0
    assert structure.torus_norm([0.999]) == pytest.approx(0.001, rel=1e-12)


def dyadic_vectors(rng, n, scale=40):
    # dyadic rationals keep integer shifts exactly representable
    return rng.integers(-(1 << 20), 1 << 20, size=n) / float(1 << scale // 2)


def test_torus_invariants_exact_on_dyadic_grid():
    rng = np.random.default_rng(1234)
    for _ in range(300):
        n = int(rng.integers(1, 64))
        v = dyadic_vectors(rng, n)
        z = rng.integers(-10, 11, size=n).astype(float)
        assert structure.torus_norm(v + z) == structure.torus_norm(v)
        assert structure.torus_norm(v) <= math.sqrt(math.fsum((v * v).tolist()))


@settings(max_examples=60, deadline=None, derandomize=True)
@given(st.lists(st.floats(-100.0, 100.0), min_size=1, max_size=32))
def test_torus_bounded_by_half_lattice(vals):
    v = np.array(vals)
    t = structure.torus_norm(v)
    assert 0.0 <= t <= 0.5 * math.sqrt(len(vals)) + 1e-12
    assert t <= np.linalg.norm(v) + 1e-12


@pytest.mark.parametrize("n", [16, 25, 36])
def test_lcd_all_ones_found_by_sqrt_n(n):
    # theta = sqrt(n) is an exact lattice hit, so the scan must find the
    # direction by then; the definitional infimum is sqrt(n)/(1+gamma).
    v = np.full(n, n**-0.5)
    root = math.sqrt(n)
    assert structure.torus_norm(root * v) == pytest.approx(0.0, abs=1e-9)
    result = structure.lcd(structure.LcdQuery(v, theta_cap=10.0))
    assert result.found
    assert result.theta <= root
    assert result.theta == pytest.approx(root / 1.5, abs=1e-6)
    # Found(theta) invariant: the defining inequality holds at theta
    margin = structure._lcd_margin(structure.LcdQuery(v, theta_cap=10.0), np.array([result.theta]))
    assert margin[0] < 0.0


def golden_unit():
    v = np.array([1.0, PHI])
    return v / np.linalg.norm(v)


def test_lcd_golden_resists_below_dirichlet_crossing():
    # Margin frozen from the pilot run: at gamma = 0.1 nothing under theta = 2
    # approaches the lattice, while a larger cap reaches the Dirichlet regime
    # where every 2-vector is eventually found.
    v = golden_unit()
    tight = structure.lcd(structure.LcdQuery(v, theta_cap=2.0, gamma=0.1))
    assert not tight.found
    assert tight.certificate_gap == pytest.approx(0.0225, abs=2e-3)
    wide = structure.lcd(structure.LcdQuery(v, theta_cap=50.0, gamma=0.1))
    assert wide.found
    assert wide.theta == pytest.approx(2.15017, abs=1e-4)


def test_lcd_no_earlier_scanned_theta_qualified():
    # monotonicity certificate: every grid point below the found theta has
    # nonnegative margin
    n = 16
    v = np.full(n, n**-0.5)
    q = structure.LcdQuery(v, theta_cap=10.0)
    result = structure.lcd(q)
    assert result.found
    step = q.grid_step
    prefix = step * np.arange(1, int(result.theta / step) + 1)
    prefix = prefix[prefix < result.theta - 1e-12]
    margins = structure._lcd_margin(q, prefix)
    assert np.all(margins >= 0.0)


def test_lcd_empty_scan():
    result = structure.lcd(structure.LcdQuery(golden_unit(), theta_cap=0.0))
    assert not result.found
    assert result.empty_scan
    assert result.certificate_gap == math.inf


def test_lcd_budget_error_carries_partial():
    q = structure.LcdQuery(np.ones(100) / 10.0, theta_cap=1e4)
    with pytest.raises(structure.LcdBudgetError) as err:
        structure.lcd(q, max_evaluations=1000)
    assert err.value.partial.scanned == 10


def test_lcd_query_validation():
    with pytest.raises(ValueError):
        structure.LcdQuery(np.array([1.0, 1.0]), theta_cap=1.0)  # not unit
    with pytest.raises(ValueError):
        structure.LcdQuery(np.array([1.0]), theta_cap=1.0, gamma=1.5)
    with pytest.raises(ValueError):
        structure.LcdQuery(np.array([1.0]), theta_cap=1.0, grid_step=0.5)


def test_char_fn_examples():
    rad = ensemble.rademacher()
    gau = ensemble.standard_gaussian()
    assert structure.char_fn_exact(rad, [math.pi / 2, 0.3]) == pytest.approx(0.0, abs=1e-15)
    assert structure.char_fn_exact(gau, [1.0, 1.0]) == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert structure.char_fn_exact(rad, [0.0, 0.0]) == 1.0


def test_char_fn_range_and_periodicity():
    rad = ensemble.rademacher()
    rng = np.random.default_rng(3)
    for _ in range(100):
        u = rng.uniform(-5, 5, size=8)
        val = structure.char_fn_exact(rad, u)
        assert 0.0 <= val <= 1.0
        shifted = u + 2.0 * math.pi * rng.integers(-3, 4, size=8)
        assert structure.char_fn_exact(rad, shifted) == pytest.approx(val, abs=1e-10)


def test_char_fn_discrete_matches_enumeration():
    s = math.sqrt(2.0)
    dist = ensemble.discrete_symmetric((-s, 0.0, s), (0.25, 0.5, 0.25))
    u = np.array([0.4, -1.3])
    expect = abs(0.5 + 0.5 * math.cos(s * 0.4)) * abs(0.5 + 0.5 * math.cos(s * 1.3))
    assert structure.char_fn_exact(dist, u) == pytest.approx(expect, rel=1e-12)


def test_char_bound_small_u():
    # cos t <= exp(-c0 t^2) for |t| <= 0.1 at c0 = 0.1, so the product bound holds.
    rad = ensemble.rademacher()
    rng = np.random.default_rng(8)
    for _ in range(200):
        u = rng.uniform(-0.1, 0.1, size=int(rng.integers(1, 40)))
        assert structure.char_fn_bound_check(rad, u, 0.1)


def test_char_bound_boundary_cases():
    rad = ensemble.rademacher()
    assert structure.char_fn_bound_check(rad, np.zeros(4), 0.5)
    assert structure.char_fn_bound_check(rad, np.full(6, 2.0 * math.pi), 0.5)
    with pytest.raises(ValueError):
        structure.char_fn_bound_check(rad, np.zeros(2), 0.0)


def test_flatness_explicit_kernel():
    vals = structure.flatness(np.array([[1.0, 0.0]]), 1)
    assert vals[0] == pytest.approx(1.0, abs=1e-14)  # kernel (0, 1)
    assert len(vals) == 2


def test_flatness_planted_spike():
    # kill the last coordinate direction: kernel is exactly e_n
    rng = np.random.default_rng(21)
    mstar = rng.standard_normal((19, 20))
    mstar[:, -1] = 0.0
    vals = structure.flatness(mstar, 2)
    assert vals[0] == pytest.approx(1.0, abs=1e-12)


def test_flatness_random_kernels_are_flat():
    # pilot over 100 seeds: 93% of trials keep every sup norm below
    # n^{-1/4} ~ 0.266 at n = 200 (median max-norm 0.23); assert with margin
    dist = ensemble.standard_gaussian()
    below = 0
    for trial in range(100):
        m = ensemble.sample_matrix(dist, 199, 200, 31, trial)
        vals = structure.flatness(m.entries, 3)
        below += bool(np.all(vals < 200**-0.25))
    assert below >= 85


def test_flatness_degenerate_kernel_raises():
    a = np.zeros((2, 3))
    a[0, 0] = 1.0
    with pytest.raises(spectra.DegenerateKernelError):
        structure.flatness(a, 1)
