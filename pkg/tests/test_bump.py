import math

import numpy as np
import pytest

from lsvlab import bump


def test_base_profile_values():
    assert bump.psihat_base(0.0) == pytest.approx(math.exp(-1.0), rel=1e-15)
    assert bump.psihat_base(0.5) == 0.0
    assert bump.psihat_base(-0.5) == 0.0
    assert bump.psihat_base(0.25) == pytest.approx(math.exp(-4.0 / 3.0), rel=1e-15)
    assert bump.psihat_base(2.0) == 0.0


def test_base_continuous_at_boundary():
    assert bump.psihat_base(0.4999999) < 1e-200


def test_psihat_support_and_unit_peak():
    assert bump.psihat(1.0) == 0.0
    assert bump.psihat(-1.2) == 0.0
    assert bump.psihat(0.0) == pytest.approx(1.0, abs=1e-9)


def test_psihat_symmetry():
    for x in (0.1, 0.37, 0.8):
        assert bump.psihat(x) == pytest.approx(bump.psihat(-x), abs=1e-12)


def test_psihat_scalar_vs_grid_path():
    xs = np.array([0.05, 0.3, 0.62, 0.9])
    grid_vals = bump._psihat_grid_values(xs)
    for x, g in zip(xs, grid_vals):
        assert bump.psihat(float(x)) == pytest.approx(g, abs=1e-9)


def test_psi_positive_at_zero_and_decaying():
    assert bump.psi(0.0) == pytest.approx(0.7406125730609927, rel=1e-10)
    assert bump.psi(0.0) > bump.psi(1.0) > bump.psi(2.0) > 0.0


def test_psi_even():
    for x in (0.4, 1.7, 9.0):
        assert bump.psi(x) == pytest.approx(bump.psi(-x), abs=1e-12)


def test_decay_certificate_positive_and_example_point():
    c = bump.decay_certificate(50.0, 0.05)
    assert c > 0.0
    assert bump.psi(10.0) <= math.exp(-c * math.sqrt(11.0))


def test_decay_certificate_monotone_in_domain():
    # a smaller grid imposes fewer constraints, so the fitted c cannot drop
    c_small = bump.decay_certificate(10.0, 0.1)
    c_large = bump.decay_certificate(40.0, 0.1)
    assert c_small >= c_large


def test_decay_certificate_stable_under_refinement():
    c1 = bump.decay_certificate(50.0, 0.05, gl_order=2000)
    c2 = bump.decay_certificate(50.0, 0.05, gl_order=4000)
    assert abs(c1 - c2) < 1e-4


def test_decay_certificate_domain():
    with pytest.raises(ValueError):
        bump.decay_certificate(5.0, 0.1)


def test_table_invariants():
    table = bump.build_table(grid_max=30.0, step=0.05)
    assert np.all(table.psi_values >= -1e-9)
    assert np.all(table.psihat_values >= 0.0)
    assert table.psihat_grid[0] == -1.0 and table.psihat_grid[-1] == 1.0
    assert abs(table.psi_integral() - 1.0) <= 1e-6
    assert table.decay_constant_fit > 0.0
    assert table.normalization == pytest.approx(0.0665430604, abs=1e-9)


def test_plancherel_two_ways():
    table = bump.build_table(grid_max=30.0, step=0.05)
    direct = np.trapezoid(table.psihat_values**2, table.psihat_grid)
    via_psi = np.trapezoid(table.psi_values**2, table.grid)
    assert direct == pytest.approx(via_psi, abs=1e-8)


def test_scaling_identity_integrates_to_one():
    # x -> a psi(ax) keeps unit mass; change of variables on the table grid
    table = bump.build_table(grid_max=30.0, step=0.05)
    for a in (0.5, 2.0):
        integral = np.trapezoid(a * bump.psi(table.grid * a), table.grid)
        assert integral == pytest.approx(1.0, abs=1e-5)


def test_derivative_bound_is_a_true_sup_bound():
    # |psi'''(x)| <= int psihat |2 pi t|^3 everywhere; spot check by a
    # central finite difference at a few points.
    table = bump.build_table(grid_max=30.0, step=0.05)
    b3 = table.derivative_sup_bound(3)
    assert b3 > 0.0
    h = 1e-2
    for x in (0.0, 0.3, 1.1, 2.7):
        stencil = (
            bump.psi(x + 2 * h) - 2 * bump.psi(x + h) + 2 * bump.psi(x - h) - bump.psi(x - 2 * h)
        ) / (2 * h**3)
        assert abs(stencil) <= b3 * (1 + 1e-3) + 1e-6
