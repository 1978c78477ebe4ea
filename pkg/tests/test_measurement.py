import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noonbell.channels import TwoModeDensity
from noonbell.fockspace import amplified_noon
from noonbell.measurement import (
    Thresholds,
    corr_nn,
    corr_nx,
    corr_xn,
    corr_xx,
    hermite_functions,
    q_overlap,
    q_table,
    q_table_grid,
    swap_modes,
)
from noonbell.oracle import q_overlap_reference, random_density

X0_VALUES = [0.1, 0.465, 1.0, 2.0, 8.0]


def test_hermite_functions_orthonormal():
    y = np.linspace(-15, 15, 6001)
    h = hermite_functions(y, 30)
    gram = (h * (y[1] - y[0])) @ h.T
    np.testing.assert_allclose(gram, np.eye(31), atol=1e-10)


def test_hermite_functions_finite_at_high_order():
    h = hermite_functions(np.linspace(-10, 10, 101), 120)
    assert np.all(np.isfinite(h))


def test_q_overlap_trivial_zeros():
    assert q_overlap(0, 1, 0.7) == 0.0
    assert q_overlap(2, 5, 1.3) == 0.0
    assert q_overlap(4, 4, 0.0) == 0.0


def test_q_overlap_gaussian_closed_form():
    # erf(sqrt(2) * 0.465)
    assert q_overlap(0, 0, 0.465) == pytest.approx(0.6476289155094842, abs=1e-12)
    assert q_overlap(0, 0, 0.465) == pytest.approx(0.6476, abs=5e-5)
    for x0 in X0_VALUES:
        assert abs(q_overlap(0, 0, x0) - math.erf(math.sqrt(2) * x0)) < 1e-12


@pytest.mark.parametrize("n,m", [(1, 3), (0, 2), (5, 5), (10, 20), (29, 29), (30, 0)])
@pytest.mark.parametrize("x0", [0.1, 0.7, 2.0])
def test_q_overlap_matches_adaptive_quadrature(n, m, x0):
    assert abs(q_overlap(n, m, x0) - q_overlap_reference(n, m, x0)) < 1e-10


def test_q_table_zero_width():
    np.testing.assert_array_equal(q_table(10, 0.0).q, np.zeros((11, 11)))


def test_q_table_wide_interval_is_identity():
    np.testing.assert_allclose(q_table(20, 8.0).q, np.eye(21), atol=1e-8)


@pytest.mark.parametrize("x0", X0_VALUES)
def test_q_table_symmetry_and_parity(x0):
    q = q_table(20, x0).q
    np.testing.assert_array_equal(q, q.T)
    assert q[3, 6] == 0.0
    idx = np.arange(21)
    assert np.all(q[np.add.outer(idx, idx) % 2 == 1] == 0.0)
    d = np.diag(q)
    assert np.all(d >= 0) and np.all(d <= 1 + 1e-12)


def test_q_table_matches_elementwise():
    q = q_table(12, 0.9).q
    for n in range(13):
        for m in range(13):
            assert abs(q[n, m] - q_overlap(n, m, 0.9)) < 1e-12


def test_q_table_grid_matches_direct_tables():
    grid = np.array([0.05, 0.3, 0.465, 1.2, 2.9])
    stack = q_table_grid(15, grid)
    for x0, q in zip(grid, stack):
        np.testing.assert_allclose(q, q_table(15, x0).q, atol=1e-12)


def test_q00_strictly_increasing():
    x = np.linspace(0, 4, 200)
    vals = [q_overlap(0, 0, v) for v in x]
    assert np.all(np.diff(vals) > 0)


def test_thresholds_validation():
    with pytest.raises(ValueError):
        Thresholds(-1, 0.3)
    with pytest.raises(ValueError):
        Thresholds(0, -0.3)


# correlations on simple states

def test_vacuum_correlations():
    vac = TwoModeDensity.vacuum(6)
    assert corr_xx(vac, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert corr_xn(vac, 0.0, 0) == pytest.approx(1.0, abs=1e-15)
    assert corr_nx(vac, 0.0, 0) == pytest.approx(1.0, abs=1e-15)
    for n0 in range(4):
        assert corr_nn(vac, n0) == 1.0


def test_infinite_threshold_limits():
    rho = amplified_noon(0.3, 20).density()
    assert corr_xx(rho, 12.0) == pytest.approx(1.0, abs=1e-9)
    assert corr_xn(rho, 12.0, 20) == pytest.approx(-1.0, abs=1e-9)
    assert corr_nn(rho, 20) == pytest.approx(1.0, abs=1e-12)


def test_unamplified_noon_photon_counts_anticorrelated():
    assert corr_nn(amplified_noon(0.0, 20).density(), 0) == pytest.approx(-1.0, abs=1e-12)


def test_swap_symmetric_state_gives_equal_cross_terms():
    rho = amplified_noon(0.2, 16).density()
    assert corr_xn(rho, 0.5, 0) == corr_nx(rho, 0.5, 0)


def test_corr_nx_is_swapped_corr_xn():
    rho = random_density(4, np.random.default_rng(3))
    for x0, n0 in [(0.2, 0), (0.8, 1), (1.5, 3)]:
        assert corr_nx(rho, x0, n0) == corr_xn(swap_modes(rho), x0, n0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), nmax=st.integers(2, 6),
       x0=st.floats(0.0, 3.0), n0=st.integers(0, 6))
def test_correlations_bounded(seed, nmax, x0, n0):
    rho = random_density(nmax, np.random.default_rng(seed), rank=3)
    for val in (corr_xx(rho, x0), corr_xn(rho, x0, n0), corr_nx(rho, x0, n0), corr_nn(rho, n0)):
        assert -1 - 1e-12 <= val <= 1 + 1e-12


def test_corr_nn_depends_only_on_diagonal():
    rng = np.random.default_rng(11)
    rho = random_density(4, rng)
    diag_only = np.zeros_like(rho.rho)
    idx = np.arange(5)
    diag_only[idx[:, None], idx[None, :], idx[:, None], idx[None, :]] = np.einsum("abab->ab", rho.rho)
    assert corr_nn(rho, 1) == pytest.approx(corr_nn(TwoModeDensity(diag_only), 1), abs=1e-15)


def test_reported_zero_gain_correlations():
    rho = amplified_noon(0.0, 40).density()
    # optimum threshold located by the optimizer tests; the plateau is flat to 1e-4 here
    assert abs(corr_xx(rho, 0.589) - 0.128) < 0.005
    assert abs(corr_xn(rho, 0.589, 0) - 0.561) < 0.005
