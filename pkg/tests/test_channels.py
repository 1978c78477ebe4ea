import math

import numpy as np
import pytest

from noonbell.channels import (
    LossParams,
    ProductFormDensity,
    TwoModeDensity,
    amplitude_damp,
    binomial_pmf,
    damp_product,
    damp_product_form,
    damp_then_amplify,
    loss_for_measurement,
    noon_product_form,
)
from noonbell.fockspace import InsufficientCutoffError, amplified_noon
from noonbell.oracle import damp_via_kraus, random_density

LAMBDAS = [0.0, 0.1, 0.5, 0.9, 1.0]


@pytest.mark.parametrize("k,p,n,expected", [
    (0, 0.3, 0, 1.0),
    (1, 0.5, 2, 0.5),
    (2, 0.25, 4, 0.2109375),  # C(4,2) 0.25^2 0.75^2
    (0, 0.0, 7, 1.0),
    (7, 1.0, 7, 1.0),
])
def test_binomial_pmf_values(k, p, n, expected):
    assert binomial_pmf(k, p, n) == pytest.approx(expected, abs=1e-14)


def test_binomial_pmf_normalized_at_large_n():
    k = np.arange(81)
    assert abs(np.sum(binomial_pmf(k, 0.37, 80)) - 1) < 1e-12


def test_binomial_pmf_domain():
    with pytest.raises(ValueError):
        binomial_pmf(3, 0.5, 2)


def test_loss_params_validation():
    with pytest.raises(ValueError):
        LossParams(t=1.2)


def test_loss_for_measurement():
    assert loss_for_measurement(LossParams(), "X", "N") == (0.0, 0.0)
    la, _ = loss_for_measurement(LossParams(t=0.95, eta_x=0.90), "X", "N")
    assert la == pytest.approx(0.145, abs=1e-12)
    _, lb = loss_for_measurement(LossParams(t=0.806), "X", "N")
    assert lb == pytest.approx(0.194, abs=1e-12)
    with pytest.raises(ValueError):
        loss_for_measurement(LossParams(), "X", "Q")


def test_damp_identity_and_total_loss():
    rho = random_density(4, np.random.default_rng(0))
    np.testing.assert_array_equal(amplitude_damp(rho, 0.0, 0.0).rho, rho.rho)
    out = amplitude_damp(rho, 1.0, 1.0)
    np.testing.assert_allclose(out.rho, TwoModeDensity.vacuum(4).rho, atol=1e-14)


def test_damp_single_photon():
    rho = np.zeros((3,) * 4)
    rho[1, 0, 1, 0] = 1.0
    lam = 0.3
    out = amplitude_damp(TwoModeDensity(rho), lam, 0.0).rho
    expected = np.zeros_like(rho)
    expected[1, 0, 1, 0] = 1 - lam
    expected[0, 0, 0, 0] = lam
    np.testing.assert_allclose(out, expected, atol=1e-15)


@pytest.mark.parametrize("lam", LAMBDAS)
def test_trace_preserved_random(lam):
    rng = np.random.default_rng(int(lam * 100))
    for nmax in (2, 5, 8):
        rho = random_density(nmax, rng)
        out = amplitude_damp(rho, lam, 0.5 * lam)
        assert abs(out.trace - rho.trace) < 1e-9
        np.testing.assert_allclose(out.as_matrix(), out.as_matrix().T, atol=1e-14)


@pytest.mark.parametrize("lam", LAMBDAS)
def test_trace_preserved_noon_at_default_cutoff(lam):
    out = damp_product_form(noon_product_form(0.4, 40), lam, lam)
    assert abs(out.trace - 1.0) < 1e-9


def test_damped_state_is_positive():
    rho = random_density(5, np.random.default_rng(7), rank=2)
    out = amplitude_damp(rho, 0.35, 0.6)
    assert np.linalg.eigvalsh(out.as_matrix()).min() > -1e-12


@pytest.mark.parametrize("l1,l2", [(0.1, 0.2), (0.5, 0.5), (0.0, 0.7), (0.9, 0.3)])
def test_channel_composition(l1, l2):
    rho = random_density(6, np.random.default_rng(5))
    twice = amplitude_damp(amplitude_damp(rho, l1, l2), l2, l1)
    once = amplitude_damp(rho, 1 - (1 - l1) * (1 - l2), 1 - (1 - l2) * (1 - l1))
    np.testing.assert_allclose(twice.rho, once.rho, atol=1e-9)


def test_parity_breaking_under_loss():
    rho = amplified_noon(0.3, 20).density()
    pops = np.einsum("abab->ab", rho.rho)
    assert np.all(pops[1::2, :] == 0) and np.all(pops[:, 1::2] == 0)
    damped = np.einsum("abab->ab", amplitude_damp(rho, 0.2, 0.2).rho)
    assert damped[1, 0] > 0 and damped[0, 1] > 0 and damped[1, 1] > 0


def test_product_form_expansion_matches_pure_state():
    pf = noon_product_form(0.3, 20)
    np.testing.assert_allclose(pf.expand().rho, amplified_noon(0.3, 20).density().rho, atol=1e-12)


@pytest.mark.parametrize("lam", [0.0, 0.2, 1.0])
def test_product_form_damping_matches_dense(lam):
    pf = noon_product_form(0.3, 20)
    fast = damp_product_form(pf, lam, lam)
    slow = amplitude_damp(pf.expand(), lam, lam)
    np.testing.assert_allclose(fast.rho, slow.rho, atol=1e-10)


def test_product_form_asymmetric_damping():
    pf = noon_product_form(0.15, 14)
    np.testing.assert_allclose(damp_product_form(pf, 0.1, 0.45).rho,
                               amplitude_damp(pf.expand(), 0.1, 0.45).rho, atol=1e-10)


def test_product_form_trace_and_swap():
    pf = damp_product(noon_product_form(0.2, 16), 0.3, 0.1)
    assert pf.trace == pytest.approx(1.0, abs=1e-12)
    sw = pf.swapped().expand().rho
    np.testing.assert_allclose(sw, np.transpose(pf.expand().rho, (1, 0, 3, 2)), atol=1e-15)


def test_empty_product_form_rejected():
    with pytest.raises(ValueError):
        ProductFormDensity([])


def _bare_noon(nmax):
    return amplified_noon(0.0, nmax)


def test_damp_then_amplify_without_loss():
    out = damp_then_amplify(_bare_noon(30), 1.0, 0.3)
    np.testing.assert_allclose(out.rho, amplified_noon(0.3, 30).density().rho, atol=1e-8)


def test_damp_then_amplify_trace():
    out = damp_then_amplify(_bare_noon(20), 0.5, 0.0)
    assert abs(out.trace - 1) < 1e-9
    out = damp_then_amplify(_bare_noon(30), 0.5, 0.4)
    assert abs(out.trace - 1) < 1e-9


def test_damp_then_amplify_zero_gain_is_plain_loss():
    bare = _bare_noon(10)
    np.testing.assert_allclose(damp_then_amplify(bare, 0.7, 0.0).rho,
                               amplitude_damp(bare.density(), 0.3, 0.3).rho, atol=1e-12)


def test_damp_then_amplify_rejects_amplified_input():
    with pytest.raises(ValueError):
        damp_then_amplify(amplified_noon(0.2, 20), 0.9, 0.2)


def test_damp_then_amplify_insufficient_cutoff():
    with pytest.raises(InsufficientCutoffError):
        damp_then_amplify(_bare_noon(6), 0.9, 0.6)


# Kraus-sum oracle

@pytest.mark.parametrize("seed", range(50))
def test_kraus_matches_binomial_elements(seed):
    rng = np.random.default_rng(seed)
    nmax = int(rng.integers(2, 11))
    lam = float(rng.uniform(0, 1))
    rho = random_density(nmax, rng, rank=int(rng.integers(1, 5)))
    mode = "A" if seed % 2 else "B"
    via_kraus = damp_via_kraus(rho, lam, mode)
    la, lb = (lam, 0.0) if mode == "A" else (0.0, lam)
    np.testing.assert_allclose(via_kraus.rho, amplitude_damp(rho, la, lb).rho, atol=1e-10)


def test_kraus_limits():
    rho = random_density(8, np.random.default_rng(1))
    np.testing.assert_allclose(damp_via_kraus(rho, 0.0, "A").rho, rho.rho, atol=1e-15)
    out = damp_via_kraus(rho, 1.0, "B")
    # mode B in vacuum: only n' = m' = 0 survives
    assert np.allclose(out.rho[:, 1:, :, :], 0) and np.allclose(out.rho[:, :, :, 1:], 0)
    assert math.isclose(out.trace, 1.0, abs_tol=1e-12)


def test_kraus_reference_matches_at_nmax_8():
    rho = random_density(8, np.random.default_rng(42))
    np.testing.assert_allclose(damp_via_kraus(rho, 0.3, "A").rho,
                               amplitude_damp(rho, 0.3, 0.0).rho, atol=1e-10)


def test_kraus_cost_guard():
    with pytest.raises(ValueError):
        damp_via_kraus(TwoModeDensity.vacuum(13), 0.2, "A")
