import math

import mpmath
import numpy as np
import pytest

from hybridbell.fock import BinningSet
from hybridbell.noise import state_expectation
from hybridbell.operators import expectation
from hybridbell.chsh import chsh_operator
from hybridbell.states import (FIXTURE_NAMES, VACUUM_SIGN_ERRATA, GammaParams, InsufficientDimensionError,
                               auto_dim, cat_amplitudes, cat_state, coherent_amplitudes, coherent_state,
                               fixture_binning, gamma_state, ghz_state, load_fixture, mean_photon_number,
                               noon_chsh_value, noon_state, noon_upper_bound, read_fixture, w_state)


def test_coherent_amplitudes_match_series():
    alpha = 1.3 - 0.4j
    c = coherent_amplitudes(alpha, 12)
    for n in range(12):
        want = mpmath.exp(-abs(alpha) ** 2 / 2) * mpmath.mpc(alpha) ** n / mpmath.sqrt(mpmath.factorial(n))
        assert c[n] == pytest.approx(complex(want), abs=1e-14)


def test_auto_dim_and_insufficient_dim():
    d = auto_dim(2.0)
    assert 1 - np.sum(np.abs(coherent_amplitudes(2.0, d)) ** 2) < 1e-8
    with pytest.raises(InsufficientDimensionError):
        coherent_state(2.0, dim=5)


def test_cat_parity_selection():
    even = cat_amplitudes(1.7j, "even", 30)
    odd = cat_amplitudes(1.7j, "odd", 30)
    assert np.all(even[1::2] == 0) and np.all(odd[0::2] == 0)
    assert odd[2] == 0


def test_cat_zero_alpha_limit():
    assert cat_state(0.0, "even", 4).amplitude(0) == pytest.approx(1.0)


def test_cat_amplitude_ratio():
    c = cat_amplitudes(2.06j, "even", auto_dim(2.06j))
    assert abs(c[2] / c[0]) == pytest.approx(2.06 ** 2 / math.sqrt(2), rel=1e-12)
    assert abs(c[2] / c[0]) == pytest.approx(3.0005, abs=1e-3)


def test_cat_phase_convention():
    c = cat_amplitudes(1.1 + 0.8j, "odd", 20)
    assert c[1].imag == 0 and c[1].real > 0


def test_gamma_state_is_normalized_and_symmetric():
    g = gamma_state(GammaParams(1.05, 2.06j))
    t = g.tensor
    assert np.allclose(t, t.T)
    assert np.linalg.norm(g.vector) == pytest.approx(1.0)


def test_gamma_validation():
    with pytest.raises(ValueError):
        GammaParams(1.0, 0.0)
    with pytest.raises(ValueError):
        GammaParams(1.0, 1.0, "neither")


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7])
@pytest.mark.parametrize("b", [BinningSet.half_line(0.0), BinningSet.symmetric(0.83), BinningSet(-0.4, 1.9)])
def test_noon_closed_form_matches_operator(n, b):
    psi = noon_state(n)
    assert noon_chsh_value(n, b) == pytest.approx(expectation(psi, chsh_operator(b, n + 1)), abs=1e-12)


def test_noon_bound_n2():
    bound, odd = noon_upper_bound(2)
    assert bound == pytest.approx(2 + 4 / (math.pi * math.e), abs=1e-9)
    assert odd is None
    assert noon_upper_bound(3)[1] is not None


def test_mean_photon_number():
    per_mode, total = mean_photon_number(noon_state(3))
    assert np.allclose(per_mode, [1.5, 1.5]) and total == pytest.approx(3.0)


def test_ghz_and_w():
    assert ghz_state(3).amplitude(1, 1, 1) == pytest.approx(1 / math.sqrt(2))
    assert w_state(3).amplitude(0, 1, 0) == pytest.approx(1 / math.sqrt(3))


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixtures_load(name):
    psi = load_fixture(name)
    assert np.linalg.norm(psi.vector) == pytest.approx(1.0)
    assert fixture_binning(name) is not None


def test_fixture_aliases():
    assert read_fixture("ψ₂").name == "psi2"
    with pytest.raises(KeyError):
        read_fixture("psi3")


@pytest.mark.parametrize("name", sorted(VACUUM_SIGN_ERRATA))
def test_vacuum_sign_errata(name):
    printed, fixed = load_fixture(name, printed=True), load_fixture(name)
    assert printed.amplitude(0, 0) == pytest.approx(-fixed.amplitude(0, 0))
    b = fixture_binning(name)
    assert abs(state_expectation(fixed, b)) > 2.0
    assert abs(state_expectation(fixed, b)) > abs(state_expectation(printed, b))
