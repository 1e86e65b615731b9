import math

import mpmath
import numpy as np
import pytest

from hybridbell.fock import (BinningSet, QuadratureConfig, abs_overlap_integral, build_D, build_N, build_Q,
                             build_rotated_Q, hermite_fn, hermite_functions, overlap_integral, overlap_matrix)


def mp_hermite_fn(n, x):
    x = mpmath.mpf(x)
    return mpmath.hermite(n, x) * mpmath.exp(-x * x / 2) / mpmath.sqrt(2 ** n * mpmath.factorial(n) * mpmath.sqrt(mpmath.pi))


@pytest.mark.parametrize("n", [0, 1, 2, 5, 13, 30, 60])
@pytest.mark.parametrize("x", [-4.3, -0.7, 0.0, 0.25, 2.0, 7.5])
def test_hermite_matches_mpmath(n, x):
    assert hermite_fn(n, x) == pytest.approx(float(mp_hermite_fn(n, x)), abs=1e-13)


def test_hermite_vectorized_matches_scalar():
    xs = np.linspace(-3, 3, 7)
    table = hermite_functions(10, xs)
    assert table.shape == (11, 7)
    assert table[7, 2] == pytest.approx(hermite_fn(7, xs[2]), abs=1e-15)


@pytest.mark.parametrize("dim", [2, 10, 40])
def test_full_line_is_orthonormal(dim):
    p = overlap_matrix(BinningSet.full(), dim)
    assert np.max(np.abs(p - np.eye(dim))) < 1e-12


@pytest.mark.parametrize("lo,hi", [(-0.3, 1.1), (0.0, math.inf), (-2.0, -0.5), (0.9, 4.0)])
def test_binning_povm_completeness(lo, hi):
    tol = QuadratureConfig().abs_tolerance
    dim = 25
    inside = overlap_matrix(BinningSet(lo, hi), dim)
    left = overlap_matrix(BinningSet(-math.inf, lo), dim)
    right = overlap_matrix(BinningSet(hi, math.inf), dim) if math.isfinite(hi) else 0.0
    assert np.max(np.abs(inside + left + right - np.eye(dim))) <= 2 * tol


@pytest.mark.parametrize("c", [0.2, 0.48, 1.13, 3.0])
def test_symmetric_binning_parity_selection(c):
    p = overlap_matrix(BinningSet.symmetric(c), 20)
    m, n = np.indices(p.shape)
    assert np.all(p[(m + n) % 2 == 1] == 0.0)


def test_half_line_vacuum_one_photon_overlap():
    assert overlap_integral(0, 1, BinningSet.half_line(0.0)) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-14)


def test_half_line_diagonal_is_one_half():
    p = overlap_matrix(BinningSet.half_line(0.0), 30)
    assert np.allclose(np.diag(p), 0.5, atol=1e-13)


def test_vacuum_weight_matches_erf():
    b = BinningSet(-0.4, 1.3)
    want = 0.5 * (math.erf(1.3) - math.erf(-0.4))
    assert overlap_integral(0, 0, b) == pytest.approx(want, abs=1e-14)


def test_abs_overlap_closed_form():
    assert abs_overlap_integral(0, 2) == pytest.approx(2 / math.sqrt(math.pi * math.e), abs=1e-12)


def test_abs_overlap_against_mpmath():
    f = lambda x: abs(mp_hermite_fn(0, x) * mp_hermite_fn(5, x))
    roots = [-2.0201828704560856, -0.9585724646138185, 0.0, 0.9585724646138185, 2.0201828704560856]
    pts = [-mpmath.inf] + roots + [mpmath.inf]
    want = sum(mpmath.quad(f, [a, b]) for a, b in zip(pts[:-1], pts[1:]))
    assert abs_overlap_integral(0, 5) == pytest.approx(float(want), abs=1e-11)


def test_abs_overlap_high_order():
    # mpmath at 30 digits, splitting at the 20 roots of H_20
    assert abs_overlap_integral(0, 20) == pytest.approx(0.38033248561771030, abs=1e-12)


def test_q_extremes():
    assert np.allclose(build_Q(BinningSet.full(), 8), np.eye(8))
    assert np.allclose(build_Q(BinningSet.empty(), 8), -np.eye(8))


@pytest.mark.parametrize("b", [BinningSet(-0.5, 0.9), BinningSet.half_line(0.3), BinningSet.symmetric(0.7)])
def test_q_is_a_contraction(b):
    q = build_Q(b, 30)
    assert np.allclose(q, q.T)
    w = np.linalg.eigvalsh(q)
    assert w.min() >= -1 - 1e-12 and w.max() <= 1 + 1e-12


def test_d_and_n():
    assert np.array_equal(np.diag(build_D(4)), [-1, 1, 1, 1])
    assert np.array_equal(np.diag(build_N(4)), [0, 1, 2, 3])


@pytest.mark.parametrize("phase", [0.0, 0.4, math.pi / 2, -1.1])
def test_rotated_q_on_qubit_subspace(phase):
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    q = build_rotated_Q(BinningSet.half_line(0.0), phase, 2)
    want = math.sqrt(2 / math.pi) * (math.cos(phase) * sx + math.sin(phase) * sy)
    assert np.allclose(q, want, atol=1e-13)


def test_rotated_q_zero_phase_is_real_q():
    b = BinningSet(-0.2, 1.0)
    q = build_rotated_Q(b, 0.0, 12)
    assert np.isrealobj(q)
    assert np.allclose(q, build_Q(b, 12))


def test_invalid_binning():
    with pytest.raises(ValueError):
        BinningSet(1.0, 0.0)


def test_overlap_matrix_is_read_only():
    p = overlap_matrix(BinningSet.half_line(0.0), 5)
    with pytest.raises(ValueError):
        p[0, 0] = 1.0
