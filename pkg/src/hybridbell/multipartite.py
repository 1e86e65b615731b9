"""Mermin-type inequalities with binned quadratures and click detectors.

On span{|0>, |1>} the sign-binned quadrature at phase p is
sqrt(2/pi) (cos p sigma_x + sin p sigma_y), so every qubit GHZ strategy
carries over with one factor sqrt(2/pi) per party.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import DEFAULT_QUADRATURE, BinningSet, QuadratureConfig, build_rotated_Q
from .noise import CLASSICAL_BOUND, NoViolationError, build_D_eta
from .operators import JointOperator, PureState, expectation
from .states import ghz_state, w_state


@dataclass(frozen=True)
class Setting:
    """One dichotomic observable: a binned quadrature or a click detector."""

    kind: str
    binning: BinningSet = BinningSet.half_line(0.0)
    phase: float = 0.0
    eta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("Q", "D"):
            raise ValueError(f"kind must be 'Q' or 'D', got {self.kind!r}")

    def matrix(self, dim: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> np.ndarray:
        if self.kind == "D":
            return build_D_eta(self.eta, dim)
        return build_rotated_Q(self.binning, self.phase, dim, cfg)


@dataclass(frozen=True)
class MerminSpec:
    """Two settings per party; ``settings[k] = (first, second)`` for party k."""

    settings: tuple[tuple[Setting, Setting], ...]

    def __post_init__(self):
        if len(self.settings) < 2:
            raise ValueError("need at least two parties")
        if any(len(pair) != 2 for pair in self.settings):
            raise ValueError("each party has exactly two settings")

    @property
    def parties(self) -> int:
        return len(self.settings)


def _extend(op: JointOperator | None, coef: float, factor: np.ndarray) -> JointOperator:
    if op is None:
        return JointOperator((factor.shape[0],), ((coef, (factor,)),))
    terms = tuple((c * coef, fs + (factor,)) for c, fs in op.terms)
    return JointOperator(op.mode_dims + (factor.shape[0],), terms)


def mabk_operator(spec: MerminSpec, dim: int = 2, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> JointOperator:
    """Mermin-Ardehali-Belinskii-Klyshko operator, scaled so local models give at most 2.

    Experimental general generator:
    M_k = (M_{k-1} (A_k + A'_k) + M'_{k-1} (A_k - A'_k)) / 2 and
    M'_k = (M'_{k-1} (A'_k + A_k) + M_{k-1} (A'_k - A_k)) / 2.
    """
    m = mp = None
    for first, second in spec.settings:
        a, ap = first.matrix(dim, cfg), second.matrix(dim, cfg)
        if m is None:
            m = _extend(None, 1.0, a)
            mp = _extend(None, 1.0, ap)
            continue
        m, mp = (_extend(m, 0.5, a + ap) + _extend(mp, 0.5, a - ap),
                 _extend(mp, 0.5, ap + a) + _extend(m, 0.5, ap - a))
    return 2.0 * m


def ghz_quadrature_violation(n_parties: int) -> float:
    """Best GHZ value with sign-binned quadratures: (2/pi)^(N/2) 2^((N+1)/2)."""
    if n_parties < 2:
        raise ValueError("need at least two parties")
    return (2.0 / math.pi) ** (n_parties / 2) * 2.0 ** ((n_parties + 1) / 2)


def ghz_quadrature_spec(n_parties: int) -> MerminSpec:
    """Phases (g, g + pi/2) for every party with g = -(N - 1) pi / (4 N)."""
    g = -(n_parties - 1) * math.pi / (4 * n_parties)
    half = BinningSet.half_line(0.0)
    pair = (Setting("Q", half, g), Setting("Q", half, g + math.pi / 2))
    return MerminSpec((pair,) * n_parties)


def ghz_quadrature_expectation(n_parties: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Explicit operator value on the GHZ state; GHZ lives on {0,1}, so dim 2 is exact."""
    op = mabk_operator(ghz_quadrature_spec(n_parties), 2, cfg)
    return expectation(ghz_state(n_parties), op)


def mermin3_operator(q: np.ndarray, d: np.ndarray) -> JointOperator:
    """DQQ + QDQ + QQD - DDD."""
    dims = (q.shape[0],) * 3
    return JointOperator(dims, ((1.0, (d, q, q)), (1.0, (q, d, q)), (1.0, (q, q, d)), (-1.0, (d, d, d))))


def w_mermin_value(a_plus: BinningSet = BinningSet.half_line(0.0), dim: int = 2, eta: float = 1.0,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """<W| DQQ + QDQ + QQD - DDD |W> with the full truncated-Fock operators."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    q = build_rotated_Q(a_plus, 0.0, dim, cfg)
    return expectation(w_state(3, dim), mermin3_operator(q, build_D_eta(eta, dim)))


def w_mermin_closed_form(eta: float = 1.0) -> float:
    """Value at A+ = R+: <DQQ> = -(2/3)(2/pi) per slot and <DDD> = 2 eta - 1."""
    return -(4.0 / math.pi) - (2.0 * eta - 1.0)


def w_critical_eta(a_plus: BinningSet = BinningSet.half_line(0.0), dim: int = 2, width: float = 1e-4,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Smallest efficiency (same in all three D slots) keeping |<W|M|W>| above 2."""
    top = abs(w_mermin_value(a_plus, dim, 1.0, cfg))
    if top <= CLASSICAL_BOUND:
        raise NoViolationError("W state does not violate at eta = 1", top)
    lo, hi = 0.0, 1.0
    if abs(w_mermin_value(a_plus, dim, 0.0, cfg)) > CLASSICAL_BOUND:
        return 0.0
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if abs(w_mermin_value(a_plus, dim, mid, cfg)) > CLASSICAL_BOUND:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def permuted_expectation(state: PureState, op: JointOperator, perm) -> float:
    """Expectation after relabeling the modes of ``op`` by ``perm``."""
    terms = tuple((c, tuple(fs[p] for p in perm)) for c, fs in op.terms)
    return expectation(state, JointOperator(tuple(op.mode_dims[p] for p in perm), terms))
