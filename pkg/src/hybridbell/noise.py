"""Imperfect photodetection and photon loss.

Inefficiency and dark counts deform the click observable D into a diagonal
POVM difference.  Loss is an amplitude-damping channel applied to the state;
it is moved onto the observables through the dual (Heisenberg) map, so every
critical-value search works with a single operator per noise setting.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import comb

from .chsh import ViolationResult, assemble_chsh, chsh_norm
from .fock import DEFAULT_QUADRATURE, BinningSet, QuadratureConfig, build_Q
from .operators import DimensionMismatchError, JointOperator, PureState, SubspaceSpec, expectation, project_to_subspace

log = logging.getLogger(__name__)

BISECTION_WIDTH = 1e-4
MONOTONE_SLACK = 1e-9
# values within this of 2 count as no violation (rounding in degenerate cases)
CLASSICAL_BOUND = 2.0 + 1e-9


class NoViolationError(ValueError):
    """The noiseless end of a sweep does not exceed the classical bound."""

    def __init__(self, message: str, value: float):
        super().__init__(f"{message} (value {value:.6f} <= 2)")
        self.value = value


class MonotonicityError(RuntimeError):
    """A bisection probe sequence broke the monotone ordering it relies on."""


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class NoiseParams:
    """Detector efficiency ``eta``, correct-vacuum probability ``delta``, transmittance ``t``."""

    eta: float = 1.0
    delta: float = 1.0
    t: float = 1.0

    def __post_init__(self):
        for name in ("eta", "delta", "t"):
            object.__setattr__(self, name, _check_unit(name, getattr(self, name)))

    @property
    def is_noiseless(self) -> bool:
        return self.eta == 1.0 and self.delta == 1.0 and self.t == 1.0

    def replace(self, **changes) -> "NoiseParams":
        return NoiseParams(**{**self.__dict__, **changes})


def build_D_eta(eta: float, dim: int) -> np.ndarray:
    """Click observable for efficiency ``eta``: -1 on vacuum, 1 - 2 (1 - eta)^n otherwise."""
    return build_D_eta_delta(eta, 1.0, dim)


def build_D_eta_delta(eta: float, delta: float, dim: int) -> np.ndarray:
    """As ``build_D_eta`` with the vacuum entry replaced by 1 - 2 delta."""
    eta = _check_unit("eta", eta)
    delta = _check_unit("delta", delta)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    n = np.arange(dim, dtype=float)
    diag = 1.0 - 2.0 * (1.0 - eta) ** n
    diag[0] = 1.0 - 2.0 * delta
    return np.diag(diag)


@lru_cache(maxsize=256)
def _damping_gains(t: float, dim: int) -> np.ndarray:
    """g[k, n] = sqrt(C(n, k) t^(n-k) (1-t)^k) for n >= k, else 0."""
    n = np.arange(dim)[None, :]
    k = np.arange(dim)[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        g = np.where(n >= k, comb(n, k) * np.power(t, np.maximum(n - k, 0)) * (1.0 - t) ** k, 0.0)
    g = np.sqrt(g)
    g.setflags(write=False)
    return g


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Single-mode channel rho -> sum_k F_k rho F_k^dagger."""

    kraus_ops: tuple[np.ndarray, ...]
    transmittance: float | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def completeness_error(self) -> float:
        total = sum(f.conj().T @ f for f in self.kraus_ops)
        return float(np.max(np.abs(total - np.eye(self.dim))))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(f @ rho @ f.conj().T for f in self.kraus_ops)

    def dual(self, op: np.ndarray) -> np.ndarray:
        """Heisenberg picture map X -> sum_k F_k^dagger X F_k."""
        if self.transmittance is not None:
            return damping_dual(op, self.transmittance)
        return sum(f.conj().T @ op @ f for f in self.kraus_ops)


def damping_kraus(t: float, dim: int) -> KrausChannel:
    """Amplitude damping with F_k = sum_n sqrt(C(n,k) t^(n-k) (1-t)^k) |n-k><n|."""
    t = _check_unit("t", t)
    g = _damping_gains(t, dim)
    ops = []
    for k in range(dim):
        f = np.zeros((dim, dim))
        n = np.arange(k, dim)
        f[n - k, n] = g[k, n]
        ops.append(f)
    return KrausChannel(tuple(ops), transmittance=t)


def damping_dual(op: np.ndarray, t: float) -> np.ndarray:
    """Dual of amplitude damping: out[m, n] = sum_k g_k(m) g_k(n) op[m-k, n-k].

    Evaluated by shifted slices, which costs O(dim^3) instead of the O(dim^4)
    Kraus sum; entries below the truncation only depend on entries below it,
    so the truncated result is exact.
    """
    t = _check_unit("t", t)
    op = np.asarray(op)
    dim = op.shape[0]
    if t == 1.0:
        return op.copy()
    g = _damping_gains(t, dim)
    out = np.zeros_like(op, dtype=np.result_type(op, float))
    for k in range(dim):
        gk = g[k, k:]
        out[k:, k:] += gk[:, None] * gk[None, :] * op[:dim - k, :dim - k]
    return out


def pullback(b: JointOperator, channel_a: KrausChannel, channel_b: KrausChannel) -> JointOperator:
    """Heisenberg-picture operator sum_{kl} (F_k (x) F_l)^dagger B (F_k (x) F_l).

    The channel is a product, so it acts factor by factor on every Kronecker term.
    """
    channels = (channel_a, channel_b)
    if len(b.mode_dims) != 2:
        raise DimensionMismatchError("pullback expects a two-mode operator")
    for ch, d in zip(channels, b.mode_dims):
        if ch.dim != d:
            raise DimensionMismatchError(f"channel dim {ch.dim} vs mode dim {d}")
    return b.map_factors(lambda i, f: channels[i].dual(f))


def noisy_chsh_operator(a_plus: BinningSet, dim: int, noise: NoiseParams = NoiseParams(),
                        cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> JointOperator:
    """B(A+, eta, delta, t) on ``dim`` x ``dim``: detector noise in D, then the loss dual on every factor."""
    q = build_Q(a_plus, dim, cfg)
    d = build_D_eta_delta(noise.eta, noise.delta, dim)
    if noise.t != 1.0:
        q, d = damping_dual(q, noise.t), damping_dual(d, noise.t)
    return assemble_chsh(q, d, q, d)


def noisy_subspace_operator(a_plus: BinningSet, spec: SubspaceSpec, noise: NoiseParams = NoiseParams(),
                            cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> JointOperator:
    # loss only moves weight down in Fock number, so building at the largest
    # allowed index and compressing is exact
    dim = max(spec.ambient_dims)
    return project_to_subspace(noisy_chsh_operator(a_plus, dim, noise, cfg), spec)


@dataclass(frozen=True)
class CriticalValue:
    """Outcome of a threshold search, with the probe trace that produced it."""

    parameter: str
    value: float
    witness: ViolationResult | None
    trace: tuple[tuple[float, float], ...]
    binning: BinningSet | None = None

    def __float__(self) -> float:
        return self.value


def _bisect(fn, lo: float, hi: float, width: float, trace: list, monotone: bool):
    """Shrink [lo, hi] with fn(lo) <= 2 < fn(hi) until hi - lo <= width."""
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        val = fn(mid)
        trace.append((mid, val))
        if val > CLASSICAL_BOUND:
            hi = mid
        else:
            lo = mid
    if monotone:
        _assert_monotone(trace, lo)
    return lo, hi


def _assert_monotone(trace, start: float):
    # far below the crossing the norm can dip before recovering to 2 at zero;
    # soundness only needs the ordering from the final lower bracket upward
    ordered = sorted(p for p in trace if p[0] >= start)
    for (x0, y0), (x1, y1) in zip(ordered, ordered[1:]):
        if y1 < y0 - MONOTONE_SLACK:
            raise MonotonicityError(
                f"norm decreased from {y0:.10f} at {x0:.6f} to {y1:.10f} at {x1:.6f}; bisection unsound")


def _critical_norm(parameter: str, op_at, width: float, binning: BinningSet) -> CriticalValue:
    trace = []

    def norm(x):
        return chsh_norm(op_at(x)).value

    top = norm(1.0)
    trace.append((1.0, top))
    if top <= CLASSICAL_BOUND:
        raise NoViolationError(f"no violation at {parameter} = 1", top)
    bottom = norm(0.0)
    trace.append((0.0, bottom))
    if bottom > CLASSICAL_BOUND:
        return CriticalValue(parameter, 0.0, chsh_norm(op_at(0.0), binning=binning), tuple(trace), binning)
    lo, hi = _bisect(norm, 0.0, 1.0, width, trace, monotone=True)
    witness = chsh_norm(op_at(min(1.0, hi + width)), binning=binning)
    return CriticalValue(parameter, 0.5 * (lo + hi), witness, tuple(trace), binning)


def critical_eta(a_plus: BinningSet, spec: SubspaceSpec, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                 width: float = BISECTION_WIDTH, t: float = 1.0) -> CriticalValue:
    """Smallest efficiency at which the compressed operator norm still exceeds 2."""
    return _critical_norm(
        "eta", lambda eta: noisy_subspace_operator(a_plus, spec, NoiseParams(eta=eta, t=t), cfg), width, a_plus)


def critical_t(a_plus: BinningSet, spec: SubspaceSpec, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
               width: float = BISECTION_WIDTH, eta: float = 1.0) -> CriticalValue:
    """Smallest transmittance at which the compressed operator norm still exceeds 2."""
    return _critical_norm(
        "t", lambda t: noisy_subspace_operator(a_plus, spec, NoiseParams(eta=eta, t=t), cfg), width, a_plus)


def state_expectation(state: PureState, a_plus: BinningSet, noise: NoiseParams = NoiseParams(),
                      cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """<psi| B(A+, eta, delta, t) |psi> for a two-mode state (equal mode dims)."""
    dims = state.mode_dims
    if len(dims) != 2:
        raise DimensionMismatchError("CHSH needs a two-mode state")
    dim = max(dims)
    if dims != (dim, dim):
        state = state.resized((dim, dim))
    return expectation(state, noisy_chsh_operator(a_plus, dim, noise, cfg))


def _scan_then_bisect(parameter: str, value_at, width: float, scan_step: float) -> tuple[float, list]:
    """Largest-magnitude threshold below which |<B>| <= 2, scanning down from 1.

    State expectations need not be monotone in the noise parameter, so the
    first sign change below 1 is bracketed by a downward scan before bisecting.
    """
    trace = []
    top = abs(value_at(1.0))
    trace.append((1.0, top))
    if top <= CLASSICAL_BOUND:
        raise NoViolationError(f"no violation at {parameter} = 1", top)
    hi = 1.0
    steps = int(round(1.0 / scan_step))
    lo = None
    for i in range(1, steps + 1):
        x = max(0.0, 1.0 - i * scan_step)
        val = abs(value_at(x))
        trace.append((x, val))
        if val <= CLASSICAL_BOUND:
            lo = x
            break
        hi = x
    if lo is None:
        return 0.0, trace

    def mag(x):
        return abs(value_at(x))

    lo, hi = _bisect(mag, lo, hi, width, trace, monotone=False)
    return 0.5 * (lo + hi), trace


def critical_eta_of_state(state: PureState, a_plus: BinningSet, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                          width: float = BISECTION_WIDTH, scan_step: float = 0.01,
                          delta: float = 1.0, t: float = 1.0) -> CriticalValue:
    """Efficiency below which the fixed state's |<B>| drops to 2."""
    fn = lambda eta: state_expectation(state, a_plus, NoiseParams(eta=eta, delta=delta, t=t), cfg)
    value, trace = _scan_then_bisect("eta", fn, width, scan_step)
    return CriticalValue("eta", value, None, tuple(trace), a_plus)


def critical_delta_of_state(state: PureState, a_plus: BinningSet, eta: float = 1.0,
                            cfg: QuadratureConfig = DEFAULT_QUADRATURE, width: float = BISECTION_WIDTH,
                            scan_step: float = 0.01) -> CriticalValue:
    """Correct-vacuum probability below which the fixed state's |<B>| drops to 2."""
    fn = lambda delta: state_expectation(state, a_plus, NoiseParams(eta=eta, delta=delta), cfg)
    value, trace = _scan_then_bisect("delta", fn, width, scan_step)
    return CriticalValue("delta", value, None, tuple(trace), a_plus)


def critical_t_of_state(state: PureState, a_plus: BinningSet, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                        width: float = BISECTION_WIDTH, scan_step: float = 0.01,
                        eta: float = 1.0) -> CriticalValue:
    """Transmittance below which the fixed state's |<B>| drops to 2."""
    fn = lambda t: state_expectation(state, a_plus, NoiseParams(eta=eta, t=t), cfg)
    value, trace = _scan_then_bisect("t", fn, width, scan_step)
    return CriticalValue("t", value, None, tuple(trace), a_plus)


def violation_curve(state: PureState, a_plus: BinningSet, sweep: str, grid,
                    cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> list[tuple[float, float]]:
    """(parameter, <B>) pairs with ``sweep`` in {"eta", "t"}; the other parameters stay noiseless."""
    if sweep not in ("eta", "t", "delta"):
        raise ValueError(f"unknown sweep {sweep!r}")
    out = []
    for x in grid:
        x = _check_unit(sweep, x)
        out.append((x, state_expectation(state, a_plus, NoiseParams(**{sweep: x}), cfg)))
    return out


def curve_crossing(curve, level: float = 2.0) -> float | None:
    """Linear interpolation of the largest parameter where |y| falls to ``level``."""
    pts = sorted(curve)
    for (x0, y0), (x1, y1) in zip(reversed(pts[:-1]), reversed(pts[1:])):
        a0, a1 = abs(y0), abs(y1)
        if a0 <= level < a1:
            return x0 + (level - a0) * (x1 - x0) / (a1 - a0)
    return None
