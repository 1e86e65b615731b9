"""Single-mode observables on a truncated Fock space.

Quadrature convention: the vacuum wavefunction is

    phi_0(x) = pi**(-1/4) * exp(-x**2 / 2),

i.e. X = (a + a^dagger) / sqrt(2).  Every binning endpoint in this package is
expressed in these units; a different scaling silently rescales all intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

_GL_NODES, _GL_WEIGHTS = leggauss(32)
_KEY_DIGITS = 12


class QuadratureError(RuntimeError):
    """Panel refinement did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class BinningSet:
    """Interval ``[lower, upper]`` of quadrature outcomes mapped to +1.

    Endpoints may be infinite.  The empty set is the dedicated sentinel
    ``BinningSet.empty()``.
    """

    lower: float = -math.inf
    upper: float = math.inf
    is_empty: bool = False

    def __post_init__(self):
        if self.is_empty:
            return
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("binning endpoints must not be NaN")
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")

    @classmethod
    def empty(cls) -> "BinningSet":
        return cls(0.0, 0.0, is_empty=True)

    @classmethod
    def full(cls) -> "BinningSet":
        return cls(-math.inf, math.inf)

    @classmethod
    def half_line(cls, lower: float = 0.0) -> "BinningSet":
        return cls(lower, math.inf)

    @classmethod
    def symmetric(cls, half_width: float) -> "BinningSet":
        return cls(-half_width, half_width)

    @property
    def is_full(self) -> bool:
        return not self.is_empty and self.lower == -math.inf and self.upper == math.inf

    def mirrored(self) -> "BinningSet":
        if self.is_empty:
            return self
        return BinningSet(-self.upper, -self.lower)

    def key(self) -> tuple:
        """Hashable key with endpoints rounded to 1e-12 (cache identity)."""
        if self.is_empty:
            return ("empty",)
        return (_round_endpoint(self.lower), _round_endpoint(self.upper))

    def __str__(self) -> str:
        if self.is_empty:
            return "{}"
        lo = "-inf" if self.lower == -math.inf else f"{self.lower:.6g}"
        hi = "inf" if self.upper == math.inf else f"{self.upper:.6g}"
        left = "(" if self.lower == -math.inf else "["
        right = ")" if self.upper == math.inf else "]"
        return f"{left}{lo}, {hi}{right}"


def _round_endpoint(x: float) -> float:
    return x if math.isinf(x) else round(x, _KEY_DIGITS)


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tolerance: float = 1e-10
    # None -> sqrt(2 * n_max) + 10, beyond which every retained phi_n < 1e-14
    tail_cutoff: float | None = None
    max_refinements: int = 10

    def __post_init__(self):
        if not self.abs_tolerance > 0:
            raise ValueError("abs_tolerance must be positive")

    def cutoff(self, n_max: int) -> float:
        default = math.sqrt(2.0 * n_max) + 10.0
        if self.tail_cutoff is None:
            return default
        return max(self.tail_cutoff, math.sqrt(2.0 * n_max + 1.0))


DEFAULT_QUADRATURE = QuadratureConfig()


def hermite_functions(n_max: int, x) -> np.ndarray:
    """Values of phi_0..phi_{n_max} at ``x``; shape ``(n_max + 1,) + x.shape``.

    Uses the three-term recurrence of the normalized functions, which stays
    finite for large n where raw Hermite polynomials overflow.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_fn(n: int, x: float) -> float:
    """The n-th Hermite function phi_n(x) = <x|n>."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return float(hermite_functions(n, x)[n])


def _gl_nodes(lo: float, hi: float, panels: int):
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return x, w


def _finite_window(a_plus: BinningSet, cutoff: float):
    lo = max(a_plus.lower, -cutoff)
    hi = min(a_plus.upper, cutoff)
    return lo, hi


def _panel_integral(lo: float, hi: float, n_max: int, cfg: QuadratureConfig) -> np.ndarray:
    """Gram matrix int_lo^hi phi_m phi_n for m, n <= n_max, refined dyadically."""
    panels = max(1, math.ceil(hi - lo))
    x, w = _gl_nodes(lo, hi, panels)
    phi = hermite_functions(n_max, x)
    coarse = (phi * w) @ phi.T
    err = math.inf
    for _ in range(cfg.max_refinements):
        panels *= 2
        x, w = _gl_nodes(lo, hi, panels)
        phi = hermite_functions(n_max, x)
        fine = (phi * w) @ phi.T
        err = float(np.max(np.abs(fine - coarse)))
        if err < cfg.abs_tolerance:
            return fine
        coarse = fine
    raise QuadratureError(f"overlap integrals on [{lo}, {hi}] did not converge", err)


@lru_cache(maxsize=512)
def _cached_overlap(key: tuple, dim: int, cfg: QuadratureConfig) -> np.ndarray:
    n_max = dim - 1
    if key == ("empty",):
        out = np.zeros((dim, dim))
    elif key == (-math.inf, math.inf):
        out = np.eye(dim)
    else:
        lo, hi = _finite_window(BinningSet(*key), cfg.cutoff(n_max))
        out = np.zeros((dim, dim)) if hi <= lo else _panel_integral(lo, hi, n_max, cfg)
        out = 0.5 * (out + out.T)
        if key[0] == -key[1]:
            # phi_m phi_n is odd when m + n is odd, so those entries vanish exactly
            m, n = np.indices(out.shape)
            out[(m + n) % 2 == 1] = 0.0
    out.setflags(write=False)
    return out


def overlap_matrix(a_plus: BinningSet, dim: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> np.ndarray:
    """All overlaps ``P[m, n] = int_{A+} phi_m phi_n`` for m, n < dim (read-only, cached)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return _cached_overlap(a_plus.key(), dim, cfg)


def overlap_integral(m: int, n: int, a_plus: BinningSet, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    if m < 0 or n < 0:
        raise ValueError("Fock indices must be non-negative")
    return float(overlap_matrix(a_plus, max(m, n) + 1, cfg)[m, n])


def _product_sign_changes(m: int, n: int, cutoff: float) -> list[float]:
    # grid finer than the smallest zero spacing ~ pi / sqrt(2 n + 1)
    n_hi = max(m, n)
    step = min(0.01, 0.1 * math.pi / math.sqrt(2 * n_hi + 1))
    grid = np.arange(-cutoff, cutoff + step, step)

    def f(x):
        vals = hermite_functions(n_hi, x)
        return vals[m] * vals[n]

    vals = f(grid)
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(brentq(lambda x: float(f(x)), grid[i], grid[i + 1], xtol=1e-14))
    return roots


def abs_overlap_integral(m: int, n: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Full-line integral of ``|phi_m phi_n|``.

    Sign changes of the product are bracketed on a fine grid and polished by
    Brent's method; each sign-definite piece is integrated by Gauss-Legendre.
    """
    if m < 0 or n < 0:
        raise ValueError("Fock indices must be non-negative")
    if m == n:
        return 1.0
    cutoff = cfg.cutoff(max(m, n))
    edges = [-cutoff, *_product_sign_changes(m, n, cutoff), cutoff]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        piece = _panel_integral(lo, hi, max(m, n), cfg)[m, n]
        total += abs(piece)
    return float(total)


def build_Q(a_plus: BinningSet, dim: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> np.ndarray:
    """Dichotomized quadrature: ``<m|Q|n> = 2 int_{A+} phi_m phi_n - delta_mn``."""
    return 2.0 * overlap_matrix(a_plus, dim, cfg) - np.eye(dim)


def build_D(dim: int) -> np.ndarray:
    """Click/no-click observable: -1 on the vacuum, +1 on every n >= 1."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    diag = np.ones(dim)
    diag[0] = -1.0
    return np.diag(diag)


def build_N(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float))


def build_rotated_Q(a_plus: BinningSet, phase: float, dim: int,
                    cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> np.ndarray:
    """Binned quadrature cos(phase) X + sin(phase) P.

    Obtained from ``build_Q`` by conjugation with exp(i phase N), which
    multiplies entry (m, n) by exp(i (m - n) phase); on span{|0>, |1>} with
    sign binning this is sqrt(2/pi) (cos(phase) sigma_x + sin(phase) sigma_y).
    """
    q = build_Q(a_plus, dim, cfg)
    n = np.arange(dim)
    phases = np.exp(1j * phase * (n[:, None] - n[None, :]))
    out = q * phases
    if np.allclose(out.imag, 0.0, atol=1e-12):
        return out.real.copy()
    return out
