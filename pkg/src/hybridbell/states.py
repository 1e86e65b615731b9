"""Named two-mode and multimode states, plus N00N closed forms."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from .fock import DEFAULT_QUADRATURE, BinningSet, QuadratureConfig, abs_overlap_integral, overlap_matrix
from .operators import PureState

log = logging.getLogger(__name__)

TAIL_TOLERANCE = 1e-8


class InsufficientDimensionError(ValueError):
    def __init__(self, alpha: complex, dim: int, tail: float):
        super().__init__(f"dim {dim} leaves coherent tail weight {tail:.3e} for alpha={alpha}")
        self.tail = tail


class CorruptFixtureError(ValueError):
    pass


def noon_state(n: int, dim: int | None = None) -> PureState:
    """(|n,0> + |0,n>)/sqrt(2)."""
    if n < 1:
        raise ValueError("n must be positive")
    dim = n + 1 if dim is None else dim
    if n >= dim:
        raise ValueError(f"n = {n} does not fit in dim {dim}")
    return PureState.from_amplitudes((dim, dim), {(n, 0): 1.0, (0, n): 1.0})


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    r = abs(alpha)
    if r == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def coherent_tail(alpha: complex, dim: int) -> float:
    """Weight of |alpha> on Fock states n >= dim."""
    return max(0.0, 1.0 - float(np.sum(np.abs(coherent_amplitudes(alpha, dim)) ** 2)))


def auto_dim(alpha: complex, tail: float = TAIL_TOLERANCE) -> int:
    """Smallest truncation whose discarded coherent weight is below ``tail``."""
    dim = max(2, int(abs(alpha) ** 2) + 1)
    while coherent_tail(alpha, dim) >= tail:
        dim += 1
    return dim


def coherent_state(alpha: complex, dim: int | None = None) -> PureState:
    dim = auto_dim(alpha) if dim is None else dim
    tail = coherent_tail(alpha, dim)
    if tail >= TAIL_TOLERANCE:
        raise InsufficientDimensionError(alpha, dim, tail)
    return PureState.from_vector((dim,), coherent_amplitudes(alpha, dim))


def _parity_sign(parity: str) -> int:
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    return 1 if parity == "even" else -1


def cat_amplitudes(alpha: complex, parity: str, dim: int) -> np.ndarray:
    """Normalized (|alpha> +- |-alpha>) Fock amplitudes.

    Global phase: the lowest nonzero amplitude is made real and positive, so
    that superpositions with the vacuum are well defined for complex alpha.
    """
    sign = _parity_sign(parity)
    if alpha == 0:
        if sign < 0:
            raise ValueError("the odd cat is undefined at alpha = 0")
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    c = coherent_amplitudes(alpha, dim)
    c = c + sign * coherent_amplitudes(-alpha, dim)
    c[(1 if sign > 0 else 0)::2] = 0.0  # cancels analytically; drop the rounding residue
    c /= np.linalg.norm(c)
    first = int(np.argmax(np.abs(c) > 1e-300))
    c *= abs(c[first]) / c[first]
    c[first] = abs(c[first])
    return c


def cat_state(alpha: complex, parity: str = "even", dim: int | None = None) -> PureState:
    dim = auto_dim(alpha) if dim is None else dim
    tail = coherent_tail(alpha, dim)
    if tail >= TAIL_TOLERANCE:
        raise InsufficientDimensionError(alpha, dim, tail)
    return PureState.from_vector((dim,), cat_amplitudes(alpha, parity, dim))


@dataclass(frozen=True)
class GammaParams:
    theta: float
    alpha: complex
    parity: str = "even"

    def __post_init__(self):
        _parity_sign(self.parity)
        if abs(self.alpha) == 0:
            raise ValueError("alpha must be nonzero")


def gamma_state(p: GammaParams, dim: int | None = None) -> PureState:
    """cos(theta) (|cat,0> + |0,cat>)/sqrt(2) + sin(theta) (|0,0> - |cat,cat>)/sqrt(2), renormalized.

    The even cat overlaps the vacuum, so the two branches are not exactly
    orthogonal; the literal superposition is normalized afterwards.
    """
    dim = auto_dim(p.alpha) if dim is None else dim
    tail = coherent_tail(p.alpha, dim)
    if tail >= TAIL_TOLERANCE:
        raise InsufficientDimensionError(p.alpha, dim, tail)
    cat = cat_amplitudes(p.alpha, p.parity, dim)
    vac = np.zeros(dim)
    vac[0] = 1.0
    cat_zero = (np.outer(cat, vac) + np.outer(vac, cat)) / math.sqrt(2)
    zero_cat = (np.outer(vac, vac) - np.outer(cat, cat)) / math.sqrt(2)
    psi = math.cos(p.theta) * cat_zero + math.sin(p.theta) * zero_cat
    norm = np.linalg.norm(psi)
    log.debug("gamma state: vacuum overlap %.4g, norm before renormalization %.6f", abs(cat[0]), norm)
    return PureState.from_vector((dim, dim), psi)


def ghz_state(n_parties: int, dim: int = 2) -> PureState:
    """(|0...0> + |1...1>)/sqrt(2)."""
    if n_parties < 2:
        raise ValueError("need at least two parties")
    dims = (dim,) * n_parties
    return PureState.from_amplitudes(dims, {(0,) * n_parties: 1.0, (1,) * n_parties: 1.0})


def w_state(n_parties: int = 3, dim: int = 2) -> PureState:
    """Equal superposition of one photon in each of the modes."""
    dims = (dim,) * n_parties
    amps = {tuple(int(i == k) for i in range(n_parties)): 1.0 for k in range(n_parties)}
    return PureState.from_amplitudes(dims, amps)


def mean_photon_number(state: PureState) -> tuple[np.ndarray, float]:
    """Per-mode and total mean photon number."""
    per_mode = np.array([np.arange(d) @ state.marginal_populations(i) for i, d in enumerate(state.mode_dims)])
    return per_mode, float(per_mode.sum())


def noon_chsh_value(n: int, a_plus: BinningSet, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Closed-form <B> on the N00N state.

    2 + 4 (int phi_0 phi_n)^2 - 4 int phi_n^2 (1 - int phi_0^2), all over A+.
    """
    if n < 1:
        raise ValueError("n must be positive")
    p = overlap_matrix(a_plus, n + 1, cfg)
    return 2.0 + 4.0 * p[0, n] ** 2 - 4.0 * p[n, n] * (1.0 - p[0, 0])


def noon_upper_bound(n: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """2 + (int |phi_0 phi_n|)^2, plus the tighter 1 + (...)^2 that applies to odd n (else None)."""
    if n < 1:
        raise ValueError("n must be positive")
    s = abs_overlap_integral(0, n, cfg) ** 2
    return 2.0 + s, (1.0 + s if n % 2 else None)


def noon_optimum(n: int, grid_step: float = 0.05, edge: float = 3.0,
                 cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> tuple[float, BinningSet]:
    """Largest closed-form |<B>| over intervals: grid scan then Nelder-Mead from the best cell."""
    pts = np.round(np.arange(-edge, edge + grid_step / 2, grid_step), 10)
    best = (-math.inf, None)
    cells = [BinningSet.half_line(float(a)) for a in pts]
    cells += [BinningSet(float(a), float(b)) for a in pts for b in pts if a < b and a + b >= 0]
    for cell in cells:
        v = abs(noon_chsh_value(n, cell, cfg))
        if v > best[0] + 1e-12:
            best = (v, cell)
    start = best[1]
    half = start.upper == math.inf

    def f(x):
        if half:
            return -abs(noon_chsh_value(n, BinningSet.half_line(float(x[0])), cfg))
        if not x[0] < x[1]:
            return 0.0
        return -abs(noon_chsh_value(n, BinningSet(float(x[0]), float(x[1])), cfg))

    x0 = np.array([start.lower] if half else [start.lower, start.upper])
    res = minimize(f, x0, method="Nelder-Mead", options={"xatol": 1e-4, "fatol": 1e-12})
    if -res.fun > best[0]:
        b = BinningSet.half_line(float(res.x[0])) if half else BinningSet(float(res.x[0]), float(res.x[1]))
        best = (-float(res.fun), b)
    return best


FIXTURE_NAMES = tuple(f"{fam}{k}" for fam, ks in
                      (("chi", (1, 2, 3, 4)), ("psi", (2, 4, 6, 8)), ("phi", (2, 4, 6, 8)), ("xi", (2, 4, 6, 8)))
                      for k in ks)
_GREEK = {"χ": "chi", "ψ": "psi", "φ": "phi", "ξ": "xi"}
_SUBSCRIPTS = str.maketrans("₀₁₂₃₄₅₆₇₈₉", "0123456789")

# These printed states only reproduce their tabulated values with the |00>
# amplitude negated; every other coefficient is used as printed.
VACUUM_SIGN_ERRATA = frozenset({"chi3", "psi2", "psi4", "phi2"})


def _fixture_key(name: str) -> str:
    key = name.strip().translate(_SUBSCRIPTS)
    for g, latin in _GREEK.items():
        key = key.replace(g, latin)
    key = key.lower()
    if key not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")
    return key


@dataclass(frozen=True)
class Fixture:
    name: str
    records: tuple[tuple[int, int, complex], ...]
    binning: BinningSet | None
    description: str


def read_fixture(name: str) -> Fixture:
    """Parse the bundled ``nA nB re im`` file without touching the coefficients."""
    key = _fixture_key(name)
    text = resources.files("hybridbell").joinpath("fixtures", f"{key}.txt").read_text()
    records, binning, desc = [], None, ""
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("binning "):
                lo, hi = (float(v) for v in body.split()[1:3])
                binning = BinningSet(lo, hi)
            elif body.startswith(f"{key}:"):
                desc = body.split(":", 1)[1].strip()
            continue
        fields = line.split()
        if len(fields) != 4:
            raise CorruptFixtureError(f"{key}: malformed record {line!r}")
        records.append((int(fields[0]), int(fields[1]), complex(float(fields[2]), float(fields[3]))))
    return Fixture(key, tuple(records), binning, desc)


def load_fixture(name: str, printed: bool = False) -> PureState:
    """Bundled two-mode state, renormalized.

    With ``printed=False`` (the default) the documented vacuum-sign errata are
    applied; ``printed=True`` returns the coefficients exactly as stored.
    """
    fx = read_fixture(name)
    dim = 1 + max(max(a, b) for a, b, _ in fx.records)
    amps = {}
    for a, b, c in fx.records:
        if not printed and (a, b) == (0, 0) and fx.name in VACUUM_SIGN_ERRATA:
            c = -c
        amps[(a, b)] = amps.get((a, b), 0) + c
    norm2 = sum(abs(c) ** 2 for c in amps.values())
    if abs(math.sqrt(norm2) - 1.0) > 0.05:
        raise CorruptFixtureError(f"{fx.name}: printed norm {math.sqrt(norm2):.4f} deviates from 1 by > 0.05")
    log.info("fixture %s renormalized by factor %.6f", fx.name, 1.0 / math.sqrt(norm2))
    return PureState.from_amplitudes((dim, dim), amps)


def fixture_binning(name: str) -> BinningSet:
    return read_fixture(name).binning
