"""Search over binning intervals for a subspace of two-mode Fock space.

A coarse grid over interval endpoints (half-lines included) is followed by
Nelder-Mead restarts from the best cells.  Parity (-1)^N maps Q([a, b]) to
Q([-b, -a]) and commutes with every noise model here, so an interval and its
mirror image give unitarily equivalent operators and only one of each pair is
scanned.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .chsh import ViolationResult, analytic_norm, chsh_norm
from .fock import DEFAULT_QUADRATURE, BinningSet, QuadratureConfig, overlap_matrix
from .noise import CLASSICAL_BOUND, NoiseParams, NoViolationError, critical_eta, critical_t, noisy_subspace_operator
from .operators import SubspaceSpec

log = logging.getLogger(__name__)

OBJECTIVES = ("max-violation", "min-eta", "min-t")
GRID_EDGE = 3.0


@dataclass(frozen=True)
class BinningOptimum:
    """Best interval found; ``value`` is the norm, eta_c or t_c depending on ``objective``."""

    objective: str
    value: float
    binning: BinningSet
    witness: ViolationResult | None
    grid_step: float
    evaluations: int
    heuristic: bool = True


def _canonical_cells(step: float, edge: float = GRID_EDGE):
    pts = np.round(np.arange(-edge, edge + step / 2, step), 10)
    lowers = [-math.inf, *pts]
    uppers = [*pts, math.inf]
    cells = []
    for lo in lowers:
        for hi in uppers:
            if not lo < hi or (lo == -math.inf and hi == math.inf):
                continue
            # keep one interval of every mirror pair: lower + upper >= 0
            if lo == -math.inf or (hi != math.inf and lo + hi < 0):
                continue
            cells.append(BinningSet(float(lo), float(hi)))
    return cells


def _cell_key(b: BinningSet):
    return (b.lower, b.upper)


class _Objective:
    def __init__(self, spec: SubspaceSpec, noise: NoiseParams, objective: str,
                 cfg: QuadratureConfig, dense_limit: int):
        if objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
        self.spec, self.noise, self.objective = spec, noise, objective
        self.cfg, self.dense_limit = cfg, dense_limit
        self.evaluations = 0

    def norm(self, b: BinningSet, noise: NoiseParams | None = None) -> float:
        op = noisy_subspace_operator(b, self.spec, noise or self.noise, self.cfg)
        return chsh_norm(op, dense_limit=self.dense_limit).value

    def score(self, b: BinningSet, incumbent: float = math.inf) -> float:
        """Quantity to minimize: -norm, eta_c or t_c (inf when there is no violation)."""
        self.evaluations += 1
        if self.objective == "max-violation":
            return -self.norm(b)
        param = "eta" if self.objective == "min-eta" else "t"
        # a cell that does not violate at the incumbent threshold cannot improve on it
        if incumbent < 1.0 and self.norm(b, self.noise.replace(**{param: incumbent})) <= CLASSICAL_BOUND:
            return math.inf
        try:
            if param == "eta":
                return critical_eta(b, self.spec, self.cfg, t=self.noise.t).value
            return critical_t(b, self.spec, self.cfg, eta=self.noise.eta).value
        except NoViolationError:
            return math.inf


def _grid_scan(obj: _Objective, cells, prune: bool):
    scored = []
    best = math.inf
    if prune:
        # evaluate in order of decreasing analytic ceiling; stop once no cell can win
        cells = sorted(cells, key=lambda c: (-analytic_norm(c), _cell_key(c)))
    for cell in cells:
        if prune and -analytic_norm(cell) > best - 1e-12:
            break
        s = obj.score(cell, best)
        scored.append((s, _cell_key(cell), cell))
        best = min(best, s)
    scored.sort(key=lambda x: (x[0], x[1]))
    return scored


def _refine(obj: _Objective, start: BinningSet, step: float, xatol: float):
    half = start.upper == math.inf

    def to_binning(x):
        if half:
            return BinningSet.half_line(float(x[0]))
        lo, hi = float(x[0]), float(x[1])
        return BinningSet(lo, hi) if lo < hi else None

    def f(x):
        b = to_binning(x)
        return math.inf if b is None else obj.score(b)

    x0 = np.array([start.lower] if half else [start.lower, start.upper])
    simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(len(x0))])
    res = minimize(f, x0, method="Nelder-Mead",
                   options={"xatol": xatol, "fatol": 1e-10, "initial_simplex": simplex, "maxiter": 400})
    b = to_binning(res.x)
    return (float(res.fun), b) if b is not None else (math.inf, start)


def optimize_binning(spec: SubspaceSpec, noise: NoiseParams = NoiseParams(), objective: str = "max-violation",
                     grid_step: float = 0.05, restarts: int = 5, xatol: float = 1e-3,
                     cfg: QuadratureConfig = DEFAULT_QUADRATURE, dense_limit: int = 150,
                     cells=None) -> BinningOptimum:
    """Shared interval for both parties optimizing ``objective`` on ``spec``.

    ``dense_limit`` only governs the inner loop (Lanczos is much faster than
    a dense solve for a few hundred rows and up); the reported witness is
    recomputed with the default solver switch.  ``cells`` overrides the
    coarse grid, e.g. to restrict the search to symmetric intervals.
    """
    obj = _Objective(spec, noise, objective, cfg, dense_limit)
    cells = _canonical_cells(grid_step) if cells is None else list(cells)
    prune = objective == "max-violation" and noise.is_noiseless
    scored = _grid_scan(obj, cells, prune)
    finite = [c for c in scored if math.isfinite(c[0])]
    if not finite:
        log.info("no cell violates for %s on %s", objective, spec)
        return BinningOptimum(objective, math.inf if objective != "max-violation" else 2.0,
                              BinningSet.half_line(0.0), None, grid_step, obj.evaluations)
    best_score, best = finite[0][0], finite[0][2]
    for s0, _, cell in finite[:restarts]:
        s, b = _refine(obj, cell, grid_step, xatol)
        if s < best_score - 1e-12 or (abs(s - best_score) <= 1e-12 and _cell_key(b) < _cell_key(best)):
            best_score, best = s, b
    best = _snap_to_half_line(best, max(spec.ambient_dims), cfg)
    witness = _witness(obj, best, best_score)
    value = -best_score if objective == "max-violation" else best_score
    if objective == "max-violation":
        value = witness.value
    return BinningOptimum(objective, value, best, witness, grid_step, obj.evaluations)


def _snap_to_half_line(b: BinningSet, dim: int, cfg: QuadratureConfig) -> BinningSet:
    """Replace an endpoint by infinity when that leaves Q unchanged within tolerance."""
    lower, upper = b.lower, b.upper
    q = overlap_matrix(b, dim, cfg)
    if math.isfinite(upper):
        if np.max(np.abs(overlap_matrix(BinningSet(lower, math.inf), dim, cfg) - q)) < cfg.abs_tolerance:
            upper = math.inf
    if math.isfinite(lower) and math.isfinite(upper):
        if np.max(np.abs(overlap_matrix(BinningSet(-math.inf, upper), dim, cfg) - q)) < cfg.abs_tolerance:
            lower = -math.inf
    return BinningSet(lower, upper)


def _witness(obj: _Objective, b: BinningSet, score: float) -> ViolationResult:
    noise = obj.noise
    if obj.objective == "min-eta":
        noise = noise.replace(eta=min(1.0, score + 1e-4))
    elif obj.objective == "min-t":
        noise = noise.replace(t=min(1.0, score + 1e-4))
    op = noisy_subspace_operator(b, obj.spec, noise, obj.cfg)
    return chsh_norm(op, binning=b)


def symmetric_cells(step: float = 0.05, edge: float = GRID_EDGE):
    return [BinningSet.symmetric(float(c)) for c in np.round(np.arange(step, edge + step / 2, step), 10)]


def half_line_cells(step: float = 0.05, edge: float = GRID_EDGE):
    return [BinningSet.half_line(float(c)) for c in np.round(np.arange(-edge, edge + step / 2, step), 10)]


def optimize_state_binning(state, noise: NoiseParams = NoiseParams(), grid_step: float = 0.05,
                           restarts: int = 5, xatol: float = 1e-3, cells=None,
                           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> tuple[float, BinningSet]:
    """Interval maximizing |<psi|B(A+)|psi>| for a fixed two-mode state.

    No mirror reduction here: parity maps the state too, so [a, b] and
    [-b, -a] generally give different values.
    """
    from .noise import state_expectation

    def value(b: BinningSet) -> float:
        return abs(state_expectation(state, b, noise, cfg))

    if cells is None:
        pts = np.round(np.arange(-GRID_EDGE, GRID_EDGE + grid_step / 2, grid_step), 10)
        cells = [BinningSet.half_line(float(a)) for a in pts]
        cells += [BinningSet(-math.inf, float(b)) for b in pts]
        cells += [BinningSet(float(a), float(b)) for a in pts for b in pts if a < b]
    scored = sorted(((-value(c), _cell_key(c), c) for c in cells), key=lambda x: (x[0], x[1]))
    best_val, best = -scored[0][0], scored[0][2]
    for _, _, cell in scored[:restarts]:
        free = [i for i, e in enumerate((cell.lower, cell.upper)) if math.isfinite(e)]
        ends = np.array([cell.lower, cell.upper])

        def build(x):
            e = ends.copy()
            e[free] = x
            return BinningSet(float(e[0]), float(e[1])) if e[0] < e[1] else None

        def f(x):
            b = build(x)
            return 0.0 if b is None else -value(b)

        x0 = ends[free]
        simplex = np.vstack([x0] + [x0 + grid_step * e for e in np.eye(len(x0))])
        res = minimize(f, x0, method="Nelder-Mead",
                       options={"xatol": xatol, "fatol": 1e-10, "initial_simplex": simplex})
        b = build(res.x)
        if b is not None and -res.fun > best_val + 1e-12:
            best_val, best = -float(res.fun), b
    return best_val, best


@dataclass(frozen=True)
class GammaOptimum:
    value: float
    params: "GammaParams"
    binning: BinningSet


def refine_gamma(start: "GammaParams", binning: BinningSet | None = None, xatol: float = 1e-4,
                 cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> GammaOptimum:
    """Local Nelder-Mead over (theta, |alpha|, interval) from ``start``; the phase of alpha is kept."""
    from .noise import state_expectation
    from .states import GammaParams, auto_dim, gamma_state

    phase = np.exp(1j * np.angle(start.alpha))
    if binning is None:
        _, binning = optimize_state_binning(gamma_state(start), cfg=cfg)
    # fixed truncation with headroom keeps the objective smooth while |alpha| moves
    dim = auto_dim(abs(start.alpha) + 1.0)
    free = [i for i, e in enumerate((binning.lower, binning.upper)) if math.isfinite(e)]
    ends = np.array([binning.lower, binning.upper])

    def unpack(x):
        e = ends.copy()
        e[free] = x[2:]
        if not e[0] < e[1] or x[1] <= 0:
            return None
        return GammaParams(float(x[0]), complex(x[1] * phase), start.parity), BinningSet(float(e[0]), float(e[1]))

    def f(x):
        got = unpack(x)
        if got is None:
            return 0.0
        p, b = got
        return -abs(state_expectation(gamma_state(p, dim), b, cfg=cfg))

    x0 = np.concatenate([[start.theta, abs(start.alpha)], ends[free]])
    res = minimize(f, x0, method="Nelder-Mead", options={"xatol": xatol, "fatol": 1e-10, "maxiter": 2000})
    p, b = unpack(res.x)
    value = abs(state_expectation(gamma_state(p), b, cfg=cfg))
    return GammaOptimum(value, p, b)
