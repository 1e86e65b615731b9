"""Largest CHSH value when one correlator is held fixed.

The optimizer works with two qubits in Schmidt form cos(p)|00> + sin(p)|11>
and real (planar) +-1 observables cos(a) Z + sin(a) X, for which

    <A(a) (x) B(b)> = cos(a) cos(b) + sin(2p) sin(a) sin(b).

An independent oracle samples Tsirelson vector strategies in R^3 instead,
so it does not inherit the planar restriction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

# CHSH = A0 B0 + A0 B1 + A1 B0 - A1 B1.  Fixing <A_i B_j> = c for any pair is
# equivalent to fixing <A0 B0> = c after relabeling settings and flipping outcomes:
#   (0,0): identity
#   (0,1): swap B0 <-> B1, then negate A1         -> pattern (+ + / + -)
#   (1,0): swap A0 <-> A1, then negate B1         -> pattern (+ + / + -)
#   (1,1): swap both pairs, negate B1 and A1, overall sign -1 (|<B>| unchanged)
# The flips never touch the relabeled (0,0) pair, so the fixed value carries over as is.
_PAIRS = frozenset({(0, 0), (0, 1), (1, 0), (1, 1)})


@dataclass(frozen=True)
class CorrelatorConstraint:
    which: tuple[int, int] = (0, 0)
    value: float = 1.0

    def __post_init__(self):
        if tuple(self.which) not in _PAIRS:
            raise ValueError(f"which must be a pair in {{0,1}}^2, got {self.which}")
        if not -1.0 - 1e-15 <= self.value <= 1.0 + 1e-15:
            raise ValueError(f"correlator value must lie in [-1, 1], got {self.value}")
        object.__setattr__(self, "which", tuple(self.which))
        object.__setattr__(self, "value", float(min(1.0, max(-1.0, self.value))))

    def canonical_value(self) -> float:
        """Equivalent fixed value of <A0 B0> (see the relabeling table above)."""
        return self.value


def _correlator(a, b, s):
    return np.cos(a) * np.cos(b) + s * np.sin(a) * np.sin(b)


def _chsh_terms(x):
    a0, a1, b0, b1, p = x
    s = math.sin(2 * p)
    e00 = _correlator(a0, b0, s)
    total = e00 + _correlator(a0, b1, s) + _correlator(a1, b0, s) - _correlator(a1, b1, s)
    return total, e00


def _coarse_starts(c: float, points: int, keep: int):
    angles = np.linspace(0.0, 2 * math.pi, points, endpoint=False)
    schmidt = np.linspace(0.0, math.pi / 4, 7)
    a0, a1, b0, b1, p = np.meshgrid(angles, angles, angles, angles, schmidt, indexing="ij", sparse=True)
    s = np.sin(2 * p)
    e00 = _correlator(a0, b0, s)
    total = e00 + _correlator(a0, b1, s) + _correlator(a1, b0, s) - _correlator(a1, b1, s)
    score = np.abs(total) - 10.0 * np.abs(e00 - c)
    flat = np.argsort(score, axis=None)[::-1][:keep]
    grids = np.broadcast_arrays(a0, a1, b0, b1, p)
    return [np.array([g.flat[i] for g in grids]) for i in flat]


def constrained_chsh_max(c: CorrelatorConstraint | float, grid_points: int = 12, restarts: int = 12) -> float:
    """Largest |<CHSH>| over two-qubit strategies with the given correlator fixed.

    Penalized grid over the four measurement angles and the Schmidt angle,
    then SLSQP with the constraint imposed exactly, from the best cells.
    """
    if not isinstance(c, CorrelatorConstraint):
        c = CorrelatorConstraint((0, 0), c)
    target = c.canonical_value()
    best = -math.inf
    cons = {"type": "eq", "fun": lambda x: _chsh_terms(x)[1] - target}
    bounds = [(None, None)] * 4 + [(0.0, math.pi / 4)]
    for x0 in _coarse_starts(target, grid_points, restarts):
        for sign in (1.0, -1.0):
            res = minimize(lambda x: -sign * _chsh_terms(x)[0], x0, method="SLSQP", constraints=[cons],
                           bounds=bounds, options={"ftol": 1e-14, "maxiter": 500})
            total, e00 = _chsh_terms(_project(res.x, target))
            if abs(e00 - target) < 1e-12:
                best = max(best, abs(total))
    return float(best)


def _project(x, c: float):
    """Move b0 so that <A0 B0> = c holds to rounding.

    The curve has infinite slope at c = +-1, so solver-level constraint slack
    of 1e-9 would otherwise show up as 1e-7 in the maximum.
    """
    a0, a1, b0, b1, p = x
    s = math.sin(2 * p)
    # <A0 B(b)> = r cos(b - beta)
    r = math.hypot(math.cos(a0), s * math.sin(a0))
    beta = math.atan2(s * math.sin(a0), math.cos(a0))
    if r == 0.0:
        return x
    phase = math.acos(max(-1.0, min(1.0, c / r)))
    options = [beta + phase, beta - phase]
    b0_new = min(options, key=lambda b: abs(math.remainder(b - b0, 2 * math.pi)))
    return np.array([a0, a1, b0_new, b1, p])


def constrained_chsh_curve(grid) -> list[tuple[float, float]]:
    return [(float(c), constrained_chsh_max(float(c))) for c in grid]


def vector_oracle(c: float, samples: int = 1_000_000, seed: int = 0, chunk: int = 200_000) -> float:
    """Best |<CHSH>| among random R^3 vector strategies with u0 . v0 = c.

    Correlators are u_i . v_j for unit vectors.  u0 and v0 are placed to meet
    the constraint exactly, u1 is uniform on the sphere, and the optimal v1
    is closed form: it contributes |u0 - u1| to either sign of the sum.
    """
    rng = np.random.default_rng(seed)
    u0 = np.array([1.0, 0.0, 0.0])
    v0 = np.array([c, math.sqrt(max(0.0, 1.0 - c * c)), 0.0])
    best = -math.inf
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        u1 = rng.normal(size=(n, 3))
        u1 /= np.linalg.norm(u1, axis=1, keepdims=True)
        free = np.linalg.norm(u0 - u1, axis=1)
        cross = u1 @ v0
        best = max(best, float(np.max(np.maximum(c + cross + free, -c - cross + free))))
        done += n
    return best


def _random_unit(rng, dim):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def qudit_constrained_max(c: float, dim: int = 3, starts: int = 4, seed: int = 0) -> float:
    """Local search over real qudit states and reflection observables +-(1 - 2 v v^T).

    Used as a spot check that larger local dimension does not beat qubits.
    """
    rng = np.random.default_rng(seed)
    eye = np.eye(dim)

    def unpack(x, signs):
        psi = x[: dim * dim]
        psi = psi / np.linalg.norm(psi)
        obs = []
        for k in range(4):
            v = x[dim * dim + k * dim: dim * dim + (k + 1) * dim]
            v = v / np.linalg.norm(v)
            obs.append(signs[k] * (eye - 2.0 * np.outer(v, v)))
        return psi, obs

    def terms(x, signs):
        psi, (a0, a1, b0, b1) = unpack(x, signs)
        e = {(i, j): psi @ np.kron(a, b) @ psi for i, a in enumerate((a0, a1)) for j, b in enumerate((b0, b1))}
        return e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1], e[0, 0]

    best = -math.inf
    for signs in itertools.product((1.0, -1.0), repeat=4):
        for _ in range(starts):
            x0 = np.concatenate([_random_unit(rng, dim * dim)] + [_random_unit(rng, dim) for _ in range(4)])
            for sign in (1.0, -1.0):
                res = minimize(lambda x: -sign * terms(x, signs)[0], x0, method="SLSQP",
                               constraints=[{"type": "eq", "fun": lambda x: terms(x, signs)[1] - c}],
                               options={"ftol": 1e-12, "maxiter": 300})
                total, e00 = terms(res.x, signs)
                if abs(e00 - c) < 1e-7:
                    best = max(best, abs(total))
    return float(best)
