"""Multimode operators and states on products of truncated Fock spaces.

A ``JointOperator`` is stored as a short sum of Kronecker products, which keeps
compression, channel pullbacks and matrix-vector products cheap; the dense
matrix is materialized only on demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from math import prod

import numpy as np

HERMITIAN_TOL = 1e-12


class DimensionMismatchError(ValueError):
    pass


def _as_factor(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"mode operators must be square, got shape {a.shape}")
    if np.iscomplexobj(a) and not np.any(a.imag):
        a = a.real
    return a


@dataclass(frozen=True, eq=False)
class JointOperator:
    """Operator ``sum_k coef_k * kron(factors_k)`` on modes of sizes ``mode_dims``."""

    mode_dims: tuple[int, ...]
    terms: tuple[tuple[complex, tuple[np.ndarray, ...]], ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        if not dims or min(dims) < 1:
            raise ValueError("mode_dims must be a nonempty list of positive integers")
        object.__setattr__(self, "mode_dims", dims)
        clean = []
        for coef, factors in self.terms:
            factors = tuple(_as_factor(f) for f in factors)
            if tuple(f.shape[0] for f in factors) != dims:
                raise DimensionMismatchError(
                    f"term dims {[f.shape[0] for f in factors]} do not match {list(dims)}")
            clean.append((coef, factors))
        object.__setattr__(self, "terms", tuple(clean))

    @classmethod
    def from_factors(cls, *factors) -> "JointOperator":
        factors = tuple(_as_factor(f) for f in factors)
        return cls(tuple(f.shape[0] for f in factors), ((1.0, factors),))

    @property
    def size(self) -> int:
        return prod(self.mode_dims)

    @property
    def is_real(self) -> bool:
        return all(complex(coef).imag == 0 and all(np.isrealobj(f) for f in fs)
                   for coef, fs in self.terms)

    @cached_property
    def matrix(self) -> np.ndarray:
        dtype = float if self.is_real else complex
        out = np.zeros((self.size, self.size), dtype=dtype)
        for coef, factors in self.terms:
            c = complex(coef).real if dtype is float else coef
            out += c * reduce(np.kron, factors)
        return out

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Apply to a flat vector without forming the dense matrix."""
        v = np.asarray(v)
        shape = self.mode_dims
        out = None
        for coef, factors in self.terms:
            t = v.reshape(shape)
            for axis, f in enumerate(factors):
                t = np.moveaxis(np.tensordot(f, t, axes=([1], [axis])), 0, axis)
            t = coef * t.reshape(-1)
            out = t if out is None else out + t
        return out

    def map_factors(self, fn) -> "JointOperator":
        """New operator with ``fn(mode, factor)`` applied to every factor."""
        terms = tuple((c, tuple(fn(i, f) for i, f in enumerate(fs))) for c, fs in self.terms)
        return JointOperator(tuple(f.shape[0] for f in terms[0][1]), terms)

    def hermiticity_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0

    def __add__(self, other: "JointOperator") -> "JointOperator":
        if self.mode_dims != other.mode_dims:
            raise DimensionMismatchError(f"{self.mode_dims} vs {other.mode_dims}")
        return JointOperator(self.mode_dims, self.terms + other.terms)

    def __sub__(self, other: "JointOperator") -> "JointOperator":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "JointOperator":
        return JointOperator(self.mode_dims, tuple((scalar * c, fs) for c, fs in self.terms))

    __rmul__ = __mul__

    def __neg__(self) -> "JointOperator":
        return -1.0 * self


def tensor(*ops) -> JointOperator:
    """Kronecker product in the given mode order."""
    if len(ops) == 1 and isinstance(ops[0], (list, tuple)):
        ops = tuple(ops[0])
    if not ops:
        raise ValueError("tensor needs at least one operator")
    return JointOperator.from_factors(*ops)


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector over multimode Fock indices (row-major)."""

    mode_dims: tuple[int, ...]
    vector: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        vec = np.asarray(self.vector, dtype=complex).reshape(-1)
        if vec.size != prod(dims):
            raise DimensionMismatchError(f"vector of length {vec.size} does not fit dims {dims}")
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm {norm:.12f})")
        vec = vec.copy()
        vec.setflags(write=False)
        object.__setattr__(self, "mode_dims", dims)
        object.__setattr__(self, "vector", vec)

    @classmethod
    def from_vector(cls, mode_dims, vector, normalize: bool = True) -> "PureState":
        vec = np.asarray(vector, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(vec)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            vec = vec / norm
        return cls(tuple(mode_dims), vec)

    @classmethod
    def from_amplitudes(cls, mode_dims, amplitudes: dict, normalize: bool = True) -> "PureState":
        dims = tuple(mode_dims)
        vec = np.zeros(dims, dtype=complex)
        for idx, amp in amplitudes.items():
            idx = (idx,) if isinstance(idx, int) else tuple(idx)
            if len(idx) != len(dims) or any(not 0 <= i < d for i, d in zip(idx, dims)):
                raise IndexError(f"Fock index {idx} outside dims {dims}")
            vec[idx] += amp
        return cls.from_vector(dims, vec, normalize)

    @classmethod
    def basis(cls, mode_dims, index) -> "PureState":
        return cls.from_amplitudes(mode_dims, {tuple(index): 1.0})

    @property
    def tensor(self) -> np.ndarray:
        return self.vector.reshape(self.mode_dims)

    def amplitude(self, *index) -> complex:
        if len(index) == 1 and isinstance(index[0], tuple):
            index = index[0]
        if any(not 0 <= i < d for i, d in zip(index, self.mode_dims)):
            return 0j
        return complex(self.tensor[tuple(index)])

    def amplitudes(self, cutoff: float = 0.0) -> dict:
        t = self.tensor
        return {tuple(int(i) for i in idx): complex(t[idx])
                for idx in zip(*np.nonzero(np.abs(t) > cutoff))}

    def resized(self, mode_dims) -> "PureState":
        """Embed into (or cut down to) other mode dimensions; cutting requires zero weight lost."""
        dims = tuple(mode_dims)
        if len(dims) != len(self.mode_dims):
            raise DimensionMismatchError("number of modes differs")
        out = np.zeros(dims, dtype=complex)
        common = tuple(slice(0, min(a, b)) for a, b in zip(dims, self.mode_dims))
        out[common] = self.tensor[common]
        lost = 1.0 - float(np.sum(np.abs(out) ** 2))
        if lost > 1e-10:
            raise ValueError(f"resizing would discard weight {lost:.3e}")
        return PureState.from_vector(dims, out)

    def overlap(self, other: "PureState") -> complex:
        if self.mode_dims != other.mode_dims:
            other = other.resized(self.mode_dims)
        return complex(np.vdot(self.vector, other.vector))

    def fidelity(self, other: "PureState") -> float:
        return abs(self.overlap(other)) ** 2

    def marginal_populations(self, mode: int) -> np.ndarray:
        p = np.abs(self.tensor) ** 2
        axes = tuple(i for i in range(len(self.mode_dims)) if i != mode)
        return p.sum(axis=axes)


def product_state(*states: PureState) -> PureState:
    dims = sum((s.mode_dims for s in states), ())
    vec = reduce(np.kron, (s.vector for s in states))
    return PureState.from_vector(dims, vec)


def expectation(state: PureState, op: JointOperator) -> float:
    """Real expectation value <psi|op|psi>; a sizeable imaginary part is an error."""
    if state.mode_dims != op.mode_dims:
        raise DimensionMismatchError(f"state dims {state.mode_dims} vs operator dims {op.mode_dims}")
    val = np.vdot(state.vector, op.matvec(state.vector))
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}; operator not Hermitian?")
    return float(val.real)


@dataclass(frozen=True)
class SubspaceSpec:
    """Allowed Fock indices for each mode, e.g. ``((0, 2, 4), (0, 2, 4))``."""

    indices: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        idx = tuple(tuple(int(i) for i in mode) for mode in self.indices)
        for mode in idx:
            if not mode:
                raise ValueError("each mode needs at least one index")
            if any(i < 0 for i in mode) or any(b <= a for a, b in zip(mode, mode[1:])):
                raise ValueError(f"indices must be nonnegative and strictly increasing: {mode}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def uniform(cls, indices, modes: int = 2) -> "SubspaceSpec":
        return cls(tuple(tuple(indices) for _ in range(modes)))

    @classmethod
    def lowest(cls, n_max: int, modes: int = 2) -> "SubspaceSpec":
        """``H_N``: Fock states 0..n_max in every mode."""
        return cls.uniform(range(n_max + 1), modes)

    @classmethod
    def even(cls, n_max: int, modes: int = 2) -> "SubspaceSpec":
        return cls.uniform(range(0, n_max + 1, 2), modes)

    @property
    def ambient_dims(self) -> tuple[int, ...]:
        """Smallest truncation containing every allowed index."""
        return tuple(mode[-1] + 1 for mode in self.indices)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(mode) for mode in self.indices)

    def embed(self, state: PureState) -> PureState:
        """Lift a state on the compressed space back to the ambient Fock space."""
        if state.mode_dims != self.dims:
            raise DimensionMismatchError(f"state dims {state.mode_dims} vs subspace dims {self.dims}")
        out = np.zeros(self.ambient_dims, dtype=complex)
        out[np.ix_(*self.indices)] = state.tensor
        return PureState.from_vector(self.ambient_dims, out)

    def restrict(self, state: PureState) -> PureState:
        t = state.resized(tuple(max(a, b) for a, b in zip(state.mode_dims, self.ambient_dims))).tensor
        return PureState.from_vector(self.dims, t[np.ix_(*self.indices)])


def project_to_subspace(op: JointOperator, spec: SubspaceSpec) -> JointOperator:
    """Compression P op P onto the span of the allowed Fock indices."""
    if len(spec.indices) != len(op.mode_dims):
        raise DimensionMismatchError("subspace and operator have different numbers of modes")
    for mode, d in zip(spec.indices, op.mode_dims):
        if mode[-1] >= d:
            raise IndexError(f"index {mode[-1]} outside mode dimension {d}")
    return op.map_factors(lambda i, f: f[np.ix_(spec.indices[i], spec.indices[i])])
