"""CHSH operator assembly, operator norms and the two-level analytic layer.

With Q the binned quadrature and D the click observable on each side,

    B = Q (x) Q + Q (x) D + D (x) Q - D (x) D.

Only the vacuum and the single mode vector Q|0> matter for the commutator
[Q, D], so the norm is governed by the angle theta with
cos(theta) = <0|Q|0>, giving ||B|| = 2 sqrt(1 + sin(theta)^2) on the full space.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .fock import DEFAULT_QUADRATURE, BinningSet, QuadratureConfig, build_D, build_Q, overlap_matrix
from .operators import DimensionMismatchError, JointOperator, PureState, SubspaceSpec, project_to_subspace

log = logging.getLogger(__name__)

DENSE_LIMIT = 4096
TSIRELSON = 2.0 * math.sqrt(2.0)


class ConvergenceError(RuntimeError):
    """Iterative eigensolver stopped before converging."""

    def __init__(self, message: str, estimate: float, residual: float):
        super().__init__(f"{message} (best estimate {estimate:.10f}, residual {residual:.3e})")
        self.estimate = estimate
        self.residual = residual


class DegenerateBinningError(ValueError):
    """Binning with theta = 0 or pi: Q commutes with D."""


class NotMaximalBinningError(ValueError):
    def __init__(self, theta: float):
        super().__init__(f"binning is not maximal: theta = {theta:.8f}, need pi/2")
        self.theta = theta


@dataclass(frozen=True)
class ViolationResult:
    value: float
    signed_value: float
    state: PureState
    binning: BinningSet | None = None
    theta: float | None = None

    def __post_init__(self):
        if abs(self.value - abs(self.signed_value)) > 1e-12:
            raise ValueError("value must equal |signed_value|")

    @property
    def violates(self) -> bool:
        return self.value > 2.0


def assemble_chsh(qa, da, qb, db) -> JointOperator:
    """Q_A Q_B + Q_A D_B + D_A Q_B - D_A D_B as a structured two-mode operator."""
    qa, da, qb, db = (np.asarray(m) for m in (qa, da, qb, db))
    if qa.shape != da.shape or qb.shape != db.shape:
        raise DimensionMismatchError("Q and D of one party must have the same dimension")
    dims = (qa.shape[0], qb.shape[0])
    return JointOperator(dims, ((1.0, (qa, qb)), (1.0, (qa, db)), (1.0, (da, qb)), (-1.0, (da, db))))


def chsh_operator(a_plus: BinningSet, dim: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                  d_operator: np.ndarray | None = None, b_plus: BinningSet | None = None) -> JointOperator:
    """Noiseless (or custom-D) CHSH operator with the same dimension on both modes.

    ``b_plus`` gives the second party its own interval; by default both share ``a_plus``.
    """
    q_a = build_Q(a_plus, dim, cfg)
    q_b = q_a if b_plus is None else build_Q(b_plus, dim, cfg)
    d = build_D(dim) if d_operator is None else d_operator
    return assemble_chsh(q_a, d, q_b, d)


def _dense_extremes(b: JointOperator):
    w, v = np.linalg.eigh(b.matrix)
    i = 0 if abs(w[0]) >= abs(w[-1]) else len(w) - 1
    return float(w[i]), v[:, i]


LANCZOS_RESTARTS = 300


def _lanczos(lin, which: str, tol: float, maxiter: int | None, v0: np.ndarray, ncv: int | None = None):
    w, v = eigsh(lin, k=1, which=which, tol=tol, maxiter=maxiter or LANCZOS_RESTARTS, ncv=ncv, v0=v0)
    return float(w[0]), v[:, 0]


def _iterative_extremes(b: JointOperator, tol: float, maxiter: int | None):
    """Largest-magnitude eigenpair; falls back to both spectrum ends, then to dense.

    A huge near-degenerate cluster (e.g. Q close to -1 almost everywhere)
    can stall the one-sided searches while the magnitude search converges.
    """
    n = b.size
    dtype = float if b.is_real else complex
    lin = LinearOperator((n, n), matvec=b.matvec, dtype=dtype)
    # fixed start vector keeps results bit-for-bit reproducible
    v0 = np.random.default_rng(0).normal(size=n).astype(dtype)

    def residual(lam, vec):
        return float(np.linalg.norm(b.matvec(vec) - lam * vec))

    try:
        lam, vec = _lanczos(lin, "LM", tol, maxiter, v0)
        if residual(lam, vec) <= 1e-6:
            return lam, vec
    except ArpackNoConvergence:
        pass
    best, last = None, (float("nan"), float("nan"))
    for which in ("LA", "SA"):
        try:
            lam, vec = _lanczos(lin, which, tol, maxiter, v0, ncv=min(n - 1, 64))
        except ArpackNoConvergence:
            best = None
            break
        last = (lam, residual(lam, vec))
        if last[1] > 1e-6:
            best = None
            break
        if best is None or abs(lam) > abs(best[0]):
            best = (lam, vec)
    if best is not None:
        return best
    if n <= DENSE_LIMIT:
        return _dense_extremes(b)
    raise ConvergenceError("Lanczos did not converge", *last)


def chsh_norm(b: JointOperator, dense_limit: int = DENSE_LIMIT, tol: float = 1e-12,
              maxiter: int | None = None, binning: BinningSet | None = None) -> ViolationResult:
    """Largest |eigenvalue| of ``b`` and its eigenvector.

    Dense Hermitian solve up to ``dense_limit`` rows, implicitly restarted
    Lanczos on the structured matvec above that (both ends of the spectrum).
    """
    if b.size <= dense_limit:
        lam, vec = _dense_extremes(b)
    else:
        lam, vec = _iterative_extremes(b, tol, maxiter)
    state = PureState.from_vector(b.mode_dims, vec)
    theta = None
    if binning is not None:
        try:
            theta = theta_of_binning(binning)
        except DegenerateBinningError:
            theta = 0.0 if binning.is_full else math.pi
    return ViolationResult(abs(lam), lam, state, binning, theta)


def binning_norm(a_plus: BinningSet, spec: SubspaceSpec, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                 dense_limit: int = DENSE_LIMIT) -> ViolationResult:
    """Noiseless CHSH norm of the compression to ``spec`` (compressing Q before assembly)."""
    (qa, qb) = (build_Q(a_plus, d, cfg) for d in spec.ambient_dims)
    (da, db) = (build_D(d) for d in spec.ambient_dims)
    b = project_to_subspace(assemble_chsh(qa, da, qb, db), spec)
    return chsh_norm(b, dense_limit=dense_limit, binning=a_plus)


def theta_of_binning(a_plus: BinningSet) -> float:
    """Angle with cos(theta) = 2 int_{A+} phi_0^2 - 1 = <0|Q|0> (closed form via erf)."""
    if a_plus.is_empty or a_plus.is_full:
        raise DegenerateBinningError(f"binning {a_plus} is degenerate")
    # exact vacuum weight: half the Gaussian erf difference
    weight = 0.5 * (math.erf(a_plus.upper) - math.erf(a_plus.lower))
    cos_t = min(1.0, max(-1.0, 2.0 * weight - 1.0))
    if cos_t in (1.0, -1.0):
        raise DegenerateBinningError(f"binning {a_plus} has theta = {'0' if cos_t > 0 else 'pi'}")
    return math.acos(cos_t)


def analytic_norm(a_plus: BinningSet) -> float:
    """Full-space norm 2 sqrt(1 + sin(theta)^2); exactly 2 for degenerate binnings."""
    try:
        theta = theta_of_binning(a_plus)
    except DegenerateBinningError:
        return 2.0
    return 2.0 * math.sqrt(1.0 + math.sin(theta) ** 2)


def xi_state(a_plus: BinningSet, dim: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """Normalized non-vacuum part of Q|0>, truncated to ``dim``.

    Returns ``(state, captured_weight)`` where ``captured_weight`` is the squared
    norm of the truncated coefficient vector before renormalization.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    theta = theta_of_binning(a_plus)
    coeffs = xi_coefficients(a_plus, dim, cfg, theta)
    weight = float(np.sum(coeffs ** 2))
    return PureState.from_vector((dim,), coeffs), weight


def xi_coefficients(a_plus: BinningSet, dim: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                    theta: float | None = None) -> np.ndarray:
    """Unrenormalized coefficients (1/sin theta) 2 int_{A+} phi_0 phi_n, zero at n = 0."""
    if theta is None:
        theta = theta_of_binning(a_plus)
    c = 2.0 * overlap_matrix(a_plus, dim, cfg)[0].copy()
    c[0] = 0.0
    return c / math.sin(theta)


def pi_states(a_plus: BinningSet, dim: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
              theta_tol: float = 1e-6):
    """Two-mode eigenvectors of B for eigenvalues +-2 sqrt(2) in span{|0>, |Xi>} per mode.

    In the two-level basis (|0>, |Xi>) one has D = -sigma_z and
    Q = cos(theta) sigma_z + sin(theta) sigma_x, so at theta = pi/2 the operator
    is the standard CHSH combination of Z and X.  Its +-2 sqrt(2) eigenvectors
    are written back in Fock space.
    """
    theta = theta_of_binning(a_plus)
    if abs(theta - math.pi / 2) > theta_tol:
        raise NotMaximalBinningError(theta)
    qubit_plus, qubit_minus = pi_qubit_vectors(theta)
    xi, _ = xi_state(a_plus, dim, cfg)
    basis = np.zeros((dim, 2), dtype=complex)
    basis[0, 0] = 1.0
    basis[:, 1] = xi.vector
    lift = np.kron(basis, basis)
    return (PureState.from_vector((dim, dim), lift @ qubit_plus),
            PureState.from_vector((dim, dim), lift @ qubit_minus))


def qubit_chsh(theta: float) -> np.ndarray:
    """B on two abstract qubits with Q = cos sigma_z + sin sigma_x and D = -sigma_z."""
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    q = math.cos(theta) * sz + math.sin(theta) * sx
    return assemble_chsh(q, -sz, q, -sz).matrix


def pi_qubit_vectors(theta: float = math.pi / 2):
    """Eigenvectors of ``qubit_chsh(theta)`` for its largest and smallest eigenvalues."""
    w, v = np.linalg.eigh(qubit_chsh(theta))
    plus, minus = v[:, -1].astype(complex), v[:, 0].astype(complex)
    # fix the phase by making the largest-magnitude entry real positive
    for vec in (plus, minus):
        k = int(np.argmax(np.abs(vec)))
        vec *= np.conj(vec[k]) / abs(vec[k])
    return plus, minus
