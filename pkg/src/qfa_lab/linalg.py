"""Dense complex linear algebra used by every automaton model.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128``.
The ``vec`` mapping is row-major: ``vec(A)[i*n + j] == A[i, j]`` (0-based),
which gives the identities

    vec(A @ B @ C) == kron(A, C.T) @ vec(B)
    trace(A.T @ B) == vec(A) @ vec(B)
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import ConservationError, DimensionError, WellformednessError

# tolerance ledger
IDENTITY_TOL = 1e-12
WELLFORMED_TOL = 1e-9
GS_REJECT_TOL = 1e-6

DIRECT_SOLVE_MAX_DIM = 64


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def vec(m) -> np.ndarray:
    """Row-major vectorisation of a square matrix."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"vec needs a square matrix, got {a.shape}")
    return a.reshape(-1).copy()


def unvec(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    n = int(round(np.sqrt(v.shape[0])))
    if n * n != v.shape[0]:
        raise DimensionError(f"length {v.shape[0]} is not a perfect square")
    return v.reshape(n, n).copy()


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def dagger(m) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def unitarity_defect(u) -> float:
    """``max |U^H U - I|`` entrywise."""
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise DimensionError(f"unitarity needs a square matrix, got {u.shape}")
    return float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0])), initial=0.0))


def _check_orthonormal_columns(cols, tol):
    gram = dagger(cols) @ cols
    defect = np.abs(gram - np.eye(cols.shape[1]))
    if defect.size and defect.max() > tol:
        i, j = np.unravel_index(int(np.argmax(defect)), defect.shape)
        i, j = sorted((int(i), int(j)))
        raise WellformednessError(
            f"specified columns {i} and {j} are not orthonormal: "
            f"inner product {complex(gram[i, j]):.6g} (tolerance {tol:g})")


def complete_to_unitary(columns, order: str = "ascending", *, tol: float = WELLFORMED_TOL,
                        reject_tol: float = GS_REJECT_TOL) -> np.ndarray:
    """Extend ``k`` orthonormal columns of length ``d`` to a ``d x d`` unitary.

    The first ``k`` columns of the result are the input columns. The rest
    are standard basis vectors, taken in ``order`` ("ascending" or
    "descending" index order), orthogonalised against everything accepted so
    far; candidates whose residual norm falls below ``reject_tol`` are
    skipped.

    Raises
    ------
    WellformednessError
        If the given columns are not orthonormal within ``tol``.
    """
    cols = np.asarray(columns, dtype=np.complex128)
    if cols.ndim == 1:
        cols = cols.reshape(-1, 1)
    d, k = cols.shape
    if k > d:
        raise DimensionError(f"{k} columns cannot be orthonormal in dimension {d}")
    if order not in ("ascending", "descending"):
        raise ValueError(f"order must be 'ascending' or 'descending', not {order!r}")
    _check_orthonormal_columns(cols, tol)

    out = np.zeros((d, d), dtype=np.complex128)
    out[:, :k] = cols
    filled = k
    candidates = range(d) if order == "ascending" else range(d - 1, -1, -1)
    for idx in candidates:
        if filled == d:
            break
        v = np.zeros(d, dtype=np.complex128)
        v[idx] = 1.0
        basis = out[:, :filled]
        # two passes of classical Gram-Schmidt keep the defect near machine precision
        for _ in range(2):
            v = v - basis @ (dagger(basis) @ v)
        norm = np.linalg.norm(v)
        if norm < reject_tol:
            continue
        out[:, filled] = v / norm
        filled += 1
    if filled != d:  # pragma: no cover - the standard basis always spans
        raise WellformednessError("could not complete the unitary")
    return out


@dataclass(frozen=True)
class RunOutcome:
    """Accumulated halting statistics of one run."""

    p_acc: float
    p_rej: float
    residual: float
    steps: int
    converged: bool = True

    @property
    def total(self) -> float:
        return self.p_acc + self.p_rej + self.residual

    def reported(self) -> "RunOutcome":
        clamp = lambda x: min(1.0, max(0.0, x))
        return RunOutcome(clamp(self.p_acc), clamp(self.p_rej), clamp(self.residual),
                          self.steps, self.converged)

    def decide(self, cutpoint: float = 0.5, tol: float = WELLFORMED_TOL) -> str:
        """Three-valued strict-cutpoint membership verdict.

        The final acceptance probability lies in ``[p_acc, p_acc + residual]``.
        Returns "member" when that whole interval sits above ``cutpoint + tol``,
        "non-member" when it sits at or below ``cutpoint + tol``, otherwise
        "undecided".
        """
        if not self.converged:
            return "undecided"
        if self.p_acc > cutpoint + tol:
            return "member"
        if self.p_acc + self.residual <= cutpoint + tol:
            return "non-member"
        return "undecided"


def _column_sqnorms(m, dim):
    if sp.issparse(m):
        m = sp.csr_matrix(m)
        return np.asarray(abs(m).power(2).sum(axis=0)).reshape(-1)
    m = np.asarray(m)
    if m.shape[1] != dim:
        raise DimensionError(f"map has {m.shape[1]} columns, state has {dim}")
    return np.sum(np.abs(m) ** 2, axis=0)


def check_conservation(outcome: RunOutcome, norm0: float = 1.0, tol: float = WELLFORMED_TOL):
    if abs(outcome.total - norm0) > tol * max(1.0, norm0):
        raise ConservationError(
            f"p_acc + p_rej + residual = {outcome.total!r}, expected {norm0!r}")


def accumulate_halting(nonhalt_map, accept_map, reject_map, init, tol: float = 1e-12,
                       max_steps: int = 100_000, *, backend=None,
                       check_blocks: bool = True) -> RunOutcome:
    """Accumulate halting probabilities of a measured unitary evolution.

    Each step adds ``|accept_map psi|^2`` and ``|reject_map psi|^2`` to the
    totals and continues with ``psi <- nonhalt_map psi``. Iteration stops once
    ``|psi|^2 < tol`` or after ``max_steps`` steps; hitting the step limit is
    reported through ``converged=False``, never raised.

    The maps may be dense arrays or ``scipy.sparse`` matrices. They must be the
    three projected blocks of one unitary, so the columns of the stacked
    matrix have unit norm.

    Raises
    ------
    WellformednessError
        Stacked column norms differ from 1 by more than 1e-9.
    ConservationError
        Probability mass is not conserved, or the residual grows, at some step.
    """
    psi = np.asarray(init, dtype=np.complex128).reshape(-1)
    dim = psi.shape[0]
    nonhalt_map, accept_map, reject_map = (
        m if sp.issparse(m) else as_matrix(m) for m in (nonhalt_map, accept_map, reject_map))
    for name, m in (("nonhalt", nonhalt_map), ("accept", accept_map), ("reject", reject_map)):
        if m.shape[1] != dim:
            raise DimensionError(f"{name} map has {m.shape[1]} columns, state has {dim}")
    if check_blocks:
        norms = sum(_column_sqnorms(m, dim) for m in (nonhalt_map, accept_map, reject_map))
        bad = np.flatnonzero(np.abs(norms - 1.0) > WELLFORMED_TOL)
        if bad.size:
            j = int(bad[0])
            raise WellformednessError(
                f"column {j} of the stacked halting blocks has squared norm {norms[j]:.12g}")
    p_acc, p_rej, residual, steps, bad_step, bad_kind = _kernels.accumulate(
        nonhalt_map, accept_map, reject_map, psi, tol, max_steps, backend=backend)
    if bad_kind == _kernels.VIOLATION_CONSERVATION:
        raise ConservationError(f"probability not conserved at step {bad_step}")
    if bad_kind == _kernels.VIOLATION_MONOTONE:
        raise ConservationError(f"residual increased at step {bad_step}")
    return RunOutcome(p_acc, p_rej, residual, steps, converged=residual < tol)


def halting_probabilities_direct(nonhalt_map, accept_map, reject_map, init):
    """Closed-form infinite-horizon (p_acc, p_rej) for small spaces.

    Solves ``X = M^H M + N^H X N`` for ``M`` in {accept, reject} through the
    vec identity, i.e. ``(I - kron(N^H, N^T)) vec(X) = vec(M^H M)``. Only for
    dimension <= 64; used as an oracle against :func:`accumulate_halting`.
    """
    N = np.asarray(nonhalt_map.toarray() if sp.issparse(nonhalt_map) else nonhalt_map,
                   dtype=np.complex128)
    d = N.shape[0]
    if d > DIRECT_SOLVE_MAX_DIM:
        raise DimensionError(f"direct solve limited to dimension {DIRECT_SOLVE_MAX_DIM}, got {d}")
    psi = np.asarray(init, dtype=np.complex128).reshape(-1)
    lhs = np.eye(d * d) - kron(dagger(N), N.T)
    out = []
    for m in (accept_map, reject_map):
        M = np.asarray(m.toarray() if sp.issparse(m) else m, dtype=np.complex128)
        X = unvec(np.linalg.solve(lhs, vec(dagger(M) @ M)))
        out.append(float(np.vdot(psi, X @ psi).real))
    return out[0], out[1]
