"""Dense linear algebra: Gram products, projectors and rank-one downdates.

Projectors are built from a column-pivoted QR factorization so that the
numeric rank of a selected block is decided by one relative threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Literal

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateDirectionError, InvalidInputError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from .problem import GcrssProblem

RANK_TOL = 1e-9
ZERO_COLUMN_TOL = 1e-12
REFRESH_EVERY = 32


def as_matrix(M: ArrayLike, name: str = "matrix") -> NDArray[np.float64]:
    """Return ``M`` as a finite 2-D float array or raise."""
    arr = np.array(M, dtype=np.float64, copy=True)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def gram(M: ArrayLike, side: Literal["left", "right"] = "right") -> NDArray[np.float64]:
    """``MᵀM`` for ``side="right"``, ``MMᵀ`` for ``side="left"``."""
    M = np.asarray(M, dtype=np.float64)
    G = M.T @ M if side == "right" else M @ M.T
    return (G + G.T) / 2


def spectral_norm(M: ArrayLike) -> float:
    M = np.asarray(M, dtype=np.float64)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def _pivoted_basis(M: NDArray[np.float64], tol: float) -> NDArray[np.float64]:
    """Orthonormal basis of the column span of ``M``."""
    if M.shape[1] == 0 or not np.any(M):
        return np.zeros((M.shape[0], 0))
    Q, R, _ = sla.qr(M, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > tol * diag[0]))
    return Q[:, :rank]


def numeric_rank(M: ArrayLike, tol: float = RANK_TOL) -> int:
    """Rank from the pivoted QR diagonal, relative threshold ``tol``."""
    M = np.asarray(M, dtype=np.float64)
    if M.size == 0:
        return 0
    return _pivoted_basis(M, tol).shape[1]


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector with its rank and construction tolerance."""

    mat: NDArray[np.float64]
    rank: int
    tol: float = RANK_TOL

    def __matmul__(self, other):
        return self.mat @ other


def projector_complement_colspan(
    M: ArrayLike, tol: float = RANK_TOL, dim: int | None = None
) -> Projector:
    """``I - MM†``: projector onto the orthogonal complement of ``span(M)``.

    ``dim`` fixes the ambient dimension when ``M`` has no columns.
    """
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("non-finite entries")
    n = M.shape[0] if dim is None else dim
    if M.size == 0:
        return Projector(np.eye(n), n, tol)
    U = _pivoted_basis(M, tol)
    P = np.eye(n) - U @ U.T
    return Projector((P + P.T) / 2, n - U.shape[1], tol)


def projector_complement_rowspan(
    M: ArrayLike, tol: float = RANK_TOL, dim: int | None = None
) -> Projector:
    """``I - M†M``: projector onto the complement of the row span."""
    M = np.asarray(M, dtype=np.float64)
    return projector_complement_colspan(M.T, tol, dim)


def is_admissible(Q: NDArray[np.float64], col: NDArray[np.float64], tol: float = RANK_TOL) -> bool:
    """Whether ``Q @ col`` is a usable (non-degenerate) direction."""
    norm = np.linalg.norm(col)
    if norm <= ZERO_COLUMN_TOL:
        return False
    return bool(np.linalg.norm(Q @ col) > tol * norm)


@dataclass(frozen=True)
class SubsetState:
    """Selected indices, their projector and the cached products ``V``, ``W``.

    For column states ``projector`` is ``Q_S`` (n×n), ``V = BBᵀQ_S`` and
    ``W = [A;C] P_R [AᵀQ_S, Cᵀ]``. Row states additionally carry the two
    factors ``H1 = [A;C]P_R`` and ``H2 = P_R[AᵀQ_S, Cᵀ]`` of ``W``.
    """

    subset: tuple[int, ...]
    projector: NDArray[np.float64]
    V: NDArray[np.float64] | None = None
    W: NDArray[np.float64] | None = None
    H1: NDArray[np.float64] | None = None
    H2: NDArray[np.float64] | None = None
    updates: int = field(default=0)


def initial_column_state(A, B, C) -> SubsetState:
    A, B, C = (np.asarray(M, dtype=np.float64) for M in (A, B, C))
    AC = np.vstack([A, C])
    return SubsetState((), np.eye(A.shape[0]), B @ B.T, AC @ AC.T)


def initial_row_state(A, C, col_state: SubsetState) -> SubsetState:
    """Row-phase state after the column subset has been fixed."""
    A, C = np.asarray(A, dtype=np.float64), np.asarray(C, dtype=np.float64)
    Q = col_state.projector
    H1 = np.vstack([A, C])
    H2 = np.hstack([A.T @ Q, C.T])
    return SubsetState((), np.eye(A.shape[1]), col_state.V, H1 @ H2, H1, H2)


def _unit_direction(P, vec, tol):
    norm = np.linalg.norm(vec)
    proj = P @ vec
    pn = np.linalg.norm(proj)
    if norm <= ZERO_COLUMN_TOL or pn <= tol * norm:
        raise DegenerateDirectionError(
            f"direction is annihilated by the projector (|P v| = {pn:.3e}, |v| = {norm:.3e})"
        )
    return proj / pn


def _refresh(P: NDArray[np.float64], count: int) -> NDArray[np.float64]:
    if count % REFRESH_EVERY == 0:
        P = (P + P.T) / 2
        P = P @ P
    return P


def projector_rank_one_downdate(
    state: SubsetState, col: ArrayLike, index: int | None = None, tol: float = RANK_TOL
) -> SubsetState:
    """Append one column direction: ``Q ← Q − qqᵀ`` with cached updates."""
    col = np.asarray(col, dtype=np.float64).ravel()
    Q = state.projector
    q = _unit_direction(Q, col, tol)
    count = state.updates + 1
    Qn = _refresh(Q - np.outer(q, q), count)
    V = W = None
    if state.V is not None:
        V = state.V - np.outer(state.V @ q, q)
    if state.W is not None:
        n = Q.shape[0]
        Wq = state.W[:, :n] @ q
        W = state.W.copy()
        W[:, :n] -= np.outer(Wq, q)
    subset = state.subset + ((index,) if index is not None else ())
    return SubsetState(subset, Qn, V, W, state.H1, state.H2, count)


def row_rank_one_downdate(
    state: SubsetState, row: ArrayLike, index: int | None = None, tol: float = RANK_TOL
) -> SubsetState:
    """Append one row direction: ``P ← P − ppᵀ``, ``W ← W − H1 p pᵀ H2``."""
    row = np.asarray(row, dtype=np.float64).ravel()
    P = state.projector
    p = _unit_direction(P, row, tol)
    count = state.updates + 1
    H1p = state.H1 @ p
    pH2 = p @ state.H2
    W = state.W - np.outer(H1p, pH2)
    H1 = state.H1 - np.outer(H1p, p)
    H2 = state.H2 - np.outer(p, pH2)
    Pn = _refresh(P - np.outer(p, p), count)
    subset = state.subset + ((index,) if index is not None else ())
    return SubsetState(subset, Pn, state.V, W, H1, H2, count)


def _check_indices(idx: Iterable[int], bound: int, what: str) -> list[int]:
    out = [int(i) for i in idx]
    if len(set(out)) != len(out) or any(i < 0 or i >= bound for i in out):
        raise InvalidInputError(f"{what} indices {out} out of range [0, {bound})")
    return out


def subset_projectors(B, C, S: Iterable[int], R: Iterable[int], tol: float = RANK_TOL):
    """``(Q_S, P_R)`` as dense arrays."""
    B, C = np.asarray(B, dtype=np.float64), np.asarray(C, dtype=np.float64)
    S = _check_indices(S, B.shape[1], "column")
    R = _check_indices(R, C.shape[0], "row")
    Q = projector_complement_colspan(B[:, S], tol, dim=B.shape[0]).mat
    P = projector_complement_rowspan(C[R, :], tol, dim=C.shape[1]).mat
    return Q, P


def residual_matrix(prob: GcrssProblem, S: Iterable[int], R: Iterable[int]) -> NDArray[np.float64]:
    """``Q_S A P_R``."""
    Q, P = subset_projectors(prob.B, prob.C, S, R)
    return Q @ prob.A @ P


def pow2_scale(M: ArrayLike) -> float:
    """Power of two closest to ``‖M‖₂`` (1 for the zero matrix).

    Dividing by it is exact in floating point and leaves ``‖M‖₂`` in
    ``[1/√2, √2]``.
    """
    s = spectral_norm(M)
    if s == 0.0 or not np.isfinite(s):
        return 1.0
    return float(2.0 ** np.round(np.log2(s)))
