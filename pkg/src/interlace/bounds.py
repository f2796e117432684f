"""Closed-form residual bounds for column and submatrix selection."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInputError, NotApplicableError
from .linalg import RANK_TOL, as_matrix, spectral_norm
from .polynomial import Poly


@dataclass(frozen=True)
class BoundReport:
    """Scalar ingredients of the bounds and the bound values.

    A bound is ``None`` when its applicability condition fails or when it
    is not defined for the inputs (e.g. the comparison bound needs ``B = I``).
    """

    alpha: float | None = None
    delta_k: float | None = None
    t: float | None = None
    epsilon: float | None = None
    kappa: float | None = None
    beta: float | None = None
    m: int | None = None
    k: int | None = None
    scale: float = 1.0
    residual_outside_sq: float | None = None
    inside_sq: float | None = None
    bound_gcss: float | None = None
    bound_relaxed: float | None = None
    bound_submatrix: float | None = None
    bound_principal: float | None = None
    condition_gcss: bool = False
    condition_submatrix: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def elementary_symmetric(values, k: int) -> float:
    """``e_k(values)`` by the incremental product recurrence, largest first."""
    vals = sorted((float(v) for v in values), reverse=True)
    e = np.zeros(k + 1)
    e[0] = 1.0
    for v in vals:
        e[1:] = e[1:] + v * e[:-1]
    return float(e[k])


def delta_ratio(b, k: int) -> float:
    """``e_k(b without its smallest entry) / e_k(b)``."""
    b = sorted((float(v) for v in b), reverse=True)
    return elementary_symmetric(b[:-1], k) / elementary_symmetric(b, k)


def epsilon_from(alpha: float, delta: float) -> tuple[float, float]:
    t = (1.0 - math.sqrt(delta)) ** 2
    eps = (math.sqrt(alpha * t) + math.sqrt(max(0.0, (1 - alpha) * (1 - t)))) ** 2
    return t, eps


def _left_basis(B: np.ndarray):
    """Squared singular values above the rank threshold and their left vectors."""
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(0), U[:, :0]
    keep = s > RANK_TOL * s[0]
    return s[keep] ** 2, U[:, keep]


def bound_gcss(A, B, k: int) -> BoundReport:
    """Bounds on the greedy column-selection residual ``‖A − B_S B_S† A‖₂²``."""
    A, B = as_matrix(A, "A"), as_matrix(B, "B")
    if A.shape[0] != B.shape[0]:
        raise InvalidInputError("A and B must have the same number of rows")
    b, U = _left_basis(B)
    m = b.size
    if m < 2 or not 1 <= k <= m - 1:
        raise InvalidInputError(f"need rank(B) >= 2 and 1 <= k <= rank(B)-1 (rank {m}, k {k})")
    n = A.shape[0]
    is_identity = B.shape == (n, n) and np.allclose(B, np.eye(n), rtol=0, atol=1e-12)
    if is_identity:
        U = np.eye(n)
    inside = U @ (U.T @ A)
    outside_sq = spectral_norm(A - inside) ** 2
    inside_sq = spectral_norm(inside) ** 2
    M = U.T @ A @ A.T @ U
    mnorm = spectral_norm(M)
    alpha = float(np.max(np.diag(M)) / mnorm) if mnorm > 0 else 0.0
    alpha = min(max(alpha, 0.0), 1.0)
    delta = delta_ratio(b, k)
    t, eps = epsilon_from(alpha, delta)
    kappa = math.sqrt(b.max() / b.min())
    condition = delta <= (1 - math.sqrt(alpha)) ** 2
    bound = relaxed = None
    if condition:
        bound = outside_sq + eps * inside_sq
        relaxed = outside_sq + (alpha + 4 * math.sqrt(kappa) * (1 - k / m) ** 0.25) * inside_sq
    principal = beta = None
    if is_identity:
        # principal-submatrix comparison on AAᵀ normalized to unit norm
        norm_sq = spectral_norm(A) ** 2
        if norm_sq > 0:
            beta = float(np.trace(A @ A.T) / (n * norm_sq))
            if k >= beta * n:
                principal = norm_sq * (
                    math.sqrt(k / n * beta) + math.sqrt((1 - beta) * (1 - k / n))
                ) ** 2
    return BoundReport(
        alpha=alpha,
        delta_k=delta,
        t=t,
        epsilon=eps,
        kappa=kappa,
        beta=beta,
        m=m,
        k=k,
        residual_outside_sq=outside_sq,
        inside_sq=inside_sq,
        bound_gcss=bound,
        bound_relaxed=relaxed,
        bound_principal=principal,
        condition_gcss=condition,
    )


def submatrix_bound_value(beta: float, k: int, d: int) -> float:
    """``(1−β)k/d + 2√((1−k/d)(k/d)β)``."""
    f = k / d
    return (1 - beta) * f + 2 * math.sqrt(max(0.0, (1 - f) * f * beta))


def bound_submatrix(A, k: int) -> BoundReport:
    """Bound on ``min ‖A_{S,R}‖₂`` over ``k×k`` submatrices.

    ``A`` is rescaled to unit spectral norm when its norm exceeds one; the
    bound is reported in the original units and ``scale`` records the factor.
    """
    A = as_matrix(A, "A")
    d = A.shape[0]
    if A.shape != (d, d):
        raise InvalidInputError("submatrix bound needs a square A")
    if not 0 <= k <= d:
        raise InvalidInputError(f"k={k} out of range for d={d}")
    norm = spectral_norm(A)
    scale = norm if norm > 1.0 else 1.0
    beta = float(np.sum((A / scale) ** 2) / d)
    condition = k < d / (beta + 1)
    bound = scale * submatrix_bound_value(beta, k, d) if condition else None
    return BoundReport(beta=beta, k=k, scale=scale, bound_submatrix=bound, condition_submatrix=condition)


def laguerre_maxroot_bound(p: Poly, k: int, d: int) -> float:
    """Upper bound on the largest root of ``(∂x∂)^k p`` for roots of ``p`` in ``[0, 1]``."""
    if p.degree != d:
        raise InvalidInputError(f"polynomial degree {p.degree} differs from d={d}")
    c = p.coeffs
    beta = float(-c[d - 1] / (d * c[d]))
    if not k > beta * d / (beta + 1):
        raise NotApplicableError(f"k={k} must exceed beta*d/(beta+1) = {beta * d / (beta + 1):.4g}")
    f = k / d
    return ((1 - beta) * (1 - f) + 2 * math.sqrt(max(0.0, (1 - f) * f * beta))) ** 2
