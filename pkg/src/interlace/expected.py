"""Expected characteristic polynomials of the projected residual.

``P_{k,r}(x) = Σ_{R,S} det[C_R C_Rᵀ] det[B_Sᵀ B_S] det[xI − (Q_S A P_R)ᵀ(Q_S A P_R)]``

is available through six independent routes that must agree:

``definition``
    the weighted subset sum itself (exponential, for checking);
``bivariate-gcrss``
    derivatives of ``det[xI + diag(yV, zI) − W]`` recovered by a 2-D DFT over
    roots of unity in ``(y, z)``;
``gcss-1d``
    the ``r = 0`` case through ``det[xI − AAᵀ − yBBᵀ]`` and a 1-D DFT in ``y``;
``css-flip``
    ``B = A``: flip, differentiate and flip the characteristic polynomial;
``identity-laguerre``
    ``B = C = I``: derivatives and monomial shifts of one characteristic
    polynomial;
``h-determinant``
    one large block determinant interpolated in ``(x, y, z)``.

The interpolation routes rescale ``A``, ``B``, ``C`` by powers of two before
evaluating and undo the scaling on the coefficients.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable

import numpy as np

from .errors import ConditioningError, InvalidInputError, NotApplicableError, TooLargeError
from .linalg import pow2_scale, subset_projectors
from .polynomial import (
    Poly,
    derivative,
    factorial,
    flip,
    gram_charpoly,
    monomial_shift,
)
from .problem import GcrssProblem

PATHS = (
    "definition",
    "bivariate-gcrss",
    "gcss-1d",
    "css-flip",
    "identity-laguerre",
    "h-determinant",
)

DEFINITION_GUARD = 10**6
H_DETERMINANT_GUARD = 40
IMAG_TOL = 1e-8
IDENTITY_TOL = 1e-12
# interpolated coefficients below this fraction of the summed term magnitude
# are rounding noise
CANCELLATION_TOL = 1e-12


def _real(c: np.ndarray, magnitude: float = 0.0) -> np.ndarray:
    """Real part of interpolated coefficients, asserting a negligible residue.

    ``magnitude`` is the size of the full interpolated table when ``c`` is a
    slice of it; rounding noise scales with that, not with the slice.
    """
    scale = max(float(np.max(np.abs(c.real))) if c.size else 0.0, magnitude, np.finfo(float).tiny)
    residue = float(np.max(np.abs(c.imag))) if c.size else 0.0
    if residue > IMAG_TOL * scale:
        raise ConditioningError(f"interpolation left imaginary residue {residue:.3e}")
    return c.real


def _clean_against(c: np.ndarray, magnitude: float) -> np.ndarray:
    c = c.copy()
    c[np.abs(c) <= CANCELLATION_TOL * magnitude] = 0.0
    return c


def _charpoly_batch(M: np.ndarray) -> np.ndarray:
    """Ascending coefficients of ``det[xI − M]`` for a stack of square matrices."""
    m = M.shape[-1]
    ev = np.linalg.eigvals(M) if m else np.zeros(M.shape[:-1], dtype=complex)
    c = np.zeros(M.shape[:-2] + (m + 1,), dtype=complex)
    c[..., 0] = 1.0
    # multiply by (x − λ_j) one root at a time; c is ascending
    for j in range(m):
        lam = ev[..., j : j + 1]
        shifted = np.zeros_like(c)
        shifted[..., 1:] = c[..., :-1]
        c = shifted - lam * c
    return c


def _truncate(p: Poly, d: int) -> Poly:
    """Drop coefficients above degree ``d``, which vanish identically.

    Interpolation leaves rounding noise there; left in place it would
    create spurious roots of huge magnitude.
    """
    return Poly(p.coeffs[: d + 1])


def _nodes(count: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(count) / count)


def _unscale(p: Poly, d: int, sa: float, weight: float) -> Poly:
    """Coefficients of ``weight · sa^{2d} · p(x / sa²)``."""
    c = p.coeffs
    powers = np.array([sa ** (2 * (d - i)) for i in range(c.size)])
    return Poly(weight * c * powers)


def _pow2_scales(A, B, C):
    return pow2_scale(A), pow2_scale(B), pow2_scale(C)


def _is_identity(M: np.ndarray) -> bool:
    return M.shape[0] == M.shape[1] and bool(
        np.max(np.abs(M - np.eye(M.shape[0])), initial=0.0) <= IDENTITY_TOL
    )


def _same_matrix(A: np.ndarray, B: np.ndarray) -> bool:
    if A is B:
        return True
    if A.shape != B.shape:
        return False
    return bool(np.max(np.abs(A - B), initial=0.0) <= IDENTITY_TOL * max(1.0, np.max(np.abs(A), initial=0.0)))


# definition ---------------------------------------------------------------


def subset_poly(prob: GcrssProblem, S: Iterable[int], R: Iterable[int]) -> Poly:
    """``det[xI_d − (Q_S A P_R)ᵀ(Q_S A P_R)]``."""
    Q, P = subset_projectors(prob.B, prob.C, S, R)
    return gram_charpoly(Q @ prob.A @ P)


def _gram_det(M: np.ndarray) -> float:
    if M.shape[1] == 0:
        return 1.0
    return float(np.linalg.det(M.T @ M))


def expected_poly_definition(prob: GcrssProblem) -> Poly:
    """Volume-weighted sum of ``subset_poly`` over all subset pairs."""
    pairs = math.comb(prob.d_B, prob.k) * math.comb(prob.n_C, prob.r)
    if pairs > DEFINITION_GUARD:
        raise TooLargeError(f"{pairs} subset pairs exceed the guard {DEFINITION_GUARD}")
    total = np.zeros(prob.d + 1)
    for R in itertools.combinations(range(prob.n_C), prob.r):
        wr = _gram_det(prob.C[list(R), :].T)
        for S in itertools.combinations(range(prob.d_B), prob.k):
            ws = _gram_det(prob.B[:, list(S)])
            w = wr * ws
            if w == 0.0:
                continue
            total += w * subset_poly(prob, S, R).padded(prob.d + 1)
    return Poly(total).cleaned()


# bivariate ----------------------------------------------------------------


def bivariate_from_cache(
    V: np.ndarray, W: np.ndarray, d: int, k_left: int, r_left: int
) -> Poly:
    """``P`` from the cached products ``V = BBᵀQ`` (n×n) and ``W`` ((n+n_C)²).

    ``k_left``/``r_left`` are the numbers of columns/rows still to choose.
    Coefficient ``μ[c2, c1, e]`` of ``y^{c2} z^{c1} x^e`` in
    ``g = det[xI + diag(yV, zI) − W]`` is recovered on a grid of roots of
    unity, then ``∂_y^{k_left} ∂_z^{n_C − r_left}`` is applied at
    ``y = 0, z = −x`` term by term.
    """
    n = V.shape[0]
    N1 = W.shape[0]
    n_C = N1 - n
    m = n_C - r_left
    if k_left > n or m < 0:
        return Poly()
    ny, nz = n + 1, n_C + 1
    ys, zs = _nodes(ny), _nodes(nz)
    diag_block = np.zeros((ny, nz, N1, N1), dtype=complex)
    diag_block[:, :, :n, :n] = ys[:, None, None, None] * V
    idx = np.arange(n, N1)
    diag_block[:, :, idx, idx] = zs[None, :, None]
    # det[xI + M] is the charpoly of −M
    vals = _charpoly_batch(W - diag_block)
    mu = np.fft.fft2(vals, axes=(0, 1)) / (ny * nz)
    mu = _real(mu[k_left], float(np.max(np.abs(mu))))  # shape (c1, e)
    out = np.zeros(N1 + n_C + 1)
    magnitude = np.zeros_like(out)
    for c1 in range(m, nz):
        falling = math.factorial(c1) / math.factorial(c1 - m)
        sign = (-1.0) ** (c1 - m)
        shift = c1 - m
        out[shift : shift + N1 + 1] += sign * falling * mu[c1]
        magnitude[shift : shift + N1 + 1] += falling * np.abs(mu[c1])
    out = _clean_against(out, float(np.max(magnitude)))
    poly = Poly(out * ((-1.0) ** r_left) / math.factorial(m)).cleaned()
    return _truncate(monomial_shift(poly, d - n + k_left), d)


def expected_poly_bivariate(prob: GcrssProblem) -> Poly:
    sa, sb, sc = _pow2_scales(prob.A, prob.B, prob.C)
    A, B, C = prob.A / sa, prob.B / sb, prob.C / sc
    AC = np.vstack([A, C])
    p = bivariate_from_cache(B @ B.T, AC @ AC.T, prob.d, prob.k, prob.r)
    return _unscale(p, prob.d, sa, sb ** (2 * prob.k) * sc ** (2 * prob.r))


# gcss-1d ------------------------------------------------------------------


def gcss_from_cache(G: np.ndarray, V: np.ndarray, d: int, k_left: int) -> Poly:
    """``(−1)^k x^{d−n+k} [y^k] det[xI − G − yV]`` with ``G = AAᵀQ``, ``V = BBᵀQ``."""
    n = G.shape[0]
    if k_left > n:
        return Poly()
    ny = n + 1
    ys = _nodes(ny)
    vals = _charpoly_batch(G[None] + ys[:, None, None] * V[None])
    mu = _real(np.fft.fft(vals, axis=0) / ny)
    coeffs = _clean_against(mu[k_left], float(np.max(np.abs(mu))))
    poly = Poly(coeffs * (-1.0) ** k_left).cleaned()
    return _truncate(monomial_shift(poly, d - n + k_left), d)


def expected_poly_gcss(A, B, k: int) -> Poly:
    """``P_k(x; A, B)``, the column-only expected polynomial."""
    prob = GcrssProblem.column_only(A, B, k)
    sa, sb = pow2_scale(prob.A), pow2_scale(prob.B)
    A, B = prob.A / sa, prob.B / sb
    p = gcss_from_cache(A @ A.T, B @ B.T, prob.d, k)
    return _unscale(p, prob.d, sa, sb ** (2 * k))


# css-flip -----------------------------------------------------------------


def css_from_charpoly(cp: Poly, d: int, k: int) -> Poly:
    p = flip(derivative(flip(cp, d), k), d)
    return (p * ((-1.0) ** k / factorial(k))).cleaned()


def expected_poly_css(A, k: int) -> Poly:
    """``P_k(x; A, A)`` by flip, ``k``-fold derivative, flip."""
    prob = GcrssProblem.column_only(A, A, k)
    return css_from_charpoly(gram_charpoly(prob.A), prob.d, k)


# identity-laguerre --------------------------------------------------------


def expected_poly_identity(A, S: Iterable[int], R: Iterable[int], k: int, r: int) -> Poly:
    """``P_{k−|S|, r−|R|}`` for ``B = C = I`` with rows ``S`` and columns ``R`` removed."""
    A = np.asarray(A, dtype=np.float64)
    d = A.shape[0]
    if A.shape != (d, d):
        raise InvalidInputError("identity path needs a square A")
    S, R = sorted(set(S)), sorted(set(R))
    if len(S) > k or len(R) > r or k > d or r > d:
        raise InvalidInputError("need |S| <= k <= d and |R| <= r <= d")
    rows = [i for i in range(d) if i not in S]
    cols = [j for j in range(d) if j not in R]
    cp = gram_charpoly(A[np.ix_(rows, cols)])
    inner = monomial_shift(derivative(cp, r - len(R)), r - len(S))
    outer = monomial_shift(derivative(inner, k - len(S)), k)
    scale = factorial(k - len(S)) * factorial(r - len(R))
    return (outer / scale).cleaned()


# h-determinant ------------------------------------------------------------


def expected_poly_h_determinant(prob: GcrssProblem) -> Poly:
    """Coefficient extraction from the block determinant

    ``det[[I, 0, B, A], [0, zI, 0, C], [Bᵀ, 0, yI, 0], [Aᵀ, Cᵀ, 0, xI]]``

    whose ``y^{d_B−k} z^{n_C−r}`` coefficient is ``(−1)^{k+r} x^{−r} P_{k,r}``.
    """
    n, d, dB, nC = prob.n, prob.d, prob.d_B, prob.n_C
    size = n + nC + dB + d
    if size > H_DETERMINANT_GUARD:
        raise TooLargeError(f"block determinant of size {size} exceeds {H_DETERMINANT_GUARD}")
    sa, sb, sc = _pow2_scales(prob.A, prob.B, prob.C)
    A, B, C = prob.A / sa, prob.B / sb, prob.C / sc
    H = np.zeros((size, size))
    o1, o2, o3 = n, n + nC, n + nC + dB
    H[:n, :n] = np.eye(n)
    H[:n, o2:o3] = B
    H[:n, o3:] = A
    H[o1:o2, o3:] = C
    H[o2:o3, :n] = B.T
    H[o3:, :n] = A.T
    H[o3:, o1:o2] = C.T
    xs, ys, zs = _nodes(d + 1), _nodes(dB + 1), _nodes(nC + 1)
    grid = np.broadcast_to(H.astype(complex), (d + 1, dB + 1, nC + 1, size, size)).copy()
    for block, nodes, axis in ((slice(o3, size), xs, 0), (slice(o2, o3), ys, 1), (slice(o1, o2), zs, 2)):
        idx = np.arange(size)[block]
        shape = [1, 1, 1, 1]
        shape[axis] = nodes.size
        grid[..., idx, idx] = nodes.reshape(shape)
    vals = np.linalg.det(grid)
    coef = _real(np.fft.fftn(vals) / vals.size)
    c = _clean_against(coef[:, dB - prob.k, nC - prob.r], float(np.max(np.abs(coef))))
    p = _truncate(monomial_shift(Poly(c * (-1.0) ** (prob.k + prob.r)).cleaned(), prob.r), d)
    return _unscale(p, d, sa, sb ** (2 * prob.k) * sc ** (2 * prob.r))


# dispatch -----------------------------------------------------------------


def default_path(prob: GcrssProblem) -> str:
    if prob.n == prob.d and _is_identity(prob.B) and _is_identity(prob.C):
        return "identity-laguerre"
    if prob.r == 0 and _same_matrix(prob.A, prob.B):
        return "css-flip"
    if prob.r == 0:
        return "gcss-1d"
    return "bivariate-gcrss"


def path_applies(prob: GcrssProblem, path: str) -> bool:
    if path == "identity-laguerre":
        return prob.n == prob.d and _is_identity(prob.B) and (
            _is_identity(prob.C) or prob.r == 0 and prob.n_C == 0
        )
    if path == "css-flip":
        return prob.r == 0 and _same_matrix(prob.A, prob.B)
    if path == "gcss-1d":
        return prob.r == 0
    if path == "definition":
        return math.comb(prob.d_B, prob.k) * math.comb(prob.n_C, prob.r) <= DEFINITION_GUARD
    if path == "h-determinant":
        return prob.n + prob.n_C + prob.d_B + prob.d <= H_DETERMINANT_GUARD
    return path == "bivariate-gcrss"


def expected_poly(prob: GcrssProblem, path: str | None = None) -> Poly:
    """``P_{k,r}`` through ``path`` (default: the cheapest applicable route)."""
    path = path or default_path(prob)
    if path not in PATHS:
        raise InvalidInputError(f"unknown path {path!r}; choose from {PATHS}")
    if not path_applies(prob, path):
        raise NotApplicableError(f"path {path!r} does not apply to this problem")
    if path == "definition":
        return expected_poly_definition(prob)
    if path == "bivariate-gcrss":
        return expected_poly_bivariate(prob)
    if path == "gcss-1d":
        return expected_poly_gcss(prob.A, prob.B, prob.k)
    if path == "css-flip":
        return expected_poly_css(prob.A, prob.k)
    if path == "identity-laguerre":
        return expected_poly_identity(prob.A, (), (), prob.k, prob.r)
    return expected_poly_h_determinant(prob)


# identities ---------------------------------------------------------------


def expected_poly_symmetry_pair(prob: GcrssProblem, path: str = "definition") -> tuple[Poly, Poly]:
    """``P_{k,r}(A, B, C)`` and ``x^{d−n} P_{r,k}(Aᵀ, Cᵀ, Bᵀ)``."""
    lhs = expected_poly(prob, path)
    rhs = expected_poly(prob.transposed(), path)
    return lhs, monomial_shift(rhs, prob.d - prob.n)


def expected_poly_recursion_check(
    prob: GcrssProblem, S: Iterable[int], R: Iterable[int], mode: str = "column"
) -> tuple[Poly, Poly]:
    """Both sides of the one-step recursion from the partial selection ``(S, R)``.

    Column mode: ``P_{k−|S|, r−|R|}`` of the projected problem against
    ``(1/(k−|S|)) Σ_i ‖Q_S b_i‖² P_{k−|S|−1, r−|R|}`` with ``i`` added to ``S``.
    Row mode is the mirror image with ``‖c_iᵀ P_R‖²``.
    """
    S, R = list(S), list(R)
    k_left, r_left = prob.k - len(S), prob.r - len(R)
    if mode not in ("column", "row"):
        raise InvalidInputError("mode must be 'column' or 'row'")
    left_order = k_left if mode == "column" else r_left
    if left_order < 1:
        raise InvalidInputError("nothing left to select in this mode")

    def projected(S_, R_, k_, r_):
        Q, P = subset_projectors(prob.B, prob.C, S_, R_)
        sub = GcrssProblem(Q @ prob.A @ P, Q @ prob.B, prob.C @ P, k_, r_, validate=False)
        return expected_poly_definition(sub)

    Q, P = subset_projectors(prob.B, prob.C, S, R)
    lhs = projected(S, R, k_left, r_left)
    total = Poly()
    if mode == "column":
        weights = np.sum((Q @ prob.B) ** 2, axis=0)
        for i in range(prob.d_B):
            if i in S or weights[i] <= 1e-24 * max(np.max(weights), 1e-300):
                continue
            total = total + weights[i] * projected(S + [i], R, k_left - 1, r_left)
    else:
        weights = np.sum((prob.C @ P) ** 2, axis=1)
        for i in range(prob.n_C):
            if i in R or weights[i] <= 1e-24 * max(np.max(weights), 1e-300):
                continue
            total = total + weights[i] * projected(S, R + [i], k_left, r_left - 1)
    return lhs, total / left_order
