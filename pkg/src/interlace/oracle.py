"""Brute-force references: exhaustive search, volume weights, subset identities.

Everything here is deliberately direct (enumeration over subsets) and shares
no code path with the fast routines it is used to check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidInputError, TooLargeError
from .expected import DEFINITION_GUARD, expected_poly_definition
from .linalg import RANK_TOL, residual_matrix, spectral_norm
from .polynomial import Poly, charpoly, derivative, monomial_shift
from .problem import GcrssProblem

MULTIAFFINE_GUARD = 12


def enumerate_optimum(prob: GcrssProblem) -> tuple[list[int], list[int], float]:
    """Exact minimizer of ``‖Q_S A P_R‖₂``; the lexicographically first on ties."""
    pairs = math.comb(prob.d_B, prob.k) * math.comb(prob.n_C, prob.r)
    if pairs > DEFINITION_GUARD:
        raise TooLargeError(f"{pairs} subset pairs exceed the guard {DEFINITION_GUARD}")
    best: tuple[list[int], list[int], float] | None = None
    for S in itertools.combinations(range(prob.d_B), prob.k):
        for R in itertools.combinations(range(prob.n_C), prob.r):
            value = spectral_norm(residual_matrix(prob, S, R))
            if best is None or value < best[2] - 1e-12 * max(1.0, best[2]):
                best = (list(S), list(R), value)
    return best


def volume_weight(M, S: Iterable[int]) -> float:
    """``det[(M_{:,S})ᵀ M_{:,S}]``, 1 for the empty set."""
    M = np.asarray(M, dtype=np.float64)
    S = list(S)
    if not S:
        return 1.0
    sub = M[:, S]
    return max(0.0, float(np.linalg.det(sub.T @ sub)))


@dataclass(frozen=True)
class MultiAffinePoly:
    """``Σ_T coeffs[T] Π_{i∈T} z_i`` with ``T`` encoded as a bitmask over ``m`` variables."""

    m: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.m > 16:
            raise TooLargeError("at most 16 variables")
        if self.coeffs.shape != (1 << self.m,):
            raise InvalidInputError("coefficient table must have 2^m entries")

    @classmethod
    def det_shifted(cls, M) -> MultiAffinePoly:
        """``det[Z − M]`` with ``Z = diag(z)``: coefficient of ``Z^T`` is the signed complementary minor."""
        M = np.asarray(M, dtype=np.float64)
        m = M.shape[0]
        c = np.zeros(1 << m)
        for T in range(1 << m):
            rest = [i for i in range(m) if not (T >> i) & 1]
            minor = float(np.linalg.det(M[np.ix_(rest, rest)])) if rest else 1.0
            c[T] = (-1) ** len(rest) * minor
        return cls(m, c)

    @classmethod
    def directional(cls, b, k: int) -> MultiAffinePoly:
        """``(Σ b_i ∂_{z_i})^k Π z_i = k! Σ_{|T|=m−k} b^{T^c} Z^T``."""
        b = np.asarray(b, dtype=np.float64)
        m = b.size
        c = np.zeros(1 << m)
        for removed in itertools.combinations(range(m), k):
            T = ((1 << m) - 1) ^ sum(1 << i for i in removed)
            c[T] = math.factorial(k) * float(np.prod(b[list(removed)]))
        return cls(m, c)

    def derivative_product_at(self, other: MultiAffinePoly) -> Poly:
        """``(Π_i ∂_{z_i})(self·other)`` evaluated at ``z_i = x/2``.

        Only pairs with ``T ∪ U`` = all variables survive; each contributes
        ``2^{|T∩U|} (x/2)^{|T∩U|} = x^{|T∩U|}``.
        """
        if other.m != self.m:
            raise InvalidInputError("variable counts differ")
        m = self.m
        full = (1 << m) - 1
        out = np.zeros(m + 1)
        for T in range(1 << m):
            a = self.coeffs[T]
            if a == 0.0:
                continue
            missing = full ^ T
            # U = missing ∪ W with W ⊂ T
            W = T
            while True:
                b = other.coeffs[missing | W]
                if b != 0.0:
                    out[bin(W).count("1")] += a * b
                if W == 0:
                    break
                W = (W - 1) & T
        return Poly(out)


def multiaffine_convolution_check(A, B, k: int) -> tuple[Poly, Poly]:
    """``P_k(x; BB†A, B)`` by definition and by the multi-affine expansion."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    keep = s > RANK_TOL * s[0] if s.size and s[0] > 0 else np.zeros(s.size, bool)
    U, b = U[:, keep], s[keep] ** 2
    m = b.size
    if m > MULTIAFFINE_GUARD:
        raise TooLargeError(f"rank(B)={m} exceeds {MULTIAFFINE_GUARD}")
    if not 0 <= k <= m:
        raise InvalidInputError(f"k={k} out of range for rank {m}")
    target = U @ (U.T @ A)
    lhs = expected_poly_definition(GcrssProblem.column_only(target, B, k))
    M = U.T @ A @ A.T @ U
    conv = MultiAffinePoly.directional(b, k).derivative_product_at(MultiAffinePoly.det_shifted(M))
    d = A.shape[1]
    rhs = monomial_shift(conv.cleaned(), d + k - m) / math.factorial(k)
    return lhs, rhs


def thompson_identity_check(M, k: int) -> tuple[Poly, Poly]:
    """``Σ_{|S|=d−k} det[xI − M_{S,S}]`` and ``(1/k!) ∂^k det[xI − M]``."""
    M = np.asarray(M, dtype=np.float64)
    d = M.shape[0]
    if d > 8 or not 0 <= k <= d:
        raise InvalidInputError("need d <= 8 and 0 <= k <= d")
    total = Poly()
    for S in itertools.combinations(range(d), d - k):
        total = total + charpoly(M[np.ix_(S, S)], symmetric=True)
    return total, derivative(charpoly(M, symmetric=True), k) / math.factorial(k)


def random_problem(
    rng: np.random.Generator,
    max_n: int = 5,
    max_d: int = 5,
    max_dB: int = 6,
    max_nC: int = 6,
) -> GcrssProblem:
    """Gaussian instance with uniformly drawn sizes and a uniformly drawn valid ``(k, r)``."""
    n = int(rng.integers(1, max_n + 1))
    d = int(rng.integers(1, max_d + 1))
    dB = int(rng.integers(1, max_dB + 1))
    nC = int(rng.integers(1, max_nC + 1))
    A = rng.standard_normal((n, d))
    B = rng.standard_normal((n, dB))
    C = rng.standard_normal((nC, d))
    k = int(rng.integers(0, min(n, dB) + 1))
    r = int(rng.integers(0, min(d, nC) + 1))
    return GcrssProblem(A, B, C, k, r)
