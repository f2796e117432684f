"""Real univariate polynomials and largest-root isolation.

Coefficients are stored in ascending order. The largest root is isolated
by bisection on the sign pattern of the derivatives, which is exact for
real-rooted input; Sturm chains remain available for counting roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConditioningError, DivisibilityError, InvalidInputError

TRIM_TOL = 1e-12
CLEAN_TOL = 1e-13
DIVISIBILITY_TOL = 1e-9
STURM_TAIL_TOL = 1e-12


def _trim(c: np.ndarray) -> np.ndarray:
    if c.size == 0:
        return c
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return c[:0]
    nz = np.nonzero(np.abs(c) > TRIM_TOL * scale)[0]
    return c[: nz[-1] + 1]


class Poly:
    """Immutable real polynomial, ascending coefficients, trimmed on construction."""

    def __init__(self, coeffs: Iterable[float] | np.ndarray = ()):
        c = np.array(coeffs, dtype=np.float64).ravel()
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("non-finite polynomial coefficient")
        self._c = _trim(c)
        self._c.setflags(write=False)

    @classmethod
    def from_roots(cls, roots: Sequence[float], lead: float = 1.0) -> Poly:
        return cls(lead * npoly.polyfromroots(np.asarray(roots, dtype=np.float64)))

    @classmethod
    def monomial(cls, degree: int, coeff: float = 1.0) -> Poly:
        c = np.zeros(degree + 1)
        c[degree] = coeff
        return cls(c)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        """Degree; ``-1`` for the zero polynomial."""
        return self._c.size - 1

    def is_zero(self) -> bool:
        return self._c.size == 0

    def scale(self) -> float:
        return float(np.max(np.abs(self._c))) if self._c.size else 0.0

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(max(length, self._c.size))
        out[: self._c.size] = self._c
        return out

    def cleaned(self, tol: float = CLEAN_TOL) -> Poly:
        """Zero coefficients below ``tol`` times the largest one."""
        c = self._c.copy()
        c[np.abs(c) < tol * self.scale()] = 0.0
        return Poly(c)

    def __call__(self, x):
        return npoly.polyval(x, self._c) if self._c.size else np.zeros_like(np.asarray(x, float))

    def __add__(self, other: Poly) -> Poly:
        n = max(self._c.size, other._c.size)
        return Poly(self.padded(n) + other.padded(n))

    def __sub__(self, other: Poly) -> Poly:
        n = max(self._c.size, other._c.size)
        return Poly(self.padded(n) - other.padded(n))

    def __neg__(self) -> Poly:
        return Poly(-self._c)

    def __mul__(self, other) -> Poly:
        if isinstance(other, Poly):
            if self.is_zero() or other.is_zero():
                return Poly()
            return Poly(np.convolve(self._c, other._c))
        return Poly(self._c * float(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> Poly:
        return Poly(self._c / float(scalar))

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self) -> str:
        return f"Poly({np.array2string(self._c, precision=6, separator=', ')})"

    def roots(self) -> np.ndarray:
        """All complex roots via the companion matrix."""
        if self.degree < 1:
            return np.zeros(0, dtype=complex)
        return npoly.polyroots(self._c)

    @cached_property
    def _sturm(self):
        return _Table.of(sturm_chain(self))


def rel_diff(p: Poly, q: Poly) -> float:
    """Max-coefficient difference relative to the larger max-coefficient."""
    n = max(p.coeffs.size, q.coeffs.size, 1)
    scale = max(p.scale(), q.scale())
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(p.padded(n) - q.padded(n))) / scale)


def derivative(p: Poly, order: int = 1) -> Poly:
    if order < 0:
        raise InvalidInputError("derivative order must be nonnegative")
    if order == 0 or p.is_zero():
        return p
    if order > p.degree:
        return Poly()
    return Poly(npoly.polyder(p.coeffs, order))


def flip(p: Poly, d: int) -> Poly:
    """``x^d p(1/x)``: reverse the coefficients within length ``d+1``."""
    if p.degree > d:
        raise InvalidInputError(f"flip degree {d} below polynomial degree {p.degree}")
    return Poly(p.padded(d + 1)[::-1])


def monomial_shift(p: Poly, e: int) -> Poly:
    """Multiply by ``x^e``; negative ``e`` requires the division to be exact."""
    if p.is_zero() or e == 0:
        return p
    c = p.coeffs
    if e > 0:
        return Poly(np.concatenate([np.zeros(e), c]))
    tail = c[:-e]
    if tail.size and np.max(np.abs(tail)) > DIVISIBILITY_TOL * p.scale():
        raise DivisibilityError(
            f"polynomial is not divisible by x^{-e}: trailing coefficients {tail}"
        )
    return Poly(c[-e:])


def laguerre_step(p: Poly) -> Poly:
    """``∂(x·∂p)``."""
    return derivative(monomial_shift(derivative(p), 1))


def charpoly(M, symmetric: bool | None = None) -> Poly:
    """``det[xI − M]`` from the eigenvalues of ``M``."""
    M = np.asarray(M, dtype=np.float64)
    if M.shape[0] == 0:
        return Poly([1.0])
    if symmetric is None:
        symmetric = np.allclose(M, M.T, rtol=0, atol=1e-14 * max(1.0, np.max(np.abs(M))))
    ev = np.linalg.eigvalsh((M + M.T) / 2) if symmetric else np.linalg.eigvals(M)
    c = npoly.polyfromroots(ev)
    return Poly(np.real(c))


def faddeev_leverrier(M) -> Poly:
    """``det[xI − M]`` by the Faddeev–LeVerrier recurrence (small ``d`` only)."""
    M = np.asarray(M, dtype=np.float64)
    d = M.shape[0]
    if d > 30:
        raise InvalidInputError("Faddeev-LeVerrier is limited to d <= 30")
    c = np.zeros(d + 1)
    c[d] = 1.0
    Mk = np.zeros_like(M)
    eye = np.eye(d)
    for k in range(1, d + 1):
        Mk = M @ (Mk + c[d - k + 1] * eye)
        c[d - k] = -np.trace(Mk) / k
    return Poly(c)


def gram_charpoly(M, tol: float = 1e-13) -> Poly:
    """``det[xI_d − MᵀM]`` for ``M`` of shape n×d, exact in its zero roots.

    The eigenvalues come from the smaller of ``MᵀM`` and ``MMᵀ``; the rest
    are exact zeros, as are eigenvalues below ``tol`` times the largest.
    """
    M = np.asarray(M, dtype=np.float64)
    n, d = M.shape
    if d == 0:
        return Poly([1.0])
    G = M @ M.T if n < d else M.T @ M
    ev = np.linalg.eigvalsh((G + G.T) / 2) if G.size else np.zeros(0)
    if ev.size:
        ev = np.where(np.abs(ev) <= tol * max(np.max(np.abs(ev)), 0.0), 0.0, ev)
    ev = np.concatenate([ev, np.zeros(d - ev.size)])
    nonzero = ev[ev != 0.0]
    c = npoly.polyfromroots(nonzero) if nonzero.size else np.ones(1)
    return monomial_shift(Poly(c), d - nonzero.size)


# Sturm sequences ------------------------------------------------------------


def _normalize(c: np.ndarray) -> np.ndarray:
    return c / np.max(np.abs(c))


def _sturm_from(p: np.ndarray, dp: np.ndarray) -> list[np.ndarray]:
    chain = [_normalize(p), _normalize(dp)]
    while chain[-1].size > 1:
        _, rem = npoly.polydiv(chain[-2], chain[-1])
        rem = -np.asarray(rem, dtype=np.float64)
        if not np.all(np.isfinite(rem)):
            raise ConditioningError("non-finite Sturm remainder")
        if rem.size == 0 or np.max(np.abs(rem)) <= STURM_TAIL_TOL:
            break
        rem = _trim(rem)
        chain.append(_normalize(rem))
    return chain


def sturm_chain(p: Poly) -> list[np.ndarray]:
    """Normalized Sturm chain ``p, p', -rem, ...`` as ascending arrays.

    When the chain ends in a nonconstant gcd (repeated roots) it is rebuilt
    for the square-free part, whose simple roots evaluate far more stably.
    """
    if p.degree < 1:
        return [p.coeffs.copy()]
    chain = _sturm_from(p.coeffs, derivative(p).coeffs)
    if chain[-1].size > 1:
        sqfree, _ = npoly.polydiv(chain[0], chain[-1])
        sqfree = _trim(np.asarray(sqfree, dtype=np.float64))
        if sqfree.size > 1:
            dq = npoly.polyder(sqfree)
            chain = _sturm_from(sqfree, dq) if dq.size > 0 and np.any(dq) else [_normalize(sqfree)]
    return chain


@dataclass(frozen=True)
class _Table:
    """Polynomials stacked as zero-padded rows for one-sweep evaluation."""

    coeffs: np.ndarray
    magnitudes: np.ndarray

    @classmethod
    def of(cls, polys: list[np.ndarray]) -> _Table:
        width = max(c.size for c in polys)
        T = np.zeros((len(polys), width))
        for i, c in enumerate(polys):
            T[i, : c.size] = c
        return cls(T, np.abs(T))


def _variations(table: _Table, x: float) -> int:
    vals = table.coeffs[:, -1].copy()
    bounds = table.magnitudes[:, -1].copy()
    ax = abs(x)
    for j in range(table.coeffs.shape[1] - 2, -1, -1):
        vals = vals * x + table.coeffs[:, j]
        bounds = bounds * ax + table.magnitudes[:, j]
    if not np.all(np.isfinite(vals)):
        raise ConditioningError(f"Sturm chain overflow at x={x}")
    # values below the evaluation rounding bound carry no sign information
    vals[np.abs(vals) <= 8 * np.finfo(float).eps * bounds] = 0.0
    signs = np.sign(vals[vals != 0.0])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def sturm_count(p: Poly, a: float, b: float) -> int:
    """Number of distinct real roots of ``p`` in ``(a, b]``."""
    if not a < b:
        raise InvalidInputError("sturm_count needs a < b")
    if p.is_zero():
        raise InvalidInputError("zero polynomial")
    chain = p._sturm
    count = _variations(chain, a) - _variations(chain, b)
    if count < 0 or count > max(p.degree, 0):
        raise ConditioningError(f"Sturm chain degenerated (count {count} for degree {p.degree})")
    return count


@dataclass(frozen=True)
class RootBracket:
    """Interval ``[lo, hi]`` of width at most ``2·eta`` holding the largest root."""

    lo: float
    hi: float
    eta: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


def cauchy_bound(p: Poly) -> float:
    c = p.coeffs
    return 1.0 + float(np.max(np.abs(c[:-1])) / abs(c[-1])) if p.degree >= 1 else 1.0


def _strip_zero_roots(p: Poly) -> tuple[Poly, int]:
    c = p.coeffs
    nz = int(np.argmax(c != 0.0))
    return Poly(c[nz:]), nz


def _derivative_table(q: Poly) -> _Table:
    c = _normalize(q.coeffs)
    table = [c]
    for _ in range(q.degree):
        table.append(_normalize(npoly.polyder(table[-1])))
    return _Table.of(table)


def above_all_roots(table: _Table, x: float) -> bool:
    """Budan–Fourier test: no sign change along ``q, q', ..., q^(deg)`` at ``x``.

    For a real-rooted ``q`` this holds exactly when ``x`` exceeds every root.
    """
    return _variations(table, x) == 0


def maxroot_eta(p: Poly, eta: float) -> RootBracket:
    """Bracket the largest real root of a real-rooted ``p`` to width ``2·eta``.

    Bisection on the derivative sign pattern, which stays reliable for
    repeated and clustered roots where a floating-point Sturm chain does not.
    """
    if p.is_zero():
        raise InvalidInputError("zero polynomial has no largest root")
    if not eta > 0:
        raise InvalidInputError("eta must be positive")
    q, zeros = _strip_zero_roots(p)
    if q.degree < 1:
        if zeros == 0:
            raise InvalidInputError("constant polynomial has no roots")
        return RootBracket(-eta, eta, eta)
    table = _derivative_table(q)
    ub = cauchy_bound(q)
    lo = 0.0 if zeros else -ub
    if above_all_roots(table, lo):
        if zeros:
            return RootBracket(-eta, eta, eta)
        raise InvalidInputError("polynomial has no real roots")
    hi = ub
    # narrow the bracket around a companion-matrix estimate when the sign test confirms it
    guess = float(np.max(q.roots().real))
    pad = max(eta, 1e-6 * max(1.0, abs(guess)))
    g_lo, g_hi = max(lo, guess - pad), min(hi, guess + pad)
    if g_lo < g_hi:
        if above_all_roots(table, g_hi):
            hi = g_hi
            if g_lo > lo and not above_all_roots(table, g_lo):
                lo = g_lo
    # invariant: lo is below the largest root, hi is above all roots
    while hi - lo > 2 * eta:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if above_all_roots(table, mid):
            hi = mid
        else:
            lo = mid
    return RootBracket(lo, hi, eta)


def maxroot(p: Poly, eta: float = 1e-13) -> float:
    """Largest real root, relative accuracy ``eta`` on the Cauchy scale."""
    q, _ = _strip_zero_roots(p)
    scale = cauchy_bound(q) if q.degree >= 1 else 1.0
    return maxroot_eta(p, eta * scale).mid


def laguerre_power(p: Poly, k: int) -> Poly:
    """``(∂x∂)^k p``."""
    for _ in range(k):
        p = laguerre_step(p)
    return p


def factorial(k: int) -> float:
    return float(math.factorial(k))
