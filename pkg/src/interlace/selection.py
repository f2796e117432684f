"""Greedy subset selection driven by largest roots of expected polynomials.

Columns of ``B`` are chosen first, one per iteration, each time keeping the
candidate whose expected polynomial for the remaining selections has the
smallest approximate largest root. Rows of ``C`` follow the same way. The
products ``V = BBᵀQ`` and ``W = [A;C] P [AᵀQ, Cᵀ]`` are carried through
rank-one updates so that each candidate costs one small interpolation.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import expected as ex
from .errors import InvalidInputError, NotApplicableError, RankDeficiencyError
from .linalg import (
    RANK_TOL,
    ZERO_COLUMN_TOL,
    initial_column_state,
    initial_row_state,
    pow2_scale,
    projector_rank_one_downdate,
    residual_matrix,
    row_rank_one_downdate,
    spectral_norm,
)
from .polynomial import Poly, gram_charpoly, maxroot_eta
from .problem import GcrssProblem

WORKERS_ENV = "INTERLACE_WORKERS"


@dataclass(frozen=True)
class SelectionConfig:
    eta: float = 1e-6
    tol: float = RANK_TOL
    path_override: str | None = None
    workers: int | None = None

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidInputError("eta must be positive")
        if not 0 < self.tol < 1e-3:
            raise InvalidInputError("tol must lie in (0, 1e-3)")
        if self.path_override is not None and self.path_override not in ex.PATHS:
            raise InvalidInputError(f"unknown path {self.path_override!r}")


@dataclass(frozen=True)
class TraceRecord:
    phase: str  # "start", "column" or "row"
    iteration: int
    candidates: int
    chosen: int | None
    lam: float


@dataclass
class SelectionResult:
    S: list[int]
    R: list[int]
    residual_spectral_sq: float
    residual_frobenius_sq: float
    maxroot_bound: float
    trace: list[TraceRecord] = field(default_factory=list)
    path: str = ""
    eta: float = 0.0
    internal_S: list[int] | None = None
    internal_R: list[int] | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["S"] = sorted(self.S)
        out["R"] = sorted(self.R)
        if self.internal_S is not None:
            out["internal_S"] = sorted(self.internal_S)
            out["internal_R"] = sorted(self.internal_R)
        return out


def worker_count(cfg: SelectionConfig) -> int:
    if cfg.workers is not None:
        return max(1, int(cfg.workers))
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _argmin(values: list[float]) -> int:
    """Position of the smallest value; the first (smallest index) on ties."""
    best = 0
    for pos in range(1, len(values)):
        if values[pos] < values[best]:
            best = pos
    return best


class _Greedy:
    """One run of the two-phase greedy on a pre-scaled problem."""

    def __init__(self, prob: GcrssProblem, cfg: SelectionConfig, path: str):
        self.prob = prob
        self.cfg = cfg
        self.path = path
        self.eta = cfg.eta
        self.workers = worker_count(cfg)

    # candidate polynomials -------------------------------------------------

    def _projected_problem(self, Q, P, k_left, r_left):
        p = self.prob
        return GcrssProblem(Q @ p.A @ P, Q @ p.B, p.C @ P, k_left, r_left, validate=False)

    def _column_poly(self, state, k_left: int, r_left: int) -> Poly:
        p, path = self.prob, self.path
        if path == "identity-laguerre":
            return ex.expected_poly_identity(p.A, state.subset, (), p.k, p.r)
        if path == "css-flip":
            return ex.css_from_charpoly(
                gram_charpoly(state.projector @ p.A), p.d, k_left
            )
        if path == "gcss-1d":
            return ex.gcss_from_cache(state.W[: p.n, : p.n], state.V, p.d, k_left)
        if path == "bivariate-gcrss":
            return ex.bivariate_from_cache(state.V, state.W, p.d, k_left, r_left)
        sub = self._projected_problem(state.projector, np.eye(p.d), k_left, r_left)
        return ex.expected_poly(sub, path)

    def _row_poly(self, col_state, state, r_left: int) -> Poly:
        p, path = self.prob, self.path
        if path == "identity-laguerre":
            return ex.expected_poly_identity(p.A, col_state.subset, state.subset, p.k, p.r)
        if path == "bivariate-gcrss":
            return ex.bivariate_from_cache(state.V, state.W, p.d, 0, r_left)
        sub = self._projected_problem(col_state.projector, state.projector, 0, r_left)
        return ex.expected_poly(sub, path)

    def _lam(self, poly: Poly) -> float:
        return maxroot_eta(poly, self.eta).mid

    def _map(self, fn: Callable[[int], float], items: list[int]) -> list[float]:
        if self.workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(fn, items))
        return [fn(i) for i in items]

    # phases ----------------------------------------------------------------

    def _admissible(self, P, vectors, chosen):
        out = []
        for i, v in enumerate(vectors):
            if i in chosen:
                continue
            norm = np.linalg.norm(v)
            if norm > ZERO_COLUMN_TOL and np.linalg.norm(P @ v) > self.cfg.tol * norm:
                out.append(i)
        return out

    def run(self, trace: list[TraceRecord]):
        p = self.prob
        state = initial_column_state(p.A, p.B, p.C)
        cols = list(p.B.T)
        for it in range(1, p.k + 1):
            cand = self._admissible(state.projector, cols, state.subset)
            if not cand:
                raise RankDeficiencyError(f"no admissible column at iteration {it}")

            def score(i, state=state, it=it):
                nxt = projector_rank_one_downdate(state, cols[i], i, self.cfg.tol)
                return self._lam(self._column_poly(nxt, p.k - it, p.r))

            lams = self._map(score, cand)
            best = _argmin(lams)
            state = projector_rank_one_downdate(state, cols[cand[best]], cand[best], self.cfg.tol)
            trace.append(TraceRecord("column", it, len(cand), cand[best], lams[best]))

        col_state = state
        rstate = initial_row_state(p.A, p.C, col_state)
        rows = list(p.C)
        for it in range(1, p.r + 1):
            cand = self._admissible(rstate.projector, rows, rstate.subset)
            if not cand:
                raise RankDeficiencyError(f"no admissible row at iteration {it}")

            def score(i, rstate=rstate, it=it):
                nxt = row_rank_one_downdate(rstate, rows[i], i, self.cfg.tol)
                return self._lam(self._row_poly(col_state, nxt, p.r - it))

            lams = self._map(score, cand)
            best = _argmin(lams)
            rstate = row_rank_one_downdate(rstate, rows[cand[best]], cand[best], self.cfg.tol)
            trace.append(TraceRecord("row", it, len(cand), cand[best], lams[best]))
        return list(col_state.subset), list(rstate.subset)


def _choose_path(prob: GcrssProblem, cfg: SelectionConfig) -> str:
    path = cfg.path_override or ex.default_path(prob)
    if not ex.path_applies(prob, path):
        raise NotApplicableError(f"path {path!r} does not apply to this problem")
    return path


def select_gcrss(prob: GcrssProblem, cfg: SelectionConfig | None = None) -> SelectionResult:
    """Greedy choice of ``k`` columns of ``B`` and ``r`` rows of ``C``.

    Guarantees ``‖Q_S A P_R‖₂² ≤ 2(k+r)·eta + maxroot P_{k,r}`` up to
    rounding.
    """
    cfg = cfg or SelectionConfig()
    path = _choose_path(prob, cfg)
    sa, sb, sc = pow2_scale(prob.A), pow2_scale(prob.B), pow2_scale(prob.C)
    if path == "identity-laguerre":
        sb = sc = 1.0
    if path == "css-flip":
        sb = sa
    scaled = GcrssProblem(prob.A / sa, prob.B / sb, prob.C / sc, prob.k, prob.r, validate=False)
    inner_cfg = SelectionConfig(cfg.eta / sa**2, cfg.tol, path, cfg.workers)
    greedy = _Greedy(scaled, inner_cfg, path)

    full = ex.expected_poly(scaled, path)
    tight = maxroot_eta(full, min(inner_cfg.eta, 1e-12)).mid
    trace = [TraceRecord("start", 0, 0, None, maxroot_eta(full, inner_cfg.eta).mid)]
    S, R = greedy.run(trace)

    res = residual_matrix(prob, S, R)
    trace = [TraceRecord(t.phase, t.iteration, t.candidates, t.chosen, t.lam * sa**2) for t in trace]
    return SelectionResult(
        S=S,
        R=R,
        residual_spectral_sq=spectral_norm(res) ** 2,
        residual_frobenius_sq=float(np.sum(res**2)),
        maxroot_bound=max(tight, 0.0) * sa**2,
        trace=trace,
        path=path,
        eta=cfg.eta,
    )


def select_gcss(A, B, k: int, cfg: SelectionConfig | None = None) -> SelectionResult:
    """Column-only greedy: ``k`` columns of ``B`` to approximate ``A``."""
    return select_gcrss(GcrssProblem.column_only(A, B, k), cfg)


def select_css(A, k: int, cfg: SelectionConfig | None = None) -> SelectionResult:
    """Classical column subset selection (``B = A``)."""
    A = np.asarray(A, dtype=np.float64)
    return select_gcrss(GcrssProblem.column_only(A, A, k), cfg)


def select_submatrix(A, k: int, r: int, cfg: SelectionConfig | None = None) -> SelectionResult:
    """A ``k×r`` submatrix of square ``A`` with small spectral norm.

    Internally removes ``d−k`` rows and ``d−r`` columns greedily with identity
    sources; ``S``/``R`` of the result are the kept rows/columns and
    ``internal_S``/``internal_R`` the removed ones.
    """
    A = np.asarray(A, dtype=np.float64)
    d = A.shape[0]
    if A.ndim != 2 or A.shape != (d, d):
        raise InvalidInputError("submatrix selection needs a square A")
    if not (0 <= k <= d and 0 <= r <= d):
        raise InvalidInputError(f"k, r must lie in [0, {d}]")
    eye = np.eye(d)
    inner = select_gcrss(GcrssProblem(A, eye, eye, d - k, d - r), cfg)
    rows = [i for i in range(d) if i not in inner.S]
    cols = [j for j in range(d) if j not in inner.R]
    sub = A[np.ix_(rows, cols)]
    return SelectionResult(
        S=rows,
        R=cols,
        residual_spectral_sq=spectral_norm(sub) ** 2,
        residual_frobenius_sq=float(np.sum(sub**2)),
        maxroot_bound=inner.maxroot_bound,
        trace=inner.trace,
        path=inner.path,
        eta=inner.eta,
        internal_S=list(inner.S),
        internal_R=list(inner.R),
    )
