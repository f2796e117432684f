import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from interlace import expected as ex
from interlace.errors import InvalidInputError, NotApplicableError, RankDeficiencyError
from interlace.linalg import spectral_norm
from interlace.oracle import enumerate_optimum, random_problem
from interlace.polynomial import maxroot
from interlace.problem import GcrssProblem
from interlace.selection import (
    WORKERS_ENV,
    SelectionConfig,
    _argmin,
    select_css,
    select_gcrss,
    select_gcss,
    select_submatrix,
    worker_count,
)


class TestConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(InvalidInputError):
            SelectionConfig(eta=0.0)
        with pytest.raises(InvalidInputError):
            SelectionConfig(tol=1e-2)
        with pytest.raises(InvalidInputError):
            SelectionConfig(path_override="nope")

    def test_worker_env(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "3")
        assert worker_count(SelectionConfig()) == 3
        monkeypatch.setenv(WORKERS_ENV, "junk")
        assert worker_count(SelectionConfig()) == 1
        assert worker_count(SelectionConfig(workers=2)) == 2

    def test_argmin_first_on_ties(self):
        assert _argmin([3.0, 1.0, 1.0]) == 1
        assert _argmin([0.0, 0.0]) == 0


class TestWorkedExamples:
    def test_empty_selection(self, rng):
        A = rng.standard_normal((3, 3))
        res = select_gcrss(GcrssProblem(A, rng.standard_normal((3, 4)), rng.standard_normal((2, 3)), 0, 0))
        assert res.S == [] and res.R == []
        assert res.residual_spectral_sq == pytest.approx(spectral_norm(A) ** 2, rel=1e-12)

    def test_identity_micro(self):
        eta = 1e-8
        res = select_gcrss(GcrssProblem(np.eye(2), np.eye(2), np.eye(2), 1, 1), SelectionConfig(eta=eta))
        assert res.residual_spectral_sq == pytest.approx(0.0, abs=1e-10)
        assert res.maxroot_bound == pytest.approx(0.5, abs=1e-10)
        assert res.residual_spectral_sq <= 4 * eta + res.maxroot_bound

    def test_gcss_diagonal(self):
        eta = 1e-8
        res = select_gcss(np.diag([1.0, 2.0]), np.eye(2), 1, SelectionConfig(eta=eta))
        assert res.S == [1]
        assert res.residual_spectral_sq == pytest.approx(1.0, rel=1e-12)
        assert res.maxroot_bound == pytest.approx(2.5, abs=1e-9)

    def test_css_full_rank(self, rng):
        A = rng.standard_normal((5, 3))
        assert select_css(A, 3).residual_spectral_sq < 1e-20

    def test_zero_target(self, rng):
        res = select_gcss(np.zeros((3, 2)), rng.standard_normal((3, 4)), 2)
        assert res.residual_spectral_sq == 0.0

    def test_random_gcrss_against_enumeration(self, rng):
        eta = 1e-8
        prob = GcrssProblem(
            rng.standard_normal((4, 4)), rng.standard_normal((4, 5)), rng.standard_normal((3, 4)), 1, 1
        )
        res = select_gcrss(prob, SelectionConfig(eta=eta))
        _, _, opt = enumerate_optimum(prob)
        assert opt**2 <= res.residual_spectral_sq + 1e-10
        assert res.residual_spectral_sq <= 4 * eta + maxroot(ex.expected_poly(prob)) + 1e-7


class TestSubmatrix:
    def test_whole_matrix(self, rng):
        A = rng.standard_normal((3, 3))
        res = select_submatrix(A, 3, 3)
        assert res.S == [0, 1, 2] and res.R == [0, 1, 2]
        assert res.residual_spectral_sq == pytest.approx(spectral_norm(A) ** 2)

    def test_identity_off_diagonal(self):
        res = select_submatrix(np.eye(2), 1, 1, SelectionConfig(eta=1e-10))
        assert res.S != res.R
        assert res.residual_spectral_sq == 0.0
        assert sorted(res.S + res.internal_S) == [0, 1]

    def test_zero_diagonal_random(self, rng):
        A = rng.standard_normal((4, 4))
        np.fill_diagonal(A, 0.0)
        A /= spectral_norm(A)
        res = select_submatrix(A, 1, 1, SelectionConfig(eta=1e-10))
        beta = np.sum(A**2) / 4
        if 1 < 4 / (beta + 1):
            bound = (1 - beta) / 4 + 2 * np.sqrt(0.75 * 0.25 * beta)
            assert np.sqrt(res.residual_spectral_sq) <= bound + 1e-6
        assert np.sqrt(res.residual_spectral_sq) >= np.min(np.abs(A)) - 1e-15

    def test_rejects_rectangular(self):
        with pytest.raises(InvalidInputError):
            select_submatrix(np.ones((2, 3)), 1, 1)


class TestErrors:
    def test_rank_deficient_source(self):
        B = np.array([[1.0, 2.0], [1.0, 2.0]])
        prob = GcrssProblem(np.eye(2), B, np.zeros((0, 2)), 2, 0, validate=False)
        with pytest.raises(RankDeficiencyError):
            select_gcrss(prob)

    def test_inapplicable_override(self, rng):
        prob = GcrssProblem(rng.standard_normal((2, 2)), np.eye(2), rng.standard_normal((2, 2)), 1, 1)
        with pytest.raises(NotApplicableError):
            select_gcrss(prob, SelectionConfig(path_override="gcss-1d"))


@given(st.integers(0, 2**31 - 1))
def test_sandwich_and_monotone_trace(seed):
    eta = 1e-8
    prob = random_problem(np.random.default_rng(seed))
    res = select_gcrss(prob, SelectionConfig(eta=eta))
    _, _, opt = enumerate_optimum(prob)
    assert len(res.S) == prob.k and len(res.R) == prob.r
    assert len(set(res.S)) == prob.k and len(set(res.R)) == prob.r
    assert opt**2 <= res.residual_spectral_sq + 1e-10
    assert res.residual_spectral_sq <= 2 * (prob.k + prob.r) * eta + res.maxroot_bound + 1e-7
    lams = [t.lam for t in res.trace]
    assert all(b <= a + 2 * eta for a, b in zip(lams, lams[1:]))


@given(st.integers(0, 2**31 - 1))
def test_paths_give_same_subsets_bound(seed):
    eta = 1e-8
    prob = random_problem(np.random.default_rng(seed))
    for path in ("definition", "h-determinant"):
        if not ex.path_applies(prob, path):
            continue
        res = select_gcrss(prob, SelectionConfig(eta=eta, path_override=path))
        assert res.residual_spectral_sq <= 2 * (prob.k + prob.r) * eta + res.maxroot_bound + 1e-7


@given(st.integers(0, 2**31 - 1))
def test_residual_decomposition_bound(seed):
    rng = np.random.default_rng(seed)
    eta = 1e-8
    n, d, dB = (int(rng.integers(2, 6)) for _ in range(3))
    A, B = rng.standard_normal((n, d)), rng.standard_normal((n, dB))
    k = int(rng.integers(0, min(n, dB) + 1))
    res = select_gcss(A, B, k, SelectionConfig(eta=eta))
    inside = B @ np.linalg.pinv(B) @ A
    poly = ex.expected_poly(GcrssProblem.column_only(inside, B, k), "definition")
    assert res.residual_spectral_sq <= spectral_norm(A - inside) ** 2 + maxroot(poly) + 2 * k * eta + 1e-7


@given(st.integers(0, 2**31 - 1))
def test_worker_count_does_not_change_subsets(seed):
    prob = random_problem(np.random.default_rng(seed), max_n=6, max_dB=8)
    one = select_gcrss(prob, SelectionConfig(eta=1e-8, workers=1))
    four = select_gcrss(prob, SelectionConfig(eta=1e-8, workers=4))
    assert one.S == four.S and one.R == four.R
    assert [t.lam for t in one.trace] == [t.lam for t in four.trace]


@given(st.integers(0, 2**31 - 1), st.sampled_from([2.0, 3.0]))
def test_scaling_covariance(seed, c):
    eta = 1e-8
    prob = random_problem(np.random.default_rng(seed))
    base = select_gcrss(prob, SelectionConfig(eta=eta))
    scaled = GcrssProblem(c * prob.A, prob.B, prob.C, prob.k, prob.r)
    res = select_gcrss(scaled, SelectionConfig(eta=eta * c**2))
    # a genuine near-tie can flip; then the two choices must be equally good
    if res.S == base.S and res.R == base.R:
        assert res.residual_spectral_sq == pytest.approx(c**2 * base.residual_spectral_sq, rel=1e-9, abs=1e-12)
    else:
        lam_base = [t.lam for t in base.trace]
        lam_res = [t.lam / c**2 for t in res.trace]
        assert np.allclose(lam_base, lam_res, rtol=0, atol=4 * eta)
