"""Alternating projections against the direct joint projection, with certificates."""

import math

import numpy as np
import pytest

from sumspace.backfit import (
    backfit_decompose,
    empirical_rho,
    trace_diagnostics,
    trace_inequalities_selftest,
)
from sumspace.errors import NonConvergenceError, RankDeficiencyError


def random_instance(rng, n=200, d1=5, d2=7):
    Z1 = rng.standard_normal((n, d1))
    Z2 = rng.standard_normal((n, d2))
    v = rng.standard_normal(n)
    return Z1, Z2, v


def direct_components(Z1, Z2, v):
    beta, *_ = np.linalg.lstsq(np.hstack([Z1, Z2]), v, rcond=None)
    return Z1 @ beta[: Z1.shape[1]], Z2 @ beta[Z1.shape[1] :]


def enorm(u):
    return float(np.linalg.norm(u)) / math.sqrt(u.shape[0])


class TestBackfitDecompose:
    def test_matches_direct_projection(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            Z1, Z2, v = random_instance(rng)
            v1, v2, report = backfit_decompose(Z1, Z2, v)
            v1_star, v2_star = direct_components(Z1, Z2, v)
            assert enorm(v1 - v1_star) <= 1e-8
            assert enorm(v2 - v2_star) <= 1e-8

    def test_sweep_errors_respect_certificate(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            Z1, Z2, v = random_instance(rng)
            _, _, report = backfit_decompose(Z1, Z2, v)
            slack = 1e-13 * report.norm_v
            for k, err in enumerate(report.sweep_errors):
                assert err <= report.error_bound(k) + slack
            assert report.final_gap <= report.certified_bound + slack

    def test_components_sum_to_projection(self):
        rng = np.random.default_rng(2)
        Z1, Z2, v = random_instance(rng)
        v1, v2, _ = backfit_decompose(Z1, Z2, v)
        v1_star, v2_star = direct_components(Z1, Z2, v)
        assert enorm((v1 + v2) - (v1_star + v2_star)) <= 1e-10

    def test_orthogonal_blocks_finish_in_two_sweeps(self):
        n = 64
        Z1 = np.zeros((n, 2))
        Z2 = np.zeros((n, 2))
        Z1[:32, 0] = 1.0
        Z1[32:, 1] = 1.0
        t = np.linspace(0.0, 1.0, n, endpoint=False)
        Z2[:, 0] = np.sin(2 * np.pi * t)
        Z2[:, 1] = np.cos(2 * np.pi * t)
        Z2 -= Z1 @ np.linalg.lstsq(Z1, Z2, rcond=None)[0]  # force exact orthogonality
        rng = np.random.default_rng(3)
        v = rng.standard_normal(n)
        v1, v2, report = backfit_decompose(Z1, Z2, v)
        assert report.empirical_rho < 1e-8
        assert report.iterations == 2
        assert report.certified_bound <= 1e-12 * report.norm_v
        v1_star, _ = direct_components(Z1, Z2, v)
        assert enorm(v1 - v1_star) <= 1e-12

    def test_collinear_blocks_raise(self):
        rng = np.random.default_rng(4)
        Z1 = rng.standard_normal((50, 3))
        with pytest.raises(NonConvergenceError) as exc:
            backfit_decompose(Z1, Z1.copy(), rng.standard_normal(50))
        assert exc.value.rho_hat >= 1.0 - 1e-8

    def test_rank_deficient_block_raises(self):
        rng = np.random.default_rng(5)
        Z1 = rng.standard_normal((50, 3))
        Z1[:, 2] = Z1[:, 0]  # duplicated column
        Z2 = rng.standard_normal((50, 2))
        with pytest.raises(RankDeficiencyError):
            backfit_decompose(Z1, Z2, rng.standard_normal(50))

    def test_max_iter_warns_but_returns(self):
        rng = np.random.default_rng(6)
        Z1 = rng.standard_normal((80, 3))
        Z2 = Z1 + 1e-3 * rng.standard_normal((80, 3))  # rho near but below the gate
        v = rng.standard_normal(80)
        with pytest.warns(RuntimeWarning):
            _, _, report = backfit_decompose(Z1, Z2, v, tol=1e-16, max_iter=3)
        assert report.iterations == 3

    def test_shape_mismatch_raises(self):
        rng = np.random.default_rng(7)
        with pytest.raises(ValueError):
            backfit_decompose(
                rng.standard_normal((10, 2)),
                rng.standard_normal((12, 2)),
                rng.standard_normal(10),
            )
        with pytest.raises(ValueError):
            backfit_decompose(
                rng.standard_normal((10, 2)),
                rng.standard_normal((10, 2)),
                rng.standard_normal(10),
                max_iter=0,
            )

    def test_error_bound_formula(self):
        rng = np.random.default_rng(8)
        Z1, Z2, v = random_instance(rng, n=100, d1=3, d2=3)
        _, _, report = backfit_decompose(Z1, Z2, v)
        r, nv = report.empirical_rho, report.norm_v
        for k in (0, 1, 4):
            expected = r ** (2 * k + 1) / (1.0 - r * r) * nv
            assert abs(report.error_bound(k) - expected) < 1e-15 * max(1.0, expected)


class TestEmpiricalRho:
    def test_against_random_search_oracle(self):
        rng = np.random.default_rng(9)
        n, d1, d2 = 120, 4, 5
        Z1 = rng.standard_normal((n, d1))
        Z2 = rng.standard_normal((n, d2))
        rho = empirical_rho(Z1, Z2)

        # profile out the second block: best cosine for u = Z1 a is
        # ||Q2^T u|| / ||u||, so only the a-direction needs searching
        q2 = np.linalg.qr(Z2)[0]
        h = Z1.T @ q2
        g11 = Z1.T @ Z1
        a = rng.standard_normal((100_000, d1))
        num = np.einsum("ti,ij,tj->t", a, h @ h.T, a)
        den = np.einsum("ti,ij,tj->t", a, g11, a)
        best = math.sqrt(float((num / den).max()))
        assert best <= rho + 1e-10
        assert rho - best < 1e-3

    def test_identical_spans_give_one(self):
        rng = np.random.default_rng(10)
        Z1 = rng.standard_normal((30, 3))
        assert empirical_rho(Z1, Z1 @ rng.standard_normal((3, 3))) > 1.0 - 1e-10

    def test_orthogonal_columns_give_zero(self):
        Z1 = np.eye(10)[:, :3]
        Z2 = np.eye(10)[:, 5:8]
        assert empirical_rho(Z1, Z2) < 1e-12


class TestTraceDiagnostics:
    def test_against_dense_hat_matrices(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n, d1, d2 = 60, 3, 4
            Z1 = rng.standard_normal((n, d1))
            Z2 = rng.standard_normal((n, d2))
            trace, opnorm = trace_diagnostics(Z1, Z2)
            q1 = np.linalg.qr(Z1)[0]
            q2 = np.linalg.qr(Z2)[0]
            p1, p2 = q1 @ q1.T, q2 @ q2.T
            assert abs(trace - np.trace(p1 @ p2)) < 1e-10
            assert abs(opnorm - np.linalg.eigvalsh(p2 @ p1 @ p2).max()) < 1e-10

    def test_trace_dominated_by_rho_sq_times_dim(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            Z1 = rng.standard_normal((80, 4))
            Z2 = rng.standard_normal((80, 6))
            trace, opnorm = trace_diagnostics(Z1, Z2)
            assert trace <= opnorm * 4 + 1e-10
            assert empirical_rho(Z1, Z2) ** 2 == pytest.approx(opnorm, abs=1e-12)


def test_trace_inequalities_selftest():
    assert trace_inequalities_selftest(trials=2000, max_dim=10, seed=3) <= 1e-10
