"""The ten acceptance criteria, one test and one summary line each.

The heavy Monte Carlo reports are shared across criteria through module
fixtures; every experiment is seeded, so reruns reproduce identical numbers.
"""

import math
import time

import numpy as np
import pytest

from acceptance_report import record
from sumspace.backfit import backfit_decompose, trace_inequalities_selftest
from sumspace.basis import HermiteBasis, UnivariateBasis
from sumspace.estimator import Dataset, EstimatorConfig, evaluate_estimate, fit
from sumspace.harness import (
    build_model,
    fit_rate,
    run_edelta_study,
    run_risk_experiment,
    ModelDims,
)
from sumspace.sim import ScenarioConfig
from sumspace.spaces import (
    ComponentSpace,
    SumspaceModel,
    angle_equivalence_check,
    bivariate_gaussian,
    eigen_spectrum,
    equicorrelated_copula,
    hs_norm,
    independent_uniform,
    minimal_angle,
    population_gram,
)

RATE_GRID = [256, 512, 1024, 2048, 4096, 8192, 16384]
REPLICATIONS = 200


def hermite_model(deg1, deg2):
    v1 = ComponentSpace("target", (0,), HermiteBasis(deg1, include_constant=False))
    v2 = ComponentSpace("nuisance", (1,), HermiteBasis(deg2), centering="none")
    return SumspaceModel(v1, (v2,))


def random_gram(rng, d1, d2):
    u1 = rng.standard_normal((d1 + d2 + 2, d1))
    u2 = rng.standard_normal((d1 + d2 + 2, d2))
    top = np.hstack([u1.T @ u1, u1.T @ u2])
    bot = np.hstack([u2.T @ u1, u2.T @ u2])
    return np.vstack([top, bot])


@pytest.fixture(scope="module")
def rate_report_smooth():
    scenario = ScenarioConfig(
        q=2, n=RATE_GRID[0], design=independent_uniform(2),
        alpha1=2.0, alpha2=2.0, sigma=0.5, base_seed=0,
    )
    t0 = time.monotonic()
    report = run_risk_experiment(scenario, RATE_GRID, replications=REPLICATIONS)
    return report, time.monotonic() - t0


@pytest.fixture(scope="module")
def rate_report_rough():
    scenario = ScenarioConfig(
        q=2, n=RATE_GRID[0], design=independent_uniform(2),
        alpha1=1.0, alpha2=2.0, sigma=0.5, base_seed=0,
    )
    return run_risk_experiment(scenario, RATE_GRID, replications=REPLICATIONS)


@pytest.fixture(scope="module")
def risk_report_additive():
    scenario = ScenarioConfig(
        q=6, n=8192, design=independent_uniform(6),
        alpha1=2.0, alpha2=1.0, sigma=0.5, base_seed=0,
    )
    return run_risk_experiment(scenario, [8192], replications=REPLICATIONS)


def test_criterion_01_gaussian_closed_forms():
    t0 = time.monotonic()
    law = bivariate_gaussian(0.5)

    g = population_gram(hermite_model(20, 20), law)
    rho0 = minimal_angle(g, 20, 21)
    hs_sq = hs_norm(g, (20, 21)) ** 2

    g_lin = population_gram(hermite_model(1, 1), law)
    hs_sq_lin = hs_norm(g_lin, (1, 2)) ** 2

    elapsed = time.monotonic() - t0
    ok = (
        abs(rho0 - 0.5) <= 1e-3
        and abs(hs_sq - 1.0 / 3.0) <= 2e-3
        and abs(hs_sq_lin - 0.25) <= 1e-6
        and elapsed < 10.0
    )
    record(
        1,
        "gaussian closed forms",
        ok,
        f"rho0={rho0:.6f} (0.5 +- 1e-3), hs_sq={hs_sq:.6f} (1/3 +- 2e-3), "
        f"linear hs_sq={hs_sq_lin:.8f} (0.25 +- 1e-6), {elapsed:.2f}s < 10s",
    )
    assert ok


def test_criterion_02_eigen_trace_consistency():
    t0 = time.monotonic()
    rng = np.random.default_rng(2)
    worst_top, worst_sum = 0.0, 0.0
    for _ in range(100):
        d1, d2 = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        g = random_gram(rng, d1, d2)
        eig = eigen_spectrum(g, (d1, d2))
        worst_top = max(worst_top, abs(eig[0] - minimal_angle(g, d1, d2) ** 2))
        worst_sum = max(worst_sum, abs(eig.sum() - hs_norm(g, (d1, d2)) ** 2))
    elapsed = time.monotonic() - t0
    ok = worst_top <= 1e-10 and worst_sum <= 1e-10 and elapsed < 5.0
    record(
        2,
        "eigen/trace consistency",
        ok,
        f"max|a1-rho0^2|={worst_top:.2e}, max|sum-hs^2|={worst_sum:.2e} "
        f"(tol 1e-10, 100 Grams), {elapsed:.2f}s < 5s",
    )
    assert ok


def test_criterion_03_backfit_equals_direct():
    t0 = time.monotonic()
    rng = np.random.default_rng(3)
    n, d1, d2 = 200, 5, 7
    worst_gap, bounds_hold = 0.0, True
    for _ in range(100):
        z1 = rng.standard_normal((n, d1))
        z2 = rng.standard_normal((n, d2))
        v = rng.standard_normal(n)
        v1, _, report = backfit_decompose(z1, z2, v)
        beta, *_ = np.linalg.lstsq(np.hstack([z1, z2]), v, rcond=None)
        gap = np.linalg.norm(v1 - z1 @ beta[:d1]) / math.sqrt(n)
        worst_gap = max(worst_gap, float(gap))
        slack = 1e-13 * report.norm_v
        for k, err in enumerate(report.sweep_errors):
            if err > report.error_bound(k) + slack:
                bounds_hold = False
    elapsed = time.monotonic() - t0
    ok = worst_gap <= 1e-8 and bounds_hold and elapsed < 10.0
    record(
        3,
        "backfit equals direct projection",
        ok,
        f"max discrepancy={worst_gap:.2e} (tol 1e-8), sweep bounds "
        f"{'all hold' if bounds_hold else 'VIOLATED'}, {elapsed:.2f}s < 10s",
    )
    assert ok


def test_criterion_04_angle_equivalences():
    rng = np.random.default_rng(4)
    trials_per_gram = 2000  # 50 Grams x 2000 pairs = 1e5 pairs
    worst_violation, worst_tightness = 0.0, 0.0
    for seed in range(50):
        d1, d2 = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        g = random_gram(rng, d1, d2)
        report = angle_equivalence_check(g, d1, d2, trials=trials_per_gram, seed=seed)
        worst_violation = max(worst_violation, report.max_violation)
        worst_tightness = max(worst_tightness, report.tightness_gap)
    ok = worst_violation <= 1e-10 and worst_tightness <= 1e-8
    record(
        4,
        "angle equivalence suite",
        ok,
        f"max violation={worst_violation:.2e} (tol 1e-10 over 1e5 pairs), "
        f"tightness gap={worst_tightness:.2e} (tol 1e-8)",
    )
    assert ok


def test_criterion_05_trace_inequalities():
    worst = trace_inequalities_selftest(trials=10_000, max_dim=12, seed=5)
    ok = worst <= 1e-10
    record(
        5,
        "trace inequality suite",
        ok,
        f"max violation={worst:.2e} (tol 1e-10 over 1e4 matrix pairs, dims <= 12)",
    )
    assert ok


def test_criterion_06_rate_reproduction(rate_report_smooth, rate_report_rough):
    report_smooth, elapsed = rate_report_smooth
    rate_smooth = fit_rate(report_smooth)
    rate_rough = fit_rate(rate_report_rough)
    ok = (
        abs(rate_smooth.slope - (-0.8)) <= 0.1
        and rate_smooth.r_squared >= 0.98
        and elapsed < 1200.0
        and abs(rate_rough.slope - (-2.0 / 3.0)) <= 0.1
    )
    record(
        6,
        "risk rate reproduction",
        ok,
        f"alpha1=2: slope={rate_smooth.slope:.4f} (-0.8 +- 0.1), "
        f"r2={rate_smooth.r_squared:.4f} (>= 0.98), {elapsed:.0f}s < 1200s; "
        f"alpha1=1: slope={rate_rough.slope:.4f} (-2/3 +- 0.1)",
    )
    assert ok


def test_criterion_07_nuisance_robustness(rate_report_smooth, risk_report_additive):
    report_smooth, _ = rate_report_smooth
    base = next(s.mean_risk for s in report_smooth.summary if s.n == 8192)
    additive = risk_report_additive.summary[0].mean_risk
    rel = abs(additive - base) / base
    ok = rel <= 0.3
    record(
        7,
        "nuisance robustness",
        ok,
        f"q=6 mean risk={additive:.4e} vs q=2 {base:.4e} at n=8192: "
        f"relative gap={rel:.3f} (<= 0.3)",
    )
    assert ok


def test_criterion_08_oracle_comparison(rate_report_smooth):
    report_smooth, _ = rate_report_smooth
    rows = [r for r in report_smooth.rows if r.n == 8192]
    ratio = np.mean([r.risk for r in rows]) / np.mean([r.oracle_risk for r in rows])
    ok = len(rows) == REPLICATIONS and 0.9 <= ratio <= 1.3
    record(
        8,
        "oracle comparison",
        ok,
        f"risk ratio fit/oracle={ratio:.4f} (in [0.9, 1.3], n=8192, "
        f"{REPLICATIONS} replications)",
    )
    assert ok


def test_criterion_09_edelta_frequencies():
    block = ComponentSpace(
        "study", (0,), UnivariateBasis.trigonometric(4, include_constant=False)
    )
    study = run_edelta_study(
        lambda n: block,
        independent_uniform(1),
        [4, 128, 256, 512, 1024],
        delta=0.5,
        replications=500,
        base_seed=5,
    )
    tiny, trend = study.rows[0], study.rows[1:]
    monotone = True
    for a, b in zip(trend, trend[1:]):
        band = 1.96 * math.sqrt(
            a.frequency * (1 - a.frequency) / a.replications
            + b.frequency * (1 - b.frequency) / b.replications
        )
        if b.frequency > a.frequency + band:
            monotone = False
    ok = (
        all(row.d == 8 for row in study.rows)
        and tiny.frequency == 1.0
        and monotone
    )
    freqs = ", ".join(f"{r.n}:{r.frequency:.3f}" for r in study.rows)
    record(
        9,
        "gram concentration study",
        ok,
        f"failure frequency by n ({freqs}); d>n forces frequency 1, "
        f"trend non-increasing within 95% binomial bands",
    )
    assert ok


def test_criterion_10_centering_equivalence():
    rng = np.random.default_rng(10)
    grid = np.linspace(0.0, 1.0, 501)
    worst_ptp, worst_const = 0.0, 0.0
    for trial in range(50):
        q = int(rng.integers(2, 4))
        m1, m2 = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        model = build_model(q, ModelDims(m1, m2, m1))
        law = independent_uniform(q) if trial % 2 else equicorrelated_copula(q, 0.3)
        x = rng.random((250, q))
        y = np.sin(2 * np.pi * x[:, 0]) + 0.3 * rng.standard_normal(250)
        ds = Dataset(x, y)
        pop = fit(EstimatorConfig(model=model, law=law), ds)
        emp = fit(EstimatorConfig(model=model, law=law, centering_mode="empirical"), ds)
        f_pop = evaluate_estimate(pop.beta_W1, model, grid) + pop.intercept
        f_emp = evaluate_estimate(emp.beta_W1, model, grid) + emp.intercept
        diff = f_pop - f_emp
        c_star = float(np.mean(evaluate_estimate(pop.beta_W1, model, x[:, 0])))
        worst_ptp = max(worst_ptp, float(np.ptp(diff)))
        worst_const = max(worst_const, abs(float(diff.mean()) - c_star))
    ok = worst_ptp <= 1e-10 and worst_const <= 1e-10
    record(
        10,
        "centering equivalence",
        ok,
        f"pointwise spread={worst_ptp:.2e}, constant mismatch={worst_const:.2e} "
        f"(tol 1e-10, 50 random fits)",
    )
    assert ok
