"""Monte Carlo harness and command-line entry point.

Orchestrates the experiments that make the theory observable at desk scale:
risk-over-n sweeps with rate fitting, Gram concentration frequency studies,
oracle comparisons, and one-shot fits on CSV data. Everything is seeded per
replication so any row of any report can be reproduced standalone, and
output rows are sorted before writing so files are byte-stable regardless of
worker scheduling.
"""

import argparse
import configparser
import hashlib
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .basis import HermiteBasis, TensorBasis, UnivariateBasis
from .errors import ConfigError, NumericalError
from .estimator import (
    Dataset,
    EstimatorConfig,
    design_matrix,
    check_edelta,
    evaluate_estimate,
    fit,
    oracle_fit,
)
from .quadrature import risk_rule
from .sim import ScenarioConfig, generate, make_truth, sample_design
from .spaces import (
    ComponentSpace,
    DesignLaw,
    IntegrationSpec,
    SumspaceModel,
    bivariate_gaussian,
    compute_geometry,
    equicorrelated_copula,
    independent_uniform,
    population_gram,
    single_system_gram,
)

_SUP_GRID = 10_001
_FLOAT_FMT = "%.17g"  # round-trips float64 exactly


# ---------------------------------------------------------------------------
# model rules: n -> approximation space dimensions


@dataclass(frozen=True)
class ModelDims:
    """Trigonometric cutoffs for one grid point: V1, per-block V2, W1."""

    m1: int
    m2: int
    m_w: int

    def __post_init__(self):
        if min(self.m1, self.m2, self.m_w) < 1 or self.m_w > self.m1:
            raise ConfigError(f"invalid model dimensions {self}")


def default_model_rule(scenario, phi=1.0):
    """The paper-guided dimension recipe, patched for small n.

    W1's cutoff balances bias and variance at (K1^2 n / sigma^2)^(1/(2a1+1));
    V1 additionally respects the concentration floor n/(8 phi^2 log^4 n), with
    log^4 n replaced by max(log^4 n, 16) so dimensions stay sane at desk
    scale (the substitution is recorded in every report). V2 cutoffs get one
    extra frequency to keep the nuisance bias subordinate.
    """
    s2 = scenario.sigma**2 if scenario.sigma > 0 else 1.0

    def rule(n):
        m_w = max(1, round(0.5 * (scenario.K1**2 * n / s2) ** (1.0 / (2 * scenario.alpha1 + 1))))
        log4 = max(math.log(n) ** 4, 16.0)
        m_floor = math.ceil(n / (8.0 * phi**2 * log4))
        m1 = max(m_w, m_floor)
        m2 = max(1, math.ceil(0.5 * (scenario.K2**2 * n / s2) ** (1.0 / (2 * scenario.alpha2 + 1)))) + 1
        return ModelDims(m1=m1, m2=m2, m_w=m_w)

    rule.note = "dimension floor uses max(log^4 n, 16)"
    return rule


def fixed_model_rule(m1, m2, m_w=None):
    """A rule that ignores n (useful for controlled studies)."""
    dims = ModelDims(m1=m1, m2=m2, m_w=m_w if m_w is not None else m1)

    def rule(n):
        return dims

    rule.note = f"fixed dimensions m1={dims.m1} m2={dims.m2} m_w={dims.m_w}"
    return rule


def build_model(q, dims):
    """Assemble the trigonometric sumspace model for a q-covariate scenario.

    V1 is constant-free on coordinate 0; the first nuisance block keeps the
    constant; remaining nuisance blocks are constant-free and centered. W1 is
    a coarser cutoff inside V1 (or V1 itself when the cutoffs agree).
    """
    if q < 2:
        raise ConfigError("sumspace scenarios need q >= 2")
    v1 = ComponentSpace("v1", (0,), UnivariateBasis.trigonometric(dims.m1, include_constant=False))
    blocks = [
        ComponentSpace(
            "v2_1",
            (1,),
            UnivariateBasis.trigonometric(dims.m2, include_constant=True),
            centering="none",
        )
    ]
    for j in range(2, q):
        blocks.append(
            ComponentSpace(
                f"v2_{j}",
                (j,),
                UnivariateBasis.trigonometric(dims.m2, include_constant=False),
            )
        )
    w1 = None
    if dims.m_w < dims.m1:
        w1 = ComponentSpace(
            "w1", (0,), UnivariateBasis.trigonometric(dims.m_w, include_constant=False)
        )
    return SumspaceModel(v1, tuple(blocks), w1)


def _block_sup_sq(space):
    """Grid sup of the block's sum of squared basis values."""
    b = space.basis
    if isinstance(b, HermiteBasis):
        return math.nan
    if isinstance(b, TensorBasis):
        grids = np.meshgrid(*[np.linspace(0, 1, 201) for _ in b.factors], indexing="ij")
        pts = np.column_stack([g.ravel() for g in grids])
        cols = b.columns(pts)
    else:
        cols = b.columns(np.linspace(0.0, 1.0, _SUP_GRID))
    return float(np.max(np.sum(cols * cols, axis=1)))


def system_phi(system, density_lower_bound=1.0):
    """Sup-norm constant of a stacked system, sqrt(sup sum psi^2 / (c d)).

    For additive models the sup separates across blocks, so the per-block
    grid sups simply add.
    """
    blocks = system.blocks if isinstance(system, SumspaceModel) else (system,)
    total = sum(_block_sup_sq(b) for b in blocks)
    d = sum(b.dimension for b in blocks)
    return math.sqrt(total / (density_lower_bound * d))


# ---------------------------------------------------------------------------
# risk experiments


@dataclass
class RiskRow:
    scenario_hash: str
    base_seed: int
    n: int
    replication: int
    risk: float
    oracle_risk: float
    edelta: int
    truncated: int
    rho_hat: float


@dataclass
class RiskSummary:
    n: int
    replications: int
    mean_risk: float
    std_error: float
    oracle_mean_risk: float
    edelta_failures: int
    truncation_count: int


_RISK_COLUMNS = (
    "scenario_hash",
    "base_seed",
    "n",
    "replication",
    "risk",
    "oracle_risk",
    "edelta",
    "truncated",
    "rho_hat",
)


@dataclass
class RiskReport:
    """Per-replication risk rows plus per-n aggregates and provenance."""

    meta: dict
    rows: list
    summary: list

    @property
    def n_grid(self):
        return [s.n for s in self.summary]

    @property
    def alpha1(self):
        return float(self.meta["alpha1"])

    def to_csv(self, path):
        lines = [f"# {key} = {self.meta[key]}" for key in sorted(self.meta)]
        lines.append(",".join(_RISK_COLUMNS))
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        r.scenario_hash,
                        str(r.base_seed),
                        str(r.n),
                        str(r.replication),
                        _FLOAT_FMT % r.risk,
                        _FLOAT_FMT % r.oracle_risk,
                        str(r.edelta),
                        str(r.truncated),
                        _FLOAT_FMT % r.rho_hat,
                    ]
                )
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path):
        meta, rows = {}, []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, val = line[1:].partition("=")
                    meta[key.strip()] = val.strip()
                    continue
                if line.startswith(_RISK_COLUMNS[0]):
                    continue
                parts = line.split(",")
                if len(parts) != len(_RISK_COLUMNS):
                    raise ConfigError(f"malformed risk CSV row: {line!r}")
                rows.append(
                    RiskRow(
                        scenario_hash=parts[0],
                        base_seed=int(parts[1]),
                        n=int(parts[2]),
                        replication=int(parts[3]),
                        risk=float(parts[4]),
                        oracle_risk=float(parts[5]),
                        edelta=int(parts[6]),
                        truncated=int(parts[7]),
                        rho_hat=float(parts[8]),
                    )
                )
        if "alpha1" not in meta:
            raise ConfigError("risk CSV is missing its '# alpha1 = ...' header")
        return cls(meta=meta, rows=rows, summary=_summarize(rows))


def _summarize(rows):
    by_n = {}
    for r in rows:
        by_n.setdefault(r.n, []).append(r)
    out = []
    for n in sorted(by_n):
        group = sorted(by_n[n], key=lambda r: r.replication)
        risks = np.array([r.risk for r in group])
        oracle = np.array([r.oracle_risk for r in group])
        se = float(risks.std(ddof=1) / math.sqrt(len(group))) if len(group) > 1 else 0.0
        out.append(
            RiskSummary(
                n=n,
                replications=len(group),
                mean_risk=float(risks.mean()),
                std_error=se,
                oracle_mean_risk=float(oracle.mean()),
                edelta_failures=sum(1 for r in group if not r.edelta),
                truncation_count=sum(r.truncated for r in group),
            )
        )
    return out


def scenario_hash(scenario):
    """Stable 8-hex identifier of the data-generating process (n excluded)."""
    law = scenario.design
    rho = ""
    if law.correlation is not None:
        rho = ",".join(_FLOAT_FMT % v for v in np.asarray(law.correlation).ravel())
    elif law.rho is not None:
        rho = _FLOAT_FMT % law.rho
    key = "|".join(
        [
            law.kind,
            str(scenario.q),
            rho,
            _FLOAT_FMT % law.density_lower_bound,
            _FLOAT_FMT % scenario.alpha1,
            _FLOAT_FMT % scenario.alpha2,
            _FLOAT_FMT % scenario.K1,
            _FLOAT_FMT % scenario.K2,
            _FLOAT_FMT % scenario.sigma,
            scenario.f1_spec,
            scenario.f2_spec,
            str(scenario.base_seed),
        ]
    )
    return hashlib.sha256(key.encode()).hexdigest()[:8]


def _risk_quadrature(beta_w1, intercept, model, f1_node_values, nodes, weights):
    est = evaluate_estimate(beta_w1, model, nodes) + intercept
    diff = est - f1_node_values
    return float(weights @ (diff * diff))


def _one_replication(task):
    scenario, config, truth, shash, f1_nodes, replication = task
    nodes, weights = risk_rule()
    dataset, _ = generate(scenario, replication)
    result = fit(config, dataset)
    risk = _risk_quadrature(
        result.beta_W1, result.intercept, config.model, f1_nodes, nodes, weights
    )
    oracle_ds = Dataset(dataset.X, dataset.Y - truth.nuisance_values(dataset.X))
    oracle = oracle_fit(config, oracle_ds)
    oracle_risk = _risk_quadrature(
        oracle.beta_W1, oracle.intercept, config.model, f1_nodes, nodes, weights
    )
    return RiskRow(
        scenario_hash=shash,
        base_seed=scenario.base_seed,
        n=scenario.n,
        replication=replication,
        risk=risk,
        oracle_risk=oracle_risk,
        edelta=int(result.edelta_holds),
        truncated=int(result.truncated),
        rho_hat=result.empirical_rho,
    )


def run_risk_experiment(
    scenario,
    n_grid,
    replications=200,
    model_rule=None,
    delta=0.5,
    workers=None,
    integration=None,
):
    """Risk of the two-stage fit and of the oracle across a grid of n.

    For each n the model dimensions come from the rule, the population Gram
    is computed once, and each replication generates data with seed
    base_seed + r, fits, and integrates (f1 - estimate)^2 by 2048-node
    Gauss-Legendre quadrature against the uniform X1 marginal. Rules that
    produce d > n/2 are rejected before anything is simulated.
    """
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ConfigError("n_grid must be strictly increasing")
    rule = model_rule if model_rule is not None else default_model_rule(scenario)
    plans = []
    for n in n_grid:
        model = build_model(scenario.q, rule(n))
        if model.d > n // 2:
            raise ConfigError(
                f"model dimension d={model.d} exceeds n/2 at n={n}; refine the rule"
            )
        plans.append((n, model))

    nodes, _ = risk_rule()
    shash = scenario_hash(scenario)
    tasks = []
    for n, model in plans:
        sc = replace(scenario, n=n)
        truth = make_truth(sc)
        config = EstimatorConfig(
            model=model,
            law=sc.design,
            delta=delta,
            k_n=truth.f1.l2_norm * n**0.25,
            integration=integration,
        )
        config.population_gram_matrix()  # fill the cache once per n
        f1_nodes = truth.f1(nodes)
        for r in range(replications):
            tasks.append((sc, config, truth, shash, f1_nodes, r))

    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_one_replication, tasks, chunksize=8))
    else:
        rows = [_one_replication(t) for t in tasks]
    rows.sort(key=lambda r: (r.n, r.replication))

    law = scenario.design
    meta = {
        "scenario_hash": shash,
        "q": scenario.q,
        "design_kind": law.kind,
        "design_rho": "" if law.rho is None else _FLOAT_FMT % law.rho,
        "density_lower_bound": _FLOAT_FMT % law.density_lower_bound,
        "alpha1": _FLOAT_FMT % scenario.alpha1,
        "alpha2": _FLOAT_FMT % scenario.alpha2,
        "k1": _FLOAT_FMT % scenario.K1,
        "k2": _FLOAT_FMT % scenario.K2,
        "sigma": _FLOAT_FMT % scenario.sigma,
        "f1_spec": scenario.f1_spec,
        "f2_spec": scenario.f2_spec,
        "base_seed": scenario.base_seed,
        "replications": replications,
        "delta": _FLOAT_FMT % delta,
        "k_n_rule": "l2_norm(f1) * n^(1/4)",
        "model_rule": rule.note if hasattr(rule, "note") else "custom",
        "n_grid": ",".join(str(n) for n in n_grid),
        "dims": ";".join(f"{n}:{m.d1}+{m.d2}" for n, m in plans),
    }
    return RiskReport(meta=meta, rows=rows, summary=_summarize(rows))


@dataclass
class RateFit:
    """Least-squares line through (log n, log mean risk)."""

    slope: float
    intercept: float
    r_squared: float
    theoretical_slope: float

    def to_text(self):
        return (
            f"slope = {self.slope:.6f}\n"
            f"intercept = {self.intercept:.6f}\n"
            f"r_squared = {self.r_squared:.6f}\n"
            f"theoretical_slope = {self.theoretical_slope:.6f}\n"
            f"gap = {self.slope - self.theoretical_slope:+.6f}\n"
        )


def fit_rate(report):
    """Slope of log mean-risk against log n, with the theory's target.

    Needs at least four grid points and strictly positive mean risks; the
    target slope is -2 alpha1 / (2 alpha1 + 1).
    """
    if len(report.summary) < 4:
        raise ConfigError("rate fitting needs at least 4 grid points")
    risks = np.array([s.mean_risk for s in report.summary])
    if np.any(risks <= 0):
        raise NumericalError("non-positive mean risk; cannot take logs")
    x = np.log(np.array([s.n for s in report.summary], dtype=float))
    y = np.log(risks)
    a = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    fitted = a @ coef
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    alpha1 = report.alpha1
    return RateFit(
        slope=float(coef[0]),
        intercept=float(coef[1]),
        r_squared=r2,
        theoretical_slope=-2.0 * alpha1 / (2.0 * alpha1 + 1.0),
    )


# ---------------------------------------------------------------------------
# E_delta frequency study


@dataclass
class EdeltaRow:
    n: int
    d: int
    replications: int
    failures: int
    frequency: float
    bound_shape: float  # n delta^2 / (phi^2 d); the universal constant is unknown
    mean_deviation: float


@dataclass
class EdeltaStudy:
    meta: dict
    rows: list

    def to_csv(self, path):
        lines = [f"# {key} = {self.meta[key]}" for key in sorted(self.meta)]
        lines.append("n,d,replications,failures,frequency,bound_shape,mean_deviation")
        for r in self.rows:
            lines.append(
                f"{r.n},{r.d},{r.replications},{r.failures},"
                + (_FLOAT_FMT % r.frequency)
                + ","
                + (_FLOAT_FMT % r.bound_shape)
                + ","
                + (_FLOAT_FMT % r.mean_deviation)
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    def to_text(self):
        lines = [f"{k} = {v}" for k, v in sorted(self.meta.items())]
        lines.append("")
        lines.append(f"{'n':>8} {'d':>4} {'freq':>8} {'bound_shape':>12} {'mean_dev':>10}")
        for r in self.rows:
            lines.append(
                f"{r.n:>8} {r.d:>4} {r.frequency:>8.4f} {r.bound_shape:>12.4f} "
                f"{r.mean_deviation:>10.4f}"
            )
        return "\n".join(lines) + "\n"


def _system_design(system, X):
    if isinstance(system, SumspaceModel):
        return design_matrix(system, Dataset(X, np.zeros(X.shape[0])))
    z = system.values(X)
    if system.centering == "empirical":
        z = z - z.mean(axis=0)
    return z


def run_edelta_study(model_rule, law, n_grid, delta=0.5, replications=500, base_seed=0,
                     integration=None):
    """Empirical frequency of the Gram deviation exceeding delta, per n.

    `model_rule` maps n to either a full sumspace model or a single block
    system. Each row reports the failure frequency alongside the shape
    n delta^2 / (phi^2 d) that the exponential concentration bound predicts;
    no claim is made about the unknown universal constant in the exponent.
    Replication r of grid point n draws its design from seed (base_seed, n, r).
    """
    law.validate()
    rows = []
    for n in n_grid:
        system = model_rule(int(n))
        if isinstance(system, ModelDims):
            system = build_model(law.q, system)
        g = (
            population_gram(system, law, integration)
            if isinstance(system, SumspaceModel)
            else single_system_gram(system, law, integration)
        )
        d = g.shape[0]
        phi = system_phi(system, law.density_lower_bound)
        failures = 0
        devs = []
        for r in range(replications):
            x = sample_design(law, int(n), law.q, seed=(base_seed, int(n), r))
            z = _system_design(system, x)
            holds, dev = check_edelta(z, g, delta)
            failures += int(not holds)
            devs.append(dev)
        rows.append(
            EdeltaRow(
                n=int(n),
                d=d,
                replications=replications,
                failures=failures,
                frequency=failures / replications,
                bound_shape=n * delta**2 / (phi**2 * d),
                mean_deviation=float(np.mean(devs)),
            )
        )
    meta = {
        "delta": _FLOAT_FMT % delta,
        "design_kind": law.kind,
        "q": law.q,
        "replications": replications,
        "base_seed": base_seed,
        "seeding": "design seed = (base_seed, n, replication)",
    }
    return EdeltaStudy(meta=meta, rows=rows)


# ---------------------------------------------------------------------------
# oracle comparison


@dataclass
class OracleComparison:
    n: int
    replications: int
    mean_risk: float
    oracle_mean_risk: float
    ratio: float
    ratio_ci_low: float
    ratio_ci_high: float

    def to_text(self):
        return (
            f"n = {self.n}\n"
            f"replications = {self.replications}\n"
            f"mean_risk = {self.mean_risk:.6e}\n"
            f"oracle_mean_risk = {self.oracle_mean_risk:.6e}\n"
            f"ratio = {self.ratio:.4f}\n"
            f"ratio_ci = [{self.ratio_ci_low:.4f}, {self.ratio_ci_high:.4f}]\n"
        )


def run_oracle_comparison(scenario, n, replications=200, model_rule=None, workers=None):
    """Mean-risk ratio of the two-stage fit against the known-nuisance oracle.

    The confidence interval comes from the replication-level ratios (each
    replication fits both estimators on the same data).
    """
    report = run_risk_experiment(
        scenario, [n], replications=replications, model_rule=model_rule, workers=workers
    )
    s = report.summary[0]
    ratios = np.array(
        [r.risk / r.oracle_risk for r in report.rows if r.oracle_risk > 0]
    )
    half = 1.96 * ratios.std(ddof=1) / math.sqrt(ratios.size) if ratios.size > 1 else 0.0
    center = float(ratios.mean())
    return OracleComparison(
        n=n,
        replications=replications,
        mean_risk=s.mean_risk,
        oracle_mean_risk=s.oracle_mean_risk,
        ratio=s.mean_risk / s.oracle_mean_risk,
        ratio_ci_low=center - half,
        ratio_ci_high=center + half,
    )


# ---------------------------------------------------------------------------
# configuration files


_SECTION_KEYS = {
    "design": {"kind", "q", "rho", "density_lower_bound"},
    "scenario": {"n", "alpha1", "alpha2", "k1", "k2", "sigma", "f1", "f2", "base_seed"},
    "model": {"kind", "m1", "m2", "w1_m", "degree"},
    "estimator": {"delta", "k_n", "centering", "pseudoinverse_tolerance"},
    "integration": {"nodes", "mc_samples", "seed"},
    "experiment": {"n_grid", "replications", "workers"},
    "study": {"frequencies", "include_constant", "n_grid", "delta", "replications",
              "base_seed"},
}


@dataclass
class HarnessConfig:
    """Everything a config file can describe; sections are optional until used."""

    law: DesignLaw | None = None
    scenario: ScenarioConfig | None = None
    model: SumspaceModel | None = None
    estimator: dict | None = None
    integration: IntegrationSpec | None = None
    experiment: dict | None = None
    study: dict | None = None
    sections: dict | None = None  # raw key/value echo for reproducibility

    def require(self, name):
        value = getattr(self, name)
        if value is None:
            raise ConfigError(f"config file is missing the [{name}] section")
        return value


def _parse_int_list(text):
    try:
        return [int(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def _typed(section, key, value, kind):
    try:
        if kind is bool:
            low = value.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        return kind(value)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {value!r}") from exc


def _build_law(sec):
    kind = sec.get("kind", "independent_uniform")
    q = _typed("design", "q", sec.get("q", "2"), int)
    c = _typed("design", "density_lower_bound", sec.get("density_lower_bound", "1.0"), float)
    if kind == "independent_uniform":
        return independent_uniform(q, c)
    if kind == "gaussian_copula":
        rho = _typed("design", "rho", sec.get("rho", "0.0"), float)
        return equicorrelated_copula(q, rho, c)
    if kind == "bivariate_gaussian":
        rho = _typed("design", "rho", sec.get("rho", "0.0"), float)
        return bivariate_gaussian(rho)
    raise ConfigError(f"[design] kind: unknown design law {kind!r}")


def _build_model(sec, q):
    kind = sec.get("kind", "trigonometric")
    if kind != "trigonometric":
        raise ConfigError(
            f"[model] kind: only trigonometric models are configurable from files "
            f"(got {kind!r}); build others through the library API"
        )
    m1 = _typed("model", "m1", sec.get("m1", "2"), int)
    m2 = _typed("model", "m2", sec.get("m2", "2"), int)
    m_w = _typed("model", "w1_m", sec.get("w1_m", str(m1)), int)
    return build_model(q, ModelDims(m1=m1, m2=m2, m_w=m_w))


def parse_config(path):
    """Read a structured-text (INI) config; unknown sections or keys fail fast."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc

    sections = {}
    for name in parser.sections():
        if name not in _SECTION_KEYS:
            raise ConfigError(f"unknown config section [{name}]")
        sections[name] = dict(parser.items(name))
        for key in sections[name]:
            if key not in _SECTION_KEYS[name]:
                raise ConfigError(f"unknown key {key!r} in section [{name}]")

    cfg = HarnessConfig(sections=sections)
    if "design" in sections:
        cfg.law = _build_law(sections["design"])
    if "integration" in sections:
        sec = sections["integration"]
        cfg.integration = IntegrationSpec(
            nodes=_typed("integration", "nodes", sec.get("nodes", "256"), int),
            mc_samples=_typed("integration", "mc_samples", sec.get("mc_samples", "1000000"), int),
            seed=_typed("integration", "seed", sec.get("seed", "0"), int),
        )
    if "scenario" in sections:
        if cfg.law is None:
            raise ConfigError("[scenario] needs a [design] section")
        sec = sections["scenario"]
        cfg.scenario = ScenarioConfig(
            q=cfg.law.q,
            n=_typed("scenario", "n", sec.get("n", "1024"), int),
            design=cfg.law,
            alpha1=_typed("scenario", "alpha1", sec.get("alpha1", "2.0"), float),
            alpha2=_typed("scenario", "alpha2", sec.get("alpha2", "2.0"), float),
            K1=_typed("scenario", "k1", sec.get("k1", "1.0"), float),
            K2=_typed("scenario", "k2", sec.get("k2", "1.0"), float),
            sigma=_typed("scenario", "sigma", sec.get("sigma", "1.0"), float),
            f1_spec=sec.get("f1", "sobolev"),
            f2_spec=sec.get("f2", "sobolev"),
            base_seed=_typed("scenario", "base_seed", sec.get("base_seed", "0"), int),
        )
    if "model" in sections:
        if cfg.law is None:
            raise ConfigError("[model] needs a [design] section")
        cfg.model = _build_model(sections["model"], cfg.law.q)
    if "estimator" in sections:
        sec = sections["estimator"]
        k_n_raw = sec.get("k_n", "none")
        cfg.estimator = {
            "delta": _typed("estimator", "delta", sec.get("delta", "0.5"), float),
            "k_n": None if k_n_raw.lower() == "none" else _typed("estimator", "k_n", k_n_raw, float),
            "centering_mode": sec.get("centering", "population"),
            "pseudoinverse_tolerance": _typed(
                "estimator", "pseudoinverse_tolerance",
                sec.get("pseudoinverse_tolerance", "1e-10"), float,
            ),
        }
    if "experiment" in sections:
        sec = sections["experiment"]
        cfg.experiment = {
            "n_grid": _parse_int_list(sec.get("n_grid", "256,512,1024,2048")),
            "replications": _typed("experiment", "replications", sec.get("replications", "200"), int),
            "workers": _typed("experiment", "workers", sec.get("workers", "1"), int),
        }
    if "study" in sections:
        sec = sections["study"]
        cfg.study = {
            "frequencies": _typed("study", "frequencies", sec.get("frequencies", "4"), int),
            "include_constant": _typed("study", "include_constant",
                                       sec.get("include_constant", "false"), bool),
            "n_grid": _parse_int_list(sec.get("n_grid", "128,256,512,1024")),
            "delta": _typed("study", "delta", sec.get("delta", "0.5"), float),
            "replications": _typed("study", "replications", sec.get("replications", "500"), int),
            "base_seed": _typed("study", "base_seed", sec.get("base_seed", "0"), int),
        }
    return cfg


def render_config(cfg):
    """Serialize the raw sections back to INI text (parse -> render round-trips)."""
    parser = configparser.ConfigParser()
    for name, values in (cfg.sections or {}).items():
        parser[name] = {k: str(v) for k, v in values.items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# CLI


def _read_dataset_csv(path):
    if not os.path.exists(path):
        raise ConfigError(f"data file not found: {path}")
    with open(path) as fh:
        header = fh.readline().strip()
    names = [h.strip().lower() for h in header.split(",")]
    if len(names) < 2 or names[-1] != "y":
        raise ConfigError("data CSV must have header x1,...,xq,y")
    for j, name in enumerate(names[:-1], start=1):
        if name != f"x{j}":
            raise ConfigError(f"unexpected column {name!r}; expected x{j}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(names):
        raise ConfigError("data rows disagree with the header")
    return Dataset(X=data[:, :-1], Y=data[:, -1])


def _fit_result_text(result, config_echo):
    lines = list(config_echo)
    lines += [
        f"truncated = {result.truncated}",
        f"edelta_holds = {result.edelta_holds}",
        f"gram_deviation = {result.gram_deviation:.12g}",
        f"empirical_rho = {result.empirical_rho:.12g}",
        f"intercept = {result.intercept:.12g}",
        "beta_w1 = " + ",".join(_FLOAT_FMT % b for b in result.beta_W1),
    ]
    return "\n".join(lines) + "\n"


def _echo_sections(cfg):
    lines = []
    for name, values in sorted((cfg.sections or {}).items()):
        for key, val in sorted(values.items()):
            lines.append(f"config.{name}.{key} = {val}")
    return lines


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_fit(args):
    cfg = parse_config(args.config)
    model = cfg.require("model")
    law = cfg.require("law")
    est = cfg.estimator or {}
    config = EstimatorConfig(model=model, law=law, integration=cfg.integration, **est)
    dataset = _read_dataset_csv(args.data)
    result = fit(config, dataset)
    _emit(_fit_result_text(result, _echo_sections(cfg)), args.out)
    if args.grid_out:
        x = np.linspace(0.0, 1.0, args.grid_size)
        vals = evaluate_estimate(result.beta_W1, model, x) + result.intercept
        lines = ["x,f1_hat"] + [
            (_FLOAT_FMT % xi) + "," + (_FLOAT_FMT % vi) for xi, vi in zip(x, vals)
        ]
        with open(args.grid_out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def _cmd_geometry(args):
    cfg = parse_config(args.config)
    report = compute_geometry(cfg.require("model"), cfg.require("law"), cfg.integration)
    _emit("\n".join(_echo_sections(cfg)) + "\n" + report.to_text(), args.out)
    return 0


def _cmd_edelta(args):
    cfg = parse_config(args.config)
    study_args = cfg.require("study")
    law = cfg.require("law")
    m = study_args["frequencies"]
    block = ComponentSpace(
        "study",
        (0,),
        UnivariateBasis.trigonometric(m, include_constant=study_args["include_constant"]),
        centering="none" if study_args["include_constant"] else "population",
    )
    study = run_edelta_study(
        lambda n: block,
        law,
        study_args["n_grid"],
        delta=study_args["delta"],
        replications=study_args["replications"],
        base_seed=study_args["base_seed"],
        integration=cfg.integration,
    )
    if args.out:
        study.to_csv(args.out)
        sys.stdout.write(f"wrote {args.out}\n")
    else:
        sys.stdout.write(study.to_text())
    return 0


def _cmd_simulate_risk(args):
    cfg = parse_config(args.config)
    scenario = cfg.require("scenario")
    exp = cfg.experiment or {"n_grid": [256, 512, 1024, 2048], "replications": 200,
                             "workers": 1}
    report = run_risk_experiment(
        scenario,
        exp["n_grid"],
        replications=exp["replications"],
        workers=exp["workers"],
        integration=cfg.integration,
    )
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "risk.csv")
    report.to_csv(csv_path)
    lines = [f"wrote {csv_path}"]
    for s in report.summary:
        lines.append(
            f"n={s.n}: mean_risk={s.mean_risk:.6e} se={s.std_error:.2e} "
            f"oracle={s.oracle_mean_risk:.6e} truncated={s.truncation_count} "
            f"edelta_failures={s.edelta_failures}"
        )
    if len(report.summary) >= 4:
        rate = fit_rate(report)
        lines.append(
            f"rate: slope={rate.slope:.4f} (target {rate.theoretical_slope:.4f}) "
            f"r2={rate.r_squared:.4f}"
        )
    summary_path = os.path.join(args.out, "summary.txt")
    with open(summary_path, "w") as fh:
        fh.write("\n".join(lines[1:]) + "\n")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_rates(args):
    report = RiskReport.from_csv(args.infile)
    rate = fit_rate(report)
    _emit(rate.to_text(), args.out)
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sumspace",
        description="Two-stage series least squares: fits, geometry, and Monte Carlo studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the estimator to a CSV dataset")
    p.add_argument("data", help="CSV with header x1,...,xq,y")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--grid-out", default=None, help="CSV of (x, estimate) pairs")
    p.add_argument("--grid-size", type=int, default=512)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("geometry", help="population geometry report for a model")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_geometry)

    p = sub.add_parser("edelta", help="Gram concentration frequency study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(func=_cmd_edelta)

    p = sub.add_parser("simulate-risk", help="Monte Carlo risk experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_simulate_risk)

    p = sub.add_parser("rates", help="fit a rate line to a risk CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_rates)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3
