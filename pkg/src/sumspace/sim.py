"""Synthetic scenarios: dependent designs, smooth truths, Gaussian noise.

Truth functions are kept in the trigonometric scale even for Holder
scenarios (membership of a Holder ball is certified on a grid, never exactly)
so risk integrals stay computable by quadrature and coefficient algebra.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .basis import UnivariateBasis
from .errors import ConfigError
from .spaces import BIVARIATE_GAUSSIAN, GAUSSIAN_COPULA, INDEPENDENT_UNIFORM, DesignLaw
from .estimator import Dataset

K_MAX = 512  # truth coefficient cutoff; the tail beyond contributes < K^2 512^(-2a)


# ---------------------------------------------------------------------------
# trigonometric coefficient sequences


@dataclass
class TrigFunction:
    """A function on [0,1] given by coefficients in the trigonometric basis.

    `coefficients` follows the basis column order: constant, then cos/sin at
    frequency 1, cos/sin at 2, and so on. theta(k) reads the signed-index
    coefficient (positive k cosine, negative k sine).
    """

    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float).ravel()
        if self.coefficients.size % 2 == 0:
            raise ValueError("coefficient vector must have odd length (constant + pairs)")

    @property
    def max_frequency(self):
        return (self.coefficients.size - 1) // 2

    def theta(self, k):
        if k == 0:
            return float(self.coefficients[0])
        pos = 2 * abs(k) - 1 if k > 0 else 2 * abs(k)
        return float(self.coefficients[pos])

    def __call__(self, x):
        basis = UnivariateBasis.trigonometric(self.max_frequency, include_constant=True)
        return basis.columns(np.asarray(x, dtype=float)) @ self.coefficients

    def sobolev_sum(self, alpha):
        """sum over k of |k|^(2 alpha) theta_k^2 (the constant never counts)."""
        m = self.max_frequency
        if m == 0:
            return 0.0
        k = np.arange(1, m + 1, dtype=float)
        cos_part = self.coefficients[1::2]
        sin_part = self.coefficients[2::2]
        return float(np.sum(k ** (2 * alpha) * (cos_part**2 + sin_part**2)))

    @property
    def l2_norm(self):
        return float(np.linalg.norm(self.coefficients))

    def derivative(self):
        """Coefficients of f': cos_k -> -2 pi k sin_k and sin_k -> 2 pi k cos_k."""
        m = self.max_frequency
        out = np.zeros_like(self.coefficients)
        k = np.arange(1, m + 1, dtype=float)
        out[1::2] = 2.0 * np.pi * k * self.coefficients[2::2]
        out[2::2] = -2.0 * np.pi * k * self.coefficients[1::2]
        return TrigFunction(out)


def make_sobolev_function(alpha, K, decay_margin=0.01, sign_seed=0, k_max=K_MAX):
    """Random-sign polynomially decaying coefficients on the Sobolev sphere.

    theta_k = s_k A |k|^(-(alpha + 1/2 + decay_margin)) for 1 <= |k| <= k_max
    with A normalized so the smoothness sum equals K^2 exactly; theta_0 = 0.
    """
    if alpha <= 0 or K <= 0 or decay_margin <= 0:
        raise ConfigError("alpha, K, decay_margin must all be positive")
    rng = np.random.default_rng(sign_seed)
    k = np.arange(1, k_max + 1, dtype=float)
    profile = k ** (-(alpha + 0.5 + decay_margin))
    constraint = 2.0 * np.sum(k ** (2 * alpha) * profile**2)
    amp = K / math.sqrt(constraint)
    coeffs = np.zeros(2 * k_max + 1)
    signs = rng.choice([-1.0, 1.0], size=(k_max, 2))
    coeffs[1::2] = signs[:, 0] * amp * profile
    coeffs[2::2] = signs[:, 1] * amp * profile
    return TrigFunction(coeffs)


def spike_function(k, K, alpha=0.0, k_max=K_MAX):
    """All mass on one signed frequency: theta_k = K |k|^(-alpha), rest zero.

    With alpha > 0 the spike sits exactly on the radius-K smoothness sphere
    of that order; alpha = 0 puts raw mass K on the frequency.
    """
    if k == 0:
        raise ConfigError("spike frequency must be nonzero (truths are centered)")
    coeffs = np.zeros(2 * k_max + 1)
    pos = 2 * abs(k) - 1 if k > 0 else 2 * abs(k)
    coeffs[pos] = K * abs(k) ** (-alpha)
    return TrigFunction(coeffs)


def holder_seminorm(fn, alpha, grid_size=512):
    """Grid estimate of the Holder seminorm of order alpha.

    Differentiates down to l = ceil(alpha) - 1 and takes the max difference
    quotient |g(x) - g(y)| / |x - y|^(alpha - l) over all grid pairs. A lower
    bound on the true seminorm, reported as the certificate.
    """
    if alpha <= 0:
        raise ConfigError("alpha must be positive")
    level = math.ceil(alpha) - 1
    g = fn
    for _ in range(level):
        g = g.derivative()
    x = np.linspace(0.0, 1.0, grid_size)
    vals = g(x)
    diff = np.abs(vals[:, None] - vals[None, :])
    dist = np.abs(x[:, None] - x[None, :]) ** (alpha - level)
    mask = ~np.eye(grid_size, dtype=bool)
    return float(np.max(diff[mask] / dist[mask]))


@dataclass
class HolderFunction(TrigFunction):
    alpha: float = 1.0
    seminorm_certificate: float = 0.0


def make_holder_function(alpha, K, seed=0, decay_margin=0.01, k_max=K_MAX):
    """Trigonometric surrogate of a Holder ball member, certified on a grid.

    Coefficients decay one power faster than the Sobolev recipe and the whole
    function is rescaled so the grid-estimated seminorm equals K.
    """
    if alpha <= 0 or K <= 0:
        raise ConfigError("alpha and K must be positive")
    rng = np.random.default_rng(seed)
    k = np.arange(1, k_max + 1, dtype=float)
    profile = k ** (-(alpha + 1.0 + decay_margin))
    coeffs = np.zeros(2 * k_max + 1)
    signs = rng.choice([-1.0, 1.0], size=(k_max, 2))
    coeffs[1::2] = signs[:, 0] * profile
    coeffs[2::2] = signs[:, 1] * profile
    raw = TrigFunction(coeffs)
    s = holder_seminorm(raw, alpha)
    scale = K / s if s > 0 else 0.0
    out = HolderFunction(coeffs * scale, alpha=alpha, seminorm_certificate=0.0)
    out.seminorm_certificate = holder_seminorm(out, alpha)
    return out


# ---------------------------------------------------------------------------
# designs


def _design_from_rng(law, n, rng):
    if law.kind == INDEPENDENT_UNIFORM:
        return rng.random((n, law.q))
    if law.kind == GAUSSIAN_COPULA:
        chol = np.linalg.cholesky(law.correlation)
        z = rng.standard_normal((n, law.q)) @ chol.T
        return ndtr(z)
    if law.kind == BIVARIATE_GAUSSIAN:
        r = law.rho
        z = rng.standard_normal((n, 2))
        return np.column_stack([z[:, 0], r * z[:, 0] + math.sqrt(1 - r * r) * z[:, 1]])
    raise ConfigError(f"unknown design law kind {law.kind!r}")


def sample_design(law, n, q, seed):
    """Draw n design rows under the law; deterministic given the seed."""
    law.validate()
    if q != law.q:
        raise ConfigError(f"law has q={law.q}, asked for q={q}")
    return _design_from_rng(law, n, np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# scenarios


@dataclass
class ScenarioConfig:
    """A complete recipe for one synthetic data-generating process.

    f1_spec / f2_spec name the truth recipe: "sobolev" (random signs on the
    smoothness sphere), "holder" (certified surrogate), "spike:k" (single
    frequency), or "zero". Truth coefficients depend on base_seed but not on
    the replication index, so every replication sees the same functions.
    """

    q: int
    n: int
    design: DesignLaw
    alpha1: float = 2.0
    alpha2: float = 2.0
    K1: float = 1.0
    K2: float = 1.0
    sigma: float = 1.0
    f1_spec: str = "sobolev"
    f2_spec: str = "sobolev"
    base_seed: int = 0

    def __post_init__(self):
        if self.q < 2:
            raise ConfigError("scenarios need q >= 2 (one target, >= 1 nuisance)")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.design.q != self.q:
            raise ConfigError("design law q does not match scenario q")
        for a, k_r, name in ((self.alpha1, self.K1, "1"), (self.alpha2, self.K2, "2")):
            if a <= 0 or k_r <= 0:
                raise ConfigError(f"alpha{name} and K{name} must be positive")


@dataclass
class TruthFunctions:
    """The target f1 and the q-1 additive nuisance components."""

    f1: TrigFunction
    f2_components: tuple
    alpha1: float = 2.0
    alpha2: float = 2.0
    K1: float = 1.0
    K2: float = 1.0

    def __post_init__(self):
        self.f2_components = tuple(self.f2_components)

    def f1_values(self, X):
        return self.f1(np.asarray(X)[:, 0])

    def nuisance_values(self, X):
        X = np.asarray(X)
        out = np.zeros(X.shape[0])
        for j, f in enumerate(self.f2_components, start=1):
            out += f(X[:, j])
        return out

    def regression_values(self, X):
        return self.f1_values(X) + self.nuisance_values(X)


def _truth_from_spec(spec, alpha, radius, seed):
    if spec == "zero":
        return TrigFunction(np.zeros(2 * K_MAX + 1))
    if spec == "sobolev":
        return make_sobolev_function(alpha, radius, sign_seed=seed)
    if spec == "holder":
        return make_holder_function(alpha, radius, seed=seed)
    if spec.startswith("spike:"):
        return spike_function(int(spec.split(":", 1)[1]), radius, alpha=alpha)
    raise ConfigError(f"unknown truth spec {spec!r}")


def make_truth(config):
    """Deterministic truth functions for a scenario (replication-independent)."""
    f1 = _truth_from_spec(config.f1_spec, config.alpha1, config.K1,
                          seed=(config.base_seed, 101))
    f2 = tuple(
        _truth_from_spec(config.f2_spec, config.alpha2, config.K2,
                         seed=(config.base_seed, 201 + j))
        for j in range(config.q - 1)
    )
    truth = TruthFunctions(f1, f2, config.alpha1, config.alpha2, config.K1, config.K2)
    _check_truth(truth, config)
    return truth


def _check_truth(truth, config):
    checks = [(truth.f1, config.alpha1, config.K1, config.f1_spec)]
    checks += [(f, config.alpha2, config.K2, config.f2_spec) for f in truth.f2_components]
    for fn, alpha, radius, spec in checks:
        if spec in ("sobolev", "zero") or spec.startswith("spike:"):
            if fn.sobolev_sum(alpha) > radius**2 + 1e-12:
                raise ConfigError("truth violates its smoothness ball")
        if abs(fn.theta(0)) > 1e-14:
            raise ConfigError("truth functions must be mean-centered")


def generate(config, replication=0):
    """One dataset: Y = f1(X_1) + sum_j f2j(X_j) + sigma * noise.

    Replication r draws from a fresh stream seeded base_seed + r (design
    first, then noise), so runs are reproducible and order-independent.
    """
    truth = make_truth(config)
    rng = np.random.default_rng(config.base_seed + replication)
    x = _design_from_rng(config.design, config.n, rng)
    y = truth.regression_values(x)
    if config.sigma > 0:
        y = y + config.sigma * rng.standard_normal(config.n)
    return Dataset(X=x, Y=y), truth
