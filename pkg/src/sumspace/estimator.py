"""Two-stage series least-squares estimation of the target component.

The pipeline: build the design matrix for the sumspace model, solve the joint
least-squares problem, slice off the first-block coefficients, re-project
them onto W1 (a no-op when W1 = V1), and finally zero the estimate whenever
its sup norm exceeds the truncation level k_n. The event that the empirical
Gram stays delta-close to the population Gram (which makes the decomposition
unique) is checked explicitly and reported, never assumed.
"""

from dataclasses import dataclass, field

import numpy as np

from .backfit import empirical_rho
from .errors import ConfigError, RankDeficiencyError, SingularBlockError
from .spaces import IntegrationSpec, population_gram

_SUP_GRID = 10_001
_HERMITE_SPAN = 5.0  # grid half-width for bases on the real line


@dataclass
class Dataset:
    """Observed sample: design X (n rows, q columns) and response Y."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.Y = np.asarray(self.Y, dtype=float).ravel()
        if self.X.shape[0] != self.Y.shape[0]:
            raise ValueError("X and Y disagree on the sample size")
        if not (np.isfinite(self.X).all() and np.isfinite(self.Y).all()):
            raise ValueError("dataset contains non-finite values")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def q(self):
        return self.X.shape[1]


@dataclass
class EstimatorConfig:
    """Everything the fit needs besides the data.

    k_n = None disables truncation (the sensible default on real data; for
    simulations a level growing like n^(1/4) keeps truncation asymptotically
    inactive). The design law is carried so the population Gram backing the
    E_delta diagnostic can be computed; it is cached across fits.
    """

    model: object
    law: object
    delta: float = 0.5
    k_n: float | None = None
    centering_mode: str = "population"
    pseudoinverse_tolerance: float = 1e-10
    integration: IntegrationSpec | None = None
    _gram: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if self.k_n is not None and not self.k_n > 0:
            raise ConfigError("k_n must be positive (or None for no truncation)")
        if self.centering_mode not in ("population", "empirical"):
            raise ConfigError(f"unknown centering_mode {self.centering_mode!r}")

    def population_gram_matrix(self):
        if self._gram is None:
            self._gram = population_gram(self.model, self.law, self.integration)
        return self._gram


@dataclass
class FitResult:
    """Output of one fit: coefficients plus the uniqueness diagnostics.

    `intercept` is the additive constant baked into the first component by
    empirical centering (zero under population centering); the estimate as a
    function is evaluate_estimate(beta_W1, ...) + intercept. truncated=True
    means both were zeroed.
    """

    beta_V1: np.ndarray
    beta_V2: np.ndarray
    beta_W1: np.ndarray
    truncated: bool
    edelta_holds: bool
    gram_deviation: float
    empirical_rho: float
    intercept: float = 0.0


def design_matrix(model, dataset):
    """Stacked design: V1 block columns first, then V2 blocks in order.

    Blocks marked for empirical centering have their column sample means
    subtracted; population-centered blocks evaluate as-is because every
    constant-free basis here is already mean-zero under the supported
    marginal laws (uniform and standard normal).
    """
    cols = []
    for b in model.blocks:
        z = b.values(dataset.X)
        if b.centering == "empirical":
            z = z - z.mean(axis=0)
        cols.append(z)
    return np.hstack(cols)


def fit_sumspace(Z, Y, tolerance=1e-10):
    """Least squares of Y on the columns of Z via SVD pseudoinverse.

    Rank-deficient designs yield the minimum-norm solution rather than an
    error; uniqueness of the decomposition is a property of the E_delta
    event, not of this solve.
    """
    Z = np.asarray(Z, dtype=float)
    Y = np.asarray(Y, dtype=float).ravel()
    beta, *_ = np.linalg.lstsq(Z, Y, rcond=tolerance)
    return beta


def _w1_design(model, dataset):
    """(centered W1 columns, raw column sample means) at the dataset's points."""
    w1 = model.w1_space
    z = w1.values(dataset.X)
    means = z.mean(axis=0)
    if w1.centering == "empirical":
        return z - means, means
    return z, means


def second_stage(beta_V1, model, dataset):
    """Regress the fitted first component onto W1's design columns.

    With W1 = V1 the projection is the identity and the coefficients pass
    through unchanged; the estimate is then exactly the first block of the
    joint fit.
    """
    beta_V1 = np.asarray(beta_V1, dtype=float)
    if model.w1 is None:
        return beta_V1.copy()
    z1 = model.v1.values(dataset.X)
    if model.v1.centering == "empirical":
        z1 = z1 - z1.mean(axis=0)
    u = z1 @ beta_V1
    zw, _ = _w1_design(model, dataset)
    beta, *_ = np.linalg.lstsq(zw, u, rcond=1e-12)
    return beta


def _sup_grid(basis):
    from .basis import HermiteBasis

    if isinstance(basis, HermiteBasis):
        return np.linspace(-_HERMITE_SPAN, _HERMITE_SPAN, _SUP_GRID)
    return np.linspace(0.0, 1.0, _SUP_GRID)


def truncate(beta_W1, model, k_n, offset=0.0):
    """Zero the estimate when its grid sup norm exceeds k_n.

    Returns (coefficients, truncated flag); k_n = None never truncates. The
    sup norm is estimated on a fine grid; the analytic bound through the
    basis sup-norm constant would truncate far too aggressively.
    """
    beta_W1 = np.asarray(beta_W1, dtype=float)
    if k_n is None:
        return beta_W1, False
    w1 = model.w1_space
    grid = _sup_grid(w1.basis)
    values = w1.basis.columns(grid) @ beta_W1 + offset
    if np.abs(values).max() > k_n:
        return np.zeros_like(beta_W1), True
    return beta_W1, False


def _inverse_sqrt(g):
    vals, vecs = np.linalg.eigh(g)
    top = vals.max()
    if top <= 0:
        raise SingularBlockError("population Gram has no positive eigenvalue",
                                 condition_number=np.inf)
    cond = top / max(vals.min(), 1e-300)
    if cond > 1e14:
        raise SingularBlockError(
            f"population Gram is numerically singular (condition {cond:.2e})",
            condition_number=cond,
        )
    return vecs @ ((1.0 / np.sqrt(vals)) * vecs).T


def check_edelta(Z, G_population, delta):
    """Does the empirical Gram stay delta-close to the population Gram?

    Whitens the design by G^(-1/2) and measures the operator norm of
    B_n - I, where B_n is the empirical Gram of the whitened columns. The
    event holds exactly when all empirical norms on the span match their
    population counterparts within a factor 1 +- delta. With more columns
    than rows B_n is singular, the deviation is at least 1, and the event
    fails for every delta < 1.
    """
    Z = np.asarray(Z, dtype=float)
    n = Z.shape[0]
    a = _inverse_sqrt(np.asarray(G_population, dtype=float))
    za = Z @ a
    b = za.T @ za / n
    dev = float(np.abs(np.linalg.eigvalsh(b - np.eye(b.shape[0]))).max())
    return dev <= delta, dev


def _effective_model(config):
    if config.centering_mode == "empirical":
        return config.model.with_centering("empirical")
    return config.model


def fit(config, dataset):
    """Run the full two-stage pipeline on a dataset.

    design matrix -> joint least squares -> coefficient slices -> second
    stage onto W1 -> sup-norm truncation, with the E_delta deviation and the
    empirical angle between the blocks recorded along the way. Empirical
    centering subtracts sample means in the design, which shifts the fitted
    first component by a constant; that constant lands in `intercept`.
    """
    model = _effective_model(config)
    if dataset.q < max(max(b.coords) for b in model.blocks) + 1:
        raise ConfigError("dataset has fewer covariates than the model uses")
    z = design_matrix(model, dataset)
    beta = fit_sumspace(z, dataset.Y, config.pseudoinverse_tolerance)
    d1 = model.d1
    beta_v1, beta_v2 = beta[:d1], beta[d1:]

    g = config.population_gram_matrix()
    if config.centering_mode == "empirical":
        # population second moments of the sample-centered system differ
        # from the population-centered ones by the outer square of the shift
        shift = np.zeros(model.d)
        for b, sl in zip(model.blocks, model.block_slices()):
            if b.centering == "empirical":
                shift[sl] = b.values(dataset.X).mean(axis=0)
        g = g + np.outer(shift, shift)
    holds, dev = check_edelta(z, g, config.delta)

    try:
        rho = empirical_rho(z[:, :d1], z[:, d1:])
    except RankDeficiencyError:
        rho = 1.0

    beta_w1 = second_stage(beta_v1, model, dataset)
    intercept = 0.0
    if config.centering_mode == "empirical":
        _, means = _w1_design(model, dataset)
        intercept = float(-(means @ beta_w1))
    beta_w1, truncated = truncate(beta_w1, model, config.k_n, intercept)
    if truncated:
        intercept = 0.0
    return FitResult(
        beta_V1=beta_v1,
        beta_V2=beta_v2,
        beta_W1=beta_w1,
        truncated=truncated,
        edelta_holds=holds,
        gram_deviation=dev,
        empirical_rho=rho,
        intercept=intercept,
    )


def oracle_fit(config, dataset):
    """Fit with the nuisance already removed: regress Y - f2(X2) onto W1 alone.

    The dataset's Y must carry the de-nuisanced responses. This is the
    benchmark the two-stage estimator is compared against; same truncation
    rule, no V2 block, so the E_delta diagnostic concerns the W1 Gram only.
    """
    model = _effective_model(config)
    zw, means = _w1_design(model, dataset)
    beta_w1 = fit_sumspace(zw, dataset.Y, config.pseudoinverse_tolerance)
    intercept = 0.0
    if config.centering_mode == "empirical":
        intercept = float(-(means @ beta_w1))

    g = config.population_gram_matrix()
    d1 = config.model.d1
    g11 = g[:d1, :d1]
    embed = config.model.w1_embedding() if config.model.w1 is not None else None
    gw = g11 if embed is None else embed.T @ g11 @ embed
    if config.centering_mode == "empirical":
        gw = gw + np.outer(means, means)
    holds, dev = check_edelta(zw, gw, config.delta)

    beta_w1, truncated = truncate(beta_w1, model, config.k_n, intercept)
    if truncated:
        intercept = 0.0
    return FitResult(
        beta_V1=np.zeros(model.d1),
        beta_V2=np.zeros(model.d2),
        beta_W1=beta_w1,
        truncated=truncated,
        edelta_holds=holds,
        gram_deviation=dev,
        empirical_rho=0.0,
        intercept=intercept,
    )


def evaluate_estimate(beta_W1, model, points):
    """Values of the W1 linear combination at the given points (exact plumbing).

    `points` are coordinates of the first covariate block itself: a 1-d array
    for a univariate W1, an (n, arity) array for a tensor one.
    """
    points = np.asarray(points, dtype=float)
    basis = model.w1_space.basis
    cols = basis.columns(points if points.ndim == 2 else points.ravel())
    return cols @ np.asarray(beta_W1, dtype=float)
