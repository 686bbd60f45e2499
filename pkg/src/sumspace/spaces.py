"""Model spaces V1, V2 = sum of blocks, W1, and their population geometry.

The geometry of the estimation problem is carried by the population Gram
matrix G of the assembled (centered) function system under a design law.
From G come the minimal angle rho0 between V1 and V2, the Hilbert-Schmidt
norm of the projection of W1 onto V2, the eigenvalue spectrum linking the
two, and the angle-equivalence inequalities.
"""

from dataclasses import dataclass, replace as _dc_replace

import numpy as np
from scipy.linalg import cholesky, eigh, svdvals
from scipy.special import ndtr

from .basis import PIECEWISE, TRIGONOMETRIC, HermiteBasis, TensorBasis, UnivariateBasis
from .errors import ConfigError, GramError, SingularBlockError
from .quadrature import gauss_hermite_normal, normal_window_rule, unit_rule

INDEPENDENT_UNIFORM = "independent_uniform"
GAUSSIAN_COPULA = "gaussian_copula"
BIVARIATE_GAUSSIAN = "bivariate_gaussian"

_EIG_FLOOR = 1e-12  # relative eigenvalue floor when Cholesky fails
_SINGULAR_COND = 1e14


# ---------------------------------------------------------------------------
# design laws


@dataclass
class DesignLaw:
    """A sampling law for the design vector X in [0,1]^q (or R^2).

    kinds: independent_uniform (i.i.d. uniforms), gaussian_copula (multivariate
    normal scores pushed through the normal CDF, uniform marginals), and
    bivariate_gaussian (raw correlated standard normals, for the Hermite
    geometry example). `density_lower_bound` is the user-supplied c of the
    density assumption; it is never estimated here.
    """

    kind: str
    q: int
    correlation: np.ndarray | None = None
    rho: float | None = None
    density_lower_bound: float = 1.0

    def validate(self):
        if self.kind not in (INDEPENDENT_UNIFORM, GAUSSIAN_COPULA, BIVARIATE_GAUSSIAN):
            raise ConfigError(f"unknown design law kind {self.kind!r}")
        if self.q < 1:
            raise ConfigError("design law needs q >= 1")
        if not 0.0 < self.density_lower_bound <= 1.0:
            raise ConfigError("density_lower_bound must lie in (0, 1]")
        if self.kind == GAUSSIAN_COPULA:
            r = self.correlation
            if r is None or r.shape != (self.q, self.q):
                raise ConfigError("gaussian_copula needs a q x q correlation matrix")
            if not np.allclose(r, r.T, atol=1e-12) or not np.allclose(np.diag(r), 1.0):
                raise ConfigError("correlation matrix must be symmetric with unit diagonal")
            if np.linalg.eigvalsh(r).min() <= 0:
                raise ConfigError("correlation matrix must be positive definite")
        if self.kind == BIVARIATE_GAUSSIAN:
            if self.q != 2:
                raise ConfigError("bivariate_gaussian is a q=2 law")
            if self.rho is None or not abs(self.rho) < 1:
                raise ConfigError("bivariate_gaussian needs |rho| < 1")
        return self

    def pair_correlation(self, i, j):
        if self.kind == INDEPENDENT_UNIFORM:
            return 0.0
        if self.kind == GAUSSIAN_COPULA:
            return float(self.correlation[i, j])
        return float(self.rho) if i != j else 1.0

    @property
    def marginal(self):
        return "normal" if self.kind == BIVARIATE_GAUSSIAN else "uniform"


def independent_uniform(q, density_lower_bound=1.0):
    return DesignLaw(INDEPENDENT_UNIFORM, q, density_lower_bound=density_lower_bound).validate()


def gaussian_copula(correlation, density_lower_bound=1.0):
    correlation = np.asarray(correlation, dtype=float)
    return DesignLaw(
        GAUSSIAN_COPULA,
        correlation.shape[0],
        correlation=correlation,
        density_lower_bound=density_lower_bound,
    ).validate()


def equicorrelated_copula(q, r, density_lower_bound=1.0):
    """Gaussian copula with all off-diagonal correlations equal to r."""
    corr = np.full((q, q), float(r))
    np.fill_diagonal(corr, 1.0)
    return gaussian_copula(corr, density_lower_bound)


def bivariate_gaussian(rho):
    return DesignLaw(BIVARIATE_GAUSSIAN, 2, rho=float(rho)).validate()


# ---------------------------------------------------------------------------
# component spaces and the sumspace model


@dataclass
class ComponentSpace:
    """One block of the sumspace: a basis attached to a covariate block.

    centering "population" removes the constant (the basis must already be
    constant-free) and recenters every function to population mean zero under
    the declared design law; "none" keeps the raw system, which is how exactly
    one V2 block retains the constants.
    """

    label: str
    coords: tuple
    basis: object
    centering: str = "population"

    def __post_init__(self):
        self.coords = tuple(int(c) for c in self.coords)
        if self.centering not in ("population", "empirical", "none"):
            raise ConfigError(f"unknown centering {self.centering!r}")
        if self.centering != "none" and getattr(self.basis, "include_constant", False):
            raise ConfigError(
                f"block {self.label!r}: centered blocks must use a constant-free basis"
            )
        n_coords = len(self.basis.factors) if isinstance(self.basis, TensorBasis) else 1
        if len(self.coords) != n_coords:
            raise ConfigError(f"block {self.label!r}: coords do not match basis arity")

    @property
    def dimension(self):
        return self.basis.dimension

    def values(self, X):
        """Raw (uncentered) basis columns at the rows of X (n, q)."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        block = X[:, list(self.coords)]
        if isinstance(self.basis, TensorBasis):
            return self.basis.columns(block)
        return self.basis.columns(block[:, 0])


@dataclass
class SumspaceModel:
    """The spaces V1, V2 = sum of blocks, and W1 inside V1.

    W1 = None means W1 = V1 (the second-stage projection is then the identity).
    Construction validates the constant bookkeeping: V1 is centered, exactly
    one V2 block keeps the constant, and W1 uses the same kind of basis as V1
    with a coarser parameter so its span is contained in V1's.
    """

    v1: ComponentSpace
    v2_blocks: tuple
    w1: ComponentSpace | None = None

    def __post_init__(self):
        self.v2_blocks = tuple(self.v2_blocks)
        if self.v1.centering == "none":
            raise ConfigError("V1 must be a centered block")
        n_const = sum(
            1 for b in self.v2_blocks if getattr(b.basis, "include_constant", False)
        )
        if n_const != 1:
            raise ConfigError(
                f"exactly one V2 block must retain the constant (found {n_const})"
            )
        used = list(self.v1.coords)
        for b in self.v2_blocks:
            used.extend(b.coords)
        if len(used) != len(set(used)):
            raise ConfigError("covariate blocks must be disjoint")
        if self.w1 is not None:
            self._check_w1_nesting()

    def _check_w1_nesting(self):
        w, v = self.w1.basis, self.v1.basis
        if self.w1.coords != self.v1.coords:
            raise ConfigError("W1 must live on V1's covariate block")
        if isinstance(v, UnivariateBasis) and isinstance(w, UnivariateBasis):
            if w.kind != v.kind:
                raise ConfigError("W1 must use the same basis kind as V1")
            if w.kind == TRIGONOMETRIC and w.max_frequency > v.max_frequency:
                raise ConfigError("W1 frequency cutoff exceeds V1's")
            if w.kind == PIECEWISE:
                if w.max_degree > v.max_degree or v.partition_count % w.partition_count:
                    raise ConfigError("W1 cells must refine into V1's partition")
        elif type(w) is not type(v):
            raise ConfigError("W1 must use the same basis kind as V1")

    @property
    def w1_space(self):
        return self.w1 if self.w1 is not None else self.v1

    @property
    def d1(self):
        return self.v1.dimension

    @property
    def d2(self):
        return sum(b.dimension for b in self.v2_blocks)

    @property
    def d(self):
        return self.d1 + self.d2

    @property
    def dim_w1(self):
        return self.w1_space.dimension

    @property
    def blocks(self):
        return (self.v1,) + self.v2_blocks

    def block_slices(self):
        out, start = [], 0
        for b in self.blocks:
            out.append(slice(start, start + b.dimension))
            start += b.dimension
        return out

    def with_centering(self, mode):
        """Copy of the model with every centered block switched to `mode`."""
        if mode not in ("population", "empirical"):
            raise ConfigError(f"unknown centering mode {mode!r}")

        def swap(b):
            return b if b.centering == "none" else _dc_replace(b, centering=mode)

        w1 = None if self.w1 is None else swap(self.w1)
        return SumspaceModel(swap(self.v1), tuple(swap(b) for b in self.v2_blocks), w1)

    def w1_embedding(self, tol=1e-10):
        """Matrix E with W1 functions = V1 functions @ E under the natural measure.

        Verifies span containment: the projection of each W1 basis function
        onto V1 must reproduce it, i.e. the residual norm 1 - ||E_col||^2 stays
        below `tol`.
        """
        if self.w1 is None:
            return np.eye(self.d1)
        cached = getattr(self, "_w1_embed", None)
        if cached is not None:
            return cached
        vb, wb = self.v1.basis, self.w1.basis
        if isinstance(vb, HermiteBasis):
            x, w = gauss_hermite_normal(2 * vb.max_degree + 8)
        else:
            breaks = set(vb.breakpoints()) | set(wb.breakpoints())
            min_panels = 4
            if getattr(vb, "kind", None) == TRIGONOMETRIC:
                min_panels = max(4, vb.max_frequency // 2)
            x, w = unit_rule(tuple(sorted(breaks)), 64, min_panels=min_panels)
        v_cols, w_cols = vb.columns(x), wb.columns(x)
        e = v_cols.T @ (w[:, None] * w_cols)
        resid = np.abs(1.0 - np.sum(e * e, axis=0))
        if resid.max() > tol:
            raise ConfigError(
                f"W1 span not contained in V1 (worst residual {resid.max():.2e})"
            )
        self._w1_embed = e
        return e


# ---------------------------------------------------------------------------
# quadrature pieces for the population Gram


@dataclass
class IntegrationSpec:
    """Node/sample budget for population integrals.

    `nodes` is the per-axis Gauss-Legendre budget; it is automatically raised
    for high-frequency trigonometric blocks under copula laws. Monte Carlo is
    used only for multi-coordinate tensor blocks under dependence.
    """

    nodes: int = 256
    mc_samples: int = 1_000_000
    seed: int = 0


def _block_max_frequency(space):
    b = space.basis
    if isinstance(b, UnivariateBasis) and b.kind == TRIGONOMETRIC:
        return b.max_frequency
    if isinstance(b, TensorBasis):
        return max(
            f.max_frequency for f in b.factors if f.kind == TRIGONOMETRIC
        ) if any(f.kind == TRIGONOMETRIC for f in b.factors) else 0
    return 0


def _uniform_mean(space):
    """Lebesgue means of the raw block functions."""
    b = space.basis
    if isinstance(b, TensorBasis):
        rules = [unit_rule(f.breakpoints(), 64, min_panels=4) for f in b.factors]
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        pts = np.column_stack([g.ravel() for g in grids])
        w = np.prod(np.meshgrid(*[r[1] for r in rules], indexing="ij"), axis=0).ravel()
        return b.columns(pts).T @ w
    min_panels = 4
    if b.kind == TRIGONOMETRIC:
        min_panels = max(4, b.max_frequency // 2)
    x, w = unit_rule(b.breakpoints(), 64, min_panels=min_panels)
    return b.columns(x).T @ w


def _normal_mean(space):
    x, w = gauss_hermite_normal(2 * space.basis.max_degree + 8)
    return space.basis.columns(x).T @ w


def _uniform_self_gram(space):
    b = space.basis
    if isinstance(b, TensorBasis):
        # independence across the block's own coordinates is checked by the caller
        rules = [unit_rule(f.breakpoints(), 64, min_panels=4) for f in b.factors]
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        pts = np.column_stack([g.ravel() for g in grids])
        w = np.prod(np.meshgrid(*[r[1] for r in rules], indexing="ij"), axis=0).ravel()
        cols = b.columns(pts)
        return cols.T @ (w[:, None] * cols)
    min_panels = 4
    if b.kind == TRIGONOMETRIC:
        min_panels = max(4, b.max_frequency // 2)
    x, w = unit_rule(b.breakpoints(), 64, min_panels=min_panels)
    cols = b.columns(x)
    return cols.T @ (w[:, None] * cols)


def _normal_self_gram(space):
    x, w = gauss_hermite_normal(2 * space.basis.max_degree + 8)
    cols = space.basis.columns(x)
    return cols.T @ (w[:, None] * cols)


def _pair_nodes(r, space_a, space_b, budget):
    """Nodes/weights for E[f(U) g(V)] with (U,V) a Gaussian-copula pair.

    Integration runs in Gaussian space over independent (z, w) with
    U = Phi(z), V = Phi(r z + sqrt(1-r^2) w), so the weight factorizes and the
    only difficulty is the oscillation of trigonometric blocks in z, handled
    by scaling the composite Gauss-Legendre budget with the max frequency.
    """
    kmax = max(_block_max_frequency(space_a), _block_max_frequency(space_b), 1)
    n = int(min(max(budget, 24 * kmax + 64), 4096))
    z, wz = normal_window_rule(n)
    return z, wz, n


def _copula_cross(space_a, space_b, r, budget):
    z, wz, n = _pair_nodes(r, space_a, space_b, budget)
    s = np.sqrt(1.0 - r * r)
    ua = ndtr(z)
    cols_a = space_a.basis.columns(ua)  # (N, da)
    out = np.zeros((space_a.dimension, space_b.dimension))
    # accumulate over the w axis to keep memory flat
    wn, ww = normal_window_rule(n)
    for node, weight in zip(wn, ww):
        ub = ndtr(r * z + s * node)
        out += weight * (cols_a.T @ (wz[:, None] * space_b.basis.columns(ub)))
    return out


def _gaussian_cross(space_a, space_b, r, nodes=96):
    """Cross moments of Hermite blocks under a correlated bivariate Gaussian."""
    deg = max(space_a.basis.max_degree, space_b.basis.max_degree)
    z, wz = gauss_hermite_normal(max(nodes, 2 * deg + 8))
    w2, ww = gauss_hermite_normal(max(nodes, 2 * deg + 8))
    s = np.sqrt(1.0 - r * r)
    cols_a = space_a.basis.columns(z)
    out = np.zeros((space_a.dimension, space_b.dimension))
    for wj, zwj in zip(w2, ww):
        out += zwj * (cols_a.T @ (wz[:, None] * space_b.basis.columns(r * z + s * wj)))
    return out


def _mc_cross(space_a, space_b, law, spec, info):
    rng = np.random.default_rng(spec.seed)
    lchol = np.linalg.cholesky(law.correlation)
    z = rng.standard_normal((spec.mc_samples, law.q)) @ lchol.T
    x = ndtr(z)
    ca, cb = space_a.values(x), space_b.values(x)
    prod_mean = ca.T @ cb / spec.mc_samples
    se = np.sqrt(np.maximum((ca**2).T @ (cb**2) / spec.mc_samples - prod_mean**2, 0.0))
    se /= np.sqrt(spec.mc_samples)
    info["method"] = "monte_carlo"
    info["mc_se_max"] = max(info.get("mc_se_max", 0.0), float(se.max()))
    return prod_mean


def population_shifts(model, law):
    """Per-column centering shifts (population means; zero on 'none' blocks)."""
    mean_fn = _normal_mean if law.marginal == "normal" else _uniform_mean
    parts = []
    for b in model.blocks:
        mu = mean_fn(b)
        parts.append(mu if b.centering != "none" else np.zeros_like(mu))
    return np.concatenate(parts)


def population_gram(model, law, integration=None, info=None):
    """Population Gram of the assembled, population-centered system under `law`.

    Entries are E[psi_j(X) psi_k(X)] where centered blocks have their
    population mean subtracted. Univariate blocks need only one- and
    two-dimensional integrals at any q; genuinely multivariate tensor blocks
    under a dependent copula fall back to seeded Monte Carlo, with the largest
    standard error recorded in `info`.
    """
    law.validate()
    spec = integration or IntegrationSpec()
    if info is None:
        info = {}
    info.setdefault("method", "quadrature")
    info.setdefault("nodes", spec.nodes)
    blocks = model.blocks
    for b in blocks:
        for c in b.coords:
            if not 0 <= c < law.q:
                raise ConfigError(f"block {b.label!r} uses coordinate {c}, law has q={law.q}")

    mean_fn = _normal_mean if law.marginal == "normal" else _uniform_mean
    self_fn = _normal_self_gram if law.marginal == "normal" else _uniform_self_gram
    mus = [mean_fn(b) for b in blocks]

    def dependent_within(b):
        return any(
            law.pair_correlation(i, j) != 0.0 for i in b.coords for j in b.coords if i < j
        )

    def cross(a, b, ia, ib):
        pair_corrs = [law.pair_correlation(i, j) for i in a.coords for j in b.coords]
        if all(r == 0.0 for r in pair_corrs):
            return np.outer(mus[ia], mus[ib])
        if len(a.coords) == 1 and len(b.coords) == 1:
            r = pair_corrs[0]
            if law.marginal == "normal":
                return _gaussian_cross(a, b, r, spec.nodes)
            return _copula_cross(a, b, r, spec.nodes)
        return _mc_cross(a, b, law, spec, info)

    raw = [[None] * len(blocks) for _ in blocks]
    for i, a in enumerate(blocks):
        for j, b in enumerate(blocks):
            if j < i:
                continue
            if i == j:
                if dependent_within(a):
                    raw[i][i] = _mc_cross(a, a, law, spec, info)
                else:
                    raw[i][i] = self_fn(a)
            else:
                raw[i][j] = cross(a, b, i, j)
    for i in range(len(blocks)):
        for j in range(i):
            raw[i][j] = raw[j][i].T

    shifts = [
        mus[i] if blocks[i].centering != "none" else np.zeros_like(mus[i])
        for i in range(len(blocks))
    ]
    g_blocks = [
        [
            raw[i][j]
            - np.outer(shifts[i], mus[j])
            - np.outer(mus[i], shifts[j])
            + np.outer(shifts[i], shifts[j])
            for j in range(len(blocks))
        ]
        for i in range(len(blocks))
    ]
    g = np.block(g_blocks)
    asym = np.abs(g - g.T).max()
    if asym > 1e-12:
        raise GramError(f"Gram asymmetry {asym:.2e} exceeds tolerance")
    g = 0.5 * (g + g.T)
    min_eig = float(np.linalg.eigvalsh(g).min())
    if min_eig < -1e-10:
        raise GramError(
            f"population Gram not PSD (min eigenvalue {min_eig:.2e}); "
            "law/basis configuration is inconsistent"
        )
    info["min_eigenvalue"] = min_eig
    return g


def single_system_gram(space, law, integration=None, info=None):
    """Population Gram of one block on its own (used by the E_delta study).

    Same conventions as population_gram: population centering subtracts the
    mean outer product, blocks with internal copula dependence fall back to
    Monte Carlo.
    """
    law.validate()
    spec = integration or IntegrationSpec()
    if info is None:
        info = {}
    info.setdefault("method", "quadrature")
    dependent = any(
        law.pair_correlation(i, j) != 0.0
        for i in space.coords
        for j in space.coords
        if i < j
    )
    if dependent:
        g = _mc_cross(space, space, law, spec, info)
        g = 0.5 * (g + g.T)
    elif law.marginal == "normal":
        g = _normal_self_gram(space)
    else:
        g = _uniform_self_gram(space)
    if space.centering != "none":
        mu = _normal_mean(space) if law.marginal == "normal" else _uniform_mean(space)
        g = g - np.outer(mu, mu)
    return g


# ---------------------------------------------------------------------------
# geometry from a Gram matrix


def _whitening_factor(block, name):
    """Lower-triangular L with block = L L^T, with an eigenvalue-floored fallback."""
    cond = np.linalg.cond(block)
    if cond > _SINGULAR_COND:
        raise SingularBlockError(
            f"{name} Gram block is numerically singular (condition number {cond:.2e})",
            condition_number=cond,
        )
    try:
        return cholesky(block, lower=True)
    except np.linalg.LinAlgError:
        pass
    except ValueError:
        pass
    w, u = eigh(block)
    w = np.maximum(w, _EIG_FLOOR * w.max())
    # not triangular, but only L^{-1} G12 is ever needed and solve handles it
    return u @ np.diag(np.sqrt(w)) @ u.T


def _whiten_cross(g, d1, d2, embed=None):
    """M = L1^{-1} G12 L2^{-T}, optionally with the first block mapped through W1."""
    g = np.asarray(g, dtype=float)
    if g.shape != (d1 + d2, d1 + d2):
        raise ValueError("Gram shape does not match d1 + d2")
    g11 = g[:d1, :d1]
    g12 = g[:d1, d1:]
    g22 = g[d1:, d1:]
    if embed is not None:
        g11 = embed.T @ g11 @ embed
        g12 = embed.T @ g12
    l1 = _whitening_factor(g11, "first")
    l2 = _whitening_factor(g22, "second")
    m = np.linalg.solve(l1, g12)
    m = np.linalg.solve(l2, m.T).T
    return m


def minimal_angle(g, d1, d2):
    """Cosine of the minimal angle between the V1 and V2 blocks of G.

    The largest singular value of G11^{-1/2} G12 G22^{-1/2}, clamped to [0,1]
    (quadrature noise can push it a hair above 1).
    """
    m = _whiten_cross(g, d1, d2)
    if min(m.shape) == 0:
        return 0.0
    return float(np.clip(svdvals(m)[0], 0.0, 1.0))


def _resolve_dims(model):
    if isinstance(model, SumspaceModel):
        return model.d1, model.d2, model.w1_embedding() if model.w1 is not None else None
    d1, d2 = model
    return int(d1), int(d2), None


def hs_norm(g, model):
    """Hilbert-Schmidt norm of the projection of W1 onto V2 under the Gram G.

    `model` is a SumspaceModel (whose W1 may be a strict subspace of V1) or a
    plain (d1, d2) pair, in which case W1 = V1. Equals the Frobenius norm of
    the whitened cross block restricted to W1.
    """
    d1, d2, embed = _resolve_dims(model)
    m = _whiten_cross(g, d1, d2, embed)
    return float(np.linalg.norm(m))


def eigen_spectrum(g, model):
    """Decreasing eigenvalues of Pi_W Pi_V2 Pi_W (W = W1, defaulting to V1).

    The top eigenvalue is the squared minimal angle between W and V2 and the
    sum is the squared Hilbert-Schmidt norm, which is how the two geometry
    summaries are cross-checked.
    """
    d1, d2, embed = _resolve_dims(model)
    m = _whiten_cross(g, d1, d2, embed)
    dw = m.shape[0]
    s = svdvals(m)
    vals = np.zeros(dw)
    vals[: s.size] = np.clip(s, 0.0, None) ** 2
    return np.sort(vals)[::-1]


@dataclass
class AngleEquivalenceReport:
    rho0: float
    max_violation: float
    tightness_gap: float
    trials: int


def angle_equivalence_check(g, d1, d2, trials, seed=0):
    """Verify the three angle equivalences on random pairs drawn under G.

    For unit-norm h1 in V1 and h2 in V2 (plus a random scaling of h2 for the
    sum inequalities): (i) |<h1,h2>| <= rho0, (ii) ||h1+h2||^2 >=
    (1-rho0)(||h1||^2+||h2||^2), (iii) ||h1+h2||^2 >= (1-rho0^2)||h1||^2.
    Returns the maximum violation and the tightness gap of (i) at the top
    singular pair, which attains it.
    """
    g = np.asarray(g, dtype=float)
    rho0 = minimal_angle(g, d1, d2)
    g11, g12, g22 = g[:d1, :d1], g[:d1, d1:], g[d1:, d1:]
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((trials, d1))
    b = rng.standard_normal((trials, d2))
    na = np.sqrt(np.einsum("ti,ij,tj->t", a, g11, a))
    nb = np.sqrt(np.einsum("ti,ij,tj->t", b, g22, b))
    a /= na[:, None]
    b /= nb[:, None]
    scale = rng.uniform(0.0, 3.0, size=trials)
    cross = np.einsum("ti,ij,tj->t", a, g12, b)
    viol_i = np.abs(cross) - rho0
    sum_sq = 1.0 + scale**2 + 2.0 * scale * cross
    viol_ii = (1.0 - rho0) * (1.0 + scale**2) - sum_sq
    viol_iii = (1.0 - rho0 * rho0) - sum_sq
    max_violation = float(max(viol_i.max(), viol_ii.max(), viol_iii.max(), 0.0))

    l1 = _whitening_factor(g11, "first")
    l2 = _whitening_factor(g22, "second")
    m = np.linalg.solve(l1, g12)
    m = np.linalg.solve(l2, m.T).T
    u, s, vt = np.linalg.svd(m)
    if s.size:
        a_star = np.linalg.solve(l1.T, u[:, 0])
        b_star = np.linalg.solve(l2.T, vt[0])
        attained = abs(a_star @ g12 @ b_star)
        na_s = np.sqrt(a_star @ g11 @ a_star)
        nb_s = np.sqrt(b_star @ g22 @ b_star)
        tightness_gap = float(abs(attained - rho0 * na_s * nb_s))
    else:
        tightness_gap = 0.0
    return AngleEquivalenceReport(rho0, max_violation, tightness_gap, trials)


# ---------------------------------------------------------------------------
# the geometry report


@dataclass
class GeometryReport:
    """Population geometry summary for a model under a design law."""

    rho0: float
    hs_norm_sq: float
    gram_condition: float
    dim_w1: int
    d1: int
    d2: int
    v2_stability: float
    method: str
    nodes: int
    mc_samples: int | None = None
    mc_se_max: float | None = None
    empirical_rho: float | None = None
    trace_w1_v2: float | None = None
    opnorm_v2v1v2: float | None = None

    def to_text(self):
        lines = []
        for key, val in self.__dict__.items():
            if val is None:
                continue
            lines.append(f"{key} = {val:.12g}" if isinstance(val, float) else f"{key} = {val}")
        return "\n".join(lines) + "\n"


def compute_geometry(model, law, integration=None):
    """Population Gram -> GeometryReport (rho0, HS norm, conditioning, stability)."""
    info = {}
    g = population_gram(model, law, integration, info)
    d1, d2 = model.d1, model.d2
    rho0 = minimal_angle(g, d1, d2)
    hs = hs_norm(g, model)
    if hs > rho0 * np.sqrt(model.dim_w1) + 1e-12:
        raise GramError("Hilbert-Schmidt norm exceeds the rho0^2 dim W1 bound")
    eigs = np.linalg.eigvalsh(g)
    cond = float(eigs.max() / max(eigs.min(), 1e-300))
    g22 = g[d1:, d1:]
    dnorm = 1.0 / np.sqrt(np.diag(g22))
    v2_stab = float(np.linalg.eigvalsh(dnorm[:, None] * g22 * dnorm[None, :]).min())
    return GeometryReport(
        rho0=rho0,
        hs_norm_sq=hs * hs,
        gram_condition=cond,
        dim_w1=model.dim_w1,
        d1=d1,
        d2=d2,
        v2_stability=v2_stab,
        method=info.get("method", "quadrature"),
        nodes=info.get("nodes", 0),
        mc_samples=info.get("mc_samples"),
        mc_se_max=info.get("mc_se_max"),
    )
