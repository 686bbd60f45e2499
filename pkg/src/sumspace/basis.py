"""Orthonormal function systems on [0,1] (trigonometric, piecewise polynomial),
tensor products of them, and the normalized Hermite system on the real line.

All systems are orthonormal with respect to their natural measure: Lebesgue on
[0,1] for the univariate and tensor systems, the standard normal law for the
Hermite system. Centering against a design law is not done here; it belongs to
the space-assembly layer, so bases stay measure-agnostic.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import legvander

from .quadrature import unit_rule

TRIGONOMETRIC = "trigonometric"
PIECEWISE = "piecewise_polynomial"

_GRID_SIZE = 10_001  # sup-norm grid; degree <= 4 extrema resolved to ~1e-6 relative


def eval_trig(k, x):
    """Evaluate the trigonometric basis function with signed frequency k.

    Returns 1 for k = 0, sqrt(2) cos(2 pi k x) for k > 0 and
    sqrt(2) sin(2 pi |k| x) for k < 0.
    """
    x = np.asarray(x, dtype=float)
    if k == 0:
        return np.ones_like(x)
    if k > 0:
        return np.sqrt(2.0) * np.cos(2.0 * np.pi * k * x)
    return np.sqrt(2.0) * np.sin(2.0 * np.pi * (-k) * x)


def _piecewise_cells(m, x):
    # cells [i/m, (i+1)/m), last cell closed at 1
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("piecewise bases are defined on [0,1] only")
    cell = np.minimum((x * m).astype(int), m - 1)
    t = 2.0 * (x * m - cell) - 1.0
    return cell, t


def _piecewise_raw_columns(r, m, x):
    """All (r+1)*m per-cell shifted Legendre functions, column j = cell*(r+1)+degree."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    cell, t = _piecewise_cells(m, x)
    vals = legvander(t, r) * np.sqrt(m * (2.0 * np.arange(r + 1) + 1.0))
    cols = np.zeros((x.size, (r + 1) * m))
    rows = np.arange(x.size)[:, None]
    cols[rows, cell[:, None] * (r + 1) + np.arange(r + 1)[None, :]] = vals
    return cols


def eval_piecewise(r, m, j, x):
    """Evaluate the j-th member of the piecewise polynomial system.

    The system spans polynomials of degree <= r on each cell [i/m, (i+1)/m)
    and is L2(Lebesgue)-orthonormal: member j = i*(r+1)+l is the degree-l
    shifted Legendre polynomial on cell i, scaled by sqrt(m(2l+1)).
    """
    if not 0 <= j < (r + 1) * m:
        raise IndexError(f"basis index {j} out of range for r={r}, m={m}")
    x = np.asarray(x, dtype=float)
    out = _piecewise_raw_columns(r, m, np.atleast_1d(x))[:, j]
    return out[0] if x.ndim == 0 else out


def _helmert(m):
    """Orthonormal (m, m-1) contrast matrix with columns orthogonal to the ones vector."""
    h = np.zeros((m, m - 1))
    for k in range(1, m):
        h[:k, k - 1] = 1.0 / np.sqrt(k * (k + 1))
        h[k, k - 1] = -k / np.sqrt(k * (k + 1))
    return h


@dataclass(frozen=True)
class UnivariateBasis:
    """An orthonormal system on [0,1].

    kind "trigonometric": frequencies 0 (optional), 1, -1, ..., m, -m in that
    order; dimension 2m+1 with the constant, 2m without.

    kind "piecewise_polynomial": per-cell shifted Legendre polynomials of
    degree <= r on m equal cells; dimension (r+1)m. Without the constant the
    m cell indicators are replaced by m-1 Helmert contrasts (listed first,
    followed by the degree >= 1 functions in raw order), dimension (r+1)m - 1.
    Every retained function then has Lebesgue mean zero.
    """

    kind: str
    max_frequency: int | None = None
    max_degree: int | None = None
    partition_count: int | None = None
    include_constant: bool = True

    def __post_init__(self):
        if self.kind == TRIGONOMETRIC:
            if self.max_frequency is None or self.max_frequency < 0:
                raise ValueError("trigonometric basis needs max_frequency >= 0")
            if self.max_frequency == 0 and not self.include_constant:
                raise ValueError("empty basis: m=0 without the constant")
        elif self.kind == PIECEWISE:
            if self.max_degree is None or self.max_degree < 0:
                raise ValueError("piecewise basis needs max_degree >= 0")
            if self.partition_count is None or self.partition_count < 1:
                raise ValueError("piecewise basis needs partition_count >= 1")
            if (self.max_degree + 1) * self.partition_count - (not self.include_constant) < 1:
                raise ValueError("empty piecewise basis")
        else:
            raise ValueError(f"unknown basis kind {self.kind!r}")

    @classmethod
    def trigonometric(cls, max_frequency, include_constant=True):
        return cls(TRIGONOMETRIC, max_frequency=max_frequency, include_constant=include_constant)

    @classmethod
    def piecewise(cls, max_degree, partition_count, include_constant=True):
        return cls(
            PIECEWISE,
            max_degree=max_degree,
            partition_count=partition_count,
            include_constant=include_constant,
        )

    @property
    def dimension(self):
        if self.kind == TRIGONOMETRIC:
            return 2 * self.max_frequency + (1 if self.include_constant else 0)
        return (self.max_degree + 1) * self.partition_count - (0 if self.include_constant else 1)

    @property
    def frequencies(self):
        """Signed frequencies in column order (trigonometric only)."""
        if self.kind != TRIGONOMETRIC:
            raise AttributeError("frequencies only defined for trigonometric bases")
        freqs = [0] if self.include_constant else []
        for k in range(1, self.max_frequency + 1):
            freqs.extend([k, -k])
        return tuple(freqs)

    def breakpoints(self):
        """Interior knots, used to align quadrature panels."""
        if self.kind == PIECEWISE and self.partition_count > 1:
            m = self.partition_count
            return tuple(i / m for i in range(1, m))
        return ()

    def columns(self, x):
        """Evaluate all basis functions at the points x; returns (len(x), dimension)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.kind == TRIGONOMETRIC:
            m = self.max_frequency
            cols = np.empty((x.size, self.dimension))
            pos = 0
            if self.include_constant:
                cols[:, 0] = 1.0
                pos = 1
            if m > 0:
                angles = 2.0 * np.pi * np.outer(x, np.arange(1, m + 1))
                cols[:, pos::2] = np.sqrt(2.0) * np.cos(angles)
                cols[:, pos + 1 :: 2] = np.sqrt(2.0) * np.sin(angles)
            return cols
        raw = _piecewise_raw_columns(self.max_degree, self.partition_count, x)
        if self.include_constant:
            return raw
        return raw @ self._constant_free_transform()

    def _constant_free_transform(self):
        # orthonormal column map from the raw (r+1)m system onto the
        # Lebesgue-mean-zero subspace: Helmert contrasts of the cell
        # indicators first, then the (already mean-zero) degree >= 1 functions
        r, m = self.max_degree, self.partition_count
        t = np.zeros(((r + 1) * m, (r + 1) * m - 1))
        const_slots = np.arange(m) * (r + 1)
        if m > 1:
            t[const_slots[:, None], np.arange(m - 1)[None, :]] = _helmert(m)
        col = m - 1
        for i in range(m):
            for l in range(1, r + 1):
                t[i * (r + 1) + l, col] = 1.0
                col += 1
        return t


@dataclass(frozen=True)
class HermiteBasis:
    """Normalized probabilists' Hermite polynomials, orthonormal under N(0,1).

    Used only for the bivariate Gaussian geometry example; unlike the [0,1]
    systems its support is the whole real line, so sup-norm constants do not
    exist for it.
    """

    max_degree: int
    include_constant: bool = True

    def __post_init__(self):
        if self.max_degree < 0 or (self.max_degree == 0 and not self.include_constant):
            raise ValueError("empty Hermite basis")

    @property
    def dimension(self):
        return self.max_degree + (1 if self.include_constant else 0)

    def breakpoints(self):
        return ()

    def columns(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        deg = self.max_degree
        vals = np.empty((x.size, deg + 1))
        vals[:, 0] = 1.0
        if deg >= 1:
            vals[:, 1] = x
        for k in range(1, deg):
            # He recurrence in normalized form: h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k+1)
            vals[:, k + 1] = (x * vals[:, k] - np.sqrt(k) * vals[:, k - 1]) / np.sqrt(k + 1)
        return vals if self.include_constant else vals[:, 1:]


@dataclass(frozen=True)
class TensorBasis:
    """Tensor products of univariate systems over a retained multi-index set.

    `index_set` holds per-factor column indices; evaluation factorizes exactly
    as the product of the factor functions.
    """

    factors: tuple
    index_set: tuple

    def __post_init__(self):
        if not self.factors:
            raise ValueError("tensor basis needs at least one factor")
        dims = [f.dimension for f in self.factors]
        for idx in self.index_set:
            if len(idx) != len(self.factors):
                raise ValueError("multi-index length mismatch")
            if any(not 0 <= i < d for i, d in zip(idx, dims)):
                raise IndexError(f"multi-index {idx} out of range")

    @property
    def dimension(self):
        return len(self.index_set)

    @property
    def include_constant(self):
        consts = tuple(0 for _ in self.factors)
        return all(f.include_constant for f in self.factors) and consts in self.index_set

    def breakpoints(self):
        return tuple(f.breakpoints() for f in self.factors)

    def columns(self, x):
        """Evaluate at points x of shape (n, len(factors))."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.shape[1] != len(self.factors):
            raise ValueError("point dimension does not match factor count")
        factor_cols = [f.columns(x[:, a]) for a, f in enumerate(self.factors)]
        out = np.ones((x.shape[0], self.dimension))
        for j, idx in enumerate(self.index_set):
            for a, i in enumerate(idx):
                out[:, j] *= factor_cols[a][:, i]
        return out


def tensor_fourier(q, max_frequency, include_constant=True):
    """Tensor Fourier basis on [0,1]^q with all multi-frequencies |k|_inf <= m."""
    factor = UnivariateBasis.trigonometric(max_frequency, include_constant=True)
    dims = factor.dimension
    grids = np.meshgrid(*([np.arange(dims)] * q), indexing="ij")
    index_set = [tuple(int(g[pos]) for g in grids) for pos in np.ndindex(*[dims] * q)]
    if not include_constant:
        index_set.remove(tuple(0 for _ in range(q)))
    return TensorBasis(factors=tuple([factor] * q), index_set=tuple(index_set))


def _is_full_fourier(basis):
    if not all(f.kind == TRIGONOMETRIC and f.include_constant for f in basis.factors):
        return False
    full = np.prod([f.dimension for f in basis.factors])
    without = full - 1
    return len(basis.index_set) in (full, without)


def sup_norm_constant(basis, density_lower_bound):
    """The constant phi with ||g||_inf <= phi sqrt(d) ||g||_{L2(p)} on the span.

    Valid for any design density p >= density_lower_bound on the cube. Computed
    as sqrt(sup_x sum_j phi_j(x)^2 / (c d)): the sup is exact for trigonometric
    systems (the sum is identically d) and full tensor Fourier systems, and is
    taken on a 10 001-point grid for piecewise polynomials, where it never
    exceeds the analytic bound (r+1)^2 m.
    """
    c = float(density_lower_bound)
    if not 0.0 < c <= 1.0:
        raise ValueError("density lower bound must lie in (0, 1]")
    if isinstance(basis, HermiteBasis):
        raise ValueError("sup-norm constant undefined for bases with unbounded support")
    if isinstance(basis, TensorBasis):
        if not _is_full_fourier(basis):
            raise ValueError("sup-norm constant implemented for full tensor Fourier sets only")
        # sum of squares == product(2m_l+1) everywhere; dropping the constant removes 1
        return 1.0 / np.sqrt(c)
    if basis.kind == TRIGONOMETRIC:
        # cos^2 + sin^2 collapses the sum of squares to the dimension exactly
        return 1.0 / np.sqrt(c)
    grid = np.linspace(0.0, 1.0, _GRID_SIZE)
    sq = np.square(basis.columns(grid)).sum(axis=1)
    d = basis.dimension
    phi_grid = np.sqrt(sq.max() / (c * d))
    return float(phi_grid)


def lebesgue_gram(basis, nodes_per_panel=64):
    """Quadrature Gram under Lebesgue measure; identity to 1e-10 for any system here."""
    if isinstance(basis, HermiteBasis):
        raise ValueError("use a Gauss-Hermite rule for the Hermite system")
    if isinstance(basis, TensorBasis):
        rules = [unit_rule(f.breakpoints(), nodes_per_panel, min_panels=4) for f in basis.factors]
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        pts = np.column_stack([g.ravel() for g in grids])
        w = np.prod(np.meshgrid(*[r[1] for r in rules], indexing="ij"), axis=0).ravel()
        cols = basis.columns(pts)
        return cols.T @ (w[:, None] * cols)
    x, w = unit_rule(basis.breakpoints(), nodes_per_panel, min_panels=4)
    cols = basis.columns(x)
    return cols.T @ (w[:, None] * cols)
