"""Orthonormal systems: closed-form values, Gram identities, sup-norm constants."""

import math

import numpy as np
import pytest

from sumspace.basis import (
    HermiteBasis,
    TensorBasis,
    UnivariateBasis,
    eval_piecewise,
    eval_trig,
    lebesgue_gram,
    sup_norm_constant,
    tensor_fourier,
)
from sumspace.quadrature import gauss_hermite_normal, unit_rule

SQRT2 = math.sqrt(2.0)


class TestEvalTrig:
    def test_constant(self):
        assert eval_trig(0, 0.37) == 1.0

    def test_cosine_zero_crossing(self):
        assert abs(eval_trig(1, 0.25)) < 1e-15

    def test_sine_peak(self):
        assert abs(eval_trig(-1, 0.25) - SQRT2) < 1e-15

    def test_matches_direct_formula(self):
        x = np.linspace(0.0, 1.0, 17)
        for k in (1, 2, 5, -1, -3):
            direct = (
                SQRT2 * np.cos(2 * np.pi * k * x)
                if k > 0
                else SQRT2 * np.sin(2 * np.pi * abs(k) * x)
            )
            got = np.array([eval_trig(k, xi) for xi in x])
            np.testing.assert_allclose(got, direct, atol=1e-14)


class TestEvalPiecewise:
    def test_global_constant(self):
        assert eval_piecewise(0, 1, 0, 0.9) == 1.0

    def test_half_cell_indicator(self):
        assert abs(eval_piecewise(0, 2, 0, 0.3) - SQRT2) < 1e-15

    def test_linear_legendre_at_one(self):
        # degree-1 member on a single cell is sqrt(3)(2x-1)
        assert abs(eval_piecewise(1, 1, 1, 1.0) - math.sqrt(3.0)) < 1e-14

    def test_last_cell_closed_at_one(self):
        # x = 1.0 belongs to the last cell, not to a phantom cell beyond it
        assert abs(eval_piecewise(0, 2, 1, 1.0) - SQRT2) < 1e-15
        assert eval_piecewise(0, 2, 0, 1.0) == 0.0

    def test_cells_left_closed_right_open(self):
        assert abs(eval_piecewise(0, 2, 1, 0.5) - SQRT2) < 1e-15
        assert eval_piecewise(0, 2, 0, 0.5) == 0.0

    def test_index_out_of_range(self):
        with pytest.raises(Exception):
            eval_piecewise(1, 2, 4, 0.3)


class TestDimensions:
    def test_trig_with_constant(self):
        assert UnivariateBasis.trigonometric(3).dimension == 7

    def test_trig_without_constant(self):
        assert UnivariateBasis.trigonometric(3, include_constant=False).dimension == 6

    def test_piecewise(self):
        assert UnivariateBasis.piecewise(2, 4).dimension == 12
        assert UnivariateBasis.piecewise(2, 4, include_constant=False).dimension == 11

    def test_hermite(self):
        assert HermiteBasis(5).dimension == 6
        assert HermiteBasis(5, include_constant=False).dimension == 5

    def test_frequency_order_interleaves_signs(self):
        assert UnivariateBasis.trigonometric(3).frequencies == (0, 1, -1, 2, -2, 3, -3)


@pytest.mark.parametrize(
    "basis",
    [
        UnivariateBasis.trigonometric(5),
        UnivariateBasis.trigonometric(4, include_constant=False),
        UnivariateBasis.piecewise(0, 4),
        UnivariateBasis.piecewise(1, 3),
        UnivariateBasis.piecewise(3, 2),
        UnivariateBasis.piecewise(2, 3, include_constant=False),
    ],
    ids=["trig5", "trig4_nc", "pw04", "pw13", "pw32", "pw23_nc"],
)
def test_lebesgue_gram_is_identity(basis):
    g = lebesgue_gram(basis)
    np.testing.assert_allclose(g, np.eye(basis.dimension), atol=1e-10)


def test_hermite_gram_under_standard_normal():
    basis = HermiteBasis(8)
    x, w = gauss_hermite_normal(64)
    cols = basis.columns(x)
    g = cols.T @ (w[:, None] * cols)
    np.testing.assert_allclose(g, np.eye(basis.dimension), atol=1e-10)


def test_tensor_evaluation_factorizes():
    f1 = UnivariateBasis.trigonometric(2)
    f2 = UnivariateBasis.piecewise(1, 2)
    index_set = tuple((i, j) for i in range(f1.dimension) for j in range(f2.dimension))
    tensor = TensorBasis(factors=(f1, f2), index_set=index_set)
    rng = np.random.default_rng(3)
    pts = rng.random((40, 2))
    cols = tensor.columns(pts)
    c1, c2 = f1.columns(pts[:, 0]), f2.columns(pts[:, 1])
    for j, idx in enumerate(tensor.index_set):
        np.testing.assert_allclose(cols[:, j], c1[:, idx[0]] * c2[:, idx[1]], atol=1e-14)


def test_tensor_fourier_dimension():
    assert tensor_fourier(2, 2).dimension == 25
    assert tensor_fourier(2, 2, include_constant=False).dimension == 24
    x, w = unit_rule((), 64, min_panels=4)
    basis = tensor_fourier(2, 1)
    pts = np.stack(np.meshgrid(x, x, indexing="ij"), axis=-1).reshape(-1, 2)
    wts = np.outer(w, w).ravel()
    cols = basis.columns(pts)
    g = cols.T @ (wts[:, None] * cols)
    np.testing.assert_allclose(g, np.eye(basis.dimension), atol=1e-10)


class TestSupNormConstant:
    def test_full_trig_is_one(self):
        assert abs(sup_norm_constant(UnivariateBasis.trigonometric(3), 1.0) - 1.0) < 1e-12

    def test_indicator_system_is_one(self):
        assert abs(sup_norm_constant(UnivariateBasis.piecewise(0, 4), 1.0) - 1.0) < 1e-12

    def test_density_floor_scales_as_inverse_sqrt(self):
        basis = UnivariateBasis.trigonometric(2)
        assert abs(sup_norm_constant(basis, 0.25) - 2.0) < 1e-12

    def test_piecewise_grid_below_analytic_bound(self):
        basis = UnivariateBasis.piecewise(1, 2)
        phi = sup_norm_constant(basis, 0.5)
        assert phi <= 2.0 + 1e-12  # sqrt((r+1)^2 m / (c d)) = sqrt(8/2)

    def test_bound_holds_on_random_functions(self):
        rng = np.random.default_rng(11)
        grid = np.linspace(0.0, 1.0, 10_001)
        for basis in (
            UnivariateBasis.trigonometric(4),
            UnivariateBasis.piecewise(2, 3),
            UnivariateBasis.piecewise(1, 4, include_constant=False),
        ):
            phi = sup_norm_constant(basis, 1.0)
            cols = basis.columns(grid)
            coef = rng.standard_normal((basis.dimension, 1000))
            sup = np.abs(cols @ coef).max(axis=0)
            l2 = np.linalg.norm(coef, axis=0)  # Lebesgue norm: coefficients are orthonormal
            assert np.all(sup <= phi * math.sqrt(basis.dimension) * l2 * (1 + 1e-12))

    def test_trig_bound_attained(self):
        basis = UnivariateBasis.trigonometric(4)
        x0 = 0.3178
        coef = basis.columns(np.array([x0]))[0]  # g = sum_j phi_j(x0) phi_j peaks at x0
        sup = abs(coef @ coef)
        rhs = sup_norm_constant(basis, 1.0) * math.sqrt(basis.dimension) * np.linalg.norm(coef)
        assert abs(sup - rhs) < 1e-10 * rhs


def test_constant_free_trig_gram_still_identity():
    basis = UnivariateBasis.trigonometric(3, include_constant=False)
    g = lebesgue_gram(basis)
    np.testing.assert_allclose(g, np.eye(6), atol=1e-10)


def test_hermite_recurrence_matches_probabilists_polynomials():
    # He_2(x)/sqrt(2) = (x^2-1)/sqrt(2), He_3(x)/sqrt(6) = (x^3-3x)/sqrt(6)
    x = np.linspace(-3.0, 3.0, 13)
    cols = HermiteBasis(3).columns(x)
    np.testing.assert_allclose(cols[:, 2], (x**2 - 1) / math.sqrt(2.0), atol=1e-12)
    np.testing.assert_allclose(cols[:, 3], (x**3 - 3 * x) / math.sqrt(6.0), atol=1e-12)
