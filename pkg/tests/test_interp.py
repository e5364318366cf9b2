"""Orthonormal bases and condition-bounded interpolation."""

import numpy as np
import pytest
from scipy.special import roots_jacobi

from treeline.density import beta_box, uniform_box
from treeline.errors import UnsupportedDensity
from treeline.interp import KAPPA_MAX, build_basis, fit


def gauss_gram(basis, density):
    """Gram matrix of the basis under the density, by Gauss quadrature."""
    nodes_1d = []
    weights_1d = []
    order = 4 * (basis.max_degree + 1)
    for m in density.marginals:
        if m.kind == "uniform":
            x, w = np.polynomial.legendre.leggauss(order)
        else:
            x, w = roots_jacobi(order, m.b - 1.0, m.a - 1.0)
        w = w / w.sum()  # normalize to the probability measure
        nodes_1d.append(0.5 * (m.lo + m.hi) + 0.5 * (m.hi - m.lo) * x)
        weights_1d.append(w)
    grids = np.meshgrid(*nodes_1d, indexing="ij")
    z = np.column_stack([g.ravel() for g in grids])
    wgrids = np.meshgrid(*weights_1d, indexing="ij")
    w = np.ones(len(z))
    for g in wgrids:
        w = w * g.ravel()
    v = basis.evaluate(z)
    return (v * w[:, None]).T @ v


@pytest.mark.parametrize(
    "density",
    [
        uniform_box([(-1, 1)]),
        uniform_box([(0, 3)]),
        beta_box([(10, 10)], [(-1, 1)]),
        beta_box([(2, 7)], [(-1, 1)]),
        beta_box([(2, 7)], [(0.5, 2.5)]),
    ],
)
def test_basis_orthonormal_1d(density):
    basis = build_basis(density, 6)
    gram = gauss_gram(basis, density)
    assert np.abs(gram - np.eye(basis.n_terms)).max() < 1e-8


def test_basis_orthonormal_2d_mixed():
    density = beta_box([(10, 10), (2, 7)], [(-1, 1), (-1, 1)])
    basis = build_basis(density, 3)
    gram = gauss_gram(basis, density)
    assert np.abs(gram - np.eye(basis.n_terms)).max() < 1e-8


def test_degree_zero_constant():
    basis = build_basis(beta_box([(3, 5)], [(-1, 1)]), 0)
    assert basis.n_terms == 1
    vals = basis.evaluate(np.array([[0.2], [-0.7]]))
    assert np.allclose(vals, 1.0)


def test_term_count_2d_degree_2():
    basis = build_basis(uniform_box([(-1, 1)] * 2), 2)
    assert basis.n_terms == 6


def test_graded_order_prefix():
    basis = build_basis(uniform_box([(-1, 1)] * 2), 3)
    totals = basis.multi_indices.sum(axis=1)
    assert np.all(np.diff(totals) >= 0)


def test_unsupported_density():
    class OddMarginal:
        kind = "cauchy"
        lo, hi = -1.0, 1.0

    class OddDensity:
        dim = 1
        marginals = [OddMarginal()]

    with pytest.raises(UnsupportedDensity):
        build_basis(OddDensity(), 2)


def test_single_sample_constant_fit():
    density = uniform_box([(-1, 1)] * 2)
    interp = fit(np.array([[0.1, 0.2]]), np.array([7.0]), density)
    assert interp.max_degree_reached == 0
    assert abs(interp(np.array([[0.9, -0.9]])) - 7.0) < 1e-12


def test_affine_2d_reproduction():
    rng = np.random.default_rng(8)
    density = uniform_box([(-1, 1)] * 2)
    points = rng.uniform(-1, 1, (10, 2))
    values = 3.0 + points[:, 0] - 2.0 * points[:, 1]
    interp = fit(points, values, density)
    probes = rng.uniform(-1, 1, (1000, 2))
    exact = 3.0 + probes[:, 0] - 2.0 * probes[:, 1]
    assert np.abs(interp(probes) - exact).max() < 1e-9


def test_quadratic_through_three_points():
    density = uniform_box([(-1, 1)])
    interp = fit(np.array([[-1.0], [0.0], [1.0]]), np.array([1.0, 0.0, 1.0]), density)
    assert abs(interp(np.array([[0.5]])) - 0.25) < 1e-12


def test_clustered_line_degrades_gracefully():
    density = uniform_box([(-1, 1)] * 2)
    t = np.linspace(-1, 1, 20)
    points = np.column_stack((t, 0.5 * t))  # exactly collinear
    values = np.sin(t)
    interp = fit(points, values, density)
    assert interp.condition <= KAPPA_MAX
    scale = max(1.0, np.abs(values).max())
    assert np.abs(interp.coefficients).max() <= 1e6 * scale


def test_interpolation_condition_on_selected_samples():
    rng = np.random.default_rng(3)
    density = uniform_box([(-1, 1)] * 2)
    points = rng.uniform(-1, 1, (30, 2))
    values = np.cos(2 * points[:, 0]) * np.cos(2 * points[:, 1])
    interp = fit(points, values, density)
    sel = interp.selected_sample_ids
    scale = max(1.0, np.abs(values).max())
    assert np.abs(interp(points[sel]) - values[sel]).max() < 1e-8 * scale


def test_unselected_samples_not_necessarily_interpolated():
    density = uniform_box([(-1, 1)])
    # many more samples than a stable degree can use
    x = np.linspace(-1, 1, 40)[:, None]
    values = np.abs(x[:, 0])  # kink keeps polynomial degree useful but inexact
    interp = fit(x, values, density)
    assert len(interp.selected_sample_ids) < len(x)


def test_polynomial_reproduction_multi_d():
    rng = np.random.default_rng(15)
    for dim in (1, 2, 3):
        density = uniform_box([(-1, 1)] * dim)
        n = {1: 12, 2: 25, 3: 50}[dim]
        points = rng.uniform(-1, 1, (n, dim))
        # total-degree-2 polynomial
        coef_lin = rng.uniform(-1, 1, dim)
        values = 1.5 + points @ coef_lin + 0.7 * points[:, 0] ** 2
        interp = fit(points, values, density)
        probes = rng.uniform(-1, 1, (500, dim))
        exact = 1.5 + probes @ coef_lin + 0.7 * probes[:, 0] ** 2
        assert np.abs(interp(probes) - exact).max() < 1e-9


def test_condition_bound_never_exceeded():
    rng = np.random.default_rng(77)
    density = uniform_box([(-1, 1)] * 2)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        points = rng.uniform(-1, 1, (n, 2))
        values = rng.uniform(-1, 1, n)
        interp = fit(points, values, density)
        assert interp.condition <= KAPPA_MAX


def test_linearity_same_subset():
    rng = np.random.default_rng(21)
    density = uniform_box([(-1, 1)] * 2)
    points = rng.uniform(-1, 1, (15, 2))
    u1 = rng.uniform(-1, 1, 15)
    u2 = rng.uniform(-1, 1, 15)
    a, b = 2.5, -1.25
    f1, f2, f12 = (
        fit(points, u1, density),
        fit(points, u2, density),
        fit(points, a * u1 + b * u2, density),
    )
    assert np.array_equal(f1.selected_sample_ids, f12.selected_sample_ids)
    assert np.allclose(f12.coefficients, a * f1.coefficients + b * f2.coefficients, atol=1e-9)


def test_beta_density_fit():
    rng = np.random.default_rng(31)
    density = beta_box([(2, 7)], [(-1, 1)])
    x = rng.uniform(-1, 1, (12, 1))
    values = x[:, 0] ** 3 - x[:, 0]
    interp = fit(x, values, density)
    probes = rng.uniform(-1, 1, (200, 1))
    assert np.abs(interp(probes) - (probes[:, 0] ** 3 - probes[:, 0])).max() < 1e-9
