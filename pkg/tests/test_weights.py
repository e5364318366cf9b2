"""Edge weight functions: hand-derived values and normalization protocol."""

import numpy as np
import pytest

from treeline.density import uniform_box
from treeline.errors import AllZeroTerms
from treeline.geometry import NeighborGraph
from treeline.weights import weight_grad, weight_pdf, weight_pdf_grad


def graph_of(points, edges):
    return NeighborGraph(np.asarray(points, dtype=float), edges)


def test_pdf_weight_1d_hand_value():
    # uniform rho = 1/2 on [-1, 1], edge of length 2: raw = (0.5 * 2)^-1 = 1
    g = graph_of([[-1.0], [1.0]], [(0, 1)])
    raw = weight_pdf(g, uniform_box([(-1, 1)]), normalized=False)
    assert abs(raw[0] - 1.0) < 1e-12


def test_pdf_weight_2d_hand_value():
    # uniform rho = 1/4 on [-1,1]^2, diagonal edge: raw = (0.25 * 2 sqrt 2)^-1
    g = graph_of([[-1.0, -1.0], [1.0, 1.0]], [(0, 1)])
    raw = weight_pdf(g, uniform_box([(-1, 1), (-1, 1)]), normalized=False)
    assert abs(raw[0] - 1.0 / (0.25 * 2.0 * np.sqrt(2.0))) < 1e-12


def test_pdf_weight_equal_lengths_equal_weights():
    g = graph_of([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [(0, 1), (2, 3)])
    w = weight_pdf(g, uniform_box([(-1, 1), (-1, 1)]))
    assert w[0] == w[1] == 1.0


def test_grad_weight_hand_value():
    g = graph_of([[0.0], [1.0]], [(0, 1)])
    raw = weight_grad(g, np.array([0.0, 2.0]), normalized=False)
    assert abs(raw[0] - 0.5) < 1e-12


def test_grad_weight_ratio():
    g = graph_of([[0.0], [1.0], [2.0], [3.0]], [(0, 1), (2, 3)])
    raw = weight_grad(g, np.array([0.0, 1.0, 0.0, 4.0]), normalized=False)
    assert abs(raw[0] / raw[1] - 4.0) < 1e-9


def test_grad_weight_constant_qoi_all_equal():
    g = graph_of([[0.0], [0.5], [2.0]], [(0, 1), (1, 2)])
    w = weight_grad(g, np.zeros(3))
    assert np.all(w == 1.0)


def test_grad_weight_order_reversed_vs_jumps():
    rng = np.random.default_rng(0)
    pts = np.linspace(0, 1, 6)[:, None]
    edges = [(k, k + 1) for k in range(5)]
    g = graph_of(pts, edges)
    vals = rng.uniform(0, 1, 6)
    w = weight_grad(g, vals)
    jumps = np.array([abs(vals[a] - vals[b]) for a, b in g.edges])
    assert np.array_equal(np.argsort(w), np.argsort(-jumps))


def test_pdf_grad_protocol_hand_value():
    # equal lengths, PDF terms {1, 1}, gradient terms {0, 1} -> {1.0, 0.5}
    class UnitDensity:
        def density(self, z):
            return np.ones(len(np.atleast_2d(z)))

    g = graph_of([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [(0, 1), (2, 3)])
    w = weight_pdf_grad(g, np.array([0.0, 0.0, 0.0, 1.0]), UnitDensity())
    assert abs(w[0] - 1.0) < 1e-12
    assert abs(w[1] - 0.5) < 1e-12


def test_pdf_grad_constant_qoi_uniform_density_all_ones():
    g = graph_of([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [(0, 1), (2, 3)])
    w = weight_pdf_grad(g, np.full(4, 3.3), uniform_box([(-1, 1), (-1, 1)]))
    assert np.allclose(w, 1.0, atol=1e-12)


def test_pdf_grad_longer_edge_smaller_weight():
    g = graph_of([[0.0], [1.0], [2.0], [4.0]], [(0, 1), (2, 3)])
    w = weight_pdf_grad(g, np.zeros(4), uniform_box([(0, 4)]))
    assert w[1] < w[0]


def test_normalization_to_unit_interval():
    rng = np.random.default_rng(4)
    pts = rng.uniform(-1, 1, (12, 2))
    from treeline.geometry import build_neighbor_graph

    g = build_neighbor_graph(pts)
    vals = rng.uniform(0, 5, 12)
    for w in (
        weight_pdf(g, uniform_box([(-1, 1), (-1, 1)])),
        weight_grad(g, vals),
        weight_pdf_grad(g, vals, uniform_box([(-1, 1), (-1, 1)])),
    ):
        assert np.all(w > 0) and np.all(w <= 1.0)
        assert w.max() == 1.0


def test_pdf_grad_reduces_to_pdf_ordering_for_constant_qoi():
    rng = np.random.default_rng(9)
    from treeline.geometry import build_neighbor_graph

    pts = rng.uniform(-1, 1, (15, 2))
    g = build_neighbor_graph(pts)
    dens = uniform_box([(-1, 1), (-1, 1)])
    w_combined = weight_pdf_grad(g, np.zeros(15), dens)
    w_pdf = weight_pdf(g, dens)
    assert np.array_equal(np.argsort(w_combined), np.argsort(w_pdf))


def test_pdf_grad_reduces_to_grad_ordering_for_uniform_density():
    # equal-length edges so the length factor cannot reshuffle ranks
    pts = [[0.0, k] for k in range(4)] + [[1.0, k] for k in range(4)]
    edges = [(k, k + 4) for k in range(4)]
    g = graph_of(pts, edges)
    vals = np.array([0.0, 0.0, 0.0, 0.0, 0.3, 1.1, 0.7, 2.0])
    w_combined = weight_pdf_grad(g, vals, uniform_box([(-1, 1), (0, 3)]))
    w_grad = weight_grad(g, vals)
    assert np.array_equal(np.argsort(w_combined), np.argsort(w_grad))


def test_all_zero_terms_raises():
    class ZeroDensity:
        def density(self, z):
            return np.zeros(len(np.atleast_2d(z)))

    g = graph_of([[0.0], [1.0]], [(0, 1)])
    with pytest.raises(AllZeroTerms):
        weight_pdf_grad(g, np.zeros(2), ZeroDensity())
