"""Neighbor graphs over sample sets via Voronoi-vertex adjacency.

Two samples are neighbors when their Voronoi cells meet at a common Voronoi
vertex. Voronoi vertices are the circumcenters of the Delaunay simplices, so
the graph is assembled from a Delaunay triangulation: every simplex connects
its vertices pairwise, and circumcenters that coincide (co-circular sample
configurations, e.g. the corners of a square) are merged first so that all
incident samples become mutual neighbors. The merge is what produces the
diagonal connections on regular grids that plain Delaunay edges miss.

The triangulation itself is delegated to Qhull (scipy.spatial.Delaunay);
circumcenters, merging, and the d = 1 path are implemented here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay as _SciPyDelaunay
from scipy.spatial import cKDTree
from scipy.spatial import QhullError

from .errors import DegenerateInput, DimensionMismatch

__all__ = ["Simplex", "NeighborGraph", "delaunay", "build_neighbor_graph"]

# Circumcenters closer than MERGE_REL times the support-box diagonal are
# treated as one Voronoi vertex.
MERGE_REL = 1e-9


@dataclass(frozen=True)
class Simplex:
    """Delaunay simplex: d+1 vertex indices, circumcenter and circumradius."""

    vertex_ids: tuple
    circumcenter: np.ndarray
    circumradius: float


class NeighborGraph:
    """Undirected graph over sample points.

    edges are unordered index pairs stored as sorted tuples in a sorted list;
    weights (if assigned) align with that list.
    """

    def __init__(self, points, edges):
        self.points = np.asarray(points, dtype=float)
        self.n_vertices = len(self.points)
        self.edges = sorted(set((min(a, b), max(a, b)) for a, b in edges))
        if any(a == b for a, b in self.edges):
            raise ValueError("self-loop in edge set")
        self.weights = None
        self._adjacency = None

    @property
    def n_edges(self):
        return len(self.edges)

    def edge_lengths(self):
        a = np.array([e[0] for e in self.edges], dtype=int)
        b = np.array([e[1] for e in self.edges], dtype=int)
        return np.linalg.norm(self.points[a] - self.points[b], axis=1)

    def edge_midpoints(self):
        a = np.array([e[0] for e in self.edges], dtype=int)
        b = np.array([e[1] for e in self.edges], dtype=int)
        return 0.5 * (self.points[a] + self.points[b])

    def neighbors(self, i):
        if self._adjacency is None:
            adj = [[] for _ in range(self.n_vertices)]
            for a, b in self.edges:
                adj[a].append(b)
                adj[b].append(a)
            self._adjacency = [sorted(n) for n in adj]
        return self._adjacency[i]

    def is_connected(self):
        if self.n_vertices <= 1:
            return True
        seen = np.zeros(self.n_vertices, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            v = stack.pop()
            for w in self.neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        return bool(seen.all())


def _check_points(points):
    try:
        points = np.asarray(points, dtype=float)
    except ValueError as exc:
        raise DimensionMismatch(f"points do not share a common dimension: {exc}") from exc
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2:
        raise DimensionMismatch("points must be an (n, d) array")
    return points


def _circumcenters(points, simplices):
    """Circumcenters and radii for stacked simplices.

    Solves 2 (v_i - v_0) . c = |v_i|^2 - |v_0|^2 for each simplex.
    """
    verts = points[simplices]  # (m, d+1, d)
    v0 = verts[:, 0, :]
    rest = verts[:, 1:, :]
    a = 2.0 * (rest - v0[:, None, :])  # (m, d, d)
    b = np.sum(rest**2, axis=2) - np.sum(v0**2, axis=1)[:, None]
    centers = np.linalg.solve(a, b[..., None])[..., 0]
    radii = np.linalg.norm(centers - v0, axis=1)
    return centers, radii


def delaunay(points):
    """Delaunay triangulation of an (n, d) point set, d >= 2.

    Returns a list of Simplex with vertex ids sorted ascending. Raises
    DegenerateInput when the points are affinely dependent (all on a common
    hyperplane) and DimensionMismatch on ragged input.
    """
    points = _check_points(points)
    n, d = points.shape
    if d < 2:
        raise DimensionMismatch("delaunay requires d >= 2; use consecutive adjacency in 1D")
    if n < d + 1:
        raise DegenerateInput(f"need at least {d + 1} points in {d}D, got {n}")
    span = points - points[0]
    if np.linalg.matrix_rank(span, tol=1e-12 * max(1.0, np.abs(points).max())) < d:
        raise DegenerateInput("points are affinely dependent")
    try:
        tri = _SciPyDelaunay(points)
    except QhullError as exc:  # pragma: no cover - rank check catches most cases
        raise DegenerateInput(str(exc)) from exc
    simplices = np.sort(tri.simplices, axis=1)
    centers, radii = _circumcenters(points, simplices)
    return [
        Simplex(tuple(int(v) for v in s), c, float(r))
        for s, c, r in zip(simplices, centers, radii)
    ]


def _merge_groups(centers, tol):
    """Group circumcenters within tol of each other (union-find over pairs)."""
    m = len(centers)
    parent = list(range(m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = cKDTree(centers)
    for i, j in tree.query_pairs(tol):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def build_neighbor_graph(points, support=None):
    """Voronoi-vertex adjacency graph over the points.

    For every (merged) Voronoi vertex all samples whose cells touch it are
    connected pairwise. The merge tolerance is MERGE_REL times the diagonal
    of the support box (bounding box of the points when no support is given).

    In 1D the graph is consecutive adjacency of the sorted coordinates.
    """
    points = _check_points(points)
    n, d = points.shape
    if d == 1:
        order = np.argsort(points[:, 0], kind="stable")
        edges = [
            (int(order[k]), int(order[k + 1]))
            for k in range(n - 1)
        ]
        return NeighborGraph(points, edges)

    simplices = delaunay(points)
    if support is not None:
        support = np.asarray(support, dtype=float)
        widths = support[:, 1] - support[:, 0]
    else:
        widths = points.max(axis=0) - points.min(axis=0)
    tol = MERGE_REL * float(np.sqrt(np.sum(widths**2)))

    centers = np.array([s.circumcenter for s in simplices])
    edges = set()
    for group in _merge_groups(centers, tol):
        incident = sorted(set().union(*(simplices[g].vertex_ids for g in group)))
        for i in range(len(incident)):
            for j in range(i + 1, len(incident)):
                edges.add((incident[i], incident[j]))
    return NeighborGraph(points, edges)
