"""Minimum spanning tree extraction and refinement-edge selection.

The spanning tree keeps the most attractive (lowest-weight) edges while still
reaching every sample, which prevents sample clustering early on. Tree edges
whose weight is within a factor c of the global minimum edge weight are
refined by placing a new sample at their midpoint; the global-minimum edge is
always refined even when the tree does not contain it.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedGraph

__all__ = ["SpanningTree", "minimum_spanning_tree", "select_refinement_edges", "edge_midpoints"]

DEDUP_TOL = 1e-12


@dataclass
class SpanningTree:
    edges: list
    total_weight: float


def minimum_spanning_tree(graph):
    """Prim's algorithm with deterministic tie-breaking.

    Among equal-weight frontier edges the lexicographically smallest
    (min index, max index) pair wins, so reruns reproduce the same tree.
    """
    if graph.weights is None:
        raise ValueError("graph edges carry no weights")
    n = graph.n_vertices
    if n == 0:
        return SpanningTree([], 0.0)

    weight_of = dict(zip(graph.edges, graph.weights))
    adjacency = {i: [] for i in range(n)}
    for (a, b), w in weight_of.items():
        adjacency[a].append((b, w))
        adjacency[b].append((a, w))

    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    heap = []
    for b, w in adjacency[0]:
        heapq.heappush(heap, (w, min(0, b), max(0, b)))
    tree_edges = []
    total = 0.0
    while heap and len(tree_edges) < n - 1:
        w, a, b = heapq.heappop(heap)
        if in_tree[a] and in_tree[b]:
            continue
        new = b if in_tree[a] else a
        in_tree[new] = True
        tree_edges.append((a, b))
        total += w
        for nb, nw in adjacency[new]:
            if not in_tree[nb]:
                heapq.heappush(heap, (nw, min(new, nb), max(new, nb)))
    if len(tree_edges) < n - 1:
        raise DisconnectedGraph(
            f"spanning tree reached {len(tree_edges) + 1} of {n} vertices"
        )
    return SpanningTree(sorted(tree_edges), float(total))


def select_refinement_edges(tree, graph, c=2.0):
    """Tree edges with weight <= c * w_min, w_min taken over ALL graph edges.

    The global-minimum edge is appended when the selection missed it, so the
    result is never empty. c > 1; larger c refines more edges per iteration.
    """
    if c <= 1.0:
        raise ValueError("refinement factor c must exceed 1")
    weight_of = dict(zip(graph.edges, graph.weights))
    w_min = min(graph.weights)
    # Deterministic representative among global-minimum ties.
    min_edge = min(e for e, w in weight_of.items() if w == w_min)
    selected = [e for e in tree.edges if weight_of[e] <= c * w_min]
    if min_edge not in selected:
        selected.append(min_edge)
    return selected


def edge_midpoints(edges, points):
    """Arithmetic midpoints of the edges, deduplicated.

    Midpoints that coincide with an existing sample or with each other
    (within 1e-12) are dropped, so every returned point is new and distinct.
    """
    points = np.asarray(points, dtype=float)
    out = []
    for a, b in edges:
        mid = 0.5 * (points[a] + points[b])
        if np.any(np.linalg.norm(points - mid, axis=1) <= DEDUP_TOL):
            continue
        if any(np.linalg.norm(mid - m) <= DEDUP_TOL for m in out):
            continue
        out.append(mid)
    if not out:
        return np.empty((0, points.shape[1]))
    return np.array(out)
