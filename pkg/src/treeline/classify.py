"""Sample classification: split the graph along QoI jumps.

Every graph edge gets a jump threshold: the expected smooth variation of the
QoI across that edge, estimated from order-1 (affine) fits on the neighbor
stencils of both endpoints. Edges whose actual |du| stays within the
threshold link their endpoints into the same class; the classes are the
connected components under those links. A safety factor separates genuine
jumps from discretization error, and undersized components are absorbed into
their closest neighbor class so stray samples cannot spawn elements.
"""

from __future__ import annotations

from itertools import combinations, islice

import numpy as np

__all__ = ["estimate_edge_jump", "classify_samples", "TAU_JUMP", "S_MIN"]

TAU_JUMP = 3.0  # safety factor between smooth variation and a flagged jump
S_MIN = 3  # components smaller than this merge into a neighbor
MAX_SUBSETS = 400  # cap on consensus subsets per stencil fit


def _consensus_gradient(points, values, stencil, anchor):
    """Robust affine gradient on a stencil, or None when degenerate or
    ambiguous (no affine model explains a majority of the stencil).

    Exact affine fits through every (d+1)-point subset are scored by the
    residual a majority of the stencil can reach; the winner's inliers get
    a least-squares refit. Samples across a jump cannot pull the fit: they
    lose the consensus and end up as outliers. Mixed stencils without a
    consistent majority (balanced jump contamination) return None so the
    caller falls back to the global scale. Subsets are enumerated nearest
    to the anchor first, so results are deterministic.
    """
    d = points.shape[1]
    idx = np.asarray(stencil, dtype=int)
    n = len(idx)
    if n < d + 1:
        return "insufficient", None
    order = np.lexsort((idx, np.linalg.norm(points[idx] - points[anchor], axis=1)))
    idx = idx[order]

    center = points[idx].mean(axis=0)
    spread = float(np.max(np.linalg.norm(points[idx] - center, axis=1)))
    if spread <= 0.0:
        return "insufficient", None
    x = (points[idx] - center) / spread
    vals = values[idx]
    vscale = max(1.0, float(np.max(np.abs(vals))))

    subs = np.array(list(islice(combinations(range(n), d + 1), MAX_SUBSETS)))
    a = np.concatenate((np.ones((len(subs), d + 1, 1)), x[subs]), axis=2)
    keep = np.abs(np.linalg.det(a)) > 1e-10
    if not keep.any():
        return "insufficient", None
    coefs = np.linalg.solve(a[keep], vals[subs][keep][..., None])[..., 0]
    design = np.hstack((np.ones((n, 1)), x))
    residuals = np.abs(vals[None, :] - coefs @ design.T)
    # a fit must cover the d+1 points it interpolates plus half the rest
    majority = d + 1 + (n - d) // 2
    scores = np.sort(residuals, axis=1)[:, majority - 1]
    best = int(np.argmin(scores))

    value_span = float(np.max(np.abs(vals - np.median(vals))))
    if scores[best] > max(0.1 * value_span, 1e-12 * vscale):
        return "ambiguous", None  # no affine majority: stencil straddles a jump
    inliers = residuals[best] <= max(3.0 * scores[best], 1e-12 * vscale)
    if inliers.sum() >= d + 1:
        coef, _, rank, _ = np.linalg.lstsq(design[inliers], vals[inliers], rcond=None)
        if rank == d + 1:
            return "ok", coef[1:] / spread
    return "ok", coefs[best][1:] / spread


def _affine_change(points, values, stencil, i, j):
    """Expected smooth change across the edge from endpoint i's stencil.

    Returns ("ok", |g . (z_j - z_i)|) for a consensus fit, ("ambiguous",
    None) when no affine model reaches a stencil majority (the stencil
    straddles a jump), or ("insufficient", None) when the stencil is too
    small or degenerate to judge.
    """
    status, g = _consensus_gradient(points, values, stencil, i)
    if status != "ok":
        return status, None
    return "ok", abs(float(g @ (points[j] - points[i])))


def _lower_mode_median(jumps, vscale):
    """Median of the lower cluster of |du| values.

    Jump-contaminated sets are bimodal: smooth differences and jump-sized
    ones form two tight clusters with a wide gap between them. When such a
    gap exists (wider than TAU_JUMP times both clusters' internal spreads,
    with at least two values below it), the median of the lower cluster is
    the smooth-variation scale. Smooth sets fill their range without such
    a gap and keep their plain median.
    """
    s = np.sort(np.asarray(jumps, dtype=float))
    n = len(s)
    best_split = 0
    best_gap = 0.0
    for k in range(2, n):
        gap = s[k] - s[k - 1]
        spread = (s[k - 1] - s[0]) + (s[-1] - s[k])
        if gap > TAU_JUMP * spread + 1e-12 * vscale and gap > best_gap:
            best_gap = gap
            best_split = k
    lower = s[:best_split] if best_split else s
    return float(np.median(lower))


def _incident_jump_scale(graph, values, i, j):
    """Smooth-variation scale from each endpoint's other incident edges;
    the smaller side wins (it is the better bound when one side hugs a
    jump)."""
    vscale = max(1.0, float(np.max(np.abs(values))))
    side_scales = []
    for v, other in ((i, j), (j, i)):
        jumps = [
            abs(values[v] - values[w])
            for w in graph.neighbors(v)
            if w != other
        ]
        if jumps:
            side_scales.append(_lower_mode_median(jumps, vscale))
    return min(side_scales) if side_scales else 0.0


def _one_sided_stencil(graph, points, a, b):
    """Neighbors of endpoint a on a's side of the edge (a, b).

    Besides excluding b itself, neighbors past the edge midplane are
    dropped: under adaptive bisection the samples just across a jump sit
    exactly there, and keeping them would let a steep ramp masquerade as
    the local smooth field.
    """
    mid = 0.5 * (points[a] + points[b])
    direction = points[b] - points[a]
    length_sq = float(direction @ direction)
    stencil = [a]
    for k in graph.neighbors(a):
        if k == b:
            continue
        if float((points[k] - mid) @ direction) <= 0.25 * length_sq:
            stencil.append(k)
    return stencil


def estimate_edge_jump(edge, graph, points, values):
    """Jump threshold for one edge: TAU_JUMP times the larger of the
    affine-predicted smooth change across the edge (one-sided consensus
    fits from both endpoints) and the median |du| over the endpoints'
    other incident edges.

    Falls back to TAU_JUMP times the global median |du| when both stencils
    are too small, degenerate, or without an affine consensus.
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    i, j = edge
    changes = []
    ambiguous = False
    for a, b in ((i, j), (j, i)):
        stencil = _one_sided_stencil(graph, points, a, b)
        status, change = _affine_change(points, values, stencil, a, b)
        if status == "ok":
            changes.append(change)
        elif status == "ambiguous":
            ambiguous = True
    if ambiguous:
        # a side without any affine majority is itself jump evidence: no
        # smooth variation can be credited to this edge
        predicted = 0.0
    elif changes:
        # minmod flavor: across a jump the cleaner side sees a flat field
        # and its small prediction is the trustworthy one; smooth fields
        # give both sides nearly equal predictions
        predicted = min(changes)
    else:
        return TAU_JUMP * _global_scale(graph, values)
    return TAU_JUMP * max(predicted, _incident_jump_scale(graph, values, i, j))


def _global_scale(graph, values):
    jumps = [abs(values[a] - values[b]) for a, b in graph.edges]
    return float(np.median(jumps)) if jumps else 0.0


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def classify_samples(graph, points, values):
    """Labels 1..N_c from connected components under same-class links.

    An edge links its endpoints when |du| <= its jump threshold. Components
    smaller than S_MIN are merged into the neighboring component reached by
    the smallest cross-edge |du|. Labels are numbered by each component's
    smallest sample index.
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    n = graph.n_vertices
    uf = _UnionFind(n)
    for edge in graph.edges:
        a, b = edge
        jump = abs(values[a] - values[b])
        if jump <= estimate_edge_jump(edge, graph, points, values):
            uf.union(a, b)

    def components():
        comp = {}
        for v in range(n):
            comp.setdefault(uf.find(v), []).append(v)
        return list(comp.values())

    # absorb undersized components, smallest first, until all meet S_MIN
    while True:
        comps = components()
        if len(comps) <= 1:
            break
        small = sorted(
            (c for c in comps if len(c) < S_MIN), key=lambda c: (len(c), c[0])
        )
        if not small:
            break
        victim = set(small[0])
        best = None
        for a, b in graph.edges:
            ina, inb = a in victim, b in victim
            if ina == inb:
                continue
            jump = abs(values[a] - values[b])
            key = (jump, min(a, b), max(a, b))
            if best is None or key < best[0]:
                best = (key, a, b)
        _, a, b = best
        uf.union(a, b)

    comps = sorted(components(), key=lambda c: min(c))
    labels = np.zeros(n, dtype=int)
    for rank, comp in enumerate(comps, start=1):
        labels[comp] = rank
    return labels
