"""Adaptive sampling loop: initial grid, then graph / weigh / MST-refine.

Each iteration builds the neighbor graph over the current samples, weighs its
edges, extracts the minimum spanning tree, refines the attractive tree edges
at their midpoints, and evaluates the model there. The loop stops after
i_max iterations or once the sample count exceeds n_max (checked after an
iteration completes, so the budget can overshoot by one iteration's worth of
edges). Everything is deterministic: reruns reproduce the sample set
bit-for-bit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import mst as mst_mod
from . import weights as weights_mod
from .errors import BudgetTooSmall, ModelEvaluationFailed
from .geometry import build_neighbor_graph

__all__ = [
    "ModelAdapter",
    "SamplerConfig",
    "SampleSet",
    "initial_grid",
    "evaluate_batch",
    "run",
]

WEIGHT_MODES = ("pdf", "grad", "pdf_grad")
GRID_KINDS = ("face_centers", "corners", "combined")


@dataclass
class ModelAdapter:
    """Evaluation contract: point in the random space -> scalar QoI.

    fn evaluates one point; batch_fn (optional) evaluates an (n, d) array at
    once. region_fn (optional) exposes exact region membership for
    piecewise-constant truth models. cost_hint is the relative cost of one
    evaluation, used only for reporting.
    """

    name: str
    fn: object
    batch_fn: object = None
    cost_hint: float = 1.0
    region_fn: object = None

    def __call__(self, z):
        return float(self.fn(np.asarray(z, dtype=float)))


@dataclass
class SamplerConfig:
    n_max: int
    i_max: int = 50
    initial_grid: str = "combined"
    c: float = 2.0
    weight_mode: str = "pdf_grad"
    jobs: int = 1

    def __post_init__(self):
        if self.initial_grid not in GRID_KINDS:
            raise ValueError(f"unknown initial grid {self.initial_grid!r}")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"unknown weight mode {self.weight_mode!r}")
        if self.c <= 1.0:
            raise ValueError("refinement factor c must exceed 1")
        if self.i_max < 1:
            raise ValueError("need at least one iteration")


@dataclass
class SampleSet:
    """Adaptive samples with aligned QoI values and provenance."""

    points: np.ndarray
    values: np.ndarray
    iteration_of: np.ndarray
    labels: np.ndarray = None

    def __len__(self):
        return len(self.points)

    @property
    def dim(self):
        return self.points.shape[1]


def initial_grid(kind, density):
    """Initial sample locations on the support box.

    face_centers: box center plus the 2d face midpoints. corners: center
    plus the 2^d corners. combined: the union of both. In 1D all three
    degenerate to the two end points plus the middle point.
    """
    lo = density.support[:, 0]
    hi = density.support[:, 1]
    d = density.dim
    center = 0.5 * (lo + hi)
    points = [center]
    if kind in ("corners", "combined"):
        for bits in range(2**d):
            corner = np.array(
                [hi[k] if (bits >> k) & 1 else lo[k] for k in range(d)]
            )
            points.append(corner)
    if kind in ("face_centers", "combined"):
        for k in range(d):
            for side in (lo[k], hi[k]):
                p = center.copy()
                p[k] = side
                points.append(p)
    pts = np.array(points)
    # drop duplicates (1D corners and face centers coincide), keep order
    keep = []
    for i, p in enumerate(pts):
        if not any(np.linalg.norm(p - pts[j]) <= 1e-12 for j in keep):
            keep.append(i)
    return pts[keep]


def evaluate_batch(model, points, jobs=1):
    """Evaluate the model at each point; order matches the input.

    Points must be pairwise distinct. Evaluations are independent and run
    concurrently when jobs > 1; any failure aborts with the offending points
    attached.
    """
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return np.empty(0)
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if np.linalg.norm(points[i] - points[j]) <= 1e-12:
                raise ValueError(f"duplicate point submitted at rows {i}, {j}")
    if jobs <= 1 and model.batch_fn is not None:
        return np.asarray(model.batch_fn(points), dtype=float)

    def one(z):
        try:
            return float(model.fn(z)), None
        except Exception as exc:
            return None, exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, points))
    else:
        results = [one(z) for z in points]
    failed = [(points[i], exc) for i, (v, exc) in enumerate(results) if exc is not None]
    if failed:
        detail = "; ".join(f"{p.tolist()}: {exc}" for p, exc in failed[:5])
        raise ModelEvaluationFailed(
            f"{len(failed)} evaluation(s) failed: {detail}",
            failed_points=[p for p, _ in failed],
        )
    return np.array([v for v, _ in results])


def _weigh(graph, values, density, mode):
    if mode == "pdf":
        return weights_mod.weight_pdf(graph, density)
    if mode == "grad":
        return weights_mod.weight_grad(graph, values)
    return weights_mod.weight_pdf_grad(graph, values, density)


def run(model, density, config):
    """Run the adaptive sampling loop; returns the SampleSet."""
    points = initial_grid(config.initial_grid, density)
    if len(points) > config.n_max:
        raise BudgetTooSmall(
            f"initial grid has {len(points)} samples, budget is {config.n_max}"
        )
    values = evaluate_batch(model, points, jobs=config.jobs)
    iteration_of = np.zeros(len(points), dtype=int)

    for it in range(1, config.i_max + 1):
        graph = build_neighbor_graph(points, support=density.support)
        graph.weights = _weigh(graph, values, density, config.weight_mode)
        tree = mst_mod.minimum_spanning_tree(graph)
        selected = mst_mod.select_refinement_edges(tree, graph, c=config.c)
        new_points = mst_mod.edge_midpoints(selected, points)
        if len(new_points) == 0:
            break  # every midpoint already sampled; nothing left to refine
        new_values = evaluate_batch(model, new_points, jobs=config.jobs)
        points = np.vstack((points, new_points))
        values = np.concatenate((values, new_values))
        iteration_of = np.concatenate(
            (iteration_of, np.full(len(new_points), it, dtype=int))
        )
        if len(points) > config.n_max:
            break
    return SampleSet(points=points, values=values, iteration_of=iteration_of)
