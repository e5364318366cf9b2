"""Error metrics: weighted L2 norm with near-boundary discards, and the
misclassified-portion measure for domain decompositions.

The weighted L2 error draws Monte Carlo points uniformly over the support
box and weighs squared surrogate errors by the input PDF. Points closer to
the decision boundary than the resolution of the sample set (the minimum
distance among cross-class sample pairs) are discarded: the classifier
cannot be trusted below that scale. Both metrics are deterministic given
their seed.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import surrogate as surrogate_mod
from . import svm as svm_mod

__all__ = ["weighted_l2_error", "misclassified_portion", "cross_class_min_distance"]


def _uniform_box_draws(rng, support, n):
    lo = support[:, 0]
    hi = support[:, 1]
    return lo + rng.random((n, len(lo))) * (hi - lo)


def cross_class_min_distance(points, labels):
    """Minimum pairwise distance among samples whose labels differ."""
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    best = np.inf
    ids = sorted(set(labels.tolist()))
    for i, a in enumerate(ids):
        pa = points[labels == a]
        for b in ids[i + 1 :]:
            pb = points[labels == b]
            d = np.sqrt(
                np.maximum(
                    np.sum(pa**2, axis=1)[:, None]
                    + np.sum(pb**2, axis=1)[None, :]
                    - 2.0 * pa @ pb.T,
                    0.0,
                )
            )
            best = min(best, float(d.min()))
    return best


def _boundary_distances(model, z, train_points):
    """Distance from each row of z to the decision surface (vectorized
    version of svm.distance_to_boundary against the training set)."""
    pred_train = svm_mod.predict_many(model, train_points)
    pred_z = svm_mod.predict_many(model, z)
    out = np.full(len(z), np.inf)
    for c in np.unique(pred_z):
        mask = pred_z == c
        others = train_points[pred_train != c]
        if len(others) == 0:
            continue
        zc = z[mask]
        d2 = (
            np.sum(zc**2, axis=1)[:, None]
            + np.sum(others**2, axis=1)[None, :]
            - 2.0 * zc @ others.T
        )
        targets = others[np.argmin(d2, axis=1)]
        out[mask] = svm_mod._bisect_to_boundary(model, zc, targets)
    return out


def weighted_l2_error(surr, truth_model, density, n_mc=10_000, seed=0,
                      return_details=False):
    """Weighted L2 error between the surrogate and the truth model.

    Monte Carlo points are uniform over the box; each squared difference is
    weighted by rho at the point. For multi-element surrogates, points whose
    distance to the decision boundary falls below the cross-class sample
    resolution are discarded, and the sum is divided by the retained count.
    """
    rng = np.random.default_rng(seed)
    z = _uniform_box_draws(rng, density.support, n_mc)

    keep = np.ones(n_mc, dtype=bool)
    h_min = np.inf
    if surr.svm is not None:
        h_min = cross_class_min_distance(surr.samples.points, surr.samples.labels)
        dist = _boundary_distances(surr.svm, z, surr.samples.points)
        keep = dist >= h_min

    z_kept = z[keep]
    n_kept = len(z_kept)
    if n_kept == 0:
        error = float("nan")
    else:
        approx = surrogate_mod.evaluate_many(surr, z_kept)
        exact = (
            np.asarray(truth_model.batch_fn(z_kept), dtype=float)
            if truth_model.batch_fn is not None
            else np.array([truth_model.fn(p) for p in z_kept], dtype=float)
        )
        rho = np.atleast_1d(density.density(z_kept))
        error = float(np.sqrt(np.sum(rho * (approx - exact) ** 2) / n_kept))
    if return_details:
        return error, {
            "n_mc": n_mc,
            "n_retained": n_kept,
            "n_discarded": int(n_mc - n_kept),
            "h_min": h_min,
        }
    return error


def misclassified_portion(model, truth_region, n_mc=100_000, seed=0,
                          box=((-1.0, 1.0), (-1.0, 1.0))):
    """Area fraction assigned to the wrong element, after optimally matching
    predicted classes to true regions (assignment on the confusion counts).

    truth_region is a callable mapping (n, d) points to integer region ids
    (objects exposing .region work too).
    """
    region_fn = getattr(truth_region, "region", truth_region)
    rng = np.random.default_rng(seed)
    z = _uniform_box_draws(rng, np.asarray(box, dtype=float), n_mc)
    pred = svm_mod.predict_many(model, z)
    true = np.atleast_1d(np.asarray(region_fn(z), dtype=int))

    pred_ids = np.unique(pred)
    true_ids = np.unique(true)
    counts = np.zeros((len(pred_ids), len(true_ids)))
    for i, p in enumerate(pred_ids):
        for j, t in enumerate(true_ids):
            counts[i, j] = np.sum((pred == p) & (true == t))
    rows, cols = linear_sum_assignment(-counts)
    matched = counts[rows, cols].sum()
    return float(1.0 - matched / n_mc)
