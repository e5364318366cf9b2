"""Refinement weights for neighbor-graph edges.

A low weight marks an edge as a good refinement candidate. Three weighings
are provided: by the input PDF at the edge midpoint, by the sampled QoI
difference across the edge, and by the combination of both. Each raw weight
is the reciprocal of (term * edge length); the combined variant normalises
the PDF and gradient term families separately by their maxima before adding
them. All final weights are normalised by the maximum so they lie in (0, 1].

Zero denominators (constant QoI across an edge, vanishing PDF at a midpoint)
are kept eligible but lowest-priority: an additive floor of 1e-14 on the
denominator turns them into the largest finite raw weight.
"""

from __future__ import annotations

import numpy as np

from .errors import AllZeroTerms

__all__ = ["weight_pdf", "weight_grad", "weight_pdf_grad", "normalize_weights"]

DENOM_FLOOR = 1e-14


def normalize_weights(raw):
    """Divide by the maximum so weights lie in (0, 1] with at least one 1."""
    raw = np.asarray(raw, dtype=float)
    top = raw.max()
    if not np.isfinite(top) or top <= 0:
        raise ValueError("weights must be positive and finite before normalisation")
    return raw / top


def _edge_arrays(graph):
    if graph.n_edges == 0:
        raise ValueError("graph has no edges to weigh")
    a = np.array([e[0] for e in graph.edges])
    b = np.array([e[1] for e in graph.edges])
    return a, b, graph.edge_lengths(), graph.edge_midpoints()


def weight_pdf(graph, density, normalized=True):
    """Weights 1 / (rho(midpoint) * length); normalised to (0, 1] by default."""
    _, _, lengths, mids = _edge_arrays(graph)
    rho = np.atleast_1d(density.density(mids))
    raw = 1.0 / (rho * lengths + DENOM_FLOOR)
    return normalize_weights(raw) if normalized else raw


def weight_grad(graph, values, normalized=True):
    """Weights 1 / ((|du|/length) * length); normalised to (0, 1] by default."""
    values = np.asarray(values, dtype=float)
    a, b, lengths, _ = _edge_arrays(graph)
    grad = np.abs(values[a] - values[b]) / lengths
    raw = 1.0 / (grad * lengths + DENOM_FLOOR)
    return normalize_weights(raw) if normalized else raw


def weight_pdf_grad(graph, values, density):
    """Combined PDF + gradient weights, always normalised to (0, 1].

    Protocol: (i) per-edge PDF term rho(mid) and gradient term |du|/length;
    (ii) each term family normalised separately by its own maximum;
    (iii) sum, multiply by length, take the reciprocal; (iv) normalise by
    the maximum weight.
    """
    values = np.asarray(values, dtype=float)
    a, b, lengths, mids = _edge_arrays(graph)

    pdf_term = np.atleast_1d(density.density(mids))
    grad_term = np.abs(values[a] - values[b]) / lengths

    pdf_max = pdf_term.max()
    grad_max = grad_term.max()
    if pdf_max <= 0 and grad_max <= 0:
        raise AllZeroTerms("all PDF and gradient terms vanish")
    pdf_norm = pdf_term / pdf_max if pdf_max > 0 else np.zeros_like(pdf_term)
    grad_norm = grad_term / grad_max if grad_max > 0 else np.zeros_like(grad_term)

    raw = 1.0 / ((pdf_norm + grad_norm) * lengths + DENOM_FLOOR)
    return normalize_weights(raw)
