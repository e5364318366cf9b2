"""Joint input densities: tensor products of 1D uniform and beta marginals.

A ``DensityModel`` carries the support box of the random space, an evaluable
joint PDF, and enough structure (per-dimension family parameters) for the
interpolation module to build matching orthonormal polynomial bases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Marginal", "DensityModel", "uniform_box", "beta_box"]


@dataclass(frozen=True)
class Marginal:
    """One-dimensional density factor on the interval [lo, hi].

    kind is "uniform" or "beta"; for beta the shape parameters (a, b) refer
    to the standard Beta(a, b) density rescaled from [0, 1] onto [lo, hi].
    """

    kind: str
    lo: float
    hi: float
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in ("uniform", "beta"):
            raise ValueError(f"unknown marginal kind {self.kind!r}")
        if not self.hi > self.lo:
            raise ValueError("marginal support must have hi > lo")
        if self.kind == "beta" and (self.a <= 0 or self.b <= 0):
            raise ValueError("beta parameters must be positive")

    def pdf(self, x):
        """Density values at x (scalar or array); zero outside [lo, hi]."""
        x = np.asarray(x, dtype=float)
        width = self.hi - self.lo
        inside = (x >= self.lo) & (x <= self.hi)
        if self.kind == "uniform":
            return np.where(inside, 1.0 / width, 0.0)
        # Beta(a, b) rescaled: log-gamma keeps the normalisation stable for
        # large shape parameters.
        t = np.clip((x - self.lo) / width, 0.0, 1.0)
        log_norm = (
            math.lgamma(self.a + self.b)
            - math.lgamma(self.a)
            - math.lgamma(self.b)
        )
        with np.errstate(divide="ignore", invalid="ignore"):
            logp = (self.a - 1.0) * np.log(t) + (self.b - 1.0) * np.log1p(-t)
        dens = np.exp(log_norm + logp) / width
        dens = np.where(np.isfinite(dens), dens, 0.0)
        return np.where(inside, dens, 0.0)


class DensityModel:
    """Tensor product of 1D marginals over a d-dimensional box."""

    def __init__(self, marginals):
        if not marginals:
            raise ValueError("need at least one marginal")
        self.marginals = tuple(marginals)
        self.dim = len(self.marginals)
        self.support = np.array([(m.lo, m.hi) for m in self.marginals])

    @property
    def kind(self):
        kinds = {m.kind for m in self.marginals}
        return kinds.pop() if len(kinds) == 1 else "product"

    def density(self, z):
        """Joint PDF at z, shape (d,) or (n, d); returns scalar or (n,)."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        if z.shape[1] != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {z.shape[1]}")
        out = np.ones(z.shape[0])
        for k, m in enumerate(self.marginals):
            out *= m.pdf(z[:, k])
        return out if out.size > 1 else float(out[0])

    def contains(self, z):
        """True for points inside the closed support box."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        lo = self.support[:, 0]
        hi = self.support[:, 1]
        ok = np.all((z >= lo) & (z <= hi), axis=1)
        return ok if ok.size > 1 else bool(ok[0])

    @property
    def box_diagonal(self):
        widths = self.support[:, 1] - self.support[:, 0]
        return float(np.sqrt(np.sum(widths**2)))

    def __repr__(self):
        parts = ", ".join(
            f"{m.kind}[{m.lo:g},{m.hi:g}]"
            + (f"(a={m.a:g},b={m.b:g})" if m.kind == "beta" else "")
            for m in self.marginals
        )
        return f"DensityModel({parts})"


def uniform_box(support):
    """Uniform density on a box given as [(lo, hi), ...]."""
    return DensityModel([Marginal("uniform", lo, hi) for lo, hi in support])


def beta_box(params, support):
    """Product of Beta(a, b) marginals rescaled onto the given intervals."""
    if len(params) != len(support):
        raise ValueError("one (a, b) pair per dimension required")
    return DensityModel(
        [
            Marginal("beta", lo, hi, a=a, b=b)
            for (a, b), (lo, hi) in zip(params, support)
        ]
    )
