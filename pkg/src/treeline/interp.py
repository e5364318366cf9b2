"""Stable polynomial interpolation on scattered samples.

The basis is the tensor product of 1D polynomials orthonormal with respect
to the input density (Legendre recurrences for uniform marginals, Jacobi for
beta), in graded lexicographic order. Fitting selects, per total degree, the
best-conditioned square subsystem of the generalized Vandermonde matrix via
column-pivoted QR row selection, and keeps raising the degree while the
selected subsystem's condition number stays within kappa_max. The fit
interpolates the selected samples exactly; leftover samples are unused, which
is what keeps the interpolant stable on arbitrary node sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import UnsupportedDensity

__all__ = ["PolyBasis", "Interpolant", "build_basis", "fit", "KAPPA_MAX"]

KAPPA_MAX = 1e8


def _jacobi_recurrence(alpha, beta, n):
    """Monic three-term recurrence (a_k, b_k) for the Jacobi weight
    (1-x)^alpha (1+x)^beta on [-1, 1], with b_0 = 1 (probability measure)."""
    a = np.zeros(n)
    b = np.ones(n)
    if n == 0:
        return a, b
    ab = alpha + beta
    a[0] = (beta - alpha) / (ab + 2.0)
    if n > 1:
        b[1] = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) ** 2 * (ab + 3.0))
    for k in range(1, n):
        den = 2.0 * k + ab
        a[k] = (beta**2 - alpha**2) / (den * (den + 2.0))
        if k >= 2:
            b[k] = (
                4.0 * k * (k + alpha) * (k + beta) * (k + ab)
                / (den**2 * (den + 1.0) * (den - 1.0))
            )
    return a, b


@dataclass(frozen=True)
class _Family1D:
    """Orthonormal 1D family on [lo, hi]: recurrence + affine map."""

    rec_a: np.ndarray
    sqrt_b: np.ndarray
    lo: float
    hi: float

    def evaluate(self, z, max_order):
        """Table P[:, k] of orthonormal polynomial values, k = 0..max_order."""
        z = np.asarray(z, dtype=float)
        x = (2.0 * z - (self.lo + self.hi)) / (self.hi - self.lo)
        table = np.empty((len(x), max_order + 1))
        table[:, 0] = 1.0
        if max_order >= 1:
            table[:, 1] = (x - self.rec_a[0]) / self.sqrt_b[1]
        for k in range(1, max_order):
            table[:, k + 1] = (
                (x - self.rec_a[k]) * table[:, k] - self.sqrt_b[k] * table[:, k - 1]
            ) / self.sqrt_b[k + 1]
        return table


def _as_points(z, dim):
    """Coerce z to an (n, dim) array; a flat length-dim vector is one point."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        z = z[None]
    if z.ndim == 1:
        z = z[None, :] if (dim > 1 and len(z) == dim) else z[:, None]
    if z.ndim != 2 or z.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {z.shape}")
    return z


def _graded_multi_indices(dim, degree):
    """All multi-indices with total degree <= degree, graded lex order."""
    indices = []

    def rec(prefix, remaining, dims_left):
        if dims_left == 0:
            indices.append(tuple(prefix))
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, dims_left - 1)

    for total in range(degree + 1):
        block = []

        def rec_total(prefix, left, dims_left):
            if dims_left == 1:
                block.append(tuple(prefix + [left]))
                return
            for k in range(left + 1):
                rec_total(prefix + [k], left - k, dims_left - 1)

        rec_total([], total, dim)
        indices.extend(sorted(block))
    return np.array(indices, dtype=int)


class PolyBasis:
    """Tensor basis orthonormal w.r.t. a product density."""

    def __init__(self, families, multi_indices):
        self.families = families
        self.multi_indices = multi_indices
        self.dim = len(families)
        self.max_degree = int(multi_indices.sum(axis=1).max()) if len(multi_indices) else 0

    @property
    def n_terms(self):
        return len(self.multi_indices)

    def truncated(self, n_terms):
        return PolyBasis(self.families, self.multi_indices[:n_terms])

    def evaluate(self, z):
        """Design matrix V[i, j] = phi_j(z_i) for z of shape (n, d)."""
        z = _as_points(z, self.dim)
        tables = [
            fam.evaluate(z[:, k], self.max_degree)
            for k, fam in enumerate(self.families)
        ]
        out = np.ones((len(z), self.n_terms))
        for k in range(self.dim):
            out *= tables[k][:, self.multi_indices[:, k]]
        return out


def build_basis(density, max_total_degree):
    """Orthonormal tensor basis for a uniform/beta product density."""
    families = []
    for m in density.marginals:
        if m.kind == "uniform":
            a, b = _jacobi_recurrence(0.0, 0.0, max_total_degree + 1)
        elif m.kind == "beta":
            # Beta(a, b) mapped onto [-1, 1] carries the Jacobi weight with
            # alpha = b - 1 (exponent of (1-x)) and beta = a - 1
            a, b = _jacobi_recurrence(m.b - 1.0, m.a - 1.0, max_total_degree + 1)
        else:
            raise UnsupportedDensity(f"no polynomial family for {m.kind!r}")
        families.append(_Family1D(a, np.sqrt(b), m.lo, m.hi))
    return PolyBasis(families, _graded_multi_indices(density.dim, max_total_degree))


@dataclass
class Interpolant:
    basis: PolyBasis
    coefficients: np.ndarray
    selected_sample_ids: np.ndarray
    max_degree_reached: int
    condition: float

    def __call__(self, z):
        out = self.basis.evaluate(z) @ self.coefficients
        return out if out.size > 1 else float(out[0])


def _count_terms(dim, degree):
    return math.comb(degree + dim, dim)


def fit(points, values, density, kappa_max=KAPPA_MAX):
    """Condition-bounded interpolant on a scattered sample set.

    Degree grows greedily: for each total degree the candidate square
    subsystem is the QR-pivot row selection of the Vandermonde matrix, and
    growth stops when its condition number would exceed kappa_max or the
    basis outgrows the sample count. Degenerate inputs degrade to degree 0.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    values = np.asarray(values, dtype=float)
    n, dim = points.shape

    max_possible = 0
    while _count_terms(dim, max_possible + 1) <= n:
        max_possible += 1
    basis_full = build_basis(density, max_possible)
    v_full = basis_full.evaluate(points)

    best = None
    for degree in range(max_possible + 1):
        m = _count_terms(dim, degree)
        v = v_full[:, :m]
        if m == 1:
            rows = np.array([0])
        else:
            _, _, piv = scipy.linalg.qr(v.T, pivoting=True, mode="economic")
            rows = np.sort(piv[:m])
        square = v[rows, :]
        cond = float(np.linalg.cond(square))
        if cond > kappa_max:
            break
        best = (degree, rows, cond)
    degree, rows, cond = best
    m = _count_terms(dim, degree)
    square = v_full[np.ix_(rows, range(m))]
    coeffs = np.linalg.solve(square, values[rows])
    return Interpolant(
        basis=basis_full.truncated(m),
        coefficients=coeffs,
        selected_sample_ids=rows,
        max_degree_reached=degree,
        condition=cond,
    )
