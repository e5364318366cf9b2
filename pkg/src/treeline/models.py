"""Built-in test models: Genz functions, piecewise-constant shapes, and a
1D shallow-water dam-break solver.

All models realize the ModelAdapter contract (point in the random space ->
scalar QoI). Analytic models also provide vectorized batch evaluation; the
shallow-water QoI runs one finite-volume simulation per point. A subprocess
adapter attaches external solvers: one line of space-separated coordinates on
stdin, one decimal QoI value on stdout.
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass, field

import numpy as np

from .errors import CflViolation, DryState, GenerationFailed
from .sampler import ModelAdapter

__all__ = [
    "GenzSpec",
    "ShapeSpec",
    "SweSpec",
    "genz_eval",
    "shape_eval",
    "shape_region",
    "random_shape_family",
    "swe_riemann_star",
    "swe_solve",
    "swe_profile",
    "make_model",
    "PiecewiseConstantFunction",
]

GRAVITY = 9.81


# ---------------------------------------------------------------------------
# Genz functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenzSpec:
    """Genz test function selector; multidimensional variants are tensor
    products of the 1D function applied per coordinate."""

    which: str
    alpha: float = 2.0
    beta: float = 0.2
    dim: int = 1

    def __post_init__(self):
        if self.which not in ("g1", "g3", "g5", "g6"):
            raise ValueError(f"unknown Genz function {self.which!r}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


def _genz_1d(which, alpha, beta, x):
    if which == "g1":
        return np.cos(alpha * x)
    if which == "g3":
        return (1.0 / (1.0 + alpha * x)) ** (1.0 + beta)
    if which == "g5":
        return np.exp(-(alpha * np.abs(x) - beta))
    # g6: 0 past the break point, exponential otherwise
    return np.where(x > beta, 0.0, np.exp(alpha * x))


def genz_eval(spec, z):
    """Evaluate a Genz function at z, shape (d,) or (n, d)."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    out = np.ones(z.shape[0])
    for k in range(z.shape[1]):
        out = out * _genz_1d(spec.which, spec.alpha, spec.beta, z[:, k])
    return out if out.size > 1 else float(out[0])


# ---------------------------------------------------------------------------
# Piecewise-constant 2D shapes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShapeSpec:
    """Piecewise-constant 2D function with a circle/square/triangle region.

    radius is the circle radius or the square half-side; triangles are given
    by three vertices. The boundary counts as inside.
    """

    shape: str
    center: tuple = (0.0, 0.0)
    radius: float = 0.5
    vertices: tuple = ((-0.5, -0.5), (0.5, -0.5), (0.0, 0.5))
    inside_value: float = 1.0
    outside_value: float = 0.0

    def __post_init__(self):
        if self.shape not in ("circle", "square", "triangle"):
            raise ValueError(f"unknown shape {self.shape!r}")


def _inside_mask(spec, z):
    z = np.atleast_2d(np.asarray(z, dtype=float))
    if spec.shape == "circle":
        r2 = np.sum((z - np.asarray(spec.center)) ** 2, axis=1)
        return r2 <= spec.radius**2
    if spec.shape == "square":
        d = np.abs(z - np.asarray(spec.center))
        return np.all(d <= spec.radius, axis=1)
    a, b, c = (np.asarray(v, dtype=float) for v in spec.vertices)
    # consistent-orientation half-plane tests, boundary inclusive
    def cross(p, q, x):
        return (q[0] - p[0]) * (x[:, 1] - p[1]) - (q[1] - p[1]) * (x[:, 0] - p[0])

    s1, s2, s3 = cross(a, b, z), cross(b, c, z), cross(c, a, z)
    pos = (s1 >= 0) & (s2 >= 0) & (s3 >= 0)
    neg = (s1 <= 0) & (s2 <= 0) & (s3 <= 0)
    return pos | neg


def shape_eval(spec, z):
    """inside_value on and inside the shape boundary, outside_value elsewhere."""
    mask = _inside_mask(spec, z)
    out = np.where(mask, spec.inside_value, spec.outside_value)
    return out if out.size > 1 else float(out[0])


def shape_region(spec, z):
    """Region ids (1 inside, 0 outside) for classification truth."""
    mask = _inside_mask(spec, z)
    out = mask.astype(int)
    return out if out.size > 1 else int(out[0])


# ---------------------------------------------------------------------------
# Random family of piecewise-constant functions
# ---------------------------------------------------------------------------

class PiecewiseConstantFunction:
    """Bands of [-1,1]^2 cut by non-intersecting polynomial curves.

    Each curve is the parametric graph (t, p(t)) (or (p(t), t) when the
    orientation is flipped) of a polynomial p of degree <= 5. The region id
    of a point is the number of curves lying below it (in the oriented
    frame); every band carries a distinct constant value.
    """

    def __init__(self, coeff_list, axis, values):
        self.coeffs = [np.asarray(c, dtype=float) for c in coeff_list]
        self.axis = int(axis)
        self.values = np.asarray(values, dtype=float)

    @property
    def n_regions(self):
        return len(self.coeffs) + 1

    def _curve_values(self, t):
        return np.array([np.polyval(c, t) for c in self.coeffs])

    def region(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=float))
        t = z[:, self.axis]
        s = z[:, 1 - self.axis]
        curves = self._curve_values(t)  # (n_curves, n)
        out = np.sum(s[None, :] > curves, axis=0)
        return out if out.size > 1 else int(out[0])

    def __call__(self, z):
        reg = np.atleast_1d(self.region(z))
        out = self.values[reg]
        return out if out.size > 1 else float(out[0])


def random_shape_family(seed, count, max_curves=3, max_degree=5, n_check=512,
                        min_separation=1e-3, min_curves=1):
    """Deterministically generate `count` piecewise-constant functions.

    Curves are drawn with random coefficients and rejected until, on an
    n_check-point grid, (a) every pair stays separated by min_separation and
    (b) every curve actually enters the box. Region values are distinct
    members of {0, 1, 2, 3}, so adjacent bands always jump by at least 1.
    """
    rng = np.random.default_rng(seed)
    grid = np.linspace(-1.0, 1.0, n_check)
    funcs = []
    rejections = 0
    while len(funcs) < count:
        if rejections > 10_000:
            raise GenerationFailed("rejection budget exhausted generating curve sets")
        n_curves = int(rng.integers(min_curves, max_curves + 1))
        axis = int(rng.integers(0, 2))
        coeff_list = []
        for _ in range(n_curves):
            degree = int(rng.integers(1, max_degree + 1))
            coeffs = rng.uniform(-0.8, 0.8, size=degree + 1)
            # taper high-order terms so curves wander but rarely blow up
            for k in range(degree + 1):
                coeffs[k] /= max(1, degree - k)
            coeff_list.append(coeffs)
        curve_vals = np.array([np.polyval(c, grid) for c in coeff_list])
        if np.any(np.min(curve_vals, axis=1) > 1.0) or np.any(
            np.max(curve_vals, axis=1) < -1.0
        ):
            rejections += 1
            continue
        ok = True
        for i in range(n_curves):
            for j in range(i + 1, n_curves):
                if np.min(np.abs(curve_vals[i] - curve_vals[j])) < min_separation:
                    ok = False
        if not ok:
            rejections += 1
            continue
        order = np.argsort(curve_vals[:, 0])
        coeff_list = [coeff_list[k] for k in order]
        values = rng.permutation(4)[: n_curves + 1]
        funcs.append(PiecewiseConstantFunction(coeff_list, axis, values))
        rejections = 0
    return funcs


# ---------------------------------------------------------------------------
# 1D shallow-water equations: exact Riemann solver + Godunov finite volumes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweSpec:
    """Dam-break QoI: fluid height at the left wall at time t_star.

    The initial state is (h_l, v_l) for x <= 0 and (h_right, v_right) for
    x > 0 on the domain, with reflective walls at both ends.
    """

    t_star: float
    n_cells: int = 256
    domain: tuple = (-1.0, 1.0)
    g: float = GRAVITY
    h_right: float = 1.0
    v_right: float = 0.0
    cfl: float = 0.45
    order: int = 2

    def __post_init__(self):
        if self.t_star <= 0:
            raise ValueError("t_star must be positive")
        if self.n_cells < 16:
            raise ValueError("need at least 16 cells")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")


def _depth_fun(h, hk, g):
    """Toro depth function f_K and derivative for one side of the fan."""
    shock = h > hk
    sq = np.sqrt(0.5 * g * (h + hk) / (h * hk))
    f = np.where(shock, (h - hk) * sq, 2.0 * (np.sqrt(g * h) - np.sqrt(g * hk)))
    fp = np.where(shock, sq - 0.25 * g * (h - hk) / (h * h * sq), np.sqrt(g / h))
    return f, fp


def _star_state(hl, vl, hr, vr, g):
    """Vectorized star region (h*, v*) of the SWE Riemann problem."""
    cl = np.sqrt(g * hl)
    cr = np.sqrt(g * hr)
    if np.any(vr - vl >= 2.0 * (cl + cr)):
        raise DryState("initial states would generate a dry bed")
    # two-rarefaction estimate is a robust Newton start
    h = (0.5 * (cl + cr) + 0.25 * (vl - vr)) ** 2 / g
    h = np.maximum(h, 1e-12)
    for _ in range(100):
        fl, fpl = _depth_fun(h, hl, g)
        fr, fpr = _depth_fun(h, hr, g)
        f = fl + fr + (vr - vl)
        h_new = h - f / (fpl + fpr)
        h_new = np.maximum(h_new, 0.1 * h)  # keep Newton on the positive branch
        done = np.all(np.abs(h_new - h) <= 1e-12 * h_new)
        h = h_new
        if done:
            break
    fl, _ = _depth_fun(h, hl, g)
    fr, _ = _depth_fun(h, hr, g)
    v = 0.5 * (vl + vr) + 0.5 * (fr - fl)
    return h, v


def swe_riemann_star(h_l, v_l, h_r, v_r, g=GRAVITY):
    """Exact star state and wave types for a single Riemann problem.

    Returns ((h*, v*), (left_wave, right_wave)) with wave type "shock" when
    the star depth exceeds the adjacent state's depth, else "rarefaction".
    Raises DryState when the two-rarefaction positivity criterion fails.
    """
    if h_l <= 0 or h_r <= 0:
        raise DryState("both initial depths must be positive")
    hs, vs = _star_state(
        np.array([float(h_l)]),
        np.array([float(v_l)]),
        np.array([float(h_r)]),
        np.array([float(v_r)]),
        g,
    )
    hs, vs = float(hs[0]), float(vs[0])
    left = "shock" if hs > h_l else "rarefaction"
    right = "shock" if hs > h_r else "rarefaction"
    return (hs, vs), (left, right)


def _sample_interface(hl, vl, hr, vr, hs, vs, g):
    """State at x/t = 0 of the wave fan (vectorized Toro sampler)."""
    cl = np.sqrt(g * hl)
    cr = np.sqrt(g * hr)
    cs = np.sqrt(g * hs)
    h0 = np.empty_like(hl)
    v0 = np.empty_like(vl)

    left_side = vs >= 0.0
    # left wave
    shock = hs > hl
    s_shock = vl - np.sqrt(0.5 * g * (hs + hl) * hs / hl)
    use_state = shock & (s_shock >= 0.0)
    head = vl - cl
    tail = vs - cs
    use_state |= (~shock) & (head >= 0.0)
    use_star = (shock & (s_shock < 0.0)) | ((~shock) & (tail <= 0.0))
    c_fan = (vl + 2.0 * cl) / 3.0
    in_fan = left_side & ~(use_state | use_star)
    m = left_side & use_state
    h0[m], v0[m] = hl[m], vl[m]
    m = left_side & use_star & ~use_state
    h0[m], v0[m] = hs[m], vs[m]
    h0[in_fan], v0[in_fan] = c_fan[in_fan] ** 2 / g, c_fan[in_fan]

    right_side = ~left_side
    shock = hs > hr
    s_shock = vr + np.sqrt(0.5 * g * (hs + hr) * hs / hr)
    use_state = shock & (s_shock <= 0.0)
    head = vr + cr
    tail = vs + cs
    use_state |= (~shock) & (head <= 0.0)
    use_star = (shock & (s_shock > 0.0)) | ((~shock) & (tail >= 0.0))
    c_fan = (2.0 * cr - vr) / 3.0
    in_fan = right_side & ~(use_state | use_star)
    m = right_side & use_state
    h0[m], v0[m] = hr[m], vr[m]
    m = right_side & use_star & ~use_state
    h0[m], v0[m] = hs[m], vs[m]
    h0[in_fan], v0[in_fan] = c_fan[in_fan] ** 2 / g, -c_fan[in_fan]
    return h0, v0


def _godunov_fluxes(h, v, g):
    """Interface fluxes for cell states (h, v), ghosts included.

    Interfaces whose left and right states are bitwise equal short-circuit
    to the plain physical flux; only genuinely jumping interfaces run the
    exact Riemann solver.
    """
    hl, hr = h[:-1], h[1:]
    vl, vr = v[:-1], v[1:]
    h0, v0 = hl.copy(), vl.copy()
    jump = (hl != hr) | (vl != vr)
    if np.any(jump):
        idx = np.flatnonzero(jump)
        hs, vs = _star_state(hl[idx], vl[idx], hr[idx], vr[idx], g)
        h0[idx], v0[idx] = _sample_interface(
            hl[idx], vl[idx], hr[idx], vr[idx], hs, vs, g
        )
    flux_h = h0 * v0
    flux_q = h0 * v0 * v0 + 0.5 * g * h0 * h0
    return flux_h, flux_q


def _advance_window(h, q, lo, hi, dt, dx, g):
    """One forward-Euler Godunov update of cells [lo, hi); returns new arrays.

    States outside the window are untouched; the window must contain every
    jumping interface plus one quiescent interface on each side, so skipped
    fluxes cancel exactly.
    """
    n = len(h)
    hw = h[max(lo - 1, 0) : min(hi + 1, n)]
    qw = q[max(lo - 1, 0) : min(hi + 1, n)]
    # reflective ghosts (mirror depth, negate velocity) at true walls only
    pad_lo = [h[0]] if lo == 0 else []
    pad_hi = [h[-1]] if hi == n else []
    hg = np.concatenate((pad_lo, hw, pad_hi))
    qg = np.concatenate(([-q[0]] if lo == 0 else [], qw, [-q[-1]] if hi == n else []))
    vg = qg / hg
    fh, fq = _godunov_fluxes(hg, vg, g)
    h_new = h.copy()
    q_new = q.copy()
    h_new[lo:hi] = h[lo:hi] - dt / dx * (fh[1:] - fh[:-1])
    q_new[lo:hi] = q[lo:hi] - dt / dx * (fq[1:] - fq[:-1])
    return h_new, q_new


def swe_profile(spec, h_l, v_l, full_output=False):
    """Height profile at t_star for the dam-break initial condition.

    Godunov fluxes from the exact Riemann solver; two-stage second-order
    time stepping (spec.order == 2) or forward Euler (order == 1); CFL-
    limited steps with the final step truncated to land exactly on t_star.
    """
    if h_l <= 0 or spec.h_right <= 0:
        raise DryState("initial depths must be positive")
    n = spec.n_cells
    x_lo, x_hi = spec.domain
    dx = (x_hi - x_lo) / n
    centers = x_lo + dx * (np.arange(n) + 0.5)
    h = np.where(centers <= 0.0, float(h_l), spec.h_right)
    q = np.where(centers <= 0.0, float(h_l) * float(v_l), spec.h_right * spec.v_right)

    # active window: the initial jump plus the walls when fluid moves there
    jumps = list(np.flatnonzero((h[1:] != h[:-1]) | (q[1:] != q[:-1])))
    if v_l != 0.0:
        jumps.append(-1)  # left wall interface
    if spec.v_right != 0.0:
        jumps.append(n - 1)
    if not jumps:
        # exact equilibrium: nothing ever moves
        diag = {"steps": 0, "max_mass_drift": 0.0}
        return (h, diag) if full_output else h
    lo = max(min(jumps), 0)
    hi = min(max(jumps) + 2, n)

    quiet_speed = float(
        np.max(np.abs(q / h) + np.sqrt(spec.g * h))
    )  # initial piecewise-constant states bound quiescent regions forever
    t = 0.0
    steps = 0
    max_drift = 0.0
    mass_prev = float(h.sum()) * dx
    while t < spec.t_star - 1e-15 * spec.t_star:
        # CFL < 0.5 keeps waves under half a cell per stage; widening by two
        # cells before stepping covers both stages of the update
        lo = max(lo - 2, 0)
        hi = min(hi + 2, n)
        hw = h[lo:hi]
        if np.any(hw <= 0.0):
            raise DryState(f"dry cell at t={t:.6g}")
        smax = max(float(np.max(np.abs(q[lo:hi] / hw) + np.sqrt(spec.g * hw))), quiet_speed)
        if not np.isfinite(smax) or smax <= 0.0:
            raise CflViolation(f"invalid wave speed {smax} at t={t:.6g}")
        dt = min(spec.cfl * dx / smax, spec.t_star - t)
        if spec.order == 1:
            h, q = _advance_window(h, q, lo, hi, dt, dx, spec.g)
        else:
            h1, q1 = _advance_window(h, q, lo, hi, dt, dx, spec.g)
            h2, q2 = _advance_window(h1, q1, lo, hi, dt, dx, spec.g)
            h = 0.5 * (h + h2)
            q = 0.5 * (q + q2)
        t += dt
        steps += 1
        if full_output:
            mass = float(h.sum()) * dx
            max_drift = max(max_drift, abs(mass - mass_prev))
            mass_prev = mass
    if full_output:
        return h, {"steps": steps, "max_mass_drift": max_drift}
    return h


def swe_solve(spec, h_l, v_l):
    """QoI: fluid height in the first cell (the x = domain-left wall)."""
    return float(swe_profile(spec, h_l, v_l)[0])


# ---------------------------------------------------------------------------
# Model registry
# ---------------------------------------------------------------------------

def _genz_adapter(which, alpha, beta, dim):
    spec = GenzSpec(which, alpha=alpha, beta=beta, dim=dim)
    return ModelAdapter(
        name=f"genz:{which}",
        fn=lambda z: genz_eval(spec, z),
        batch_fn=lambda Z: np.atleast_1d(genz_eval(spec, Z)),
        cost_hint=1.0,
    )


def _shape_adapter(shape, **kwargs):
    spec = ShapeSpec(shape, **kwargs)
    adapter = ModelAdapter(
        name=f"shape:{shape}",
        fn=lambda z: shape_eval(spec, z),
        batch_fn=lambda Z: np.atleast_1d(shape_eval(spec, Z)),
        cost_hint=1.0,
        region_fn=lambda Z: np.atleast_1d(shape_region(spec, Z)),
    )
    adapter.shape_spec = spec
    return adapter


def _swe_adapter(t_star, n_cells, order):
    spec = SweSpec(t_star=t_star, n_cells=n_cells, order=order)
    return ModelAdapter(
        name="swe",
        fn=lambda z: swe_solve(spec, z[0], z[1]),
        cost_hint=1000.0,
    )


def _exec_adapter(command):
    argv = shlex.split(command)

    def run_one(z):
        line = " ".join(format(c, ".17g") for c in np.atleast_1d(z)) + "\n"
        proc = subprocess.run(
            argv, input=line, capture_output=True, text=True, timeout=600
        )
        if proc.returncode != 0:
            raise RuntimeError(
                f"command exited with status {proc.returncode}: {proc.stderr.strip()}"
            )
        return float(proc.stdout.strip().split()[0])

    return ModelAdapter(name=f"exec:{command}", fn=run_one, cost_hint=1000.0)


def make_model(name, alpha=2.0, beta=0.2, dim=1, t_star=1.67, n_cells=256,
               order=2, **shape_kwargs):
    """Build a ModelAdapter from its registry name.

    Names: "genz:g1" | "genz:g3" | "genz:g5" | "genz:g6" | "shape:circle" |
    "shape:square" | "shape:triangle" | "swe" | "exec:<command>".
    """
    if name.startswith("genz:"):
        return _genz_adapter(name.split(":", 1)[1], alpha, beta, dim)
    if name.startswith("shape:"):
        return _shape_adapter(name.split(":", 1)[1], **shape_kwargs)
    if name == "swe":
        return _swe_adapter(t_star, n_cells, order)
    if name.startswith("exec:"):
        return _exec_adapter(name.split(":", 1)[1])
    raise ValueError(f"unknown model name {name!r}")
