"""Global surrogate: per-class local interpolants patched by the classifier.

Evaluation routes a point to exactly one element (the SVM decision region,
or the single global element for a smooth QoI) and returns that element's
local interpolant value. Surrogates serialize to a versioned structured-text
file with all reals at 17 significant digits, so a round trip reproduces
evaluations to machine precision.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field

import numpy as np

from . import interp as interp_mod
from . import svm as svm_mod
from .density import DensityModel, Marginal
from .errors import CorruptFile, OutOfSupport, SchemaVersionMismatch
from .interp import Interpolant, PolyBasis, build_basis
from .sampler import SampleSet

__all__ = ["Surrogate", "SvmConfig", "build", "evaluate", "evaluate_many", "save", "load"]

FORMAT_HEADER = "treeline-surrogate"
FORMAT_VERSION = 1
_REAL = "{:.17g}".format


@dataclass
class SvmConfig:
    gamma: float = None  # None = 3/N_c heuristic
    literature: bool = False  # use 1/N_c instead
    C: float = svm_mod.DEFAULT_C
    kernel: str = "rbf"


@dataclass
class Surrogate:
    density: DensityModel
    samples: SampleSet
    svm: object  # SvmModel or None when single-class
    locals: dict  # class id -> Interpolant
    metadata: dict = field(default_factory=dict)

    @property
    def n_classes(self):
        return len(self.locals)


def build(samples, labels, density, svm_config=None):
    """Assemble the surrogate: SVM over the labels (when N_c >= 2) plus one
    local interpolant per class, fitted on that class's samples."""
    svm_config = svm_config or SvmConfig()
    labels = np.asarray(labels, dtype=int)
    class_ids = sorted(set(int(c) for c in labels))
    assert all((labels == c).any() for c in class_ids), "empty class in labeling"

    model = None
    if len(class_ids) >= 2:
        gamma = svm_config.gamma
        if gamma is None:
            gamma = svm_mod.default_gamma(len(class_ids), literature=svm_config.literature)
        spec = svm_mod.KernelSpec(kind=svm_config.kernel, gamma=gamma)
        model = svm_mod.train(samples.points, labels, spec=spec, C=svm_config.C)

    locals_ = {}
    for c in class_ids:
        mask = labels == c
        locals_[c] = interp_mod.fit(samples.points[mask], samples.values[mask], density)

    stamped = SampleSet(
        points=samples.points,
        values=samples.values,
        iteration_of=samples.iteration_of,
        labels=labels,
    )
    meta = {
        "built": datetime.datetime.now().isoformat(timespec="seconds"),
        "n_classes": str(len(class_ids)),
        "svm_gamma": _REAL(model.spec.gamma) if model is not None else "",
        "svm_C": _REAL(svm_config.C) if model is not None else "",
    }
    return Surrogate(density=density, samples=stamped, svm=model, locals=locals_, metadata=meta)


def evaluate(surrogate, z):
    """Surrogate value at a single point inside the support box."""
    z = np.asarray(z, dtype=float).reshape(-1)
    if not surrogate.density.contains(z):
        raise OutOfSupport(f"point {z.tolist()} outside the support box")
    if surrogate.svm is None:
        (interpolant,) = surrogate.locals.values()
        return float(interpolant(z[None, :]))
    cls = svm_mod.predict(surrogate.svm, z[None, :])
    return float(surrogate.locals[cls](z[None, :]))


def evaluate_many(surrogate, z):
    """Vectorized evaluation for an (n, d) array of in-support points."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    inside = surrogate.density.contains(z)
    if not np.all(np.atleast_1d(inside)):
        raise OutOfSupport("points outside the support box")
    if surrogate.svm is None:
        (interpolant,) = surrogate.locals.values()
        return np.atleast_1d(interpolant(z))
    classes = svm_mod.predict_many(surrogate.svm, z)
    out = np.empty(len(z))
    for c, interpolant in surrogate.locals.items():
        mask = classes == c
        if mask.any():
            out[mask] = np.atleast_1d(interpolant(z[mask]))
    return out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _fmt_reals(values):
    return " ".join(_REAL(float(v)) for v in np.atleast_1d(values))


def save(surrogate, path):
    """Write the surrogate as a versioned structured-text document."""
    lines = [FORMAT_HEADER, f"version = {FORMAT_VERSION}"]

    lines.append("[density]")
    lines.append(f"dim = {surrogate.density.dim}")
    for m in surrogate.density.marginals:
        if m.kind == "uniform":
            lines.append(f"marginal = uniform {_fmt_reals([m.lo, m.hi])}")
        else:
            lines.append(f"marginal = beta {_fmt_reals([m.lo, m.hi, m.a, m.b])}")

    s = surrogate.samples
    labels = s.labels if s.labels is not None else np.zeros(len(s), dtype=int)
    lines.append("[samples]")
    lines.append(f"count = {len(s)}")
    for k in range(len(s)):
        lines.append(
            f"{_fmt_reals(s.points[k])} {_REAL(float(s.values[k]))} "
            f"{int(labels[k])} {int(s.iteration_of[k])}"
        )

    lines.append("[svm]")
    if surrogate.svm is None:
        lines.append("pairs = 0")
    else:
        model = surrogate.svm
        lines.append(f"pairs = {len(model.classifiers)}")
        lines.append(f"kernel = {model.spec.kind}")
        lines.append(f"gamma = {_REAL(model.spec.gamma)}")
        lines.append(f"c_t = {_REAL(model.spec.c_t)}")
        lines.append(f"r = {int(model.spec.r)}")
        lines.append(f"C = {_REAL(model.C)}")
        lines.append(f"classes = {' '.join(str(c) for c in model.class_ids)}")
        for clf in model.classifiers:
            lines.append(f"pair = {clf.class_lo} {clf.class_hi}")
            lines.append(f"bias = {_REAL(clf.bias)}")
            lines.append(f"nsv = {len(clf.sv_coef)}")
            for coef, pt in zip(clf.sv_coef, clf.sv_points):
                lines.append(f"{_REAL(coef)} {_fmt_reals(pt)}")

    lines.append("[locals]")
    lines.append(f"count = {len(surrogate.locals)}")
    for c in sorted(surrogate.locals):
        itp = surrogate.locals[c]
        lines.append(
            f"local = {c} {itp.basis.n_terms} {itp.max_degree_reached}"
        )
        for idx, coef in zip(itp.basis.multi_indices, itp.coefficients):
            lines.append(f"{' '.join(str(int(i)) for i in idx)} {_REAL(coef)}")

    lines.append("[meta]")
    for key in sorted(surrogate.metadata):
        lines.append(f"{key} = {surrogate.metadata[key]}")
    lines.append("[end]")

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


class _Reader:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def next(self):
        if self.pos >= len(self.lines):
            raise CorruptFile("unexpected end of file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect_kv(self, key):
        line = self.next()
        prefix = key + " ="
        if not line.startswith(prefix):
            raise CorruptFile(f"expected '{key} = ...', got {line!r}")
        return line[len(prefix):].strip()

    def expect(self, literal):
        line = self.next()
        if line != literal:
            raise CorruptFile(f"expected {literal!r}, got {line!r}")


def load(path):
    """Read a surrogate file written by save()."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip() != ""]
    rd = _Reader(lines)
    try:
        if rd.next() != FORMAT_HEADER:
            raise CorruptFile("missing format header")
        version = int(rd.expect_kv("version"))
        if version != FORMAT_VERSION:
            raise SchemaVersionMismatch(f"file version {version}, expected {FORMAT_VERSION}")

        rd.expect("[density]")
        dim = int(rd.expect_kv("dim"))
        marginals = []
        for _ in range(dim):
            parts = rd.expect_kv("marginal").split()
            if parts[0] == "uniform":
                marginals.append(Marginal("uniform", float(parts[1]), float(parts[2])))
            elif parts[0] == "beta":
                marginals.append(
                    Marginal("beta", float(parts[1]), float(parts[2]),
                             a=float(parts[3]), b=float(parts[4]))
                )
            else:
                raise CorruptFile(f"unknown marginal kind {parts[0]!r}")
        density = DensityModel(marginals)

        rd.expect("[samples]")
        count = int(rd.expect_kv("count"))
        pts, vals, labs, iters = [], [], [], []
        for _ in range(count):
            parts = rd.next().split()
            if len(parts) != dim + 3:
                raise CorruptFile("malformed sample row")
            pts.append([float(p) for p in parts[:dim]])
            vals.append(float(parts[dim]))
            labs.append(int(parts[dim + 1]))
            iters.append(int(parts[dim + 2]))
        samples = SampleSet(
            points=np.array(pts).reshape(count, dim),
            values=np.array(vals),
            iteration_of=np.array(iters, dtype=int),
            labels=np.array(labs, dtype=int),
        )

        rd.expect("[svm]")
        n_pairs = int(rd.expect_kv("pairs"))
        model = None
        if n_pairs > 0:
            kind = rd.expect_kv("kernel")
            gamma = float(rd.expect_kv("gamma"))
            c_t = float(rd.expect_kv("c_t"))
            r = int(rd.expect_kv("r"))
            c_penalty = float(rd.expect_kv("C"))
            class_ids = [int(v) for v in rd.expect_kv("classes").split()]
            spec = svm_mod.KernelSpec(kind=kind, gamma=gamma, c_t=c_t, r=r)
            classifiers = []
            for _ in range(n_pairs):
                lo, hi = (int(v) for v in rd.expect_kv("pair").split())
                bias = float(rd.expect_kv("bias"))
                nsv = int(rd.expect_kv("nsv"))
                coefs, svp = [], []
                for _ in range(nsv):
                    parts = rd.next().split()
                    coefs.append(float(parts[0]))
                    svp.append([float(p) for p in parts[1:]])
                classifiers.append(
                    svm_mod.PairClassifier(
                        class_lo=lo,
                        class_hi=hi,
                        sv_points=np.array(svp).reshape(nsv, dim),
                        sv_coef=np.array(coefs),
                        bias=bias,
                        kkt_violation=float("nan"),
                        dual_objective=float("nan"),
                    )
                )
            model = svm_mod.SvmModel(
                class_ids=class_ids, classifiers=classifiers, spec=spec, C=c_penalty
            )

        rd.expect("[locals]")
        n_locals = int(rd.expect_kv("count"))
        locals_ = {}
        for _ in range(n_locals):
            head = rd.expect_kv("local").split()
            cls, n_terms, max_degree = int(head[0]), int(head[1]), int(head[2])
            indices, coeffs = [], []
            for _ in range(n_terms):
                parts = rd.next().split()
                indices.append([int(v) for v in parts[:dim]])
                coeffs.append(float(parts[dim]))
            full = build_basis(density, max_degree)
            basis = PolyBasis(full.families, np.array(indices, dtype=int).reshape(n_terms, dim))
            locals_[cls] = Interpolant(
                basis=basis,
                coefficients=np.array(coeffs),
                selected_sample_ids=np.empty(0, dtype=int),
                max_degree_reached=max_degree,
                condition=float("nan"),
            )

        rd.expect("[meta]")
        meta = {}
        while True:
            line = rd.next()
            if line == "[end]":
                break
            if "=" not in line:
                raise CorruptFile(f"malformed meta line {line!r}")
            key, _, value = line.partition("=")
            meta[key.strip()] = value.strip()
    except (SchemaVersionMismatch, CorruptFile):
        raise
    except (ValueError, IndexError) as exc:
        raise CorruptFile(f"malformed surrogate file: {exc}") from exc
    return Surrogate(density=density, samples=samples, svm=model, locals=locals_, metadata=meta)
