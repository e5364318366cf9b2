"""Command-line driver: run, evaluate, convergence, gamma-study.

A single INI-style config file (key = value under sections) fully determines
a run; all randomness flows from one 64-bit seed through numpy's PCG64
generator (fixed offsets derive the per-purpose streams). Reports record
every resolved default so results carry no hidden state.

Exit codes: 0 success, 2 config error, 3 pipeline error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import classify as classify_mod
from . import interp as interp_mod
from . import metrics as metrics_mod
from . import models as models_mod
from . import surrogate as surrogate_mod
from . import svm as svm_mod
from .density import beta_box, uniform_box
from .errors import ConfigError, OutOfSupport, TreelineError
from .geometry import build_neighbor_graph
from .sampler import SamplerConfig, run as run_sampler

GAMMA_CANDIDATES = [
    ("1/(Nc+4)", lambda nc: 1.0 / (nc + 4)),
    ("1/(Nc+3)", lambda nc: 1.0 / (nc + 3)),
    ("1/(Nc+2)", lambda nc: 1.0 / (nc + 2)),
    ("1/(Nc+1)", lambda nc: 1.0 / (nc + 1)),
    ("1/Nc", lambda nc: 1.0 / nc),
    ("2/Nc", lambda nc: 2.0 / nc),
    ("3/Nc", lambda nc: 3.0 / nc),
    ("4/Nc", lambda nc: 4.0 / nc),
    ("5/Nc", lambda nc: 5.0 / nc),
]


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def _parse_config(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return parser


def _get(parser, section, key, default=None, cast=str):
    if not parser.has_option(section, key):
        if default is None:
            raise ConfigError(f"missing required field [{section}] {key}")
        return default
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"field [{section}] {key}: {exc}") from exc


def _intervals(text):
    out = []
    for part in text.split(";"):
        lo, hi = (float(v) for v in part.split())
        out.append((lo, hi))
    return out


def _pairs(text):
    out = []
    for part in text.split(";"):
        a, b = (float(v) for v in part.split())
        out.append((a, b))
    return out


class RunSetup:
    """Everything resolved from one config file."""

    def __init__(self, parser, seed_override=None, jobs=1, gamma_literature=False):
        model_name = _get(parser, "model", "name")
        dim = _get(parser, "model", "dim", default=1, cast=int)
        alpha = _get(parser, "model", "alpha", default=2.0, cast=float)
        beta = _get(parser, "model", "beta", default=0.2, cast=float)
        t_star = _get(parser, "model", "t_star", default=1.67, cast=float)
        n_cells = _get(parser, "model", "n_cells", default=256, cast=int)
        try:
            self.model = models_mod.make_model(
                model_name, alpha=alpha, beta=beta, dim=dim,
                t_star=t_star, n_cells=n_cells,
            )
        except ValueError as exc:
            raise ConfigError(f"field [model] name: {exc}") from exc

        if model_name == "swe":
            dim = 2
            default_support = [(1.5, 2.5), (-0.5, 0.5)]
        elif model_name.startswith("shape:"):
            dim = 2
            default_support = [(-1.0, 1.0)] * 2
        else:
            default_support = [(-1.0, 1.0)] * dim
        kind = _get(parser, "density", "kind", default="uniform")
        support = _intervals(
            _get(
                parser, "density", "support",
                default="; ".join(f"{lo} {hi}" for lo, hi in default_support),
            )
        )
        if len(support) != dim:
            raise ConfigError(
                f"field [density] support: expected {dim} intervals, got {len(support)}"
            )
        if kind == "uniform":
            self.density = uniform_box(support)
        elif kind == "beta":
            params = _pairs(_get(parser, "density", "beta_params"))
            if len(params) != dim:
                raise ConfigError(
                    f"field [density] beta_params: expected {dim} pairs, got {len(params)}"
                )
            self.density = beta_box(params, support)
        else:
            raise ConfigError(f"field [density] kind: unknown kind {kind!r}")

        c = _get(parser, "sampler", "c", default=2.0, cast=float)
        if c <= 1.0:
            raise ConfigError("field [sampler] c: must exceed 1")
        try:
            self.sampler_config = SamplerConfig(
                n_max=_get(parser, "sampler", "n_max", cast=int),
                i_max=_get(parser, "sampler", "i_max", default=1000, cast=int),
                initial_grid=_get(parser, "sampler", "initial_grid", default="combined"),
                c=c,
                weight_mode=_get(parser, "sampler", "weight_mode", default="pdf_grad"),
                jobs=jobs,
            )
        except ValueError as exc:
            raise ConfigError(f"section [sampler]: {exc}") from exc

        gamma_text = _get(parser, "svm", "gamma", default="auto")
        self.svm_config = surrogate_mod.SvmConfig(
            C=_get(parser, "svm", "C", default=1e4, cast=float),
        )
        if gamma_literature or gamma_text == "literature":
            self.svm_config.literature = True
        elif gamma_text != "auto":
            try:
                self.svm_config.gamma = float(gamma_text)
            except ValueError as exc:
                raise ConfigError(f"field [svm] gamma: {exc}") from exc

        self.seed = (
            seed_override
            if seed_override is not None
            else _get(parser, "run", "seed", default=20240601, cast=int)
        )
        self.model_name = model_name
        self.parser = parser


def run_pipeline(model, density, sampler_config, svm_config):
    """sampler -> classify -> svm + local fits; returns (surrogate, info)."""
    t0 = time.perf_counter()
    samples = run_sampler(model, density, sampler_config)
    t_sample = time.perf_counter() - t0
    graph = build_neighbor_graph(samples.points, support=density.support)
    labels = classify_mod.classify_samples(graph, samples.points, samples.values)
    t0 = time.perf_counter()
    surr = surrogate_mod.build(samples, labels, density, svm_config)
    info = {
        "n_samples": len(samples),
        "n_iterations": int(samples.iteration_of.max()),
        "n_classes": int(labels.max()),
        "samples_per_iteration": np.bincount(samples.iteration_of).tolist(),
        "time_sampling_s": t_sample,
        "time_build_s": time.perf_counter() - t0,
    }
    return surr, info


def _write_report(path, setup, info):
    lines = ["treeline-run-report"]
    lines.append(f"model = {setup.model_name}")
    lines.append(f"density = {setup.density!r}")
    lines.append(f"seed = {setup.seed}")
    cfg = setup.sampler_config
    lines.append(f"initial_grid = {cfg.initial_grid}")
    lines.append(f"c = {cfg.c}")
    lines.append(f"weight_mode = {cfg.weight_mode}")
    lines.append(f"n_max = {cfg.n_max}")
    lines.append(f"i_max = {cfg.i_max}")
    lines.append(f"svm_C = {setup.svm_config.C}")
    lines.append(f"svm_gamma = {setup.svm_config.gamma or 'auto (3/Nc)'}")
    lines.append(f"tau_jump = {classify_mod.TAU_JUMP}")
    lines.append(f"s_min = {classify_mod.S_MIN}")
    lines.append(f"kappa_max = {interp_mod.KAPPA_MAX:g}")
    for key, value in info.items():
        lines.append(f"{key} = {value}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_run(args):
    setup = RunSetup(
        _parse_config(args.config),
        seed_override=args.seed,
        jobs=args.jobs,
        gamma_literature=args.gamma_literature,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    surr, info = run_pipeline(
        setup.model, setup.density, setup.sampler_config, setup.svm_config
    )
    surr.metadata.update(
        model=setup.model_name,
        seed=str(setup.seed),
        weight_mode=setup.sampler_config.weight_mode,
        n_max=str(setup.sampler_config.n_max),
        initial_grid=setup.sampler_config.initial_grid,
        c=str(setup.sampler_config.c),
    )
    surrogate_mod.save(surr, out_dir / "surrogate.txt")
    _write_report(out_dir / "report.txt", setup, info)
    print(f"surrogate written to {out_dir / 'surrogate.txt'} (N_c = {info['n_classes']})")
    return 0


def cmd_evaluate(args):
    surr = surrogate_mod.load(args.surrogate)
    rows = []
    with open(args.points, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                rows.append([float(v) for v in line.split()])
    out_path = Path(args.out)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        dim = surr.density.dim
        writer.writerow([f"z{k + 1}" for k in range(dim)] + ["value", "status"])
        for row in rows:
            try:
                value = surrogate_mod.evaluate(surr, np.array(row))
                writer.writerow([f"{v:.17g}" for v in row] + [f"{value:.17g}", "ok"])
            except OutOfSupport:
                writer.writerow([f"{v:.17g}" for v in row] + ["", "out_of_support"])
    print(f"wrote {out_path}")
    return 0


def cmd_convergence(args):
    setup = RunSetup(
        _parse_config(args.config),
        seed_override=args.seed,
        jobs=args.jobs,
        gamma_literature=args.gamma_literature,
    )
    parser = setup.parser
    budgets = [
        int(v) for v in _get(parser, "convergence", "budgets", default="10 20 40 80").split()
    ]
    n_mc = _get(parser, "convergence", "n_mc", default=20_000, cast=int)
    is_shape = setup.model_name.startswith("shape:")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "convergence.csv"
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["budget", "n_samples", "error", "n_classes", "discarded"]
        if is_shape:
            header.append("misclassified_portion")
        writer.writerow(header)
        for budget in budgets:
            cfg = SamplerConfig(
                n_max=budget,
                i_max=setup.sampler_config.i_max,
                initial_grid=setup.sampler_config.initial_grid,
                c=setup.sampler_config.c,
                weight_mode=setup.sampler_config.weight_mode,
                jobs=args.jobs,
            )
            surr, info = run_pipeline(setup.model, setup.density, cfg, setup.svm_config)
            error, details = metrics_mod.weighted_l2_error(
                surr, setup.model, setup.density,
                n_mc=n_mc, seed=setup.seed + 1, return_details=True,
            )
            row = [
                budget,
                info["n_samples"],
                f"{error:.8e}",
                info["n_classes"],
                details["n_discarded"],
            ]
            if is_shape:
                if surr.svm is not None:
                    portion = metrics_mod.misclassified_portion(
                        surr.svm, setup.model.region_fn,
                        n_mc=n_mc, seed=setup.seed + 2,
                        box=setup.density.support,
                    )
                else:
                    portion = 1.0  # no decomposition at all
                row.append(f"{portion:.8e}")
            writer.writerow(row)
    print(f"wrote {out_path}")
    return 0


def cmd_gamma_study(args):
    setup_parser = _parse_config(args.config)
    family_count = _get(setup_parser, "gamma_study", "family_count", cast=int)
    per_function = _get(
        setup_parser, "gamma_study", "samples_per_function", default=50, cast=int
    )
    n_mc = _get(setup_parser, "gamma_study", "n_mc", default=4096, cast=int)
    seed = (
        args.seed
        if args.seed is not None
        else _get(setup_parser, "run", "seed", default=20240601, cast=int)
    )
    density = uniform_box([(-1.0, 1.0)] * 2)
    funcs = models_mod.random_shape_family(seed, family_count)

    sums = np.zeros(len(GAMMA_CANDIDATES))
    counted = 0
    for k, fn in enumerate(funcs):
        from .sampler import ModelAdapter

        adapter = ModelAdapter(
            name=f"family:{k}",
            fn=fn,
            batch_fn=lambda Z, fn=fn: np.atleast_1d(fn(Z)),
        )
        cfg = SamplerConfig(
            n_max=per_function, i_max=1000, initial_grid="combined",
            c=2.0, weight_mode="grad",
        )
        samples = run_sampler(adapter, density, cfg)
        graph = build_neighbor_graph(samples.points, support=density.support)
        labels = classify_mod.classify_samples(graph, samples.points, samples.values)
        n_c = int(labels.max())
        if n_c < 2:
            # no decomposition to size gamma against; every candidate scores
            # the best single-class assignment
            continue
        counted += 1
        for idx, (_, formula) in enumerate(GAMMA_CANDIDATES):
            spec = svm_mod.KernelSpec(kind="rbf", gamma=formula(n_c))
            model = svm_mod.train(samples.points, labels, spec=spec)
            portion = metrics_mod.misclassified_portion(
                model, fn.region, n_mc=n_mc, seed=seed + 3 + k
            )
            sums[idx] += 1.0 - portion

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "gamma_study.csv"
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gamma_candidate", "avg_correct_portion", "functions_used"])
        for (label, _), total in zip(GAMMA_CANDIDATES, sums):
            avg = total / counted if counted else float("nan")
            writer.writerow([label, f"{avg:.8f}", counted])
    print(f"wrote {out_path}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="treeline",
        description="Adaptive multi-element surrogate models over random spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="run configuration file")
    common.add_argument("--out-dir", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--jobs", type=int, default=1, help="max concurrent model evaluations")
    common.add_argument(
        "--gamma-literature", action="store_true",
        help="use the literature kernel width 1/Nc instead of 3/Nc",
    )

    p_run = sub.add_parser(
        "run", parents=[common],
        help="build a surrogate (budget may overshoot by one iteration of edges)",
    )
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("evaluate", help="evaluate a stored surrogate at points")
    p_eval.add_argument("--surrogate", required=True)
    p_eval.add_argument("--points", required=True, help="one point per line, coords whitespace-separated")
    p_eval.add_argument("--out", default="values.csv")
    p_eval.set_defaults(func=cmd_evaluate)

    p_conv = sub.add_parser("convergence", parents=[common], help="budget sweep -> error CSV")
    p_conv.set_defaults(func=cmd_convergence)

    p_gamma = sub.add_parser("gamma-study", parents=[common], help="kernel-width study CSV")
    p_gamma.set_defaults(func=cmd_gamma_study)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TreelineError as exc:
        print(f"pipeline error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
