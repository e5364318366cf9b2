"""CLI: configs, subcommands, file outputs, exit codes."""

import csv

import numpy as np
import pytest

from treeline import surrogate as surrogate_mod
from treeline.cli import main


G1_CONFIG = """
[model]
name = genz:g1
alpha = 2.0
dim = 1

[sampler]
n_max = 60
i_max = 100
weight_mode = pdf_grad

[run]
seed = 101
"""

CIRCLE_CONFIG = """
[model]
name = shape:circle

[sampler]
n_max = 80
i_max = 200
weight_mode = grad

[convergence]
budgets = 30 60
n_mc = 4000
"""

BAD_CONFIG = """
[model]
name = genz:g1

[sampler]
n_max = 50
c = 0.5
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_run_g1_smooth(tmp_path, capsys):
    cfg = write(tmp_path, "g1.cfg", G1_CONFIG)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out-dir", str(out)]) == 0
    report = (out / "report.txt").read_text()
    assert "n_classes = 1" in report
    assert "tau_jump" in report and "kappa_max" in report
    surr = surrogate_mod.load(out / "surrogate.txt")
    assert surr.svm is None


def test_run_circle_two_classes(tmp_path):
    cfg = write(tmp_path, "c.cfg", CIRCLE_CONFIG)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out-dir", str(out)]) == 0
    report = (out / "report.txt").read_text()
    assert "n_classes = 2" in report


def test_config_error_names_field(tmp_path, capsys):
    cfg = write(tmp_path, "bad.cfg", BAD_CONFIG)
    assert main(["run", "--config", cfg, "--out-dir", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "c" in err


def test_missing_required_field(tmp_path, capsys):
    cfg = write(tmp_path, "m.cfg", "[model]\nname = genz:g1\n")
    assert main(["run", "--config", cfg, "--out-dir", str(tmp_path / "o")]) == 2
    assert "n_max" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.cfg"), "--out-dir", str(tmp_path)]) == 2


def test_evaluate_empty_points(tmp_path):
    cfg = write(tmp_path, "g1.cfg", G1_CONFIG)
    out = tmp_path / "out"
    main(["run", "--config", cfg, "--out-dir", str(out)])
    points = write(tmp_path, "pts.txt", "")
    values = tmp_path / "vals.csv"
    assert main([
        "evaluate", "--surrogate", str(out / "surrogate.txt"),
        "--points", points, "--out", str(values),
    ]) == 0
    rows = list(csv.reader(values.open()))
    assert rows[0] == ["z1", "value", "status"]
    assert len(rows) == 1


def test_evaluate_training_samples_and_out_of_support(tmp_path):
    cfg = write(tmp_path, "g1.cfg", G1_CONFIG)
    out = tmp_path / "out"
    main(["run", "--config", cfg, "--out-dir", str(out)])
    surr = surrogate_mod.load(out / "surrogate.txt")
    (interp,) = surr.locals.values()
    sel = interp.selected_sample_ids
    lines = ["%r" % surr.samples.points[k][0] for k in sel[:5]]
    lines.append("2.5")  # outside the box
    points = write(tmp_path, "pts.txt", "\n".join(lines) + "\n")
    values = tmp_path / "vals.csv"
    assert main([
        "evaluate", "--surrogate", str(out / "surrogate.txt"),
        "--points", points, "--out", str(values),
    ]) == 0
    rows = list(csv.reader(values.open()))[1:]
    for k, row in zip(sel[:5], rows[:-1]):
        assert row[-1] == "ok"
        assert abs(float(row[1]) - surr.samples.values[k]) < 1e-8
    assert rows[-1][-1] == "out_of_support"


def test_convergence_csv_shape_model(tmp_path):
    cfg = write(tmp_path, "c.cfg", CIRCLE_CONFIG)
    out = tmp_path / "out"
    assert main(["convergence", "--config", cfg, "--out-dir", str(out)]) == 0
    rows = list(csv.reader((out / "convergence.csv").open()))
    assert rows[0] == ["budget", "n_samples", "error", "n_classes", "discarded",
                      "misclassified_portion"]
    assert len(rows) == 3
    for row in rows[1:]:
        assert float(row[2]) >= 0.0
        assert 0.0 <= float(row[5]) <= 1.0


def test_convergence_csv_genz_positive_errors(tmp_path):
    cfg = write(
        tmp_path, "g.cfg",
        G1_CONFIG + "\n[convergence]\nbudgets = 10 20 40\nn_mc = 2000\n",
    )
    out = tmp_path / "out"
    assert main(["convergence", "--config", cfg, "--out-dir", str(out)]) == 0
    rows = list(csv.reader((out / "convergence.csv").open()))
    assert len(rows) == 4
    for row in rows[1:]:
        assert float(row[2]) > 0.0


def test_convergence_deterministic(tmp_path):
    cfg = write(tmp_path, "g1.cfg", G1_CONFIG + "\n[convergence]\nbudgets = 10 20\nn_mc = 2000\n")
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["convergence", "--config", cfg, "--out-dir", str(out1)]) == 0
    assert main(["convergence", "--config", cfg, "--out-dir", str(out2)]) == 0
    assert (out1 / "convergence.csv").read_text() == (out2 / "convergence.csv").read_text()


def test_gamma_study_nine_rows(tmp_path):
    cfg = write(
        tmp_path,
        "g.cfg",
        "[gamma_study]\nfamily_count = 2\nsamples_per_function = 30\nn_mc = 1024\n"
        "[run]\nseed = 7\n",
    )
    out = tmp_path / "out"
    assert main(["gamma-study", "--config", cfg, "--out-dir", str(out)]) == 0
    rows = list(csv.reader((out / "gamma_study.csv").open()))
    assert rows[0] == ["gamma_candidate", "avg_correct_portion", "functions_used"]
    assert len(rows) == 10
    labels = [r[0] for r in rows[1:]]
    assert labels[4] == "1/Nc" and labels[6] == "3/Nc"


def test_seed_override_changes_metrics(tmp_path):
    cfg = write(tmp_path, "g1.cfg", G1_CONFIG + "\n[convergence]\nbudgets = 10\nn_mc = 2000\n")
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    main(["convergence", "--config", cfg, "--out-dir", str(out1)])
    main(["convergence", "--config", cfg, "--out-dir", str(out2), "--seed", "999"])
    t1 = (out1 / "convergence.csv").read_text()
    t2 = (out2 / "convergence.csv").read_text()
    assert t1 != t2  # MC seed shifted


def test_gamma_literature_flag(tmp_path):
    cfg = write(tmp_path, "c.cfg", CIRCLE_CONFIG)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out-dir", str(out), "--gamma-literature"]) == 0
    surr = surrogate_mod.load(out / "surrogate.txt")
    assert surr.svm is not None
    assert abs(surr.svm.spec.gamma - 0.5) < 1e-12  # 1/Nc with two classes
