"""Surrogate assembly, evaluation, and file round-trips."""

import numpy as np
import pytest

from treeline import surrogate as surrogate_mod
from treeline.classify import classify_samples
from treeline.density import beta_box, uniform_box
from treeline.errors import CorruptFile, OutOfSupport, SchemaVersionMismatch
from treeline.geometry import build_neighbor_graph
from treeline.models import make_model
from treeline.sampler import SamplerConfig, run
from treeline.surrogate import SvmConfig, build, evaluate, evaluate_many, load, save


def build_from_model(name, budget, dim=1, weight_mode="pdf_grad", density=None, **kwargs):
    dens = density or uniform_box([(-1, 1)] * dim)
    model = make_model(name, dim=dim, **kwargs)
    samples = run(model, dens, SamplerConfig(n_max=budget, i_max=200, weight_mode=weight_mode))
    graph = build_neighbor_graph(samples.points, support=dens.support)
    labels = classify_samples(graph, samples.points, samples.values)
    return build(samples, labels, dens, SvmConfig()), model, dens


def test_single_class_surrogate_has_no_svm():
    surr, _, _ = build_from_model("genz:g1", 40, alpha=2.0)
    assert surr.svm is None
    assert len(surr.locals) == 1


def test_g6_surrogate_two_elements():
    surr, _, _ = build_from_model("genz:g6", 80, alpha=1.0, beta=0.2)
    assert surr.svm is not None
    assert len(surr.locals) == 2
    assert len(surr.svm.classifiers) == 1


def test_evaluate_routes_to_matching_element():
    surr, model, _ = build_from_model("genz:g6", 80, alpha=1.0, beta=0.2)
    # far from the jump either side, the surrogate must match the model
    for x in (-0.9, -0.5, 0.5, 0.9):
        assert abs(evaluate(surr, np.array([x])) - model(np.array([x]))) < 1e-6


def test_no_bleed_across_boundary():
    surr, _, _ = build_from_model("genz:g6", 80, alpha=1.0, beta=0.2)
    # the zero side must evaluate to (near) zero, not to the exponential
    # extrapolated across the jump
    for x in (0.4, 0.7, 0.95):
        assert abs(evaluate(surr, np.array([x]))) < 1e-6


def test_evaluate_at_training_samples():
    surr, _, _ = build_from_model("genz:g1", 40, alpha=2.0)
    (interp,) = surr.locals.values()
    sel = interp.selected_sample_ids
    pts = surr.samples.points[sel]
    vals = surr.samples.values[sel]
    approx = evaluate_many(surr, pts)
    assert np.abs(approx - vals).max() < 1e-8


def test_out_of_support_raises():
    surr, _, _ = build_from_model("genz:g1", 20, alpha=2.0)
    with pytest.raises(OutOfSupport):
        evaluate(surr, np.array([1.5]))


def test_smooth_surrogate_equals_lone_interpolant():
    surr, _, dens = build_from_model("genz:g1", 40, alpha=2.0)
    (interp,) = surr.locals.values()
    probes = np.random.default_rng(2).uniform(-1, 1, (500, 1))
    assert np.array_equal(evaluate_many(surr, probes), np.atleast_1d(interp(probes)))


def test_partition_property_every_point_one_element():
    surr, _, _ = build_from_model("genz:g6", 80, alpha=1.0, beta=0.2)
    probes = np.random.default_rng(3).uniform(-1, 1, (2000, 1))
    from treeline.svm import predict_many

    classes = predict_many(surr.svm, probes)
    assert set(classes.tolist()) <= set(surr.locals.keys())


def test_round_trip_smooth(tmp_path):
    surr, _, _ = build_from_model("genz:g1", 40, alpha=2.0)
    path = tmp_path / "s.txt"
    save(surr, path)
    loaded = load(path)
    probes = np.random.default_rng(4).uniform(-1, 1, (1000, 1))
    assert np.abs(evaluate_many(surr, probes) - evaluate_many(loaded, probes)).max() <= 1e-12


def test_round_trip_two_class_beta_density(tmp_path):
    dens = beta_box([(2, 7)], [(-1, 1)])
    surr, _, _ = build_from_model("genz:g6", 80, alpha=1.0, beta=0.2, density=dens)
    path = tmp_path / "s.txt"
    save(surr, path)
    loaded = load(path)
    probes = np.random.default_rng(5).uniform(-1, 1, (1000, 1))
    assert np.abs(evaluate_many(surr, probes) - evaluate_many(loaded, probes)).max() <= 1e-12
    assert loaded.density.marginals[0].kind == "beta"
    assert loaded.samples.labels is not None


def test_truncated_file_corrupt(tmp_path):
    surr, _, _ = build_from_model("genz:g1", 20, alpha=2.0)
    path = tmp_path / "s.txt"
    save(surr, path)
    text = path.read_text()
    (tmp_path / "t.txt").write_text(text[: len(text) // 2])
    with pytest.raises(CorruptFile):
        load(tmp_path / "t.txt")


def test_future_version_rejected(tmp_path):
    surr, _, _ = build_from_model("genz:g1", 20, alpha=2.0)
    path = tmp_path / "s.txt"
    save(surr, path)
    text = path.read_text().replace("version = 1", "version = 99", 1)
    (tmp_path / "v.txt").write_text(text)
    with pytest.raises(SchemaVersionMismatch):
        load(tmp_path / "v.txt")


def test_garbage_file_corrupt(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("not a surrogate\nat all\n")
    with pytest.raises(CorruptFile):
        load(path)


def test_metadata_preserved(tmp_path):
    surr, _, _ = build_from_model("genz:g1", 20, alpha=2.0)
    surr.metadata["note"] = "hello world"
    path = tmp_path / "s.txt"
    save(surr, path)
    assert load(path).metadata["note"] == "hello world"
