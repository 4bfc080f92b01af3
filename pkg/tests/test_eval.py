"""Scoring math against counting oracles, plus report file round trips."""

import json
import warnings

import numpy as np
import pytest

from specsense import dataset as dsmod
from specsense.eval import (
    confusion,
    emit_report,
    evaluate_dataset,
    metrics,
    per_snr_accuracy,
    predict_dataset,
)
from specsense.nnet import ModelConfig, build_model
from specsense.transforms import Repr


def test_confusion_rows_are_true_classes():
    cm = confusion([1, 1, 0, 2], [0, 1, 0, 2], 3)
    np.testing.assert_array_equal(cm, [[1, 1, 0], [0, 1, 0], [0, 0, 1]])


def test_confusion_rejects_out_of_range_labels():
    with pytest.raises(ValueError):
        confusion([0, 3], [0, 1], 3)
    with pytest.raises(ValueError):
        confusion([0, -1], [0, 1], 3)
    with pytest.raises(ValueError):
        confusion([0, 1, 2], [0, 1], 3)


def test_metrics_frozen_two_class_case():
    report = metrics(np.array([[1, 1], [0, 2]]))
    np.testing.assert_allclose(report.precision, [1.0, 2.0 / 3.0], atol=1e-12)
    np.testing.assert_allclose(report.recall, [0.5, 1.0], atol=1e-12)
    np.testing.assert_allclose(report.f1, [2.0 / 3.0, 0.8], atol=1e-12)
    np.testing.assert_array_equal(report.support, [2, 2])
    np.testing.assert_allclose(report.accuracy, 0.75, atol=1e-12)
    # both classes carry prevalence 1/2
    np.testing.assert_allclose(report.weighted_f1, 11.0 / 15.0, atol=1e-12)
    np.testing.assert_allclose(report.weighted_precision, 5.0 / 6.0, atol=1e-12)
    assert report.zero_denominator == []


def test_metrics_against_counting_oracle():
    rng = np.random.default_rng(42)
    k = 6
    truths = rng.integers(0, k, 500)
    preds = rng.integers(0, k, 500)
    cm = confusion(preds, truths, k)
    report = metrics(cm)

    for c in range(k):
        tp = np.sum((preds == c) & (truths == c))
        fp = np.sum((preds == c) & (truths != c))
        fn = np.sum((preds != c) & (truths == c))
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        assert abs(report.precision[c] - p) <= 1e-12
        assert abs(report.recall[c] - r) <= 1e-12
        assert abs(report.f1[c] - f) <= 1e-12
    assert abs(report.accuracy - np.mean(preds == truths)) <= 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_weighted_recall_equals_accuracy(seed):
    rng = np.random.default_rng(seed)
    cm = rng.integers(0, 20, (5, 5))
    report = metrics(cm)
    np.testing.assert_allclose(report.weighted_recall, report.accuracy, atol=1e-12)


def test_zero_denominator_classes_report_zero_with_footnote():
    # class 2 never occurs and is never predicted
    cm = np.array([[3, 1, 0], [0, 4, 0], [0, 0, 0]])
    report = metrics(cm)
    assert report.precision[2] == 0.0
    assert report.recall[2] == 0.0
    assert report.f1[2] == 0.0
    assert report.zero_denominator == [2]


def test_metrics_rejects_bad_matrices():
    with pytest.raises(ValueError):
        metrics(np.zeros((3, 3), dtype=np.int64))
    with pytest.raises(ValueError):
        metrics(np.ones((2, 3), dtype=np.int64))
    with pytest.raises(ValueError):
        metrics(np.array([[1, -1], [0, 1]]))
    with pytest.raises(ValueError):
        metrics(np.array([[0.5, 0.5], [0.5, 0.5]]))


@pytest.fixture(scope="module")
def tiny_setup():
    ds = dsmod.generate_dataset(dsmod.Task.MODULATION, 1, [0, 10], seed=5, n=32)
    model = build_model(ModelConfig((1, 2, 32), 4, 3, 8, ds.k), seed=2, dropout=0.0)
    model.representation = Repr.IQ
    return model, ds


def test_predict_dataset_shape_and_determinism(tiny_setup):
    model, ds = tiny_setup
    preds = predict_dataset(model, ds)
    assert preds.shape == (len(ds.examples),)
    assert preds.min() >= 0 and preds.max() < ds.k
    np.testing.assert_array_equal(preds, predict_dataset(model, ds))


def test_predict_dataset_requires_representation(tiny_setup):
    _, ds = tiny_setup
    bare = build_model(ModelConfig((1, 2, 32), 4, 3, 8, ds.k), seed=2)
    with pytest.raises(ValueError):
        predict_dataset(bare, ds)


def test_predict_dataset_rejects_wrong_width(tiny_setup):
    model, _ = tiny_setup
    other = dsmod.generate_dataset(dsmod.Task.MODULATION, 1, [0], seed=5, n=64)
    with pytest.raises(ValueError):
        predict_dataset(model, other)


def test_per_snr_buckets_recombine_to_accuracy(tiny_setup):
    model, ds = tiny_setup
    report, cm = evaluate_dataset(model, ds)
    assert sorted(report.per_snr) == [0, 10]
    counts = {snr: int(np.sum(ds.snrs() == snr)) for snr in report.per_snr}
    mixed = sum(report.per_snr[s] * counts[s] for s in report.per_snr) / len(ds.examples)
    np.testing.assert_allclose(mixed, report.accuracy, atol=1e-12)
    assert cm.sum() == len(ds.examples)


def test_per_snr_warns_on_empty_bucket(tiny_setup):
    model, ds = tiny_setup
    at_zero = [ex for ex in ds.examples if ex.snr_db == 0]
    trimmed = dsmod.Dataset(ds.task, ds.class_names, ds.snr_grid, at_zero, dict(ds.meta))
    preds = predict_dataset(model, trimmed)
    with pytest.warns(UserWarning, match="10 dB"):
        buckets = per_snr_accuracy(trimmed, preds, trimmed.labels())
    assert sorted(buckets) == [0]


def test_emit_report_files_and_round_trip(tiny_setup, tmp_path):
    model, ds = tiny_setup
    report, cm = evaluate_dataset(model, ds)
    written = emit_report(report, cm, tmp_path / "out", ds.class_names)
    names = sorted(p.name for p in written)
    assert names == [
        "confusion.csv",
        "confusion.svg",
        "curve.svg",
        "per_snr.csv",
        "summary.txt",
    ]

    parsed = np.loadtxt(tmp_path / "out" / "confusion.csv", delimiter=",", dtype=np.int64)
    np.testing.assert_array_equal(parsed, cm)

    lines = (tmp_path / "out" / "per_snr.csv").read_text().strip().split("\n")
    assert lines[0] == "snr_db,accuracy"
    snrs = [int(line.split(",")[0]) for line in lines[1:]]
    assert snrs == sorted(snrs)
    for line in lines[1:]:
        snr, acc = line.split(",")
        np.testing.assert_allclose(float(acc), report.per_snr[int(snr)], rtol=1e-8)

    summary = json.loads((tmp_path / "out" / "summary.txt").read_text())
    np.testing.assert_allclose(summary["accuracy"], report.accuracy, rtol=1e-12)
    assert summary["n"] == len(ds.examples)
    assert len(summary["classes"]) == ds.k

    for svg in ("confusion.svg", "curve.svg"):
        text = (tmp_path / "out" / svg).read_text()
        assert text.lstrip().startswith("<?xml")


def test_emit_report_is_byte_deterministic(tiny_setup, tmp_path):
    model, ds = tiny_setup
    report, cm = evaluate_dataset(model, ds)
    first = emit_report(report, cm, tmp_path / "a", ds.class_names)
    second = emit_report(report, cm, tmp_path / "b", ds.class_names)
    for pa, pb in zip(first, second, strict=True):
        assert pa.read_bytes() == pb.read_bytes(), pa.name


def test_emit_report_skips_snr_outputs_without_buckets(tiny_setup, tmp_path):
    _, ds = tiny_setup
    report = metrics(np.array([[2, 0], [1, 3]]))
    written = emit_report(report, np.array([[2, 0], [1, 3]]), tmp_path, ["a", "b"])
    assert sorted(p.name for p in written) == [
        "confusion.csv",
        "confusion.svg",
        "summary.txt",
    ]


def test_emit_report_validates_name_count(tmp_path):
    report = metrics(np.array([[2, 0], [1, 3]]))
    with pytest.raises(ValueError):
        emit_report(report, np.array([[2, 0], [1, 3]]), tmp_path, ["only"])
