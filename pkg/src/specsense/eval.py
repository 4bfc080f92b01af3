"""Confusion counting, per-class scores, and report rendering.

Conventions: confusion rows index the true class and columns the
predicted class; averages weight each class by its prevalence (row
sum over total), which makes the weighted recall coincide with the
plain accuracy; any score whose denominator is zero is reported as 0
and the class is listed in the report footnote.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Dataset
from .transforms import feature_matrix


@dataclass
class MetricsReport:
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    accuracy: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    zero_denominator: list = field(default_factory=list)
    per_snr: dict | None = None


def confusion(preds, truths, num_classes: int) -> np.ndarray:
    """Count (true, predicted) pairs into a num_classes x num_classes grid."""
    preds = np.asarray(preds, dtype=np.int64)
    truths = np.asarray(truths, dtype=np.int64)
    if preds.shape != truths.shape or preds.ndim != 1:
        raise ValueError(f"prediction/truth shapes disagree: {preds.shape} vs {truths.shape}")
    for name, arr in (("prediction", preds), ("truth", truths)):
        if arr.size and (arr.min() < 0 or arr.max() >= num_classes):
            raise ValueError(f"{name} labels outside [0, {num_classes})")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (truths, preds), 1)
    return cm


def metrics(cm) -> MetricsReport:
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError(f"confusion matrix must be square, got {cm.shape}")
    if np.any(cm < 0) or not np.issubdtype(cm.dtype, np.integer):
        raise ValueError("confusion matrix must hold non-negative counts")
    total = int(cm.sum())
    if total == 0:
        raise ValueError("confusion matrix is empty")

    tp = np.diag(cm).astype(np.float64)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)

    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, support, out=np.zeros_like(tp), where=support > 0)
    pr_sum = precision + recall
    f1 = np.divide(2 * precision * recall, pr_sum, out=np.zeros_like(tp), where=pr_sum > 0)

    weights = support / total
    zeroed = sorted(int(i) for i in np.nonzero((predicted == 0) | (support == 0))[0])
    return MetricsReport(
        precision=precision,
        recall=recall,
        f1=f1,
        support=support.astype(np.int64),
        accuracy=float(tp.sum() / total),
        weighted_precision=float(np.sum(weights * precision)),
        weighted_recall=float(np.sum(weights * recall)),
        weighted_f1=float(np.sum(weights * f1)),
        zero_denominator=zeroed,
    )


def predict_dataset(model, ds: Dataset, batch_size: int = 512) -> np.ndarray:
    """Predicted label per example, using the model's stored representation."""
    if model.representation is None:
        raise ValueError("model does not record a feature representation")
    if ds.k != model.num_classes:
        raise ValueError(f"dataset has {ds.k} classes, model expects {model.num_classes}")
    feats = feature_matrix(ds.captures(), model.representation)
    if feats.shape[1:] != model.input_shape:
        raise ValueError(
            f"feature shape {feats.shape[1:]} does not match model input {model.input_shape}"
        )
    count = len(ds.examples)
    preds = np.empty(count, dtype=np.int64)
    for start in range(0, count, batch_size):
        logits = model.forward(feats[start : start + batch_size], train=False)
        preds[start : start + batch_size] = np.argmax(logits, axis=1)
    return preds


def per_snr_accuracy(ds: Dataset, preds, truths) -> dict:
    """Accuracy bucketed by the labeled SNR; empty grid points only warn."""
    preds = np.asarray(preds)
    truths = np.asarray(truths)
    snrs = ds.snrs()
    out = {}
    for snr in sorted(ds.snr_grid):
        mask = snrs == snr
        if not np.any(mask):
            warnings.warn(f"no examples at {snr} dB, bucket skipped", stacklevel=2)
            continue
        out[int(snr)] = float(np.mean(preds[mask] == truths[mask]))
    return out


def evaluate_dataset(model, ds: Dataset, batch_size: int = 512):
    """Full scoring pass: returns (MetricsReport with per_snr, confusion)."""
    preds = predict_dataset(model, ds, batch_size)
    truths = ds.labels()
    cm = confusion(preds, truths, ds.k)
    report = metrics(cm)
    report.per_snr = per_snr_accuracy(ds, preds, truths)
    return report, cm


def _load_pyplot():
    # imported lazily so library users without a display stack never pay
    # for it; hashsalt pins the ids matplotlib embeds in SVG output
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "specsense"
    return plt


def _save_figure(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def _render_confusion(cm, class_names, path) -> None:
    plt = _load_pyplot()
    support = cm.sum(axis=1, keepdims=True).astype(np.float64)
    shares = np.divide(cm, support, out=np.zeros(cm.shape), where=support > 0)
    fig, ax = plt.subplots(figsize=(7.2, 6.0))
    image = ax.imshow(shares, vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_xticks(range(len(class_names)), class_names, rotation=90, fontsize=7)
    ax.set_yticks(range(len(class_names)), class_names, fontsize=7)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    fig.colorbar(image, ax=ax, label="row share")
    fig.tight_layout()
    _save_figure(fig, path)
    plt.close(fig)


def _render_curve(per_snr, path) -> None:
    plt = _load_pyplot()
    snrs = sorted(per_snr)
    accs = [per_snr[s] for s in snrs]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(snrs, accs, marker="o")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    _save_figure(fig, path)
    plt.close(fig)


def emit_report(report: MetricsReport, cm, outdir, class_names) -> list:
    """Write delimited scores plus figures into outdir; returns the paths.

    Files: confusion.csv (raw counts), summary.txt (JSON scores),
    confusion.svg, and when per-SNR buckets exist also per_snr.csv with
    curve.svg.
    """
    cm = np.asarray(cm)
    if cm.shape != (len(class_names), len(class_names)):
        raise ValueError(f"{len(class_names)} names for {cm.shape} matrix")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    cm_path = outdir / "confusion.csv"
    np.savetxt(cm_path, cm, fmt="%d", delimiter=",")
    written.append(cm_path)

    summary = {
        "n": int(report.support.sum()),
        "accuracy": report.accuracy,
        "weighted_precision": report.weighted_precision,
        "weighted_recall": report.weighted_recall,
        "weighted_f1": report.weighted_f1,
        "classes": [
            {
                "name": str(class_names[i]),
                "precision": float(report.precision[i]),
                "recall": float(report.recall[i]),
                "f1": float(report.f1[i]),
                "support": int(report.support[i]),
            }
            for i in range(len(class_names))
        ],
        "zero_denominator_classes": [str(class_names[i]) for i in report.zero_denominator],
    }
    summary_path = outdir / "summary.txt"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written.append(summary_path)

    svg_path = outdir / "confusion.svg"
    _render_confusion(cm, [str(n) for n in class_names], svg_path)
    written.append(svg_path)

    if report.per_snr:
        snr_path = outdir / "per_snr.csv"
        lines = ["snr_db,accuracy"]
        lines += [f"{snr},{report.per_snr[snr]:.9g}" for snr in sorted(report.per_snr)]
        snr_path.write_text("\n".join(lines) + "\n")
        written.append(snr_path)

        curve_path = outdir / "curve.svg"
        _render_curve(report.per_snr, curve_path)
        written.append(curve_path)

    return written
