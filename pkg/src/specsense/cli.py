"""Command line front end: generate, train, evaluate, predict.

Exit codes: 0 success, 2 bad usage or malformed parameter text, 3 file
system trouble, 4 well-formed files whose contents do not fit together
(wrong container, wrong class count, wrong capture length).

Every option can also come from a --config file of key=value lines
(# starts a comment, hyphens and underscores are interchangeable in
keys); explicit flags win over config values.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from .dataset import (
    DatasetFormatError,
    Task,
    generate_dataset,
    load_dataset,
    save_dataset,
    split,
)
from .eval import emit_report, evaluate_dataset
from .nnet import (
    ModelFormatError,
    TrainConfig,
    desk_config,
    evaluate_arrays,
    load_model,
    full_config,
    save_model,
)
from .nnet import predict as predict_one
from .nnet import train as fit
from .transforms import Repr, feature_matrix

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DATA = 4

SNR_MIN, SNR_MAX = -20, 20


class UsageError(ValueError):
    """Parameter text that cannot be used; maps to exit code 2."""


def parse_snr_grid(text: str) -> tuple:
    """Accept start:step:end (inclusive), a bare integer, or a comma list."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"snr range must be start:step:end, got {text!r}")
        try:
            start, step, end = (int(p) for p in parts)
        except ValueError:
            raise UsageError(f"snr range needs three integers, got {text!r}") from None
        if step <= 0:
            raise UsageError(f"snr step must be positive, got {step}")
        if end < start:
            raise UsageError(f"snr range end {end} is below start {start}")
        grid = tuple(range(start, end + 1, step))
    else:
        try:
            grid = tuple(int(p) for p in text.split(","))
        except ValueError:
            raise UsageError(f"snr list must hold integers, got {text!r}") from None
    for value in grid:
        if not SNR_MIN <= value <= SNR_MAX:
            raise UsageError(f"snr {value} outside [{SNR_MIN}, {SNR_MAX}]")
    return grid


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"expected an integer, got {text!r}") from None


def _float(text):
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"expected a number, got {text!r}") from None


def _choice(table, what):
    def convert(text):
        try:
            return table[str(text)]
        except KeyError:
            raise UsageError(f"{what} must be one of {sorted(table)}, got {text!r}") from None

    return convert


_task = _choice({t.value: t for t in Task}, "task")
_repr = _choice({r.value: r for r in Repr}, "repr")
_scale = _choice({"desk": desk_config, "full": full_config}, "scale")

# key -> (converter, default); a None default marks a required option
SPECS = {
    "generate": {
        "task": (_task, None),
        "per_class": (_int, 100),
        "snrs": (parse_snr_grid, parse_snr_grid("-20:2:18")),
        "seed": (_int, None),
        "n": (_int, 128),
        "out": (Path, None),
    },
    "train": {
        "data": (Path, None),
        "model_out": (Path, None),
        "repr": (_repr, None),
        "scale": (_scale, desk_config),
        "epochs": (_int, 70),
        "batch_size": (_int, 1024),
        "lr": (_float, 0.001),
        "dropout": (_float, 0.6),
        "seed": (_int, None),
        "history": (Path, ""),
    },
    "evaluate": {
        "model": (Path, None),
        "data": (Path, None),
        "outdir": (Path, Path("report")),
    },
    "predict": {
        "model": (Path, None),
        "input": (Path, None),
    },
}


def resolve(args, config: dict, spec: dict) -> SimpleNamespace:
    """Layer flag > config > default; required options must end up set."""
    known = set(spec) | {"config"}
    for key in config:
        if key not in known:
            raise UsageError(f"unknown config key {key!r}")
    final = {}
    for key, (convert, default) in spec.items():
        flag = getattr(args, key)
        if flag is not None:
            final[key] = convert(flag)
        elif key in config:
            final[key] = convert(config[key])
        elif default is None:
            raise UsageError(f"--{key.replace('_', '-')} is required")
        else:
            final[key] = default
    return SimpleNamespace(**final)


def _onehot(labels, k):
    return np.eye(k, dtype=np.float32)[labels]


def cmd_generate(v) -> int:
    if v.per_class < 1:
        raise UsageError(f"--per-class must be >= 1, got {v.per_class}")
    if v.n < 8:
        raise UsageError(f"--n must be >= 8, got {v.n}")
    ds = generate_dataset(v.task, v.per_class, v.snrs, seed=v.seed, n=v.n)
    save_dataset(ds, v.out)
    for name, count in zip(ds.class_names, ds.class_counts()):
        print(f"{name} {count}")
    print(f"wrote {v.out}: {len(ds.examples)} examples, {ds.k} classes, {ds.n} samples each")
    return EXIT_OK


def cmd_train(v) -> int:
    if not 0.0 <= v.dropout < 1.0:
        raise UsageError(f"--dropout must lie in [0, 1), got {v.dropout}")
    if v.lr <= 0:
        raise UsageError(f"--lr must be positive, got {v.lr}")
    if v.batch_size < 1 or v.epochs < 0:
        raise UsageError("--batch-size must be >= 1 and --epochs >= 0")
    ds = load_dataset(v.data)
    train_ds, val_ds, test_ds = split(ds, seed=v.seed)
    sets = {}
    for part, sub in (("train", train_ds), ("val", val_ds), ("test", test_ds)):
        feats = feature_matrix(sub.captures(), v.repr)
        sets[part] = (feats, _onehot(sub.labels(), ds.k))
    print(
        f"split {len(ds.examples)} examples into "
        f"{len(train_ds.examples)}/{len(val_ds.examples)}/{len(test_ds.examples)}"
    )

    def show(row):
        print(
            f"epoch {row['epoch']} train_loss {row['train_loss']:.6f} "
            f"val_loss {row['val_loss']:.6f} val_acc {row['val_acc']:.4f}",
            flush=True,
        )

    config = TrainConfig(
        lr=v.lr, batch_size=v.batch_size, epochs=v.epochs, dropout=v.dropout, seed=v.seed
    )
    model, history = fit(v.scale(ds.k, ds.n), sets["train"], sets["val"], config, on_epoch=show)
    _, test_acc = evaluate_arrays(model, *sets["test"], batch_size=v.batch_size)
    print(f"test_acc {test_acc:.9g}")

    model.task = ds.task
    model.representation = v.repr
    model.seed = v.seed
    save_model(model, v.model_out)
    print(f"wrote {v.model_out}")

    history_path = v.history if str(v.history) else Path(v.model_out).parent / "history.csv"
    lines = ["epoch,train_loss,val_loss,val_acc"]
    lines += [
        f"{r['epoch']},{r['train_loss']:.9g},{r['val_loss']:.9g},{r['val_acc']:.9g}"
        for r in history
    ]
    Path(history_path).write_text("\n".join(lines) + "\n")
    print(f"wrote {history_path}")
    return EXIT_OK


def cmd_evaluate(v) -> int:
    model = load_model(v.model)
    ds = load_dataset(v.data)
    if model.representation is None:
        raise ValueError("model does not record a feature representation")
    if model.task is not None and model.task is not ds.task:
        raise ValueError(f"model was trained for {model.task.value}, dataset is {ds.task.value}")
    if ds.k != model.num_classes:
        raise ValueError(f"dataset has {ds.k} classes, model expects {model.num_classes}")
    if model.input_shape != (1, 2, ds.n):
        raise ValueError(f"dataset captures are {ds.n} samples, model expects {model.input_shape}")

    if model.seed is None:
        subset = ds
        print(f"no split seed recorded, scoring all {len(ds.examples)} examples")
    else:
        _, _, subset = split(ds, seed=model.seed)
        print(f"scoring the {len(subset.examples)}-example test partition (seed {model.seed})")

    report, cm = evaluate_dataset(model, subset)
    written = emit_report(report, cm, v.outdir, ds.class_names)
    print(f"accuracy {report.accuracy:.9g}")
    print(f"weighted_f1 {report.weighted_f1:.9g}")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_predict(v) -> int:
    model = load_model(v.model)
    if model.representation is None:
        raise ValueError("model does not record a feature representation")
    rows = [row for row in Path(v.input).read_text().splitlines() if row.strip()]
    if len(rows) != 2:
        raise UsageError(f"input must hold two rows (I then Q), got {len(rows)}")
    try:
        i_vals = np.array([float(cell) for cell in rows[0].split(",")])
        q_vals = np.array([float(cell) for cell in rows[1].split(",")])
    except ValueError:
        raise UsageError("input rows must be comma-separated numbers") from None
    if i_vals.size != q_vals.size:
        raise UsageError(f"I row has {i_vals.size} values, Q row has {q_vals.size}")
    width = model.input_shape[2]
    if i_vals.size != width:
        raise ValueError(f"capture has {i_vals.size} samples, model expects {width}")

    capture = (i_vals + 1j * q_vals).astype(np.complex64)
    feats = feature_matrix(capture[np.newaxis, :], model.representation)
    _, probs = predict_one(model, feats[0, 0])
    if model.task is not None and len(model.task.class_names) == model.num_classes:
        names = model.task.class_names
    else:
        names = [f"class_{i}" for i in range(model.num_classes)]
    for idx in np.argsort(-probs, kind="stable"):
        print(f"{names[idx]} {probs[idx]:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specsense",
        description="Synthesize spectrum captures and train signal classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    commands = {
        "generate": (cmd_generate, "synthesize a labeled dataset container"),
        "train": (cmd_train, "fit a classifier on a dataset container"),
        "evaluate": (cmd_evaluate, "score a model and render a report"),
        "predict": (cmd_predict, "classify one capture from a two-row CSV"),
    }
    helps = {
        "task": "mod or interf",
        "per_class": "examples per class per snr point",
        "snrs": "snr grid: start:step:end, a bare value, or a comma list",
        "seed": "master seed for generation or the train/val/test split",
        "n": "samples per capture",
        "out": "dataset file to write",
        "data": "dataset file to read",
        "model_out": "model file to write",
        "repr": "feature representation: iq, ap, or fft",
        "scale": "network width: desk or full",
        "epochs": "training epochs",
        "batch_size": "minibatch size",
        "lr": "adam learning rate",
        "dropout": "dropout rate in [0, 1)",
        "history": "csv of per-epoch losses (default: history.csv next to the model)",
        "model": "model file to read",
        "outdir": "directory for report files",
        "input": "csv capture: I values on the first row, Q on the second",
    }
    for name, (func, blurb) in commands.items():
        cmd = sub.add_parser(name, help=blurb)
        cmd.add_argument("--config", default=None, help="key=value defaults file")
        cmd.add_argument(
            "--deterministic",
            action="store_true",
            help="assert reproducibility; every run is already bit-stable for a fixed seed",
        )
        for key in SPECS[name]:
            cmd.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, help=helps[key])
        cmd.set_defaults(func=func, spec=SPECS[name])
    return parser


def _mend_argv(argv) -> list:
    """Join `--snrs -20:2:18` into `--snrs=-20:2:18`.

    Grid values starting with a negative number look like option switches to
    the flag parser unless they are bare integers; gluing the pair keeps the
    natural space-separated spelling working.
    """
    out = []
    index = 0
    while index < len(argv):
        token = argv[index]
        if (
            token == "--snrs"
            and index + 1 < len(argv)
            and re.match(r"^-\d", argv[index + 1])
        ):
            out.append(f"--snrs={argv[index + 1]}")
            index += 2
        else:
            out.append(token)
            index += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_mend_argv(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = read_config(args.config) if args.config else {}
        values = resolve(args, config, args.spec)
        return args.func(values)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DatasetFormatError, ModelFormatError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
