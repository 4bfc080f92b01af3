"""Capture framing, seeded dataset generation, splitting, and container I/O.

A dataset is a flat list of fixed-length complex captures, each tagged
with a class label and an integer SNR. Generation is reproducible: every
example derives its own RNG from (master seed, class, snr, index), so the
loop order never matters and regeneration is byte-stable.

Container layout (little-endian throughout):

    8s  magic "SPECDS01"
    u32 version (1)
    u32 N capture length
    u32 K class count
    u32 record count
    u32 SNR grid length, then that many i16 grid values
    K x (u16 name length, UTF-8 name bytes)
    records: u16 label, i16 snr_db, N x (f32 I, f32 Q)
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import channel as chan
from . import sigsynth
from .sigsynth import ModulationScheme

MAGIC = b"SPECDS01"
CONTAINER_VERSION = 1
DEFAULT_CAPTURE_LEN = 128

MODULATION_SAMPLE_RATE = 1e6
SPS_CHOICES = (8, 10, 12, 14, 16)
RRC_SPAN = 8

MODULATION_SCHEMES = (
    ModulationScheme.BPSK,
    ModulationScheme.QPSK,
    ModulationScheme.PSK8,
    ModulationScheme.QAM16,
    ModulationScheme.QAM64,
    ModulationScheme.CPFSK,
    ModulationScheme.GFSK,
    ModulationScheme.PAM4,
    ModulationScheme.WBFM,
    ModulationScheme.AM_DSB,
    ModulationScheme.AM_SSB,
)
MODULATION_CLASS_NAMES = tuple(s.value.upper() for s in MODULATION_SCHEMES)

_SPLIT_KEY = 0x5011


class Task(Enum):
    MODULATION = "mod"
    INTERFERENCE = "interf"

    @property
    def class_names(self) -> tuple[str, ...]:
        if self is Task.MODULATION:
            return MODULATION_CLASS_NAMES
        return sigsynth.INTERFERENCE_CLASS_NAMES

    @property
    def sample_rate(self) -> float:
        if self is Task.MODULATION:
            return MODULATION_SAMPLE_RATE
        return sigsynth.INTERFERENCE_SAMPLE_RATE


class DatasetFormatError(ValueError):
    """Base for container parse failures."""


class BadMagicError(DatasetFormatError):
    pass


class VersionMismatchError(DatasetFormatError):
    pass


class TruncatedRecordError(DatasetFormatError):
    pass


class LabelRangeError(DatasetFormatError):
    pass


@dataclass
class LabeledExample:
    """One capture with its class label and nominal SNR."""

    capture: np.ndarray
    label: int
    snr_db: int

    def onehot(self, k: int) -> np.ndarray:
        if not 0 <= self.label < k:
            raise ValueError(f"label {self.label} outside [0, {k})")
        vec = np.zeros(k)
        vec[self.label] = 1.0
        return vec


@dataclass
class Dataset:
    task: Task
    class_names: tuple
    snr_grid: tuple
    examples: list
    meta: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.class_names)

    @property
    def n(self) -> int:
        return self.examples[0].capture.shape[0] if self.examples else 0

    def captures(self) -> np.ndarray:
        return np.stack([ex.capture for ex in self.examples])

    def labels(self) -> np.ndarray:
        return np.array([ex.label for ex in self.examples], dtype=np.int64)

    def snrs(self) -> np.ndarray:
        return np.array([ex.snr_db for ex in self.examples], dtype=np.int64)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels(), minlength=self.k)


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Counter-based per-example stream: (seed, path) -> independent RNG."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(path))
    )


def segment(stream, n: int) -> np.ndarray:
    """Cut a stream into consecutive non-overlapping length-n windows.

    The remainder after the last full window is dropped; a stream shorter
    than one window is an error.
    """
    stream = np.asarray(stream)
    if n < 1:
        raise ValueError(f"window length must be positive, got {n}")
    if stream.ndim != 1 or stream.shape[0] < n:
        raise ValueError(f"stream of {stream.shape} cannot fill a window of {n}")
    count = stream.shape[0] // n
    return stream[: count * n].reshape(count, n)


def _synth_modulation(scheme: ModulationScheme, n: int, rng) -> tuple[np.ndarray, int]:
    """Return (stream, capture offset) for one modulation example."""
    fs = MODULATION_SAMPLE_RATE
    if scheme in sigsynth.ANALOG_SCHEMES:
        total = n + 64
        message = sigsynth.synth_message(rng, total, fs)
        return sigsynth.modulate_analog(scheme, message, fs), 32
    sps = int(rng.choice(SPS_CHOICES))
    jitter = int(rng.integers(0, sps))
    if scheme in sigsynth.FSK_SCHEMES:
        n_sym = -(-n // sps) + 6
        bits = rng.integers(0, 2, n_sym)
        stream = sigsynth.modulate_fsk(bits, scheme, sps, mod_index=0.5, bt=0.3)
        return stream, 2 * sps + jitter
    bits_per = sigsynth.BITS_PER_SYMBOL[scheme]
    n_sym = RRC_SPAN + -(-(n + 2 * sps) // sps)
    bits = rng.integers(0, 2, n_sym * bits_per)
    symbols = sigsynth.map_bits_to_symbols(bits, scheme)
    stream = sigsynth.pulse_shape(symbols, sps, rolloff=0.35, span=RRC_SPAN)
    return stream, (RRC_SPAN // 2) * sps + jitter


def _generate_example(task: Task, class_idx: int, snr_db: int, rng, n: int) -> np.ndarray:
    if task is Task.MODULATION:
        stream, offset = _synth_modulation(MODULATION_SCHEMES[class_idx], n, rng)
        params = chan.draw_rich_params(float(snr_db), MODULATION_SAMPLE_RATE, rng)
    else:
        stream = sigsynth.synthesize_technology(
            sigsynth.TECHNOLOGY_CLASSES[class_idx], n + 64, rng
        )
        offset = 32
        params = chan.draw_flat_params(float(snr_db), sigsynth.INTERFERENCE_SAMPLE_RATE, rng)
    impaired = chan.channel_pipeline(stream, params, rng)
    return impaired[offset : offset + n].astype(np.complex64)


def generate_dataset(
    task: Task,
    per_class_per_snr: int,
    snr_grid,
    seed: int,
    n: int = DEFAULT_CAPTURE_LEN,
) -> Dataset:
    """Synthesize a balanced labeled dataset for one task.

    Every (class, snr) cell holds exactly per_class_per_snr examples with a
    fresh payload and channel draw each. The same (task, grid, seed, n)
    always reproduces the same captures bit for bit.
    """
    if per_class_per_snr < 1:
        raise ValueError(f"per_class_per_snr must be >= 1, got {per_class_per_snr}")
    if n < 8:
        raise ValueError(f"capture length must be >= 8, got {n}")
    snr_grid = tuple(int(s) for s in snr_grid)
    if not snr_grid:
        raise ValueError("snr_grid must not be empty")
    for s in snr_grid:
        if not -20 <= s <= 20:
            raise ValueError(f"snr {s} outside the supported [-20, 20] dB range")
    names = task.class_names
    examples = []
    for class_idx in range(len(names)):
        for snr_idx, snr_db in enumerate(snr_grid):
            for m in range(per_class_per_snr):
                rng = derive_rng(seed, class_idx, snr_idx, m)
                capture = _generate_example(task, class_idx, snr_db, rng, n)
                examples.append(LabeledExample(capture, class_idx, snr_db))
    meta = {"seed": seed, "per_class_per_snr": per_class_per_snr, "fs": task.sample_rate}
    return Dataset(task, names, snr_grid, examples, meta)


def split(ds: Dataset, train_frac: float = 0.67, seed: int = 0):
    """Shuffle and cut into train / validation / test datasets.

    train takes floor(train_frac * n); the holdout is halved with the odd
    example going to validation, e.g. 100 -> 67/17/16.
    """
    if not 0.0 < train_frac < 1.0:
        raise ValueError(f"train_frac must be in (0, 1), got {train_frac}")
    total = len(ds.examples)
    if total < 3:
        raise ValueError(f"need at least 3 examples to split, got {total}")
    order = derive_rng(seed, _SPLIT_KEY).permutation(total)
    n_train = int(math.floor(train_frac * total))
    n_hold = total - n_train
    n_val = (n_hold + 1) // 2
    parts = (
        order[:n_train],
        order[n_train : n_train + n_val],
        order[n_train + n_val :],
    )

    def subset(indices, tag):
        return Dataset(
            ds.task,
            ds.class_names,
            ds.snr_grid,
            [ds.examples[i] for i in indices],
            {**ds.meta, "split": tag},
        )

    return subset(parts[0], "train"), subset(parts[1], "val"), subset(parts[2], "test")


def save_dataset(ds: Dataset, path) -> None:
    """Write the container format documented in the module docstring."""
    n = ds.n
    if n == 0:
        raise ValueError("refusing to save an empty dataset")
    for ex in ds.examples:
        if ex.capture.shape != (n,):
            raise ValueError("all captures must share one length")
        if not 0 <= ex.label < ds.k:
            raise LabelRangeError(f"label {ex.label} outside [0, {ds.k})")
        if ex.snr_db not in ds.snr_grid:
            raise ValueError(f"snr {ex.snr_db} is not on the declared grid")
    head = [
        MAGIC,
        struct.pack("<IIIII", CONTAINER_VERSION, n, ds.k, len(ds.examples), len(ds.snr_grid)),
        np.asarray(ds.snr_grid, dtype="<i2").tobytes(),
    ]
    for name in ds.class_names:
        raw = name.encode("utf-8")
        head.append(struct.pack("<H", len(raw)) + raw)
    record_dtype = np.dtype([("label", "<u2"), ("snr", "<i2"), ("iq", "<f4", (n, 2))])
    records = np.zeros(len(ds.examples), dtype=record_dtype)
    for i, ex in enumerate(ds.examples):
        records[i]["label"] = ex.label
        records[i]["snr"] = ex.snr_db
        records[i]["iq"][:, 0] = ex.capture.real
        records[i]["iq"][:, 1] = ex.capture.imag
    with open(path, "wb") as fh:
        fh.write(b"".join(head))
        fh.write(records.tobytes())


def load_dataset(path) -> Dataset:
    """Parse a container written by save_dataset; inverse up to f32 storage."""
    with open(path, "rb") as fh:
        buf = fh.read()
    off = 0

    def take(count, what):
        nonlocal off
        if off + count > len(buf):
            raise TruncatedRecordError(f"file ends inside {what}")
        piece = buf[off : off + count]
        off += count
        return piece

    magic = take(8, "magic")
    if magic != MAGIC:
        raise BadMagicError(f"expected {MAGIC!r}, found {magic!r}")
    version, n, k, record_count, snr_count = struct.unpack("<IIIII", take(20, "header"))
    if version != CONTAINER_VERSION:
        raise VersionMismatchError(f"container version {version}, reader supports {CONTAINER_VERSION}")
    snr_grid = tuple(
        int(v) for v in np.frombuffer(take(2 * snr_count, "snr grid"), dtype="<i2")
    )
    names = []
    for _ in range(k):
        (length,) = struct.unpack("<H", take(2, "class name length"))
        names.append(take(length, "class name").decode("utf-8"))
    record_dtype = np.dtype([("label", "<u2"), ("snr", "<i2"), ("iq", "<f4", (n, 2))])
    body = take(record_count * record_dtype.itemsize, "records")
    if off != len(buf):
        raise DatasetFormatError(f"{len(buf) - off} trailing bytes after records")
    records = np.frombuffer(body, dtype=record_dtype)
    if record_count and int(records["label"].max(initial=0)) >= k:
        raise LabelRangeError(f"label {int(records['label'].max())} outside [0, {k})")
    captures = (records["iq"][:, :, 0] + 1j * records["iq"][:, :, 1]).astype(np.complex64)
    examples = [
        LabeledExample(captures[i], int(records["label"][i]), int(records["snr"][i]))
        for i in range(record_count)
    ]
    names = tuple(names)
    if names == sigsynth.INTERFERENCE_CLASS_NAMES:
        task = Task.INTERFERENCE
    elif names == MODULATION_CLASS_NAMES or k == 11:
        task = Task.MODULATION
    else:
        task = Task.INTERFERENCE
    return Dataset(task, names, snr_grid, examples, {})
