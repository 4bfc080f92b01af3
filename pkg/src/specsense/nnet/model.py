"""Model assembly, prediction, and the binary model file format.

The stack follows one fixed recipe at two widths:

    conv(F1, 1x3, same/same) + relu + dropout
    conv(F2, 2x3, valid/same) + relu + dropout
    flatten
    dense(D) + relu + dropout
    dense(K)

Softmax is applied at prediction time; training folds it into the loss.

Model file layout (little-endian):

    8s  magic "SPECNN01"
    u32 version (1)
    u32 layer count
    per layer: u8 kind, u32 dim count, dims as u32,
               f32 weights row-major, f32 biases
    u32 K, u32 input rank, input dims as u32
    u8 task tag, u8 representation tag, i64 split seed

Stateless layers store an empty dim list; dropout stores its rate as a
single f32 weight. Kinds: 1 conv, 2 relu, 3 dropout, 4 flatten, 5 dense.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..dataset import Task
from ..transforms import FeatureVector, Repr
from .layers import Conv2d, Dense, Dropout, Flatten, ReLU, softmax

MODEL_MAGIC = b"SPECNN01"
MODEL_VERSION = 1

_KIND_CODES = {"conv": 1, "relu": 2, "dropout": 3, "flatten": 4, "dense": 5}
_PAD_CODES = {"valid": 0, "same": 1}
_PAD_NAMES = {v: k for k, v in _PAD_CODES.items()}
_TASK_CODES = {None: 255, Task.MODULATION: 0, Task.INTERFERENCE: 1}
_TASK_NAMES = {0: Task.MODULATION, 1: Task.INTERFERENCE, 255: None}
_REPR_CODES = {None: 255, Repr.IQ: 0, Repr.AMP_PHASE: 1, Repr.FFT: 2}
_REPR_NAMES = {0: Repr.IQ, 1: Repr.AMP_PHASE, 2: Repr.FFT, 255: None}


class ModelFormatError(ValueError):
    """Raised when a model file cannot be decoded."""


@dataclass
class ModelConfig:
    """Architecture widths; input_shape is (channels, height, width)."""

    input_shape: tuple = (1, 2, 128)
    conv1_filters: int = 256
    conv2_filters: int = 80
    dense_units: int = 256
    num_classes: int = 11
    dtype: type = np.float32

    def __post_init__(self):
        c, h, w = self.input_shape
        if (c, h) != (1, 2):
            raise ValueError(f"input must be a single 2-row plane, got {self.input_shape}")
        if min(self.conv1_filters, self.conv2_filters, self.dense_units) < 1:
            raise ValueError("layer widths must be positive")
        if self.num_classes < 2:
            raise ValueError(f"need at least two classes, got {self.num_classes}")


def full_config(num_classes: int, n: int = 128) -> ModelConfig:
    """Full-width stack: 256 and 80 filters into a 256-unit dense layer."""
    return ModelConfig((1, 2, n), 256, 80, 256, num_classes)


def desk_config(num_classes: int, n: int = 128) -> ModelConfig:
    """Reduced stack for laptop-budget runs: 64/32 filters, 128 dense units."""
    return ModelConfig((1, 2, n), 64, 32, 128, num_classes)


class Model:
    """An ordered layer stack plus the metadata needed to use it later."""

    def __init__(self, layers, input_shape, num_classes, task=None, representation=None, seed=None):
        self.layers = list(layers)
        self.input_shape = tuple(input_shape)
        self.num_classes = int(num_classes)
        self.task = task
        self.representation = representation
        self.seed = seed

    def forward(self, x, train=False, rng=None) -> np.ndarray:
        if x.ndim != 4 or x.shape[1:] != self.input_shape:
            raise ValueError(f"expected batch of {self.input_shape}, got {x.shape}")
        out = x
        for layer in self.layers:
            out = layer.forward(out, train=train, rng=rng)
        return out

    def backward(self, grad) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def predict_proba(self, x) -> np.ndarray:
        return softmax(self.forward(x, train=False))

    def params(self) -> list:
        return [p for layer in self.layers for p in layer.params]

    def grads(self) -> list:
        return [g for layer in self.layers for g in layer.grads]

    def snapshot_params(self) -> list:
        return [p.copy() for p in self.params()]

    def load_params(self, snapshot) -> None:
        for dst, src in zip(self.params(), snapshot, strict=True):
            dst[...] = src


def build_model(config: ModelConfig, seed: int, dropout: float = 0.6) -> Model:
    """Glorot-initialized stack; the same seed always gives the same weights."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0x1417,)))
    _, _, width = config.input_shape
    dt = config.dtype
    layers = [
        Conv2d(1, config.conv1_filters, (1, 3), ("same", "same"), rng, dt),
        ReLU(),
        Dropout(dropout),
        Conv2d(config.conv1_filters, config.conv2_filters, (2, 3), ("valid", "same"), rng, dt),
        ReLU(),
        Dropout(dropout),
        Flatten(),
        Dense(config.conv2_filters * width, config.dense_units, rng, dt),
        ReLU(),
        Dropout(dropout),
        Dense(config.dense_units, config.num_classes, rng, dt),
    ]
    return Model(layers, config.input_shape, config.num_classes, seed=seed)


def predict(model: Model, features) -> tuple[int, np.ndarray]:
    """Classify one 2xN feature matrix; ties resolve to the lowest index.

    Accepts a FeatureVector or a bare (2, N) array and returns the class
    index with the full probability row.
    """
    data = features.data if isinstance(features, FeatureVector) else np.asarray(features)
    if data.shape != model.input_shape[1:]:
        raise ValueError(f"expected {model.input_shape[1:]} features, got {data.shape}")
    x = data.astype(model.params()[0].dtype)[np.newaxis, np.newaxis]
    probs = model.predict_proba(x)[0]
    return int(np.argmax(probs)), probs


def _write_array(parts, arr) -> None:
    parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def save_model(model: Model, path) -> None:
    parts = [MODEL_MAGIC, struct.pack("<II", MODEL_VERSION, len(model.layers))]
    for layer in model.layers:
        if layer.kind == "conv":
            dims = [
                layer.out_channels,
                layer.in_channels,
                layer.kh,
                layer.kw,
                _PAD_CODES[layer.pad_h],
                _PAD_CODES[layer.pad_w],
            ]
            parts.append(struct.pack("<BI", _KIND_CODES["conv"], len(dims)))
            parts.append(np.asarray(dims, dtype="<u4").tobytes())
            _write_array(parts, layer.weights)
            _write_array(parts, layer.bias)
        elif layer.kind == "dense":
            dims = [layer.out_features, layer.in_features]
            parts.append(struct.pack("<BI", _KIND_CODES["dense"], len(dims)))
            parts.append(np.asarray(dims, dtype="<u4").tobytes())
            _write_array(parts, layer.weights)
            _write_array(parts, layer.bias)
        elif layer.kind == "dropout":
            parts.append(struct.pack("<BI", _KIND_CODES["dropout"], 0))
            parts.append(struct.pack("<f", layer.rate))
        else:
            parts.append(struct.pack("<BI", _KIND_CODES[layer.kind], 0))
    parts.append(struct.pack("<II", model.num_classes, len(model.input_shape)))
    parts.append(np.asarray(model.input_shape, dtype="<u4").tobytes())
    seed = -1 if model.seed is None else int(model.seed)
    parts.append(
        struct.pack(
            "<BBq", _TASK_CODES[model.task], _REPR_CODES[model.representation], seed
        )
    )
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def load_model(path) -> Model:
    with open(path, "rb") as fh:
        buf = fh.read()
    off = 0

    def take(count, what):
        nonlocal off
        if off + count > len(buf):
            raise ModelFormatError(f"file ends inside {what}")
        piece = buf[off : off + count]
        off += count
        return piece

    if take(8, "magic") != MODEL_MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    version, layer_count = struct.unpack("<II", take(8, "header"))
    if version != MODEL_VERSION:
        raise ModelFormatError(f"model version {version}, reader supports {MODEL_VERSION}")

    def read_dims():
        (count,) = struct.unpack("<I", take(4, "dim count"))
        return [int(v) for v in np.frombuffer(take(4 * count, "dims"), dtype="<u4")]

    def read_f32(count, what):
        return np.frombuffer(take(4 * count, what), dtype="<f4").astype(np.float32)

    layers = []
    for _ in range(layer_count):
        (kind,) = struct.unpack("<B", take(1, "layer kind"))
        if kind == _KIND_CODES["conv"]:
            dims = read_dims()
            if len(dims) != 6 or dims[4] not in _PAD_NAMES or dims[5] not in _PAD_NAMES:
                raise ModelFormatError(f"bad conv dims {dims}")
            f, c, kh, kw, ph, pw = dims
            layer = Conv2d(c, f, (kh, kw), (_PAD_NAMES[ph], _PAD_NAMES[pw]))
            layer.weights = read_f32(f * c * kh * kw, "conv weights").reshape(f, c, kh, kw)
            layer.bias = read_f32(f, "conv bias")
            layer.grad_w = np.zeros_like(layer.weights)
            layer.grad_b = np.zeros_like(layer.bias)
        elif kind == _KIND_CODES["dense"]:
            dims = read_dims()
            if len(dims) != 2:
                raise ModelFormatError(f"bad dense dims {dims}")
            out_f, in_f = dims
            layer = Dense(in_f, out_f)
            layer.weights = read_f32(out_f * in_f, "dense weights").reshape(out_f, in_f)
            layer.bias = read_f32(out_f, "dense bias")
            layer.grad_w = np.zeros_like(layer.weights)
            layer.grad_b = np.zeros_like(layer.bias)
        elif kind == _KIND_CODES["dropout"]:
            if read_dims():
                raise ModelFormatError("dropout must not carry dims")
            (rate,) = struct.unpack("<f", take(4, "dropout rate"))
            layer = Dropout(float(rate))
        elif kind == _KIND_CODES["relu"]:
            read_dims()
            layer = ReLU()
        elif kind == _KIND_CODES["flatten"]:
            read_dims()
            layer = Flatten()
        else:
            raise ModelFormatError(f"unknown layer kind {kind}")
        layers.append(layer)

    num_classes, rank = struct.unpack("<II", take(8, "trailer"))
    input_shape = tuple(
        int(v) for v in np.frombuffer(take(4 * rank, "input shape"), dtype="<u4")
    )
    task_code, repr_code, seed = struct.unpack("<BBq", take(10, "metadata"))
    if task_code not in _TASK_NAMES:
        raise ModelFormatError(f"unknown task tag {task_code}")
    if repr_code not in _REPR_NAMES:
        raise ModelFormatError(f"unknown representation tag {repr_code}")
    if off != len(buf):
        raise ModelFormatError(f"{len(buf) - off} trailing bytes")
    return Model(
        layers,
        input_shape,
        num_classes,
        task=_TASK_NAMES[task_code],
        representation=_REPR_NAMES[repr_code],
        seed=None if seed < 0 else int(seed),
    )
