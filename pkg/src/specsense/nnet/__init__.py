"""Hand-rolled convolutional network: layers, assembly, and training."""

from .layers import (
    Conv2d,
    Dense,
    Dropout,
    Flatten,
    ReLU,
    cross_entropy,
    glorot_uniform,
    softmax,
    softmax_cross_entropy,
)
from .model import (
    Model,
    ModelConfig,
    ModelFormatError,
    build_model,
    desk_config,
    load_model,
    full_config,
    predict,
    save_model,
)
from .train import AdamState, TrainConfig, TrainingDivergedError, adam_step, evaluate_arrays, train

__all__ = [
    "AdamState",
    "Conv2d",
    "Dense",
    "Dropout",
    "Flatten",
    "Model",
    "ModelConfig",
    "ModelFormatError",
    "ReLU",
    "TrainConfig",
    "TrainingDivergedError",
    "adam_step",
    "build_model",
    "cross_entropy",
    "desk_config",
    "evaluate_arrays",
    "glorot_uniform",
    "load_model",
    "full_config",
    "predict",
    "save_model",
    "softmax",
    "softmax_cross_entropy",
    "train",
]
