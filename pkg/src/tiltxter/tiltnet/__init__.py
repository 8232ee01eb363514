"""From-scratch CNN tilt classifier: layers, model, training, checkpoints."""

from .layers import (
    BatchNormState,
    PlateauScheduler,
    SgdMomentum,
    batchnorm_backward,
    batchnorm_forward,
    conv2d_backward,
    conv2d_forward,
    cross_entropy,
    linear_backward,
    linear_forward,
    relu_backward,
    relu_forward,
    softmax,
)
from .model import ModelSpec, TiltNet, predict_tilt
from .training import TrainConfig, TrainReport, evaluate, records_to_arrays, train
from .checkpoint import CheckpointError, load_model, save_model

__all__ = [
    "BatchNormState",
    "PlateauScheduler",
    "SgdMomentum",
    "batchnorm_backward",
    "batchnorm_forward",
    "conv2d_backward",
    "conv2d_forward",
    "cross_entropy",
    "linear_backward",
    "linear_forward",
    "relu_backward",
    "relu_forward",
    "softmax",
    "ModelSpec",
    "TiltNet",
    "predict_tilt",
    "TrainConfig",
    "TrainReport",
    "evaluate",
    "records_to_arrays",
    "train",
    "CheckpointError",
    "load_model",
    "save_model",
]
