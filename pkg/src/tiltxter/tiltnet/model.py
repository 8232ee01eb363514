"""The tilt classifier: two 3x3 conv stages (batch-normalized, ReLU) into
a four-layer fully connected head ending in 9 class logits.

Input is a (2, 10, 10) stack of finger force grids in newtons; the model
scales by 1/9 internally so checkpoints stay self-contained.  Channel 0
is the (flipped) left finger, channel 1 the right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import FORCE_MAX_N, TILT_DEGREES, BiFrame, TiltClass
from .layers import (
    BatchNormState,
    batchnorm_backward,
    batchnorm_forward,
    conv2d_backward,
    conv2d_forward,
    linear_backward,
    linear_forward,
    relu_backward,
    relu_forward,
    softmax,
)


@dataclass(frozen=True)
class ModelSpec:
    """Layer dimensions; the checkpoint header is derived from this."""

    in_channels: int = 2
    conv_channels: tuple[int, int] = (8, 16)
    kernel: int = 3
    input_hw: tuple[int, int] = (10, 10)
    hidden: tuple[int, int, int] = (256, 128, 64)
    classes: int = len(TILT_DEGREES)

    @property
    def flat_features(self) -> int:
        return self.conv_channels[1] * self.input_hw[0] * self.input_hw[1]

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        """Parameter name -> shape, in declaration (checkpoint) order."""
        c_in, (c1, c2) = self.in_channels, self.conv_channels
        k = self.kernel
        widths = (self.flat_features, *self.hidden, self.classes)
        shapes: dict[str, tuple[int, ...]] = {
            "conv1.w": (c1, c_in, k, k), "conv1.b": (c1,),
            "bn1.gamma": (c1,), "bn1.beta": (c1,),
            "conv2.w": (c2, c1, k, k), "conv2.b": (c2,),
            "bn2.gamma": (c2,), "bn2.beta": (c2,),
        }
        for i in range(4):
            shapes[f"fc{i + 1}.w"] = (widths[i + 1], widths[i])
            shapes[f"fc{i + 1}.b"] = (widths[i + 1],)
        return shapes

    @property
    def param_count(self) -> int:
        return sum(int(np.prod(s)) for s in self.param_shapes().values())


class TiltNet:
    """Parameter store plus the forward/backward passes that use it."""

    def __init__(self, spec: ModelSpec = ModelSpec(), seed: int = 0):
        self.spec = spec
        self.params: dict[str, np.ndarray] = {}
        rng = np.random.default_rng(np.random.SeedSequence([seed]))
        for name, shape in spec.param_shapes().items():
            if name.endswith(".w"):
                fan_in = int(np.prod(shape[1:]))
                bound = 1.0 / np.sqrt(fan_in)
                self.params[name] = rng.uniform(-bound, bound, size=shape)
            elif name.endswith(".gamma"):
                self.params[name] = np.ones(shape)
            else:
                self.params[name] = np.zeros(shape)
        self.bn_states = {
            "bn1": BatchNormState.initial(spec.conv_channels[0]),
            "bn2": BatchNormState.initial(spec.conv_channels[1]),
        }

    def forward(self, x: np.ndarray, training: bool = False):
        """(B, 2, 10, 10) forces -> (B, 9) logits, plus backward caches."""
        p = self.params
        caches = {}
        h = np.asarray(x, dtype=np.float64) / FORCE_MAX_N
        h, caches["conv1"] = conv2d_forward(h, p["conv1.w"], p["conv1.b"])
        h, caches["bn1"] = batchnorm_forward(h, p["bn1.gamma"], p["bn1.beta"], self.bn_states["bn1"], training)
        h, caches["relu1"] = relu_forward(h)
        h, caches["conv2"] = conv2d_forward(h, p["conv2.w"], p["conv2.b"])
        h, caches["bn2"] = batchnorm_forward(h, p["bn2.gamma"], p["bn2.beta"], self.bn_states["bn2"], training)
        h, caches["relu2"] = relu_forward(h)
        caches["conv_shape"] = h.shape
        h = h.reshape(h.shape[0], -1)
        for i in (1, 2, 3):
            h, caches[f"fc{i}"] = linear_forward(h, p[f"fc{i}.w"], p[f"fc{i}.b"])
            h, caches[f"relu_fc{i}"] = relu_forward(h)
        logits, caches["fc4"] = linear_forward(h, p["fc4.w"], p["fc4.b"])
        return logits, caches

    def backward(self, dlogits: np.ndarray, caches) -> dict[str, np.ndarray]:
        """Gradient of the loss w.r.t. every parameter (and input, key 'x')."""
        p = self.params
        grads: dict[str, np.ndarray] = {}
        d, grads["fc4.w"], grads["fc4.b"] = linear_backward(dlogits, caches["fc4"], p["fc4.w"])
        for i in (3, 2, 1):
            d = relu_backward(d, caches[f"relu_fc{i}"])
            d, grads[f"fc{i}.w"], grads[f"fc{i}.b"] = linear_backward(d, caches[f"fc{i}"], p[f"fc{i}.w"])
        d = d.reshape(caches["conv_shape"])
        d = relu_backward(d, caches["relu2"])
        d, grads["bn2.gamma"], grads["bn2.beta"] = batchnorm_backward(d, caches["bn2"])
        d, grads["conv2.w"], grads["conv2.b"] = conv2d_backward(d, caches["conv2"], p["conv2.w"])
        d = relu_backward(d, caches["relu1"])
        d, grads["bn1.gamma"], grads["bn1.beta"] = batchnorm_backward(d, caches["bn1"])
        d, grads["conv1.w"], grads["conv1.b"] = conv2d_backward(d, caches["conv1"], p["conv1.w"])
        grads["x"] = d / FORCE_MAX_N
        return grads

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        logits, _ = self.forward(x, training=False)
        return softmax(logits)

    def predict(self, x: np.ndarray) -> np.ndarray:
        logits, _ = self.forward(x, training=False)
        return logits.argmax(axis=1)

    def copy_params(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}

    def load_params(self, params: dict[str, np.ndarray]) -> None:
        for k in self.params:
            self.params[k][...] = params[k]


def predict_tilt(model: TiltNet, biframe: BiFrame) -> tuple[TiltClass, float]:
    """Classify one frame pair; returns the class and the softmax confidence."""
    probs = model.predict_proba(biframe.stacked()[None])[0]
    idx = int(probs.argmax())
    return TiltClass(idx), float(probs[idx])
