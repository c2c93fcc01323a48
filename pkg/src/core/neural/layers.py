from collections import OrderedDict
from typing import Iterator, Optional

import numpy as np

from src.core.exceptions import CheckpointError, ConfigurationError
from src.core.neural import functional as F
from src.core.neural.tensor import Tensor

CLASSICAL = "classical"
QUANTUM = "quantum"


class Parameter(Tensor):
    """Trainable leaf tensor tagged with its optimizer group."""

    def __init__(self, data, group: str = CLASSICAL, name: Optional[str] = None):
        super().__init__(data, requires_grad=True, name=name)
        self.group = group


class Module:
    """Container with named parameters, buffers and child modules."""

    def __init__(self):
        object.__setattr__(self, "_parameters", OrderedDict())
        object.__setattr__(self, "_buffers", OrderedDict())
        object.__setattr__(self, "_modules", OrderedDict())
        object.__setattr__(self, "training", True)

    def __setattr__(self, name, value):
        if isinstance(value, Parameter):
            self._parameters[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        object.__setattr__(self, name, value)

    def register_buffer(self, name: str, value: np.ndarray) -> None:
        self._buffers[name] = value
        object.__setattr__(self, name, value)

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    # --- traversal ------------------------------------------------------------

    def named_modules(self, prefix: str = "") -> Iterator[tuple[str, "Module"]]:
        yield prefix, self
        for name, child in self._modules.items():
            yield from child.named_modules(f"{prefix}.{name}" if prefix else name)

    def named_parameters(self) -> Iterator[tuple[str, Parameter]]:
        for prefix, module in self.named_modules():
            for name, param in module._parameters.items():
                yield (f"{prefix}.{name}" if prefix else name), param

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def named_buffers(self) -> Iterator[tuple[str, np.ndarray]]:
        for prefix, module in self.named_modules():
            for name, buf in module._buffers.items():
                yield (f"{prefix}.{name}" if prefix else name), buf

    def num_parameters(self, group: Optional[str] = None) -> int:
        return sum(p.size for p in self.parameters() if group is None or p.group == group)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    # --- modes ----------------------------------------------------------------

    def train(self, mode: bool = True) -> "Module":
        for _, module in self.named_modules():
            object.__setattr__(module, "training", mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    # --- state ----------------------------------------------------------------

    def state_dict(self) -> "OrderedDict[str, np.ndarray]":
        state = OrderedDict((name, p.data.copy()) for name, p in self.named_parameters())
        state.update((name, buf.copy()) for name, buf in self.named_buffers())
        return state

    def load_state_dict(self, state: dict) -> None:
        expected = dict(self.named_parameters())
        buffers = dict(self.named_buffers())
        missing = [k for k in list(expected) + list(buffers) if k not in state]
        unexpected = [k for k in state if k not in expected and k not in buffers]
        if missing or unexpected:
            raise CheckpointError(f"State mismatch; missing={missing} unexpected={unexpected}")
        targets = [(name, p.data) for name, p in expected.items()] + list(buffers.items())
        for name, target in targets:
            if np.shape(state[name]) != target.shape:
                raise CheckpointError(f"{name}: stored shape {np.shape(state[name])}, model expects {target.shape}")
        for name, target in targets:
            target[...] = np.asarray(state[name], dtype=np.float64)


def _uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Parameter(_uniform(rng, in_features, (out_features, in_features)))
        self.bias = Parameter(_uniform(rng, in_features, (out_features,)))

    def forward(self, x: Tensor) -> Tensor:
        return F.linear(x, self.weight, self.bias)


class Conv2d(Module):
    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        rng: np.random.Generator,
        kernel_size: int = 3,
        stride: int = 2,
        padding: int = 1,
    ):
        super().__init__()
        self.stride = stride
        self.padding = padding
        fan_in = in_channels * kernel_size * kernel_size
        self.weight = Parameter(_uniform(rng, fan_in, (out_channels, in_channels, kernel_size, kernel_size)))
        self.bias = Parameter(_uniform(rng, fan_in, (out_channels,)))

    def forward(self, x: Tensor) -> Tensor:
        return F.conv2d(x, self.weight, self.bias, self.stride, self.padding)


class BatchNorm(Module):
    """Batch normalisation over axis 1; works for vectors and feature maps."""

    def __init__(self, features: int, eps: float = 1e-5, momentum: float = 0.1):
        super().__init__()
        self.eps = eps
        self.momentum = momentum
        self.gamma = Parameter(np.ones(features))
        self.beta = Parameter(np.zeros(features))
        self.register_buffer("running_mean", np.zeros(features))
        self.register_buffer("running_var", np.ones(features))

    def forward(self, x: Tensor) -> Tensor:
        return F.batch_norm(
            x,
            self.gamma,
            self.beta,
            self.running_mean,
            self.running_var,
            training=self.training,
            momentum=self.momentum,
            eps=self.eps,
        )


class LeakyReLU(Module):
    def __init__(self, slope: float = 0.2):
        super().__init__()
        self.slope = slope

    def forward(self, x: Tensor) -> Tensor:
        return F.leaky_relu(x, self.slope)


class Flatten(Module):
    def forward(self, x: Tensor) -> Tensor:
        return F.flatten(x)


class Sequential(Module):
    def __init__(self, *layers: Module):
        super().__init__()
        for index, layer in enumerate(layers):
            setattr(self, str(index), layer)

    def __iter__(self):
        return iter(self._modules.values())

    def __len__(self) -> int:
        return len(self._modules)

    def forward(self, x: Tensor) -> Tensor:
        for layer in self._modules.values():
            x = layer(x)
        return x


def linear_forward(layer: Linear, x: Tensor) -> Tensor:
    return layer(x)


def conv2d_forward(layer: Conv2d, x: Tensor) -> Tensor:
    return layer(x)


def batchnorm_forward(layer: BatchNorm, x: Tensor, mode: str) -> Tensor:
    """Run ``layer`` in ``"train"`` or ``"eval"`` mode regardless of its current setting."""
    if mode not in ("train", "eval"):
        raise ConfigurationError(f"mode must be 'train' or 'eval', got {mode!r}")
    return F.batch_norm(
        x,
        layer.gamma,
        layer.beta,
        layer.running_mean,
        layer.running_var,
        training=mode == "train",
        momentum=layer.momentum,
        eps=layer.eps,
    )
