from .functional import batch_norm, conv2d, flatten, leaky_relu, linear, sigmoid
from .layers import (
    CLASSICAL,
    QUANTUM,
    BatchNorm,
    Conv2d,
    Flatten,
    LeakyReLU,
    Linear,
    Module,
    Parameter,
    Sequential,
    batchnorm_forward,
    conv2d_forward,
    linear_forward,
)
from .tensor import Tensor, as_tensor, is_grad_enabled, no_grad

__all__ = [
    "batch_norm",
    "conv2d",
    "flatten",
    "leaky_relu",
    "linear",
    "sigmoid",
    "CLASSICAL",
    "QUANTUM",
    "BatchNorm",
    "Conv2d",
    "Flatten",
    "LeakyReLU",
    "Linear",
    "Module",
    "Parameter",
    "Sequential",
    "batchnorm_forward",
    "conv2d_forward",
    "linear_forward",
    "Tensor",
    "as_tensor",
    "is_grad_enabled",
    "no_grad",
]
