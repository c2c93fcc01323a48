"""Differentiable operations used by the encoder and decoders."""
from typing import Optional

import numpy as np

from src.core.exceptions import ContractError, ShapeError
from src.core.neural.tensor import Tensor, as_tensor


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """y = x W^T + b for ``x`` of shape ``(batch, in)``."""
    if x.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise ShapeError(f"Linear expects (batch, {weight.shape[1]}) input, got {x.shape}")
    out = x @ weight.T
    return out + bias if bias is not None else out


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def conv2d(x: Tensor, weight: Tensor, bias: Optional[Tensor], stride: int = 2, padding: int = 1) -> Tensor:
    """Cross-correlation of ``(batch, in_ch, H, W)`` with ``(out_ch, in_ch, kh, kw)`` kernels.

    Computed as one einsum per kernel offset over a strided view of the padded
    input; the backward pass scatters through the same views.
    """
    if x.ndim != 4 or weight.ndim != 4 or x.shape[1] != weight.shape[1]:
        raise ShapeError(f"conv2d channel mismatch: input {x.shape}, kernels {weight.shape}")
    batch, channels, height, width = x.shape
    _, _, kh, kw = weight.shape
    out_h = conv_output_size(height, kh, stride, padding)
    out_w = conv_output_size(width, kw, stride, padding)
    if out_h < 1 or out_w < 1:
        raise ShapeError(f"Input {height}x{width} too small for a {kh}x{kw} kernel")

    padded = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    w = weight.data

    def window(i: int, j: int):
        return (
            slice(None),
            slice(None),
            slice(i, i + stride * (out_h - 1) + 1, stride),
            slice(j, j + stride * (out_w - 1) + 1, stride),
        )

    out = np.zeros((batch, w.shape[0], out_h, out_w))
    for i in range(kh):
        for j in range(kw):
            out += np.einsum("bchw,oc->bohw", padded[window(i, j)], w[:, :, i, j], optimize=True)
    if bias is not None:
        out += bias.data.reshape(1, -1, 1, 1)

    def backward(g):
        d_padded = np.zeros_like(padded)
        d_weight = np.zeros_like(w)
        for i in range(kh):
            for j in range(kw):
                view = window(i, j)
                d_weight[:, :, i, j] = np.einsum("bohw,bchw->oc", g, padded[view], optimize=True)
                d_padded[view] += np.einsum("bohw,oc->bchw", g, w[:, :, i, j], optimize=True)
        d_x = d_padded[:, :, padding : padding + height, padding : padding + width]
        d_bias = g.sum(axis=(0, 2, 3)) if bias is not None else None
        return d_x, d_weight, d_bias

    parents = (x, weight, bias) if bias is not None else (x, weight)
    return Tensor.from_op(out, parents, backward)


def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = 0.1,
    eps: float = 1e-5,
) -> Tensor:
    """Normalise feature axis 1 over the batch (and spatial axes for feature maps).

    In training mode the running statistics are updated in place with the biased
    batch variance.
    """
    if x.ndim < 2 or x.shape[1] != gamma.shape[0]:
        raise ShapeError(f"BatchNorm over {gamma.shape[0]} features got input {x.shape}")
    axes = (0,) + tuple(range(2, x.ndim))
    stat_shape = (1, -1) + (1,) * (x.ndim - 2)
    g_shaped = gamma.data.reshape(stat_shape)

    if training:
        if x.shape[0] < 2:
            raise ContractError("BatchNorm in train mode needs a batch of at least 2")
        mean = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        running_mean *= 1.0 - momentum
        running_mean += momentum * mean
        running_var *= 1.0 - momentum
        running_var += momentum * var
    else:
        mean, var = running_mean, running_var

    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x.data - mean.reshape(stat_shape)) * inv_std.reshape(stat_shape)
    out = g_shaped * x_hat + beta.data.reshape(stat_shape)
    count = x.data.size // x.shape[1]

    def backward(g):
        d_gamma = (g * x_hat).sum(axis=axes)
        d_beta = g.sum(axis=axes)
        d_hat = g * g_shaped
        if training:
            d_x = (
                inv_std.reshape(stat_shape)
                / count
                * (
                    count * d_hat
                    - d_hat.sum(axis=axes, keepdims=True)
                    - x_hat * (d_hat * x_hat).sum(axis=axes, keepdims=True)
                )
            )
        else:
            d_x = d_hat * inv_std.reshape(stat_shape)
        return d_x, d_gamma, d_beta

    return Tensor.from_op(out, (x, gamma, beta), backward)


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    a = x.data
    scale = np.where(a > 0, 1.0, slope)
    return Tensor.from_op(a * scale, (x,), lambda g: (g * scale,))


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    # exp(-|a|) keeps both branches finite
    a = x.data
    e = np.exp(-np.abs(a))
    out = np.where(a >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return Tensor.from_op(out, (x,), lambda g: (g * out * (1.0 - out),))


def flatten(x: Tensor) -> Tensor:
    """Collapse everything but the batch axis."""
    return x.reshape(x.shape[0], -1)
