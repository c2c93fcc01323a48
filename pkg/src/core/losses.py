"""Reconstruction and KL losses with the warm-up / capacity schedules.

All reconstruction losses sum over the pixels of an image and average over the
mini-batch, so their magnitude is O(10^2) for 28x28 images.
"""
import numpy as np

from src.core.exceptions import ConfigurationError, DomainError, ShapeError
from src.core.neural.tensor import Tensor, as_tensor
from src.schemas.config import LossSchedule, ScheduleMode


def bce_with_logits(logits, target) -> Tensor:
    """Per-image summed binary cross-entropy from logits, averaged over the batch.

    Uses max(x, 0) - x*y + log(1 + exp(-|x|)) per pixel so that large logits
    neither overflow nor produce NaN.
    """
    logits = as_tensor(logits)
    y = np.asarray(as_tensor(target).data, dtype=np.float64)
    if y.shape != logits.shape:
        raise ShapeError(f"logits {logits.shape} and target {y.shape} differ in shape")
    if np.any(y < 0.0) or np.any(y > 1.0):
        raise DomainError("BCE targets must lie in [0, 1]")
    x = logits.data
    batch = x.shape[0] if x.ndim > 0 else 1
    per_pixel = np.maximum(x, 0.0) - x * y + np.log1p(np.exp(-np.abs(x)))
    value = per_pixel.sum() / batch

    def backward(g):
        e = np.exp(-np.abs(x))
        probs = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
        return (g * (probs - y) / batch,)

    return Tensor.from_op(np.asarray(value), (logits,), backward)


def mse_loss(output, target) -> Tensor:
    """Per-image sum of squared differences, averaged over the batch."""
    output = as_tensor(output)
    target = as_tensor(target)
    if output.shape != target.shape:
        raise ShapeError(f"output {output.shape} and target {target.shape} differ in shape")
    batch = output.shape[0] if output.ndim > 0 else 1
    diff = output - target
    return (diff * diff).sum() * (1.0 / batch)


def kl_divergence(mu, logvar, free_bits: float = 0.0) -> Tensor:
    """KL(N(mu, exp(logvar)) || N(0, I)), summed over latent dims, batch-averaged.

    With free bits each latent dimension's batch-mean KL is floored at
    ``free_bits`` before summing.
    """
    mu = as_tensor(mu)
    logvar = as_tensor(logvar)
    if mu.shape != logvar.shape:
        raise ShapeError(f"mu {mu.shape} and logvar {logvar.shape} differ in shape")
    per_dim = (mu * mu + logvar.exp() - 1.0 - logvar) * 0.5
    per_dim = per_dim.mean(axis=0)
    if free_bits > 0.0:
        per_dim = per_dim.maximum(free_bits)
    return per_dim.sum()


def schedule_weights(epoch: int, schedule: LossSchedule) -> tuple[float, float]:
    """(beta_t, C_t) for a 1-based epoch; linear ramps that saturate at their horizons."""
    if epoch < 1:
        raise ConfigurationError(f"epochs are 1-based, got {epoch}")
    beta_t, c_t = 1.0, 0.0
    if schedule.mode is ScheduleMode.BETA_WARMUP:
        beta_t = min(1.0, epoch / schedule.n_beta)
    elif schedule.mode is ScheduleMode.CAPACITY:
        c_t = schedule.c_max * min(1.0, epoch / schedule.n_c)
    return beta_t, c_t


def total_loss(rec, kl, beta_t: float, c_t: float, schedule: LossSchedule) -> Tensor:
    """rec + beta_t * kl, or rec + gamma * |kl - C_t| in capacity mode."""
    rec = as_tensor(rec)
    kl = as_tensor(kl)
    if schedule.mode is ScheduleMode.CAPACITY:
        return rec + (kl - c_t).abs() * schedule.gamma
    return rec + kl * beta_t
