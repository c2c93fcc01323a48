"""Two-group Adam with global-norm gradient clipping."""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from src.core.exceptions import ConfigurationError, NumericError
from src.core.neural import CLASSICAL, QUANTUM, Parameter
from src.schemas.config import OptimizerSettings

logger = logging.getLogger(__name__)

NamedParameters = Sequence[tuple[str, Parameter]]


def global_norm(grads: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(np.square(g))) for g in grads)))


def clip_global_norm(
    grads: Sequence[np.ndarray], g_max: float, names: Optional[Sequence[str]] = None
) -> list[np.ndarray]:
    """Scale every gradient by g_max / norm when the joint L2 norm exceeds g_max.

    A non-finite norm raises NumericError naming the first non-finite gradient,
    before scaling would spread the NaN to every parameter.
    """
    if g_max <= 0:
        raise ConfigurationError(f"clip threshold must be positive, got {g_max}")
    norm = global_norm(grads)
    if not np.isfinite(norm):
        labels = list(names) if names is not None else [f"#{i}" for i in range(len(grads))]
        for label, g in zip(labels, grads):
            if not np.all(np.isfinite(g)):
                raise NumericError(f"Non-finite gradient for parameter {label}")
        raise NumericError(f"Gradient norm overflowed to {norm}")
    if norm <= g_max:
        return [np.asarray(g) for g in grads]
    scale = g_max / norm
    logger.debug(f"Clipping gradient norm {norm:.4f} to {g_max}")
    return [np.asarray(g) * scale for g in grads]


@dataclass
class OptimizerState:
    """Adam moments per parameter name, the shared step counter and per-group learning rates."""

    lr: dict[str, float]
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def create(cls, params: NamedParameters, settings: OptimizerSettings) -> "OptimizerState":
        state = cls(
            lr={CLASSICAL: settings.lr_classical, QUANTUM: settings.lr_quantum},
            betas=tuple(settings.betas),
            eps=settings.eps,
        )
        for name, p in params:
            if p.group not in state.lr:
                raise ConfigurationError(f"Parameter {name} has unknown group {p.group!r}")
            state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        return state

    def group_sizes(self, params: NamedParameters) -> dict[str, int]:
        sizes = {group: 0 for group in self.lr}
        for _, p in params:
            sizes[p.group] += p.size
        return sizes


def adam_step(state: OptimizerState, params: NamedParameters, grads: Sequence[Optional[np.ndarray]]) -> None:
    """Bias-corrected Adam update of every parameter in place; ``t`` advances once per call.

    A missing gradient counts as zero. Every gradient is checked before any
    parameter moves, so a NaN leaves the model untouched.
    """
    if len(params) != len(grads):
        raise ConfigurationError(f"{len(params)} parameters but {len(grads)} gradients")
    resolved = []
    for (name, p), g in zip(params, grads):
        g = np.zeros_like(p.data) if g is None else np.asarray(g, dtype=np.float64)
        if not np.all(np.isfinite(g)):
            raise NumericError(f"Non-finite gradient for parameter {name}")
        resolved.append(g)

    state.t += 1
    beta1, beta2 = state.betas
    correction1 = 1.0 - beta1**state.t
    correction2 = 1.0 - beta2**state.t
    for (name, p), g in zip(params, resolved):
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        p.data -= state.lr[p.group] * m_hat / (np.sqrt(v_hat) + state.eps)
