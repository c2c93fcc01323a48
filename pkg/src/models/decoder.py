import numpy as np

from src.core.exceptions import ConfigurationError, ShapeError
from src.core.neural import BatchNorm, LeakyReLU, Linear, Module, Sequential, Tensor, as_tensor
from src.models.quantum import QuantumLayer
from src.schemas.config import ModelConfig


def _mlp(widths: list[int], slope: float, rng: np.random.Generator) -> Sequential:
    layers = []
    for index, (w_in, w_out) in enumerate(zip(widths[:-1], widths[1:])):
        layers.append(Linear(w_in, w_out, rng))
        if index < len(widths) - 2:
            layers.append(LeakyReLU(slope))
    return Sequential(*layers)


class QINRDecoder(Module):
    """z -> BatchNorm(W1 z + b1) -> h = W2 v + b2 -> circuit features -> readout MLP -> logits."""

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        super().__init__()
        self.latent_dim = config.latent_dim
        self.project = Linear(config.latent_dim, config.v_dim, rng)
        self.norm = BatchNorm(config.v_dim, config.bn_eps, config.bn_momentum)
        self.angles = Linear(config.v_dim, config.n_qubits, rng)
        self.quantum = QuantumLayer(config, rng)
        self.readout = _mlp([self.quantum.feature_width] + list(config.readout_widths), config.leaky_slope, rng)

    def forward(self, z) -> Tensor:
        v = self.norm(self.project(z))
        return self.readout(self.quantum(self.angles(v)))


class ClassicalDecoder(Module):
    """Linear -> BatchNorm -> leaky-ReLU blocks ending in a plain linear layer to the pixels."""

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        super().__init__()
        self.latent_dim = config.latent_dim
        widths = [config.latent_dim] + config.resolved_classical_widths
        layers = []
        for w_in, w_out in zip(widths[:-2], widths[1:-1]):
            layers += [
                Linear(w_in, w_out, rng),
                BatchNorm(w_out, config.bn_eps, config.bn_momentum),
                LeakyReLU(config.leaky_slope),
            ]
        layers.append(Linear(widths[-2], widths[-1], rng))
        self.layers = Sequential(*layers)

    def forward(self, z) -> Tensor:
        return self.layers(z)


def _check_latent(decoder: Module, z) -> Tensor:
    z = as_tensor(z)
    if z.ndim != 2 or z.shape[1] != decoder.latent_dim:
        raise ShapeError(f"Decoder expects z of shape (batch, {decoder.latent_dim}), got {z.shape}")
    return z


def decode_qinr(decoder: QINRDecoder, z) -> Tensor:
    """Pixel logits ``(batch, 784)``; no output activation."""
    if not isinstance(decoder, QINRDecoder):
        raise ConfigurationError(f"decode_qinr got a {type(decoder).__name__}")
    return decoder(_check_latent(decoder, z))


def decode_classical(decoder: ClassicalDecoder, z) -> Tensor:
    if not isinstance(decoder, ClassicalDecoder):
        raise ConfigurationError(f"decode_classical got a {type(decoder).__name__}")
    return decoder(_check_latent(decoder, z))
