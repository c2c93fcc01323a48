import numpy as np

from src.core.exceptions import ConfigurationError, ShapeError
from src.core.neural import BatchNorm, Conv2d, Flatten, LeakyReLU, Linear, Module, Sequential, Tensor, as_tensor
from src.core.neural.functional import conv_output_size
from src.schemas.config import ModelConfig


class ConvEncoder(Module):
    """Strided 3x3 convolutions with BatchNorm and leaky-ReLU, flattened into linear heads.

    28x28 inputs shrink 28 -> 14 -> 7 -> 4 -> 2, so the default trunk flattens
    to 256 * 2 * 2 = 1024 features. A deterministic encoder has a single head
    ``fc``; a variational one has parallel ``mu`` and ``logvar`` heads.
    """

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        super().__init__()
        self.image_size = config.image_size
        self.variational = config.variational
        channels = [1] + list(config.encoder_channels)
        layers = []
        size = config.image_size
        for c_in, c_out in zip(channels[:-1], channels[1:]):
            layers += [
                Conv2d(c_in, c_out, rng),
                BatchNorm(c_out, config.bn_eps, config.bn_momentum),
                LeakyReLU(config.leaky_slope),
            ]
            size = conv_output_size(size, 3, 2, 1)
        self.trunk = Sequential(*layers, Flatten())
        self.flat_dim = channels[-1] * size * size
        if self.variational:
            self.mu = Linear(self.flat_dim, config.latent_dim, rng)
            self.logvar = Linear(self.flat_dim, config.latent_dim, rng)
        else:
            self.fc = Linear(self.flat_dim, config.latent_dim, rng)

    def features(self, x) -> Tensor:
        x = as_tensor(getattr(x, "pixels", x))
        expected = (1, self.image_size, self.image_size)
        if x.ndim != 4 or x.shape[1:] != expected:
            raise ShapeError(f"Encoder expects images of shape (batch, {', '.join(map(str, expected))}), got {x.shape}")
        return self.trunk(x)


def encode_ae(encoder: ConvEncoder, x) -> Tensor:
    """Deterministic latent code ``(batch, d_z)``."""
    if encoder.variational:
        raise ConfigurationError("encode_ae needs a deterministic encoder; use encode_vae")
    return encoder.fc(encoder.features(x))


def encode_vae(encoder: ConvEncoder, x) -> tuple[Tensor, Tensor]:
    """Posterior mean and log-variance, both ``(batch, d_z)``."""
    if not encoder.variational:
        raise ConfigurationError("encode_vae needs a variational encoder; use encode_ae")
    flat = encoder.features(x)
    return encoder.mu(flat), encoder.logvar(flat)
