import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.exceptions import ContractError, ShapeError
from src.core.neural import QUANTUM, Module, Tensor, as_tensor, no_grad
from src.core.neural.functional import sigmoid
from src.models.decoder import ClassicalDecoder, QINRDecoder, decode_classical, decode_qinr
from src.models.encoder import ConvEncoder, encode_ae, encode_vae
from src.schemas.census import ParameterCensus, ParameterEntry
from src.schemas.config import DecoderKind, ModelConfig

logger = logging.getLogger(__name__)


@dataclass
class LatentSample:
    z: Tensor
    mu: Optional[Tensor] = None
    logvar: Optional[Tensor] = None
    # Standard-normal draw behind z; kept so gradients can be checked with it frozen
    eps: Optional[np.ndarray] = None


class HybridAutoencoder(Module):
    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        super().__init__()
        self.config = config
        self.encoder = ConvEncoder(config, rng)
        if config.decoder_kind is DecoderKind.QINR:
            self.decoder = QINRDecoder(config, rng)
        else:
            self.decoder = ClassicalDecoder(config, rng)

    @property
    def variational(self) -> bool:
        return self.config.variational

    def encode(self, x, rng: Optional[np.random.Generator] = None) -> LatentSample:
        """Latent code of a batch; a VAE samples z when ``rng`` is given, otherwise uses mu."""
        if not self.variational:
            return LatentSample(z=encode_ae(self.encoder, x))
        mu, logvar = encode_vae(self.encoder, x)
        if rng is None:
            return LatentSample(z=mu, mu=mu, logvar=logvar)
        return reparameterize(mu, logvar, rng)

    def decode(self, z) -> Tensor:
        if isinstance(self.decoder, QINRDecoder):
            return decode_qinr(self.decoder, z)
        return decode_classical(self.decoder, z)

    def forward(self, x, rng: Optional[np.random.Generator] = None) -> tuple[Tensor, LatentSample]:
        latent = self.encode(x, rng)
        return self.decode(latent.z), latent


def build_model(config: ModelConfig, rng: np.random.Generator) -> HybridAutoencoder:
    model = HybridAutoencoder(config, rng)
    logger.info(
        f"Built {'VAE' if config.variational else 'AE'} with {config.decoder_kind.value} decoder: "
        f"{model.num_parameters()} parameters ({model.num_parameters(QUANTUM)} quantum)"
    )
    return model


def reparameterize(mu, logvar, rng: np.random.Generator) -> LatentSample:
    """z = mu + exp(logvar / 2) * eps with eps ~ N(0, I) from ``rng``."""
    mu = as_tensor(mu)
    logvar = as_tensor(logvar)
    if mu.shape != logvar.shape:
        raise ShapeError(f"mu {mu.shape} and logvar {logvar.shape} differ in shape")
    eps = rng.standard_normal(mu.shape)
    z = mu + (logvar * 0.5).exp() * eps
    return LatentSample(z=z, mu=mu, logvar=logvar, eps=eps)


def _in_eval(model: Module):
    was_training = model.training
    model.eval()
    return was_training


def generate(model: HybridAutoencoder, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` prior samples decoded to pixel intensities in (0, 1), shape ``(n, pixels)``."""
    if not model.variational:
        raise ContractError("generate needs a variational model; use reconstruct for an autoencoder")
    if n < 0:
        raise ContractError(f"cannot generate {n} images")
    pixels = model.config.pixel_count
    if n == 0:
        return np.zeros((0, pixels))
    z = rng.standard_normal((n, model.config.latent_dim))
    was_training = _in_eval(model)
    try:
        with no_grad():
            images = sigmoid(model.decode(z)).data
    finally:
        model.train(was_training)
    return images


def reconstruct(model: HybridAutoencoder, pixels) -> np.ndarray:
    """Eval-mode encode (mu for a VAE), decode and sigmoid; ``(batch, pixels)`` in [0, 1]."""
    was_training = _in_eval(model)
    try:
        with no_grad():
            logits, _ = model(pixels)
            images = sigmoid(logits).data
    finally:
        model.train(was_training)
    return images


def parameter_census(config: ModelConfig, model: Optional[HybridAutoencoder] = None) -> ParameterCensus:
    """Trainable parameters per named tensor, with the classical-decoder comparison for QINR configs."""
    if model is None:
        model = HybridAutoencoder(config, np.random.default_rng(0))
    entries = [
        ParameterEntry(name=name, group=p.group, shape=list(p.shape), size=p.size)
        for name, p in model.named_parameters()
    ]
    quantum = sum(e.size for e in entries if e.group == QUANTUM)
    total = sum(e.size for e in entries)
    decoder_total = model.decoder.num_parameters()
    census = ParameterCensus(
        entries=entries,
        classical=total - quantum,
        quantum=quantum,
        total=total,
        decoder_total=decoder_total,
    )
    if config.decoder_kind is DecoderKind.QINR:
        baseline = ClassicalDecoder(config, np.random.default_rng(0)).num_parameters()
        census.classical_decoder_total = baseline
        census.classical_decoder_ratio = baseline / decoder_total
    return census
