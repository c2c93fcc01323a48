from .autoencoder import (
    HybridAutoencoder,
    LatentSample,
    build_model,
    generate,
    parameter_census,
    reconstruct,
    reparameterize,
)
from .decoder import ClassicalDecoder, QINRDecoder, decode_classical, decode_qinr
from .encoder import ConvEncoder, encode_ae, encode_vae
from .quantum import QuantumLayer

__all__ = [
    "HybridAutoencoder",
    "LatentSample",
    "build_model",
    "generate",
    "parameter_census",
    "reconstruct",
    "reparameterize",
    "ClassicalDecoder",
    "QINRDecoder",
    "decode_classical",
    "decode_qinr",
    "ConvEncoder",
    "encode_ae",
    "encode_vae",
    "QuantumLayer",
]
