import logging

import numpy as np

from src.core.neural import QUANTUM, Module, Parameter, Tensor, as_tensor
from src.core.qsim import (
    CircuitShape,
    EntanglingPattern,
    QuantumParams,
    ReadoutMode,
    circuit_features,
    circuit_gradients,
)
from src.schemas.config import ModelConfig

logger = logging.getLogger(__name__)


class QuantumLayer(Module):
    """Maps encoding angles ``h`` of shape ``(batch, n_q)`` to circuit expectation features.

    The backward pass is one adjoint sweep per call, so the layer is a single
    node in the autodiff graph.
    """

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        super().__init__()
        self.shape = CircuitShape(config.n_qubits, config.n_layers, config.n_repeats, config.global_scale)
        if config.entangling is not None:
            self.pattern = EntanglingPattern.from_lists(config.entangling)
        else:
            self.pattern = EntanglingPattern.brick_wall(config.n_qubits, config.n_repeats)
        self.pattern.validate(config.n_qubits, config.n_repeats)
        self.readout_mode = ReadoutMode.parse(config.readout_mode)
        self.feature_width = self.readout_mode.feature_width(config.n_qubits)

        init = QuantumParams.initialize(self.shape, rng)
        self.theta = Parameter(init.theta, group=QUANTUM, name="theta")
        self.xi = Parameter(init.xi, group=QUANTUM, name="xi")
        self.rho = Parameter(np.zeros(()), group=QUANTUM, name="rho") if config.global_scale else None
        logger.debug(f"Quantum layer with {self.num_parameters()} parameters, edges {self.pattern.layers}")

    def params(self) -> QuantumParams:
        """Snapshot of the current angles as plain arrays."""
        return QuantumParams(
            theta=self.theta.data.copy(),
            xi=self.xi.data.copy(),
            rho=float(self.rho.data) if self.rho is not None else None,
        )

    def forward(self, h) -> Tensor:
        h = as_tensor(h)
        params = self.params()
        angles = h.data.copy()
        features = circuit_features(params, angles, self.pattern, self.readout_mode, self.shape)
        parents = (h, self.theta, self.xi) + ((self.rho,) if self.rho is not None else ())

        def backward(g):
            grads = circuit_gradients(params, angles, self.pattern, self.readout_mode, g, self.shape)
            out = [grads.d_h, grads.d_theta, grads.d_xi]
            if self.rho is not None:
                out.append(np.asarray(grads.d_rho))
            return out

        return Tensor.from_op(features, parents, backward)
