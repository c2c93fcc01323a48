"""The data-reuploading circuit U(h) and its exact (adjoint) gradients.

U = W^(L+1) S^(L) W^(L) ... S^(1) W^(1): L encoding layers interleaved with
L + 1 parameter layers. Each parameter layer repeats K times a Rot on every
qubit followed by the k-th CZ edge set; each encoding layer applies
R_Z(xi * s * h_i) on qubit i, with s = exp(rho) when the global scale is on.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from src.core.exceptions import ConfigurationError, InvalidEdgeError, ShapeError
from src.core.qsim.observables import ReadoutMode, readout_observables
from src.core.qsim.statevector import (
    PAULI_Z,
    StateVector,
    apply_cz_tensor,
    apply_matrix,
    apply_observable,
    expectation_tensor,
    local_overlap,
    rot_derivatives,
    rot_matrix,
    rz_matrix,
)


@dataclass(frozen=True)
class CircuitShape:
    n_qubits: int
    n_layers: int
    n_repeats: int
    global_scale: bool = False

    @property
    def theta_shape(self) -> tuple[int, int, int, int]:
        return (self.n_layers + 1, self.n_repeats, self.n_qubits, 3)

    @property
    def xi_shape(self) -> tuple[int, int]:
        return (self.n_layers, self.n_qubits)

    @property
    def parameter_count(self) -> int:
        count = int(np.prod(self.theta_shape)) + int(np.prod(self.xi_shape))
        return count + (1 if self.global_scale else 0)


@dataclass(frozen=True)
class EntanglingPattern:
    """One CZ edge set per repetition k of a parameter layer."""

    layers: tuple[tuple[tuple[int, int], ...], ...]

    @classmethod
    def brick_wall(cls, n_qubits: int, n_repeats: int) -> "EntanglingPattern":
        """Even pairs (0,1),(2,3).. then odd pairs (1,2),(3,4)..,(n-1,0) on a ring, alternating."""
        layers = []
        for k in range(n_repeats):
            used: set[int] = set()
            edges = []
            for i in range(k % 2, n_qubits, 2):
                j = (i + 1) % n_qubits
                if i == j or i in used or j in used:
                    continue
                edges.append((i, j))
                used.update((i, j))
            layers.append(tuple(edges))
        return cls(tuple(layers))

    @classmethod
    def from_lists(cls, layers: Sequence[Sequence[Sequence[int]]]) -> "EntanglingPattern":
        return cls(tuple(tuple((int(i), int(j)) for i, j in edges) for edges in layers))

    def validate(self, n_qubits: int, n_repeats: int) -> None:
        if len(self.layers) != n_repeats:
            raise ConfigurationError(
                f"Entangling pattern has {len(self.layers)} edge sets, circuit needs {n_repeats}"
            )
        for k, edges in enumerate(self.layers):
            seen: set[int] = set()
            for i, j in edges:
                if i == j or not (0 <= i < n_qubits and 0 <= j < n_qubits):
                    raise InvalidEdgeError(f"Edge ({i}, {j}) in set {k} is invalid for {n_qubits} qubits")
                if i in seen or j in seen:
                    raise InvalidEdgeError(f"Qubit reused within edge set {k}: ({i}, {j})")
                seen.update((i, j))


@dataclass
class QuantumParams:
    theta: np.ndarray
    xi: np.ndarray
    rho: Optional[float] = None

    @classmethod
    def initialize(cls, shape: CircuitShape, rng: np.random.Generator) -> "QuantumParams":
        """theta ~ U(0, 2pi), xi = 1, rho = 0."""
        theta = rng.uniform(0.0, 2.0 * np.pi, size=shape.theta_shape)
        xi = np.ones(shape.xi_shape)
        return cls(theta=theta, xi=xi, rho=0.0 if shape.global_scale else None)

    @property
    def scale(self) -> float:
        return 1.0 if self.rho is None else float(np.exp(self.rho))

    def num_parameters(self) -> int:
        return self.theta.size + self.xi.size + (0 if self.rho is None else 1)

    def check(self, shape: CircuitShape) -> None:
        if self.theta.shape != shape.theta_shape:
            raise ConfigurationError(f"theta has shape {self.theta.shape}, expected {shape.theta_shape}")
        if self.xi.shape != shape.xi_shape:
            raise ConfigurationError(f"xi has shape {self.xi.shape}, expected {shape.xi_shape}")
        if shape.global_scale != (self.rho is not None):
            raise ConfigurationError("rho must be set exactly when the global scale is enabled")


@dataclass
class CircuitGradients:
    d_theta: np.ndarray
    d_xi: np.ndarray
    d_rho: Optional[float]
    d_h: np.ndarray


@dataclass
class _Gate:
    kind: str  # "rot", "cz" or "rz"
    qubits: tuple[int, ...]
    index: tuple[int, ...] = field(default=())


def _gate_sequence(shape: CircuitShape, pattern: EntanglingPattern) -> list[_Gate]:
    gates: list[_Gate] = []
    for layer in range(shape.n_layers + 1):
        for k in range(shape.n_repeats):
            for q in range(shape.n_qubits):
                gates.append(_Gate("rot", (q,), (layer, k, q)))
            for i, j in pattern.layers[k]:
                gates.append(_Gate("cz", (i, j)))
        if layer < shape.n_layers:
            for q in range(shape.n_qubits):
                gates.append(_Gate("rz", (q,), (layer, q)))
    return gates


def _prepare(params: QuantumParams, h, pattern: Optional[EntanglingPattern], shape: CircuitShape):
    params.check(shape)
    if pattern is None:
        pattern = EntanglingPattern.brick_wall(shape.n_qubits, shape.n_repeats)
    pattern.validate(shape.n_qubits, shape.n_repeats)
    h = np.asarray(h, dtype=float)
    single = h.ndim == 1
    h = np.atleast_2d(h)
    if h.ndim != 2 or h.shape[1] != shape.n_qubits:
        raise ConfigurationError(f"h must have {shape.n_qubits} angles per sample, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ShapeError("h contains non-finite angles")
    return pattern, h, single


def _encoding_angles(params: QuantumParams, h: np.ndarray, layer: int, qubit: int) -> np.ndarray:
    return params.xi[layer, qubit] * params.scale * h[:, qubit]


def _forward(params: QuantumParams, h: np.ndarray, gates: list[_Gate], n_qubits: int) -> np.ndarray:
    batch = h.shape[0]
    psi = np.zeros((batch,) + (2,) * n_qubits, dtype=complex)
    psi[(slice(None),) + (0,) * n_qubits] = 1.0
    for gate in gates:
        if gate.kind == "rot":
            psi = apply_matrix(psi, rot_matrix(*params.theta[gate.index]), gate.qubits[0])
        elif gate.kind == "cz":
            psi = apply_cz_tensor(psi, *gate.qubits)
        else:
            layer, q = gate.index
            psi = apply_matrix(psi, rz_matrix(_encoding_angles(params, h, layer, q)), q)
    return psi


def run_circuit_batch(
    params: QuantumParams,
    h,
    shape: CircuitShape,
    pattern: Optional[EntanglingPattern] = None,
) -> np.ndarray:
    """U(h)|0..0> for every row of h, as a ``(batch, 2**n)`` array."""
    pattern, h, _ = _prepare(params, h, pattern, shape)
    psi = _forward(params, h, _gate_sequence(shape, pattern), shape.n_qubits)
    return psi.reshape(h.shape[0], -1)


def run_circuit(
    params: QuantumParams,
    h,
    pattern: Optional[EntanglingPattern],
    shape: CircuitShape,
) -> StateVector:
    amplitudes = run_circuit_batch(params, np.asarray(h, dtype=float).reshape(1, -1), shape, pattern)
    return StateVector(amplitudes[0], shape.n_qubits)


def circuit_features(
    params: QuantumParams,
    h,
    pattern: Optional[EntanglingPattern],
    readout_mode,
    shape: CircuitShape,
) -> np.ndarray:
    """Expectation features in readout order; ``(n_f,)`` for one h, ``(batch, n_f)`` for many."""
    mode = ReadoutMode.parse(readout_mode)
    observables = readout_observables(mode, shape.n_qubits)
    pattern, h, single = _prepare(params, h, pattern, shape)
    psi = _forward(params, h, _gate_sequence(shape, pattern), shape.n_qubits)
    features = np.stack([expectation_tensor(psi, obs) for obs in observables], axis=1)
    features = np.clip(features, -1.0, 1.0)
    return features[0] if single else features


def circuit_gradients(
    params: QuantumParams,
    h,
    pattern: Optional[EntanglingPattern],
    readout_mode,
    upstream,
    shape: CircuitShape,
) -> CircuitGradients:
    """Gradient of ``sum(upstream * features)`` by one reverse sweep over the gates.

    The forward state is unwound gate by gate with G^dagger while the adjoint
    state lambda = (sum_o u_o O_o)|psi> is carried back alongside it; each
    parametrised gate contributes 2 Re <lambda| dG |psi_before>. Theta, xi and
    rho gradients are summed over the batch, d_h is per sample.
    """
    mode = ReadoutMode.parse(readout_mode)
    observables = readout_observables(mode, shape.n_qubits)
    pattern, h, single = _prepare(params, h, pattern, shape)
    upstream = np.atleast_2d(np.asarray(upstream, dtype=float))
    if upstream.shape != (h.shape[0], len(observables)):
        raise ConfigurationError(
            f"upstream has shape {upstream.shape}, expected {(h.shape[0], len(observables))}"
        )

    gates = _gate_sequence(shape, pattern)
    psi = _forward(params, h, gates, shape.n_qubits)
    weights_shape = (-1,) + (1,) * shape.n_qubits
    lam = np.zeros_like(psi)
    for o, obs in enumerate(observables):
        if np.any(upstream[:, o]):
            lam += upstream[:, o].reshape(weights_shape) * apply_observable(psi, obs)

    d_theta = np.zeros_like(params.theta)
    d_xi = np.zeros_like(params.xi)
    d_phi = np.zeros((shape.n_layers, h.shape[0], shape.n_qubits))
    for gate in reversed(gates):
        if gate.kind == "cz":
            psi = apply_cz_tensor(psi, *gate.qubits)
            lam = apply_cz_tensor(lam, *gate.qubits)
            continue
        q = gate.qubits[0]
        if gate.kind == "rot":
            angles = params.theta[gate.index]
            inverse = rot_matrix(*angles).conj().T
            psi = apply_matrix(psi, inverse, q)
            overlap = local_overlap(lam, psi, q).sum(axis=0)
            for a, derivative in enumerate(rot_derivatives(*angles)):
                d_theta[gate.index + (a,)] = 2.0 * np.real(np.sum(derivative * overlap))
            lam = apply_matrix(lam, inverse, q)
        else:
            layer, _ = gate.index
            # dR_Z/dphi |psi_before> = -i/2 Z |psi_after>, so take the overlap before unwinding
            overlap = local_overlap(lam, psi, q)
            d_phi[layer, :, q] = 2.0 * np.real(np.einsum("ij,bij->b", -0.5j * PAULI_Z, overlap))
            inverse = rz_matrix(-_encoding_angles(params, h, layer, q))
            psi = apply_matrix(psi, inverse, q)
            lam = apply_matrix(lam, inverse, q)

    s = params.scale
    for layer in range(shape.n_layers):
        d_xi[layer] = np.sum(d_phi[layer] * s * h, axis=0)
    d_h = np.einsum("lbq,lq->bq", d_phi, params.xi) * s
    d_rho = None
    if params.rho is not None:
        d_rho = float(np.sum(d_phi * params.xi[:, None, :] * s * h[None, :, :]))
    return CircuitGradients(
        d_theta=d_theta,
        d_xi=d_xi,
        d_rho=d_rho,
        d_h=d_h[0] if single else d_h,
    )
