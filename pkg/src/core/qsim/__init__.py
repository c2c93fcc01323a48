from .circuit import (
    CircuitGradients,
    CircuitShape,
    EntanglingPattern,
    QuantumParams,
    circuit_features,
    circuit_gradients,
    run_circuit,
    run_circuit_batch,
)
from .observables import Observable, PauliKind, PauliX, PauliY, PauliZ, ReadoutMode, ZZ, readout_observables
from .statevector import StateVector, apply_cz, apply_rot, apply_rz, expectation

__all__ = [
    "CircuitGradients",
    "CircuitShape",
    "EntanglingPattern",
    "QuantumParams",
    "circuit_features",
    "circuit_gradients",
    "run_circuit",
    "run_circuit_batch",
    "Observable",
    "PauliKind",
    "PauliX",
    "PauliY",
    "PauliZ",
    "ReadoutMode",
    "ZZ",
    "readout_observables",
    "StateVector",
    "apply_cz",
    "apply_rot",
    "apply_rz",
    "expectation",
]
