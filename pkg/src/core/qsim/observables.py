from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from src.core.exceptions import ConfigurationError, QubitIndexError


class PauliKind(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"
    ZZ = "ZZ"


class ReadoutMode(str, Enum):
    """Which expectation values the circuit hands to the readout network."""

    Z_ONLY = "z"
    MULTIBASIS = "multibasis"

    @classmethod
    def parse(cls, value) -> "ReadoutMode":
        try:
            return cls(value)
        except ValueError:
            raise ConfigurationError(
                f"Unknown readout mode {value!r}; expected one of {[m.value for m in cls]}"
            )

    def feature_width(self, n_qubits: int) -> int:
        return n_qubits if self is ReadoutMode.Z_ONLY else 4 * n_qubits


@dataclass(frozen=True)
class Observable:
    kind: PauliKind
    qubits: Tuple[int, ...]

    def validate(self, n_qubits: int) -> None:
        expected = 2 if self.kind is PauliKind.ZZ else 1
        if len(self.qubits) != expected:
            raise ConfigurationError(f"{self.kind.value} acts on {expected} qubit(s), got {self.qubits}")
        for q in self.qubits:
            if not 0 <= q < n_qubits:
                raise QubitIndexError(f"Qubit {q} out of range for {n_qubits}-qubit register")
        if self.kind is PauliKind.ZZ and self.qubits[0] == self.qubits[1]:
            raise ConfigurationError(f"ZZ needs two distinct qubits, got {self.qubits}")


def PauliX(i: int) -> Observable:
    return Observable(PauliKind.X, (i,))


def PauliY(i: int) -> Observable:
    return Observable(PauliKind.Y, (i,))


def PauliZ(i: int) -> Observable:
    return Observable(PauliKind.Z, (i,))


def ZZ(i: int, j: int) -> Observable:
    return Observable(PauliKind.ZZ, (i, j))


def readout_observables(mode: ReadoutMode, n_qubits: int) -> list[Observable]:
    """Observables in feature order.

    Z-only: Z_0..Z_{n-1}. Multibasis: the X block, the Y block, the Z block, then
    the ring correlators Z_i Z_{i+1} with (n-1, 0) closing the ring.
    """
    mode = ReadoutMode.parse(mode)
    if mode is ReadoutMode.Z_ONLY:
        return [PauliZ(i) for i in range(n_qubits)]
    if n_qubits < 2:
        raise ConfigurationError("Multibasis readout needs at least 2 qubits for the ZZ ring")
    observables = [PauliX(i) for i in range(n_qubits)]
    observables += [PauliY(i) for i in range(n_qubits)]
    observables += [PauliZ(i) for i in range(n_qubits)]
    observables += [ZZ(i, (i + 1) % n_qubits) for i in range(n_qubits)]
    return observables
