"""Dense statevector kernels.

Qubit 0 is the most significant bit of the basis-state index. Internally
states are kept as ``(batch, 2, ..., 2)`` arrays so one call advances every
sample of a mini-batch; axis ``q + 1`` belongs to qubit ``q``.
"""
from dataclasses import dataclass

import numpy as np

from src.core.exceptions import InvalidEdgeError, QubitIndexError, ShapeError
from src.core.qsim.observables import Observable, PauliKind

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass
class StateVector:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.n_qubits < 1:
            raise ShapeError(f"A register needs at least one qubit, got {self.n_qubits}")
        if self.amplitudes.size != 2**self.n_qubits:
            raise ShapeError(
                f"State of {self.n_qubits} qubits needs {2**self.n_qubits} amplitudes, "
                f"got {self.amplitudes.size}"
            )

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amplitudes = np.zeros(2**n_qubits, dtype=complex)
        amplitudes[0] = 1.0
        return cls(amplitudes, n_qubits)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((1,) + (2,) * self.n_qubits)

    @classmethod
    def from_tensor(cls, psi: np.ndarray) -> "StateVector":
        return cls(psi.reshape(-1), psi.ndim - 1)


# --- gate matrices -------------------------------------------------------

def rz_matrix(phi) -> np.ndarray:
    """R_Z(phi); a vector of angles gives a ``(batch, 2, 2)`` stack."""
    phi = np.asarray(phi, dtype=float)
    out = np.zeros(phi.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-0.5j * phi)
    out[..., 1, 1] = np.exp(0.5j * phi)
    return out


def ry_matrix(beta: float) -> np.ndarray:
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rot_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Euler rotation R_Z(alpha) R_Y(beta) R_Z(gamma)."""
    return rz_matrix(alpha) @ ry_matrix(beta) @ rz_matrix(gamma)


def rot_derivatives(alpha: float, beta: float, gamma: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Partial derivatives of ``rot_matrix`` in alpha, beta and gamma."""
    half_z = -0.5j * PAULI_Z
    rz_a, ry_b, rz_g = rz_matrix(alpha), ry_matrix(beta), rz_matrix(gamma)
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    d_ry = 0.5 * np.array([[-s, -c], [c, -s]], dtype=complex)
    d_alpha = half_z @ rz_a @ ry_b @ rz_g
    d_beta = rz_a @ d_ry @ rz_g
    d_gamma = rz_a @ ry_b @ rz_g @ half_z
    return d_alpha, d_beta, d_gamma


# --- kernels on (batch, 2, ..., 2) tensors -------------------------------

def check_qubit(qubit: int, n_qubits: int) -> None:
    if not 0 <= qubit < n_qubits:
        raise QubitIndexError(f"Qubit {qubit} out of range for {n_qubits}-qubit register")


def apply_matrix(psi: np.ndarray, matrix: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a 2x2 matrix (shared, or one per batch row) to ``qubit``."""
    axis = qubit + 1
    moved = np.moveaxis(psi, axis, -1)
    if matrix.ndim == 2:
        out = moved @ matrix.T
    else:
        shape = moved.shape
        flat = moved.reshape(shape[0], -1, 2)
        out = np.einsum("bij,bkj->bki", matrix, flat).reshape(shape)
    return np.moveaxis(out, -1, axis)


def apply_cz_tensor(psi: np.ndarray, i: int, j: int) -> np.ndarray:
    out = psi.copy()
    index = [slice(None)] * psi.ndim
    index[i + 1] = 1
    index[j + 1] = 1
    out[tuple(index)] *= -1
    return out


def local_overlap(bra: np.ndarray, ket: np.ndarray, qubit: int) -> np.ndarray:
    """``R[b, i, j] = sum over the other qubits of conj(bra[b, .., i, ..]) * ket[b, .., j, ..]``.

    For any 2x2 ``M`` acting on ``qubit``: ``<bra|M|ket> = sum(M * R)``.
    """
    axis = qubit + 1
    batch = bra.shape[0]
    b = np.moveaxis(bra, axis, -1).reshape(batch, -1, 2)
    k = np.moveaxis(ket, axis, -1).reshape(batch, -1, 2)
    return np.einsum("bki,bkj->bij", b.conj(), k)


def apply_observable(psi: np.ndarray, obs: Observable) -> np.ndarray:
    if obs.kind is PauliKind.X:
        return apply_matrix(psi, PAULI_X, obs.qubits[0])
    if obs.kind is PauliKind.Y:
        return apply_matrix(psi, PAULI_Y, obs.qubits[0])
    if obs.kind is PauliKind.Z:
        return apply_matrix(psi, PAULI_Z, obs.qubits[0])
    out = apply_matrix(psi, PAULI_Z, obs.qubits[0])
    return apply_matrix(out, PAULI_Z, obs.qubits[1])


def expectation_tensor(psi: np.ndarray, obs: Observable) -> np.ndarray:
    """Per-row <psi|O|psi> of a batched state; real by hermiticity."""
    batch = psi.shape[0]
    value = np.einsum(
        "bk,bk->b", psi.reshape(batch, -1).conj(), apply_observable(psi, obs).reshape(batch, -1)
    )
    return value.real


# --- public single-state operations -------------------------------------

def apply_rot(state: StateVector, qubit: int, alpha: float, beta: float, gamma: float) -> StateVector:
    check_qubit(qubit, state.n_qubits)
    psi = apply_matrix(state.tensor(), rot_matrix(alpha, beta, gamma), qubit)
    return StateVector.from_tensor(psi)


def apply_cz(state: StateVector, i: int, j: int) -> StateVector:
    check_qubit(i, state.n_qubits)
    check_qubit(j, state.n_qubits)
    if i == j:
        raise InvalidEdgeError(f"CZ needs two distinct qubits, got ({i}, {j})")
    return StateVector.from_tensor(apply_cz_tensor(state.tensor(), i, j))


def apply_rz(state: StateVector, qubit: int, phi: float) -> StateVector:
    check_qubit(qubit, state.n_qubits)
    psi = apply_matrix(state.tensor(), rz_matrix(phi), qubit)
    return StateVector.from_tensor(psi)


def expectation(state: StateVector, obs: Observable) -> float:
    obs.validate(state.n_qubits)
    value = float(expectation_tensor(state.tensor(), obs)[0])
    return float(np.clip(value, -1.0, 1.0))
