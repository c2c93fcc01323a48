"""Independent oracles for the tests: finite differences, dense unitaries, synthetic data."""
from functools import reduce

import numpy as np

from src.core.data import write_idx
from src.core.qsim import EntanglingPattern, QuantumParams
from src.core.qsim.statevector import PAULI_X, PAULI_Y, PAULI_Z, rot_matrix, rz_matrix

I2 = np.eye(2, dtype=complex)


def central_difference(f, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Gradient of scalar ``f`` at ``x`` by central differences, same shape as ``x``."""
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        original = x[index]
        x[index] = original + eps
        up = f(x.copy())
        x[index] = original - eps
        down = f(x.copy())
        x[index] = original
        grad[index] = (up - down) / (2 * eps)
    return grad


def assert_gradients_close(actual, expected, rtol: float = 1e-5, atol: float = 1e-7) -> None:
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    scale = max(np.max(np.abs(expected)), 1.0)
    np.testing.assert_allclose(actual, expected, rtol=rtol, atol=max(atol, rtol * scale))


# --- dense oracle ------------------------------------------------------------

def embed(gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Full 2^n matrix of a single-qubit gate; qubit 0 is the leftmost kron factor."""
    return reduce(np.kron, [gate if q == qubit else I2 for q in range(n)])


def dense_cz(i: int, j: int, n: int) -> np.ndarray:
    diagonal = np.ones(2**n, dtype=complex)
    for index in range(2**n):
        bit_i = (index >> (n - 1 - i)) & 1
        bit_j = (index >> (n - 1 - j)) & 1
        if bit_i and bit_j:
            diagonal[index] = -1
    return np.diag(diagonal)


def dense_circuit(params: QuantumParams, h: np.ndarray, n: int, n_layers: int, n_repeats: int) -> np.ndarray:
    """U(h)|0..0> by multiplying explicit 2^n x 2^n matrices."""
    pattern = EntanglingPattern.brick_wall(n, n_repeats)
    state = np.zeros(2**n, dtype=complex)
    state[0] = 1.0
    for layer in range(n_layers + 1):
        for k in range(n_repeats):
            for q in range(n):
                state = embed(rot_matrix(*params.theta[layer, k, q]), q, n) @ state
            for i, j in pattern.layers[k]:
                state = dense_cz(i, j, n) @ state
        if layer < n_layers:
            for q in range(n):
                angle = params.xi[layer, q] * params.scale * h[q]
                state = embed(rz_matrix(angle), q, n) @ state
    return state


def dense_expectation(state: np.ndarray, matrix: np.ndarray) -> float:
    return float(np.real(state.conj() @ matrix @ state))


PAULIS = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


# --- synthetic datasets ------------------------------------------------------

def synthetic_raw(labels, size: int = 28, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Stroke images: a vertical bar whose column depends on the label, a horizontal bar for odd labels."""
    rng = np.random.default_rng(seed)
    labels = np.asarray(labels, dtype=np.uint8)
    images = np.zeros((labels.size, size, size), dtype=np.uint8)
    for n, label in enumerate(labels):
        column = 4 + (int(label) * 2) % (size - 8)
        images[n, 4 : size - 4, column : column + 3] = 255
        if label % 2:
            images[n, size // 2 : size // 2 + 2, 4 : size - 4] = 200
        images[n] = np.clip(images[n].astype(int) + rng.integers(0, 20, size=(size, size)), 0, 255)
    return images, labels


def write_dataset(root, folder: str, images_stem: str, labels_stem: str, images, labels, gz: bool = False) -> None:
    directory = root / folder
    directory.mkdir(parents=True, exist_ok=True)
    suffix = ".gz" if gz else ""
    write_idx(directory / f"{images_stem}{suffix}", images)
    write_idx(directory / f"{labels_stem}{suffix}", labels)


def write_mnist(root, per_class: int = 12, classes=range(10), gz: bool = False, seed: int = 0):
    """A small MNIST-layout dataset under ``root/mnist``; labels interleaved like the real files."""
    labels = np.tile(np.asarray(list(classes), dtype=np.uint8), per_class)
    images, labels = synthetic_raw(labels, seed=seed)
    write_dataset(root, "mnist", "train-images-idx3-ubyte", "train-labels-idx1-ubyte", images, labels, gz)
    return images, labels
