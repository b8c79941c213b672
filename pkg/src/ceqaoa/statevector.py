"""Dense statevector simulation of the cost/driver alternation.

States are plain complex128 numpy arrays of shape (..., 2**q); leading axes
are independent states evolved in parallel, which is what the angle optimizer
and landscape scans rely on. The cost propagator multiplies in place; the
driver layer returns a fresh array. A single state must not be shared across
threads while it is being evolved.

The driver exp(-i*beta*X/2) on every qubit is applied in the X eigenbasis:
conjugating by the q-fold Hadamard turns it into a diagonal phase determined
by the bit parity of each basis state. For qubit counts above the cached
matrix cap a per-qubit tensor contraction is used instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .knapsack import Assignment, DiagonalHamiltonian

MAX_QUBITS = 24
_DENSE_DRIVER_CAP = 10


def qubit_count_of(state: np.ndarray) -> int:
    dim = state.shape[-1]
    q = dim.bit_length() - 1
    if 1 << q != dim:
        raise ValueError(f"state length {dim} is not a power of two")
    return q


def uniform_superposition(qubit_count: int) -> np.ndarray:
    """Equal real amplitude 1/sqrt(2**q) on every basis state."""
    if not 1 <= qubit_count <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}]")
    dim = 1 << qubit_count
    return np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128)


def _energies_of(diagonal: DiagonalHamiltonian | np.ndarray) -> np.ndarray:
    if isinstance(diagonal, DiagonalHamiltonian):
        return diagonal.energies
    return np.asarray(diagonal)


def apply_cost_propagator(
    state: np.ndarray,
    diagonal: DiagonalHamiltonian | np.ndarray,
    gamma: float | np.ndarray,
) -> np.ndarray:
    """Multiply each amplitude by exp(-i*gamma*energy); phases only.

    `gamma` may carry leading batch axes matching the state's.
    """
    energies = _energies_of(diagonal)
    if state.shape[-1] != energies.shape[-1]:
        raise ValueError(
            f"state dimension {state.shape[-1]} != diagonal dimension "
            f"{energies.shape[-1]}"
        )
    phase = np.exp(np.asarray(gamma)[..., None] * (-1j) * energies)
    state *= phase
    return state


@lru_cache(maxsize=8)
def _hadamard_basis(qubit_count: int) -> tuple[np.ndarray, np.ndarray]:
    """(q-fold Hadamard matrix, q - 2*popcount per basis state)."""
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    w = np.array([[1.0]])
    for _ in range(qubit_count):
        w = np.kron(w, h1)
    states = np.arange(1 << qubit_count, dtype=np.uint64)
    pop = np.zeros(states.shape, dtype=np.int64)
    for i in range(qubit_count):
        pop += ((states >> np.uint64(i)) & np.uint64(1)).astype(np.int64)
    return w.astype(np.complex128), (qubit_count - 2 * pop).astype(np.float64)


def _rx_matrix(beta: float) -> np.ndarray:
    c, s = math.cos(beta / 2.0), math.sin(beta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def _driver_per_qubit(state: np.ndarray, beta: float) -> np.ndarray:
    q = qubit_count_of(state)
    lead = state.shape[:-1]
    rx = _rx_matrix(beta)
    psi = state.reshape(*lead, *([2] * q))
    for i in range(q):
        axis = len(lead) + i
        psi = np.moveaxis(np.tensordot(psi, rx, axes=([axis], [1])), -1, axis)
    return np.ascontiguousarray(psi).reshape(*lead, -1)


def apply_driver_layer(state: np.ndarray, beta: float | np.ndarray) -> np.ndarray:
    """Apply exp(-i*beta*X/2) to every qubit; returns the evolved state.

    `beta` may carry leading batch axes matching the state's.
    """
    q = qubit_count_of(state)
    beta_arr = np.asarray(beta, dtype=float)
    if q <= _DENSE_DRIVER_CAP:
        w, weight_gap = _hadamard_basis(q)
        phase = np.exp(beta_arr[..., None] * (-0.5j) * weight_gap)
        return (state @ w * phase) @ w
    if beta_arr.ndim == 0:
        return _driver_per_qubit(state, float(beta_arr))
    flat = state.reshape(-1, state.shape[-1])
    betas = np.broadcast_to(beta_arr, state.shape[:-1]).reshape(-1)
    out = np.empty_like(flat)
    for i, b in enumerate(betas):
        out[i] = _driver_per_qubit(flat[i], float(b))
    return out.reshape(state.shape)


def expectation_diagonal(
    state: np.ndarray, diagonal: DiagonalHamiltonian | np.ndarray
) -> float | np.ndarray:
    """Probability-weighted mean energy, sum_z |amp_z|^2 * E_z."""
    energies = _energies_of(diagonal)
    if state.shape[-1] != energies.shape[-1]:
        raise ValueError("state and diagonal dimensions differ")
    probs = state.real**2 + state.imag**2
    result = probs @ energies
    return float(result) if result.ndim == 0 else result


def probabilities(state: np.ndarray) -> np.ndarray:
    return state.real**2 + state.imag**2


def probability_of(state: np.ndarray, assignment: Assignment | int) -> float:
    """Exact probability of measuring one basis state."""
    if isinstance(assignment, Assignment):
        if len(assignment) != qubit_count_of(state):
            raise ValueError("assignment length does not match state size")
        index = assignment.index
    else:
        index = int(assignment)
    amp = state[..., index]
    return float(amp.real**2 + amp.imag**2)


@dataclass(frozen=True)
class ShotCounts:
    """Measurement outcomes: counts per basis index; they sum to total_shots."""

    counts: dict[int, int]
    total_shots: int

    def count_of(self, index: int) -> int:
        return self.counts.get(index, 0)

    def frequency(self, index: int) -> float:
        return self.count_of(index) / self.total_shots


def sample_shots(
    state: np.ndarray, shots: int, rng: np.random.Generator
) -> ShotCounts:
    """Draw independent basis indices from |amp|^2 via the inverse CDF."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if state.ndim != 1:
        raise ValueError("sampling needs a single state, not a batch")
    probs = probabilities(state)
    cdf = np.cumsum(probs / probs.sum())
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    draws = np.minimum(draws, state.shape[-1] - 1)
    indices, counts = np.unique(draws, return_counts=True)
    return ShotCounts(
        {int(i): int(c) for i, c in zip(indices, counts)}, total_shots=shots
    )


def norm(state: np.ndarray) -> float:
    return float(np.sqrt(np.sum(probabilities(state), axis=-1)))
