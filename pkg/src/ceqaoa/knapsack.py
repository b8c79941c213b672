"""0-1 knapsack instances and their penalty encoding as a diagonal Hamiltonian.

A problem with N items and capacity W is mapped onto q = N + W binary
variables: the item variables x_1..x_N followed by W unary slack variables
y_1..y_W, where y_n = 1 claims that the packed weight equals n. With penalty
weights (A, B) the energy of an assignment is

    A * (1 - sum_n y_n)**2 + A * (sum_n n*y_n - sum_a w_a*x_a)**2
        - B * sum_a c_a*x_a

so that, whenever 0 < B*max(c) < A, the ground state of the diagonal operator
encodes an optimal feasible packing. The equivalent spin (+-1) form with
linear/quadratic coefficients is available through :func:`expand_ising`.

Bit layout convention: items first, slacks second, leftmost bit is the most
significant bit of the basis index. All operations here are pure functions of
immutable values.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 24
MAX_BRUTEFORCE_ITEMS = 25


class UnrepresentableOptimum(ValueError):
    """The only optimal packing is empty, which the unary slack cannot encode."""


class PenaltyValidityWarning(UserWarning):
    """Penalty weights violate 0 < B*max(values) < A; minima may be infeasible."""


@dataclass(frozen=True)
class KnapsackInstance:
    """A 0-1 knapsack problem with positive integer weights and values."""

    label: str
    weights: tuple[int, ...]
    values: tuple[int, ...]
    capacity: int

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        object.__setattr__(self, "values", tuple(int(c) for c in self.values))
        object.__setattr__(self, "capacity", int(self.capacity))
        if len(self.weights) != len(self.values):
            raise ValueError("weights and values must have the same length")
        if not self.weights:
            raise ValueError("instance needs at least one item")
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if any(w < 1 for w in self.weights) or any(c < 1 for c in self.values):
            raise ValueError("weights and values must be positive integers")

    @property
    def item_count(self) -> int:
        return len(self.weights)

    @property
    def slack_count(self) -> int:
        return self.capacity

    @property
    def qubit_count(self) -> int:
        return self.item_count + self.capacity

    @property
    def max_value(self) -> int:
        return max(self.values)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "weights": list(self.weights),
            "values": list(self.values),
            "capacity": self.capacity,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KnapsackInstance":
        return cls(
            label=str(data["label"]),
            weights=tuple(data["weights"]),
            values=tuple(data["values"]),
            capacity=data["capacity"],
        )


def load_instance(path: str | Path) -> KnapsackInstance:
    """Read a knapsack instance from a JSON file."""
    with open(path, encoding="utf-8") as fh:
        return KnapsackInstance.from_dict(json.load(fh))


def save_instance(instance: KnapsackInstance, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance.to_dict(), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class PenaltyPair:
    """Penalty weights: `constraint_weight` (A) scales the two constraint
    terms, `value_weight` (B) scales the packed value. Zero is accepted so
    degenerate encodings can be explored; validity for an instance requires
    0 < B*max(values) < A."""

    constraint_weight: float
    value_weight: float

    def __post_init__(self):
        if self.constraint_weight < 0 or self.value_weight < 0:
            raise ValueError("penalty weights must be nonnegative")

    def is_valid_for(self, instance: KnapsackInstance) -> bool:
        scaled = self.value_weight * instance.max_value
        return 0.0 < scaled < self.constraint_weight


def index_to_bits(index: int, width: int) -> tuple[int, ...]:
    """Big-endian bits of `index`: leftmost bit is the most significant."""
    if not 0 <= index < (1 << width):
        raise ValueError(f"index {index} out of range for {width} bits")
    return tuple((index >> (width - 1 - i)) & 1 for i in range(width))


def bits_to_index(bits: Sequence[int]) -> int:
    index = 0
    for b in bits:
        index = (index << 1) | (b & 1)
    return index


@dataclass(frozen=True)
class Assignment:
    """A joint assignment of item and slack bits, in layout order."""

    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")

    @classmethod
    def from_index(cls, index: int, qubit_count: int) -> "Assignment":
        return cls(index_to_bits(index, qubit_count))

    @classmethod
    def from_string(cls, bitstring: str) -> "Assignment":
        return cls(tuple(int(ch) for ch in bitstring))

    @property
    def index(self) -> int:
        return bits_to_index(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)


def packed_items(instance: KnapsackInstance, assignment: Assignment) -> frozenset[int]:
    """Zero-based indices of the items selected by the assignment."""
    return frozenset(i for i in range(instance.item_count) if assignment.bits[i])


def packed_weight(instance: KnapsackInstance, items: Iterable[int]) -> int:
    return sum(instance.weights[i] for i in items)


def packed_value(instance: KnapsackInstance, items: Iterable[int]) -> int:
    return sum(instance.values[i] for i in items)


def slack_bits(instance: KnapsackInstance, assignment: Assignment) -> tuple[int, ...]:
    return assignment.bits[instance.item_count:]


def claimed_weight(instance: KnapsackInstance, assignment: Assignment) -> int:
    """Weight encoded in the unary slack: sum of n over the set slack bits."""
    return sum(
        n for n, y in enumerate(slack_bits(instance, assignment), start=1) if y
    )


def is_consistent(instance: KnapsackInstance, assignment: Assignment) -> bool:
    """True when exactly one slack bit is set, it matches the packed weight,
    and the packing fits the capacity."""
    slack = slack_bits(instance, assignment)
    weight = packed_weight(instance, packed_items(instance, assignment))
    return (
        sum(slack) == 1
        and claimed_weight(instance, assignment) == weight
        and weight <= instance.capacity
    )


def solve_bruteforce(
    instance: KnapsackInstance,
) -> tuple[int, set[frozenset[int]]]:
    """Enumerate all packings; return the best feasible value and every
    packing (as a set of zero-based item indices) attaining it."""
    n = instance.item_count
    if n > MAX_BRUTEFORCE_ITEMS:
        raise ValueError(f"brute force limited to {MAX_BRUTEFORCE_ITEMS} items")
    best_value = 0
    best: set[frozenset[int]] = {frozenset()}
    for size in range(1, n + 1):
        for items in combinations(range(n), size):
            if packed_weight(instance, items) > instance.capacity:
                continue
            value = packed_value(instance, items)
            if value > best_value:
                best_value = value
                best = {frozenset(items)}
            elif value == best_value:
                best.add(frozenset(items))
    return best_value, best


def canonical_bks_bitstring(instance: KnapsackInstance) -> Assignment:
    """Assignment for the lexicographically-first optimal packing, with the
    single consistent slack bit set at the packed weight.

    Raises UnrepresentableOptimum when nothing fits: the empty packing has
    weight 0, which the unary slack (y_n for n >= 1) cannot represent.
    """
    _, packings = solve_bruteforce(instance)
    choice = min(packings, key=lambda items: tuple(sorted(items)))
    weight = packed_weight(instance, choice)
    if weight == 0:
        raise UnrepresentableOptimum(
            f"instance {instance.label!r}: only the empty packing is optimal"
        )
    bits = [1 if i in choice else 0 for i in range(instance.item_count)]
    bits += [1 if n == weight else 0 for n in range(1, instance.capacity + 1)]
    return Assignment(tuple(bits))


def evaluate_binary(
    instance: KnapsackInstance, penalties: PenaltyPair, assignment: Assignment
) -> float:
    """Energy of one assignment, constant terms included:
    A*(1 - sum y)^2 + A*(claimed - packed weight)^2 - B*(packed value)."""
    if len(assignment) != instance.qubit_count:
        raise ValueError(
            f"assignment has {len(assignment)} bits, expected {instance.qubit_count}"
        )
    items = packed_items(instance, assignment)
    slack = slack_bits(instance, assignment)
    one_hot = 1 - sum(slack)
    mismatch = claimed_weight(instance, assignment) - packed_weight(instance, items)
    a, b = penalties.constraint_weight, penalties.value_weight
    return a * one_hot**2 + a * mismatch**2 - b * packed_value(instance, items)


@dataclass(frozen=True)
class DiagonalHamiltonian:
    """Cost operator in the computational basis: one real energy per state."""

    energies: np.ndarray
    qubit_count: int
    penalties: PenaltyPair
    label: str

    def __post_init__(self):
        if self.energies.shape != (1 << self.qubit_count,):
            raise ValueError("energies must have length 2**qubit_count")

    @property
    def dimension(self) -> int:
        return 1 << self.qubit_count

    def shifted(self, offset: float) -> "DiagonalHamiltonian":
        return DiagonalHamiltonian(
            self.energies + offset, self.qubit_count, self.penalties, self.label
        )


def _check_validity(instance: KnapsackInstance, penalties: PenaltyPair) -> None:
    if not penalties.is_valid_for(instance):
        warnings.warn(
            f"penalties (A={penalties.constraint_weight}, "
            f"B={penalties.value_weight}) violate "
            f"0 < B*max(values) < A for instance {instance.label!r}; "
            "the minimum-energy state may not be an optimal packing",
            PenaltyValidityWarning,
            stacklevel=3,
        )


def build_diagonal(
    instance: KnapsackInstance, penalties: PenaltyPair
) -> DiagonalHamiltonian:
    """Evaluate the penalty energy on every basis state.

    Vectorized over all 2**q states; equals `evaluate_binary` state by state.
    Warns (and proceeds) when the penalty validity condition fails.
    """
    q = instance.qubit_count
    if q > MAX_QUBITS:
        raise ValueError(f"{q} qubits exceed the cap of {MAX_QUBITS}")
    _check_validity(instance, penalties)
    dim = 1 << q
    states = np.arange(dim, dtype=np.int64)
    slack_total = np.zeros(dim)
    claimed = np.zeros(dim)
    weight = np.zeros(dim)
    value = np.zeros(dim)
    for i in range(instance.item_count):
        bit = (states >> (q - 1 - i)) & 1
        weight += instance.weights[i] * bit
        value += instance.values[i] * bit
    for n in range(1, instance.capacity + 1):
        bit = (states >> (q - 1 - (instance.item_count + n - 1))) & 1
        slack_total += bit
        claimed += n * bit
    a, b = penalties.constraint_weight, penalties.value_weight
    energies = a * (1 - slack_total) ** 2 + a * (claimed - weight) ** 2 - b * value
    return DiagonalHamiltonian(energies, q, penalties, instance.label)


@dataclass(frozen=True)
class IsingCoefficients:
    """Spin form of the penalty energy: linear terms `linear[i]`, couplings
    `quadratic[i, j]` stored strictly above the diagonal, and the constant
    offset so that evaluation reproduces the binary energy exactly."""

    linear: np.ndarray
    quadratic: np.ndarray
    offset: float

    def __post_init__(self):
        q = self.linear.shape[0]
        if self.quadratic.shape != (q, q):
            raise ValueError("quadratic must be a (q, q) matrix")
        if np.any(np.tril(self.quadratic) != 0.0):
            raise ValueError("quadratic must be strictly upper triangular")

    @property
    def spin_count(self) -> int:
        return self.linear.shape[0]


def expand_ising(
    instance: KnapsackInstance, penalties: PenaltyPair
) -> IsingCoefficients:
    """Expand the penalty energy to spin variables s = 2*bit - 1.

    Goes through the quadratic binary form: collect constant/linear/pairwise
    coefficients over bits, then substitute bit = (s + 1)/2. Slack spins sit
    at indices item_count..item_count+capacity-1.
    """
    n, cap, q = instance.item_count, instance.capacity, instance.qubit_count
    a, b = penalties.constraint_weight, penalties.value_weight

    # claimed-minus-packed weight as a linear form over bits
    g = np.zeros(q)
    g[:n] = -np.asarray(instance.weights, dtype=float)
    g[n:] = np.arange(1, cap + 1, dtype=float)

    constant = a
    linear = a * g**2
    linear[n:] -= a  # -2A*y_n + A*y_n from expanding A*(1 - sum y)^2
    linear[:n] -= b * np.asarray(instance.values, dtype=float)
    quadratic = 2.0 * a * np.triu(np.outer(g, g), k=1)
    quadratic[n:, n:][np.triu_indices(cap, k=1)] += 2.0 * a

    row_sums = quadratic.sum(axis=1) + quadratic.sum(axis=0)
    h = linear / 2.0 + row_sums / 4.0
    coupling = quadratic / 4.0
    offset = constant + linear.sum() / 2.0 + quadratic.sum() / 4.0
    return IsingCoefficients(h, coupling, float(offset))


def evaluate_ising(coeffs: IsingCoefficients, spins: Sequence[int]) -> float:
    """sum_i h_i s_i + sum_{i<j} J_ij s_i s_j + offset for spins in {-1, +1}."""
    s = np.asarray(spins, dtype=float)
    if s.shape != (coeffs.spin_count,):
        raise ValueError(
            f"expected {coeffs.spin_count} spins, got shape {s.shape}"
        )
    return float(coeffs.linear @ s + s @ coeffs.quadratic @ s + coeffs.offset)


def spins_from_assignment(assignment: Assignment) -> tuple[int, ...]:
    return tuple(2 * b - 1 for b in assignment.bits)
