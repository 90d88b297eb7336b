"""Dense statevector simulation core.

Conventions used everywhere in this package:

* A state over ``n`` qubits is a complex vector of length ``2**n``.
* Qubit 0 is the MOST significant bit of a basis index, so reshaping the
  amplitude buffer to ``(2,) * n`` puts qubit ``q`` on axis ``q``.
* Gate actions are plain value objects; applying one returns a new state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10


class PostSelectionImpossible(Exception):
    """Raised when the requested measurement outcome has (numerically) zero mass."""


@dataclass(frozen=True, eq=False)
class Statevector:
    amps: np.ndarray
    num_qubits: int = field(init=False)

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        n = int(amps.size).bit_length() - 1
        if amps.ndim != 1 or amps.size != 2 ** n or amps.size < 2:
            raise ValueError(f"amplitude buffer of size {amps.size} is not 2**n for n >= 1")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: |psi| = {norm!r}")
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "num_qubits", n)

    def tensor(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.num_qubits)


@dataclass(frozen=True)
class RegisterLayout:
    """Named contiguous qubit ranges (e.g. ancilla / x / y / target)."""

    registers: tuple  # of (name, start, stop) with stop exclusive

    def __post_init__(self):
        spans = sorted((start, stop) for _, start, stop in self.registers)
        covered = []
        for start, stop in spans:
            assert start < stop
            covered.extend(range(start, stop))
        if covered != list(range(covered[0], covered[-1] + 1)) or covered[0] != 0:
            raise ValueError("registers must be disjoint and cover [0, num_qubits)")

    def qubits(self, name: str) -> tuple:
        for reg_name, start, stop in self.registers:
            if reg_name == name:
                return tuple(range(start, stop))
        raise KeyError(name)


@dataclass(frozen=True, eq=False)
class DenseGate:
    """A dense unitary acting on the listed qubits (matrix basis ordered
    with ``qubits[0]`` most significant)."""

    qubits: tuple
    matrix: np.ndarray

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        matrix = np.asarray(self.matrix, dtype=complex)
        dim = 2 ** len(qubits)
        if len(set(qubits)) != len(qubits):
            raise ValueError("duplicate qubit in gate")
        if matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {matrix.shape} does not fit {len(qubits)} qubits")
        err = np.max(np.abs(matrix.conj().T @ matrix - np.eye(dim)))
        if err > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (deviation {err:.2e})")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "matrix", matrix)


@dataclass(frozen=True, eq=False)
class PermutationGate:
    """Basis relabeling |b> -> |table[b]> on the listed qubits."""

    qubits: tuple
    table: np.ndarray

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        table = np.asarray(self.table, dtype=np.intp)
        dim = 2 ** len(qubits)
        if len(set(qubits)) != len(qubits):
            raise ValueError("duplicate qubit in gate")
        if table.shape != (dim,) or not np.array_equal(np.sort(table), np.arange(dim)):
            raise ValueError("table is not a bijection on the register basis")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "table", table)


@dataclass(frozen=True, eq=False)
class ControlledGate:
    """Apply ``action`` on the subspace where each control qubit holds its
    required bit value; identity elsewhere."""

    controls: tuple
    values: tuple
    action: "GateAction"

    def __post_init__(self):
        controls = tuple(int(q) for q in self.controls)
        values = tuple(int(v) for v in self.values)
        if len(controls) != len(values) or not controls:
            raise ValueError("need matching, nonempty control qubits and values")
        if len(set(controls)) != len(controls):
            raise ValueError("duplicate control qubit")
        if any(v not in (0, 1) for v in values):
            raise ValueError("control values must be bits")
        if set(controls) & set(action_qubits(self.action)):
            raise ValueError("controls overlap the inner action")
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class GateSequence:
    actions: tuple

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))


GateAction = Union[DenseGate, PermutationGate, ControlledGate, GateSequence]


def action_qubits(action: GateAction) -> tuple:
    """All qubit indices an action touches (controls included)."""
    if isinstance(action, (DenseGate, PermutationGate)):
        return action.qubits
    if isinstance(action, ControlledGate):
        return action.controls + action_qubits(action.action)
    seen = []
    for sub in action.actions:
        for q in action_qubits(sub):
            if q not in seen:
                seen.append(q)
    return tuple(seen)


def _remap(action: GateAction, mapping: dict) -> GateAction:
    if isinstance(action, DenseGate):
        return DenseGate(tuple(mapping[q] for q in action.qubits), action.matrix)
    if isinstance(action, PermutationGate):
        return PermutationGate(tuple(mapping[q] for q in action.qubits), action.table)
    if isinstance(action, ControlledGate):
        return ControlledGate(tuple(mapping[q] for q in action.controls),
                              action.values, _remap(action.action, mapping))
    return GateSequence(tuple(_remap(a, mapping) for a in action.actions))


def apply_to_array(amps: np.ndarray, num_qubits: int, action: GateAction) -> np.ndarray:
    """Apply an action to a raw amplitude buffer (may be unnormalized)."""
    if isinstance(action, GateSequence):
        for sub in action.actions:
            amps = apply_to_array(amps, num_qubits, sub)
        return amps

    if isinstance(action, ControlledGate):
        tensor = amps.reshape((2,) * num_qubits)
        idx = [slice(None)] * num_qubits
        for c, v in zip(action.controls, action.values):
            idx[c] = v
        remaining = [q for q in range(num_qubits) if q not in action.controls]
        sub = tensor[tuple(idx)].reshape(-1)
        inner = _remap(action.action, {q: i for i, q in enumerate(remaining)})
        out = tensor.copy()
        out[tuple(idx)] = apply_to_array(sub, len(remaining), inner).reshape(
            (2,) * len(remaining))
        return out.reshape(-1)

    qubits = action.qubits
    assert all(0 <= q < num_qubits for q in qubits), "qubit index out of range"
    m = len(qubits)
    tensor = amps.reshape((2,) * num_qubits)
    moved = np.moveaxis(tensor, qubits, range(m))
    block = np.ascontiguousarray(moved).reshape(2 ** m, -1)
    if isinstance(action, DenseGate):
        block = action.matrix @ block
    else:
        out = np.empty_like(block)
        out[action.table] = block
        block = out
    moved = block.reshape((2,) * num_qubits)
    return np.moveaxis(moved, range(m), qubits).reshape(-1).copy()


def adjoint_gate(action: GateAction) -> GateAction:
    if isinstance(action, DenseGate):
        return DenseGate(action.qubits, action.matrix.conj().T)
    if isinstance(action, PermutationGate):
        inv = np.empty_like(action.table)
        inv[action.table] = np.arange(action.table.size)
        return PermutationGate(action.qubits, inv)
    if isinstance(action, ControlledGate):
        return ControlledGate(action.controls, action.values, adjoint_gate(action.action))
    return GateSequence(tuple(adjoint_gate(a) for a in reversed(action.actions)))


def gate_matrix(action: GateAction, num_qubits: int) -> np.ndarray:
    """Dense matrix of an action embedded in ``num_qubits`` qubits. Test and
    oracle helper; cost is 4**num_qubits."""
    dim = 2 ** num_qubits
    out = np.empty((dim, dim), dtype=complex)
    basis = np.zeros(dim, dtype=complex)
    for col in range(dim):
        basis[col] = 1.0
        out[:, col] = apply_to_array(basis, num_qubits, action)
        basis[col] = 0.0
    return out


def prepare_basis_state(num_qubits: int, index: int) -> Statevector:
    if not 0 <= index < 2 ** num_qubits:
        raise ValueError(f"basis index {index} out of range for {num_qubits} qubits")
    amps = np.zeros(2 ** num_qubits, dtype=complex)
    amps[index] = 1.0
    return Statevector(amps)


def apply_gate(state: Statevector, action: GateAction) -> Statevector:
    out = apply_to_array(state.amps, state.num_qubits, action)
    norm = np.linalg.norm(out)
    assert abs(norm - 1.0) < NORM_TOL, f"gate application drifted norm to {norm!r}"
    return Statevector(out)


def post_select_register(state: Statevector, qubits, outcome: int,
                         threshold: float = 1e-14):
    """Project onto ``qubits == outcome`` (bits read most-significant-first),
    drop those qubits, renormalize. Returns (conditional state, probability)."""
    qubits = tuple(qubits)
    if not 0 <= outcome < 2 ** len(qubits):
        raise ValueError(f"outcome {outcome} out of range for {len(qubits)} qubits")
    tensor = state.tensor()
    idx = [slice(None)] * state.num_qubits
    for pos, q in enumerate(qubits):
        idx[q] = (outcome >> (len(qubits) - 1 - pos)) & 1
    sub = np.asarray(tensor[tuple(idx)]).reshape(-1)
    probability = float(np.real(np.vdot(sub, sub)))
    if probability < threshold:
        raise PostSelectionImpossible(
            f"outcome {outcome} on qubits {qubits} has probability {probability!r}")
    return Statevector(sub / np.sqrt(probability)), probability


def inner_product(a: Statevector, b: Statevector) -> complex:
    if a.num_qubits != b.num_qubits:
        raise ValueError("states live on different qubit counts")
    return complex(np.vdot(a.amps, b.amps))


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_string_matrix(pauli: str) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for ch in pauli:
        out = np.kron(out, _PAULI[ch])
    return out


def expectation_value(state: Statevector, obs) -> float:
    """<psi|O|psi> for a dense Hermitian matrix or a Pauli string like "YYII"."""
    if isinstance(obs, str):
        obs = pauli_string_matrix(obs)
    obs = np.asarray(obs, dtype=complex)
    if obs.shape != (state.amps.size, state.amps.size):
        raise ValueError("observable size does not match the state")
    if np.max(np.abs(obs - obs.conj().T)) > UNITARY_TOL:
        raise ValueError("observable is not Hermitian")
    value = np.vdot(state.amps, obs @ state.amps)
    assert abs(value.imag) < 1e-10
    return float(value.real)


def haar_random_unitary(dim: int, seed) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix with the
    phase-of-R-diagonal correction. ``seed`` may be an int or a Generator."""
    if dim < 2:
        raise ValueError("dim must be at least 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    z /= np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
