"""Generic linear-combination-of-unitaries engine.

A program prepares ``k`` ancilla qubits, applies the selection unitary
attached to each ancilla basis index to the target register, un-prepares,
and post-selects a designated ancilla outcome. The ancillas are placed
above (more significant than) the target register.

The effective coefficient of selection ``U_j`` is
``unprepare_row[success_index, j] * prep_amplitude[j]``; with the default
un-prepare (adjoint of the preparation) and success outcome ``|0...0>``
this reduces to ``|prep_amplitude[j]|**2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from lculab.sim import (
    DenseGate,
    GateAction,
    PostSelectionImpossible,
    Statevector,
    adjoint_gate,
    apply_to_array,
)

_DEPENDENT_TOL = 1e-8


def complete_unitary(columns, dim: int) -> np.ndarray:
    """Extend orthonormal columns to a ``dim x dim`` unitary by Gram-Schmidt
    over canonical basis candidates taken in index order; candidates that are
    numerically dependent on the accumulated set are skipped. Deterministic."""
    cols = [np.asarray(c, dtype=complex).reshape(dim) for c in columns]
    gram = np.array([[np.vdot(a, b) for b in cols] for a in cols])
    assert np.max(np.abs(gram - np.eye(len(cols)))) < 1e-10, "columns not orthonormal"
    for i in range(dim):
        if len(cols) == dim:
            break
        cand = np.zeros(dim, dtype=complex)
        cand[i] = 1.0
        for c in cols:
            cand -= c * np.vdot(c, cand)
        norm = np.linalg.norm(cand)
        if norm > _DEPENDENT_TOL:
            cols.append(cand / norm)
    if len(cols) != dim:
        raise ValueError("could not complete columns to a unitary")
    return np.column_stack(cols)


@dataclass(frozen=True, eq=False)
class LcuProgram:
    """``prep_amplitudes`` entry ``j`` is the amplitude of ancilla basis state
    ``|j>`` after preparation. Alternatively ``prep_action`` gives the full
    preparation stage as a gate on the ancilla register (used when the stage
    is a product of register-local unitaries). Unmapped selection indices act
    as identity."""

    ancilla_qubits: int
    selects: dict
    prep_amplitudes: Optional[np.ndarray] = None
    prep_action: Optional[GateAction] = None
    unprep_action: Optional[GateAction] = None
    success_index: int = 0

    def __post_init__(self):
        k = self.ancilla_qubits
        assert k >= 0
        if (self.prep_amplitudes is None) == (self.prep_action is None) and k > 0:
            raise ValueError("give exactly one of prep_amplitudes / prep_action")
        if self.prep_amplitudes is not None:
            amps = np.asarray(self.prep_amplitudes, dtype=complex).reshape(-1)
            if amps.size != 2 ** k:
                raise ValueError(f"need 2**{k} preparation amplitudes, got {amps.size}")
            if abs(np.linalg.norm(amps) - 1.0) > 1e-12:
                raise ValueError("preparation amplitudes must be normalized")
            object.__setattr__(self, "prep_amplitudes", amps)
        if not 0 <= self.success_index < 2 ** k:
            raise ValueError("success index out of ancilla range")
        for j in self.selects:
            if not 0 <= j < 2 ** k:
                raise ValueError(f"selection index {j} out of ancilla range")

    def prepared_amplitudes(self) -> np.ndarray:
        """Ancilla state right after the preparation stage."""
        if self.prep_amplitudes is not None:
            return self.prep_amplitudes
        if self.ancilla_qubits == 0:
            return np.ones(1, dtype=complex)
        e0 = np.zeros(2 ** self.ancilla_qubits, dtype=complex)
        e0[0] = 1.0
        return apply_to_array(e0, self.ancilla_qubits, self.prep_action)

    def unprepare_success_row(self) -> np.ndarray:
        """Row ``success_index`` of the un-preparation unitary, i.e. the
        functional that maps the prepared-and-selected ancilla amplitudes to
        the post-selected branch."""
        k = self.ancilla_qubits
        dim = 2 ** k
        if self.unprep_action is None and self.prep_amplitudes is not None:
            # default unprepare = adjoint of the completed preparation unitary
            prep = complete_unitary([self.prep_amplitudes], dim)
            return prep[:, self.success_index].conj()
        stage = self.unprep_action
        if stage is None:
            stage = adjoint_gate(self.prep_action)
        # row s of M equals conj(M^dagger e_s)
        e_s = np.zeros(dim, dtype=complex)
        e_s[self.success_index] = 1.0
        return apply_to_array(e_s, k, adjoint_gate(stage)).conj()


@dataclass(frozen=True)
class LcuOutcome:
    post_state: Statevector
    pi_success: float
    omega_prime: float


def run_lcu(program: LcuProgram, target: Statevector) -> LcuOutcome:
    """Full prepare / select / unprepare / post-select simulation."""
    k = program.ancilla_qubits
    n = target.num_qubits
    if k == 0:
        out = target.amps
        if 0 in program.selects:
            out = apply_to_array(out, n, program.selects[0])
        return LcuOutcome(Statevector(out), 1.0, 1.0)

    ancilla0 = np.zeros(2 ** k, dtype=complex)
    ancilla0[0] = 1.0
    prep_stage = program.prep_action
    if prep_stage is None:
        prep_stage = DenseGate(tuple(range(k)),
                               complete_unitary([program.prep_amplitudes], 2 ** k))
    unprep_stage = program.unprep_action
    if unprep_stage is None:
        unprep_stage = adjoint_gate(prep_stage)

    joint = np.kron(ancilla0, target.amps)
    joint = apply_to_array(joint, k + n, prep_stage)
    blocks = joint.reshape(2 ** k, 2 ** n)
    for j, action in program.selects.items():
        blocks[j] = apply_to_array(blocks[j].copy(), n, action)
    joint = apply_to_array(blocks.reshape(-1), k + n, unprep_stage)

    branch = joint.reshape(2 ** k, 2 ** n)[program.success_index]
    pi = float(np.real(np.vdot(branch, branch)))
    if pi < 1e-14:
        raise PostSelectionImpossible(f"success probability underflow: {pi!r}")
    return LcuOutcome(Statevector(branch / np.sqrt(pi)), pi, float(np.sqrt(pi)))


def apply_lcu_oracle(program: LcuProgram, target: Statevector):
    """Direct summation Sum_j lambda_j U_j |psi> with
    lambda_j = unprepare_row[j] * prep_amplitude[j]. Returns the unnormalized
    vector and its squared norm (the success probability)."""
    amps = program.prepared_amplitudes()
    row = program.unprepare_success_row() if program.ancilla_qubits else np.ones(1)
    lam = row * amps
    out = np.zeros_like(target.amps)
    for j, coeff in enumerate(lam):
        if coeff == 0:
            continue
        if j in program.selects:
            out += coeff * apply_to_array(target.amps, target.num_qubits,
                                          program.selects[j])
        else:
            out += coeff * target.amps
    return out, float(np.real(np.vdot(out, out)))
