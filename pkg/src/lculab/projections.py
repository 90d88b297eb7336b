"""Projections onto irreducible-representation subspaces of a finite group.

A group lives here as a composition table over element indices, a partition
of the elements into conjugacy classes, and a character table with one row
per irreducible representation and one column per class (trivial row first).
A representation assigns a unitary gate to every element; the canonical one
permutes equal-width qudit slots of the target register.  The projector onto
the isotypic subspace of representation r is

    P_r = (n_r / |G|) sum_g conj(chi_r(g)) U_g

and any weighted combination sum_r a_r P_r runs as a
linear-combination-of-unitaries program whose preparation routes the weights
a_r n_r through the character matrix.  The un-preparation applies the
character stage alone, so post-selecting ancilla outcome zero pairs every
element with the trivial character and the kept branch is exactly
(1/Omega) sum_r a_r P_r applied to the target, Omega^2 = sum_r |a_r n_r|^2.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .sim import (
    DenseGate,
    GateSequence,
    PermutationGate,
    PostSelectionImpossible,
    Statevector,
    action_qubits,
    adjoint_gate,
    apply_to_array,
    gate_matrix,
)
from .lcu import LcuProgram, complete_unitary, run_lcu
from .encodings import bloch_product_state, rotate_cloud, sample_shape_cloud

CHARACTER_TOL = 1e-12
_HOMOMORPHISM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FiniteGroupData:
    """Finite group with character data.

    ``composition[i, j]`` is the index of the product ``g_i g_j``.
    ``classes`` partitions the element indices into conjugacy classes and
    fixes the column order of ``characters``; the first character row must be
    the trivial one.  Validation checks the group axioms (unique two-sided
    identity, inverses, associativity over the full table), closure of the
    classes under conjugation, the weighted orthogonality

        (1/|G|) sum_nu d_nu chi_j(nu) conj(chi_k(nu)) = delta_jk

    and that the squared degrees sum to the group order.
    """

    composition: np.ndarray
    classes: tuple
    characters: np.ndarray
    element_names: tuple = ()

    def __post_init__(self):
        comp = np.asarray(self.composition, dtype=np.intp)
        if comp.ndim != 2 or comp.shape[0] != comp.shape[1]:
            raise ValueError("composition table must be square")
        m = comp.shape[0]
        if m == 0:
            raise ValueError("empty group")
        if comp.min() < 0 or comp.max() >= m:
            raise ValueError("composition entries out of range")
        ar = np.arange(m)
        ident = [e for e in range(m)
                 if np.array_equal(comp[e], ar) and np.array_equal(comp[:, e], ar)]
        if len(ident) != 1:
            raise ValueError("composition table needs a unique identity")
        e = ident[0]
        inverses = np.empty(m, dtype=np.intp)
        for i in range(m):
            js = np.nonzero(comp[i] == e)[0]
            if js.size != 1 or comp[js[0], i] != e:
                raise ValueError(f"element {i} has no two-sided inverse")
            inverses[i] = js[0]
        if not np.array_equal(comp[comp], comp[:, comp]):
            raise ValueError("composition table is not associative")

        classes = tuple(tuple(int(x) for x in cl) for cl in self.classes)
        if sorted(x for cl in classes for x in cl) != list(range(m)):
            raise ValueError("classes do not partition the elements")
        class_of = np.empty(m, dtype=np.intp)
        for nu, cl in enumerate(classes):
            class_of[list(cl)] = nu
        conj = comp[comp, inverses[:, None]]  # conj[g, x] = g x g^-1
        if not np.array_equal(class_of[conj], np.broadcast_to(class_of, (m, m))):
            raise ValueError("classes are not closed under conjugation")

        chars = np.asarray(self.characters, dtype=complex)
        n_cl = len(classes)
        if chars.shape != (n_cl, n_cl):
            raise ValueError("character table must be square over the classes")
        if np.max(np.abs(chars[0] - 1.0)) > CHARACTER_TOL:
            raise ValueError("first character row must be the trivial one")
        sizes = np.array([len(cl) for cl in classes], dtype=float)
        gram = (chars * sizes) @ chars.conj().T / m
        if np.max(np.abs(gram - np.eye(n_cl))) > CHARACTER_TOL:
            raise ValueError("character rows fail the weighted orthogonality")
        e_class = int(class_of[e])
        degrees = chars[:, e_class]
        if np.max(np.abs(degrees - np.round(degrees.real))) > 1e-8:
            raise ValueError("degrees must be positive integers")
        degrees = np.round(degrees.real).astype(np.intp)
        if degrees.min() < 1 or int((degrees ** 2).sum()) != m:
            raise ValueError("squared degrees must sum to the group order")

        names = tuple(self.element_names)
        if names and len(names) != m:
            raise ValueError("element_names length mismatch")
        object.__setattr__(self, "composition", comp)
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "characters", chars)
        object.__setattr__(self, "element_names", names)
        object.__setattr__(self, "identity", e)
        object.__setattr__(self, "inverses", inverses)
        object.__setattr__(self, "class_of", class_of)
        object.__setattr__(self, "identity_class", e_class)
        object.__setattr__(self, "degrees", degrees)

    @property
    def order(self) -> int:
        return self.composition.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def class_sizes(self) -> np.ndarray:
        return np.array([len(cl) for cl in self.classes], dtype=np.intp)


def compose_permutations(sigma, tau) -> tuple:
    """(sigma tau)(i) = sigma(tau(i)); tau acts first."""
    return tuple(sigma[t] for t in tau)


def invert_permutation(sigma) -> tuple:
    inv = [0] * len(sigma)
    for i, s in enumerate(sigma):
        inv[s] = i
    return tuple(inv)


def cycle_type(sigma) -> tuple:
    """Cycle lengths in decreasing order; the conjugacy invariant."""
    seen = [False] * len(sigma)
    lengths = []
    for start in range(len(sigma)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = sigma[i]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def permutation_cycle_name(sigma) -> str:
    """Cycle notation over 1-based points, fixed points dropped; "e" for the
    identity."""
    seen = [False] * len(sigma)
    parts = []
    for start in range(len(sigma)):
        if seen[start] or sigma[start] == start:
            seen[start] = True
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(str(i + 1))
            i = sigma[i]
        parts.append("(" + " ".join(cyc) + ")")
    return "".join(parts) or "e"


def symmetric_group_elements(n: int) -> tuple:
    """All permutations of range(n) in lexicographic order; the position in
    this tuple is the element index used everywhere else."""
    return tuple(itertools.permutations(range(n)))


_SN_CLASS_TYPES = {
    2: ((1, 1), (2,)),
    3: ((1, 1, 1), (2, 1), (3,)),
    4: ((1, 1, 1, 1), (2, 1, 1), (2, 2), (3, 1), (4,)),
}

_SN_CHARACTERS = {
    2: ((1, 1),
        (1, -1)),
    3: ((1, 1, 1),
        (2, 0, -1),
        (1, -1, 1)),
    4: ((1, 1, 1, 1, 1),
        (1, -1, 1, 1, -1),
        (2, 0, 2, -1, 0),
        (3, -1, -1, 0, 1),
        (3, 1, -1, 0, -1)),
}


def symmetric_group(n: int) -> FiniteGroupData:
    """Symmetric group on n points with its hard-coded character table.
    Classes are ordered identity, transpositions, then increasing cycle
    structure; the degree-2 representation of the four-point group sits in
    row index 2."""
    if n not in _SN_CHARACTERS:
        raise ValueError("character tables are provided for n in {2, 3, 4}")
    elems = symmetric_group_elements(n)
    index = {p: i for i, p in enumerate(elems)}
    m = len(elems)
    comp = np.empty((m, m), dtype=np.intp)
    for i, s in enumerate(elems):
        for j, t in enumerate(elems):
            comp[i, j] = index[compose_permutations(s, t)]
    classes = tuple(
        tuple(i for i, p in enumerate(elems) if cycle_type(p) == ct)
        for ct in _SN_CLASS_TYPES[n])
    chars = np.array(_SN_CHARACTERS[n], dtype=complex)
    names = tuple(permutation_cycle_name(p) for p in elems)
    return FiniteGroupData(comp, classes, chars, names)


def parse_group_file(path) -> FiniteGroupData:
    """Read a group from a sectioned text file.

    Sections ``[elements]`` (whitespace-separated names), ``[composition]``
    (one row per element, entries are element names), ``[classes]`` (one
    class per line) and ``[characters]`` (one row per representation, entries
    parse as Python complex literals) in any order; ``#`` starts a comment.
    The resulting table goes through the full FiniteGroupData validation.
    """
    sections = {}
    current = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip().lower()
                sections[current] = []
                continue
            if current is None:
                raise ValueError(f"data before any section header: {line!r}")
            sections[current].append(line.split())
    for needed in ("elements", "composition", "classes", "characters"):
        if needed not in sections:
            raise ValueError(f"missing [{needed}] section")

    names = tuple(tok for row in sections["elements"] for tok in row)
    if not names or len(set(names)) != len(names):
        raise ValueError("element names must be nonempty and distinct")
    index = {nm: i for i, nm in enumerate(names)}
    m = len(names)

    def lookup(tok):
        if tok not in index:
            raise ValueError(f"unknown element name {tok!r}")
        return index[tok]

    rows = sections["composition"]
    if len(rows) != m or any(len(r) != m for r in rows):
        raise ValueError(f"composition table must be {m} rows of {m} entries")
    comp = np.array([[lookup(t) for t in r] for r in rows], dtype=np.intp)
    classes = tuple(tuple(lookup(t) for t in r) for r in sections["classes"])
    crows = sections["characters"]
    if len(crows) != len(classes) or any(len(r) != len(classes) for r in crows):
        raise ValueError("character table must be square over the classes")
    try:
        chars = np.array([[complex(t) for t in r] for r in crows])
    except ValueError:
        raise ValueError("character entries must parse as complex literals") from None
    return FiniteGroupData(comp, classes, chars, names)


@dataclass(frozen=True, eq=False)
class RepMap:
    """One unitary gate per group element on ``num_qubits`` target qubits.

    Construction checks that the identity element acts trivially and that
    U_g U_h = U_{gh} holds on a random state for a fixed sample of pairs.
    """

    group: FiniteGroupData
    num_qubits: int
    actions: tuple

    def __post_init__(self):
        actions = tuple(self.actions)
        m = self.group.order
        nq = self.num_qubits
        if len(actions) != m:
            raise ValueError("need one action per group element")
        for act in actions:
            if any(not 0 <= q < nq for q in action_qubits(act)):
                raise ValueError("action touches qubits outside the register")
        rng = np.random.default_rng(0)
        psi = rng.standard_normal(2 ** nq) + 1j * rng.standard_normal(2 ** nq)
        psi /= np.linalg.norm(psi)
        ident = apply_to_array(psi.copy(), nq, actions[self.group.identity])
        if np.max(np.abs(ident - psi)) > _HOMOMORPHISM_TOL:
            raise ValueError("identity element must act trivially")
        pairs = rng.integers(0, m, size=(min(m * m, 24), 2))
        for g, h in pairs:
            lhs = apply_to_array(apply_to_array(psi.copy(), nq, actions[h]),
                                 nq, actions[g])
            rhs = apply_to_array(psi.copy(), nq,
                                 actions[self.group.composition[g, h]])
            if np.max(np.abs(lhs - rhs)) > _HOMOMORPHISM_TOL:
                raise ValueError(f"actions break the homomorphism at ({g}, {h})")
        object.__setattr__(self, "actions", actions)


def slot_permutation_table(sigma, qudit_bits: int) -> np.ndarray:
    """Basis table permuting equal-width slots: output slot k carries the
    value of input slot sigma^(-1)(k).  Slot 0 is the most significant."""
    n = len(sigma)
    inv = np.array(invert_permutation(sigma), dtype=np.intp)
    shifts = qudit_bits * (n - 1 - np.arange(n))
    idx = np.arange(1 << (qudit_bits * n))
    digits = (idx[:, None] >> shifts[None, :]) & ((1 << qudit_bits) - 1)
    return (digits[:, inv] << shifts[None, :]).sum(axis=1)


def qudit_permutation_rep(n_slots: int, qudit_bits: int = 1) -> RepMap:
    """Symmetric-group representation permuting ``n_slots`` registers of
    ``qudit_bits`` qubits each."""
    if n_slots < 2 or qudit_bits < 1:
        raise ValueError("need at least two slots of at least one qubit")
    group = symmetric_group(n_slots)
    nq = n_slots * qudit_bits
    qubits = tuple(range(nq))
    actions = tuple(
        PermutationGate(qubits, slot_permutation_table(p, qudit_bits))
        for p in symmetric_group_elements(n_slots))
    return RepMap(group, nq, actions)


def projector_matrix(rep: RepMap, r: int) -> np.ndarray:
    """Dense P_r = (n_r/|G|) sum_g conj(chi_r(g)) U_g."""
    group = rep.group
    dim = 2 ** rep.num_qubits
    coeffs = group.characters[r, group.class_of].conj()
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(group.order):
        if coeffs[i] == 0:
            continue
        out += coeffs[i] * gate_matrix(rep.actions[i], rep.num_qubits)
    return out * (group.degrees[r] / group.order)


def apply_projector(rep: RepMap, r: int, psi: Statevector):
    """Unnormalized P_r |psi> and its squared norm."""
    group = rep.group
    if psi.num_qubits != rep.num_qubits:
        raise ValueError("state does not match the representation register")
    coeffs = group.characters[r, group.class_of].conj() * (
        group.degrees[r] / group.order)
    out = np.zeros_like(psi.amps)
    for i in range(group.order):
        if coeffs[i] == 0:
            continue
        out += coeffs[i] * apply_to_array(psi.amps.copy(), rep.num_qubits,
                                          rep.actions[i])
    return out, float(np.real(np.vdot(out, out)))


def subspace_weights(rep: RepMap, psi: Statevector) -> np.ndarray:
    """w_r = ||P_r psi||^2 for every representation; sums to one."""
    return np.array([apply_projector(rep, r, psi)[1]
                     for r in range(rep.group.n_classes)])


@dataclass(frozen=True, eq=False)
class ProjectionWeights:
    """Coefficients a_r of the combination sum_r a_r P_r, one per character
    row; at least one must be nonzero."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex).reshape(-1)
        if a.size == 0 or not np.any(a != 0):
            raise ValueError("need at least one nonzero coefficient")
        object.__setattr__(self, "a", a)


def single_projection_weights(n_reps: int, r: int) -> ProjectionWeights:
    a = np.zeros(n_reps)
    a[r] = 1.0
    return ProjectionWeights(a)


def amplification_weights(n_reps: int, alpha: float) -> ProjectionWeights:
    """Trivial representation kept at weight 1, every other scaled by
    1 - alpha; alpha = 0 leaves the state alone, alpha = 1 symmetrizes."""
    a = np.full(n_reps, 1.0 - alpha, dtype=complex)
    a[0] = 1.0
    return ProjectionWeights(a)


def combination_normalization(group: FiniteGroupData,
                              weights: ProjectionWeights) -> float:
    """Omega = ||(a_r n_r)_r||, the subnormalization of the combination."""
    if weights.a.size != group.n_classes:
        raise ValueError("need one weight per representation")
    return float(np.linalg.norm(weights.a * group.degrees))


def character_prep_matrix(group: FiniteGroupData) -> np.ndarray:
    """Unitary whose column r holds conj(chi_r(g_i)) / sqrt|G| over the
    elements; the remaining columns are Gram-Schmidt completed.  Column 0 is
    the uniform vector because the trivial row comes first."""
    m = group.order
    k = max(1, (m - 1).bit_length())
    dim = 1 << k
    cols = []
    for r in range(group.n_classes):
        col = np.zeros(dim, dtype=complex)
        col[:m] = group.characters[r, group.class_of].conj() / np.sqrt(m)
        cols.append(col)
    return complete_unitary(cols, dim)


def build_projection_program(rep: RepMap,
                             weights: ProjectionWeights) -> LcuProgram:
    """Program whose success branch applies (1/Omega) sum_r a_r P_r.

    The preparation routes the normalized weight vector (a_r n_r)/Omega
    through the character matrix; the un-preparation is the adjoint of the
    character stage alone, not of the whole preparation, so that outcome zero
    pairs every element with the trivial character.
    """
    group = rep.group
    if weights.a.size != group.n_classes:
        raise ValueError("need one weight per representation")
    chi_hat = character_prep_matrix(group)
    dim = chi_hat.shape[0]
    k = dim.bit_length() - 1
    gamma = weights.a * group.degrees
    gamma_vec = np.zeros(dim, dtype=complex)
    gamma_vec[:group.n_classes] = gamma / np.linalg.norm(gamma)
    return LcuProgram(
        ancilla_qubits=k,
        selects={i: rep.actions[i] for i in range(group.order)},
        prep_amplitudes=chi_hat @ gamma_vec,
        unprep_action=DenseGate(tuple(range(k)), chi_hat.conj().T))


def class_character_matrix(group: FiniteGroupData) -> np.ndarray:
    """Unitary on the class register whose column r holds
    sqrt(d_nu) conj(chi_r(nu)) / sqrt|G| over the classes, completed to a
    full basis."""
    n_cl = group.n_classes
    k = max(1, (n_cl - 1).bit_length())
    dim = 1 << k
    root_sizes = np.sqrt(group.class_sizes().astype(float))
    cols = []
    for r in range(n_cl):
        col = np.zeros(dim, dtype=complex)
        col[:n_cl] = root_sizes * group.characters[r].conj() / np.sqrt(group.order)
        cols.append(col)
    return complete_unitary(cols, dim)


def conjugacy_class_program(rep: RepMap,
                            weights: ProjectionWeights) -> LcuProgram:
    """Class-register variant of build_projection_program.

    The ancilla splits into a class register prepared through the
    size-weighted character matrix and one uniform member register per class
    with more than one element.  Every joint ancilla value selects the class
    member addressed by that class's own register, so the success branch is
    identical to the element-register program.  Intended for small groups:
    the select table enumerates all in-range member combinations.
    """
    group = rep.group
    if weights.a.size != group.n_classes:
        raise ValueError("need one weight per representation")
    chi_tilde = class_character_matrix(group)
    dim_c = chi_tilde.shape[0]
    kc = dim_c.bit_length() - 1
    gamma = weights.a * group.degrees
    gamma_vec = np.zeros(dim_c, dtype=complex)
    gamma_vec[:group.n_classes] = gamma / np.linalg.norm(gamma)
    class_stage = chi_tilde @ complete_unitary([gamma_vec], dim_c)

    sizes = [int(d) for d in group.class_sizes()]
    widths = [(d - 1).bit_length() for d in sizes]
    class_qubits = tuple(range(kc))
    member_gates = []
    reg_classes = []
    off = kc
    for nu, w in enumerate(widths):
        if w == 0:
            continue
        qubits = tuple(range(off, off + w))
        off += w
        uniform = np.zeros(1 << w, dtype=complex)
        uniform[:sizes[nu]] = 1.0 / np.sqrt(float(sizes[nu]))
        member_gates.append(DenseGate(qubits, complete_unitary([uniform], 1 << w)))
        reg_classes.append(nu)
    k = off
    reg_pos = {nu: pos for pos, nu in enumerate(reg_classes)}

    selects = {}
    for nu in range(group.n_classes):
        for combo in itertools.product(*(range(sizes[c]) for c in reg_classes)):
            key = nu
            for c, mval in zip(reg_classes, combo):
                key = (key << widths[c]) | mval
            member = combo[reg_pos[nu]] if nu in reg_pos else 0
            selects[key] = rep.actions[group.classes[nu][member]]

    prep_stage = GateSequence(
        [DenseGate(class_qubits, class_stage)] + member_gates)
    unprep_stage = GateSequence(
        [DenseGate(class_qubits, chi_tilde)] + member_gates)
    return LcuProgram(
        ancilla_qubits=k,
        selects=selects,
        prep_action=prep_stage,
        unprep_action=adjoint_gate(unprep_stage))


def projection_success_probability(group: FiniteGroupData,
                                   weights: ProjectionWeights,
                                   subspace_w) -> float:
    """Post-selection probability of the projection program on a state with
    subspace weights w_r = ||P_r psi||^2:

        pi = sum_r |a_r|^2 w_r / sum_r |a_r n_r|^2.
    """
    a = weights.a
    w = np.asarray(subspace_w, dtype=float)
    if a.size != group.n_classes or w.size != group.n_classes:
        raise ValueError("need one weight per representation")
    return float(np.sum(np.abs(a) ** 2 * w)
                 / np.sum(np.abs(a * group.degrees) ** 2))


def projected_weight_average(group: FiniteGroupData,
                             weights: ProjectionWeights,
                             subspace_w) -> float:
    """Companion estimate sum_r |a_r n_r|^2 w_r / sum_r |a_r n_r|^2, the kept
    subspace weight itself.  Agrees with the success probability exactly when
    every kept representation has degree one; a degree-n branch is n^2 times
    less likely than this average suggests."""
    a = weights.a
    w = np.asarray(subspace_w, dtype=float)
    if a.size != group.n_classes or w.size != group.n_classes:
        raise ValueError("need one weight per representation")
    scaled = np.abs(a * group.degrees) ** 2
    return float(np.sum(scaled * w) / np.sum(scaled))


def permutation_symmetrize(psi: Statevector, n_qudits: int,
                           qudit_bits: int = 1):
    """Project onto the permutation-symmetric subspace of equal qudit slots.
    Returns the post-selected state and the success probability; raises
    PostSelectionImpossible when the state has no symmetric component."""
    rep = qudit_permutation_rep(n_qudits, qudit_bits)
    if psi.num_qubits != rep.num_qubits:
        raise ValueError("state does not match the slot register")
    weights = single_projection_weights(rep.group.n_classes, 0)
    out = run_lcu(build_projection_program(rep, weights), psi)
    return out.post_state, out.pi_success


def amplify_symmetric_subspace(psi: Statevector, alpha: float, rep: RepMap,
                               via: str = "program"):
    """Keep the symmetric component at weight 1 and scale every other
    representation by 1 - alpha.  ``via="direct"`` evaluates the projector
    sum without the ancilla register; branch and probability match the
    program exactly."""
    weights = amplification_weights(rep.group.n_classes, alpha)
    if via == "program":
        out = run_lcu(build_projection_program(rep, weights), psi)
        return out.post_state, out.pi_success
    if via != "direct":
        raise ValueError("via must be 'program' or 'direct'")
    omega = combination_normalization(rep.group, weights)
    total = np.zeros_like(psi.amps)
    for r in range(rep.group.n_classes):
        if weights.a[r] == 0:
            continue
        total += weights.a[r] * apply_projector(rep, r, psi)[0]
    pi = float(np.real(np.vdot(total, total))) / omega ** 2
    if pi < 1e-14:
        raise PostSelectionImpossible(f"success probability underflow: {pi!r}")
    return Statevector(total / np.linalg.norm(total)), pi


def det_normalized_unitary(u: np.ndarray) -> np.ndarray:
    """Scale a unitary to determinant one."""
    return u / np.linalg.det(u) ** (1.0 / u.shape[0])


def schur_singlet_basis() -> np.ndarray:
    """Orthonormal pair spanning the isotypic block of the degree-2
    representation of the four-slot permutation group on qubits.  The block
    is also the total-spin-zero subspace, so u x u x u x u acts trivially on
    it for any determinant-one u."""
    s = np.sqrt(3.0) / 6.0
    d1 = np.zeros(16, dtype=complex)
    d1[[3, 12]] = 2.0 * s
    d1[[5, 6, 9, 10]] = -s
    d2 = np.zeros(16, dtype=complex)
    d2[[5, 10]] = 0.5
    d2[[6, 9]] = -0.5
    return np.vstack([d1, d2])


def rotational_invariance_experiment(n_clouds: int, n_angles: int, seed):
    """Rotate random four-point unit-sphere clouds rigidly and compare state
    overlaps before and after projecting the Bloch product encoding onto the
    degree-2 block.

    Returns rows (cloud_id, angle, projected overlap, raw overlap) over
    angles linspace(0, pi).  A rigid rotation acts on the encoding as
    u x u x u x u for a determinant-one u up to a global phase, which is
    trivial on the singlet block, so the projected overlap stays at one
    while the raw product overlap decays with the angle.
    """
    if n_clouds < 1 or n_angles < 2:
        raise ValueError("need at least one cloud and two angles")
    rep = qudit_permutation_rep(4, 1)
    singlet_row = 2  # degree-2 row of the four-point character table
    rng = np.random.default_rng(seed)
    angles = np.linspace(0.0, np.pi, n_angles)
    rows = []
    for cloud_id in range(n_clouds):
        while True:
            cloud = sample_shape_cloud("sphere", 4, int(rng.integers(2 ** 32)))
            axis = rng.standard_normal(3)
            if np.linalg.norm(axis) < 1e-6:
                continue
            psi0 = bloch_product_state(cloud)
            base, w0 = apply_projector(rep, singlet_row, psi0)
            if w0 > 1e-12:
                break
        base = base / np.sqrt(w0)
        for theta in angles:
            psi = bloch_product_state(rotate_cloud(cloud, axis, float(theta)))
            proj, w = apply_projector(rep, singlet_row, psi)
            rows.append((cloud_id, float(theta),
                         float(abs(np.vdot(base, proj)) / np.sqrt(w)),
                         float(abs(np.vdot(psi0.amps, psi.amps)))))
    return rows
