"""Residual variational layers implemented through the LCU engine.

A residual layer sends |psi> to the normalized (1-beta)|psi> + beta W|psi>,
realized with one ancilla prepared as (sqrt(1-beta), sqrt(beta)) and W
selected on the ancilla |1> branch. The module also houses the loss
decomposition of the one-residual-layer model, gradient-variance
experiments, the uniform depth ensemble, and the input-skip variant.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from lculab.lcu import LcuProgram, run_lcu
from lculab.sim import (
    DenseGate,
    GateAction,
    GateSequence,
    PostSelectionImpossible,
    Statevector,
    apply_to_array,
    expectation_value,
    haar_random_unitary,
    pauli_string_matrix,
    prepare_basis_state,
)

Unitary = Union[np.ndarray, GateAction]

GENERATORS = {}
for _a in "XYZ":
    for _b in "XYZ":
        GENERATORS[_a + _b] = pauli_string_matrix(_a + _b)


def as_action(w: Unitary, num_qubits: int) -> GateAction:
    if isinstance(w, np.ndarray):
        return DenseGate(tuple(range(num_qubits)), w)
    return w


def _apply(w: Unitary, amps: np.ndarray, num_qubits: int) -> np.ndarray:
    return apply_to_array(amps, num_qubits, as_action(w, num_qubits))


# ---------------------------------------------------------------------------
# parameterised ansatz


@dataclass(frozen=True, eq=False)
class ParamCircuit:
    """Sublayered two-qubit-gate ansatz. Per sublayer, for each generator,
    gates exp(i theta (P (x) Q)) are placed on the odd-adjacent pairs
    (0,1), (2,3), ... and then the even-adjacent pairs (1,2), (3,4), ...,
    one fresh parameter per placement; (n-1) parameters per generator per
    sublayer."""

    num_qubits: int
    generator_names: tuple
    sublayers: int
    params: np.ndarray

    def __post_init__(self):
        assert self.sublayers >= 1 and self.num_qubits >= 2
        names = tuple(self.generator_names)
        for name in names:
            assert name in GENERATORS, f"unknown generator {name}"
        params = np.asarray(self.params, dtype=float).reshape(-1)
        expected = param_count(self.num_qubits, names, self.sublayers)
        if params.size != expected:
            raise ValueError(f"need {expected} parameters, got {params.size}")
        object.__setattr__(self, "generator_names", names)
        object.__setattr__(self, "params", params)


def param_count(num_qubits: int, generator_names, sublayers: int) -> int:
    return sublayers * len(tuple(generator_names)) * (num_qubits - 1)


def adjacent_pairs(num_qubits: int):
    odd = [(i, i + 1) for i in range(0, num_qubits - 1, 2)]
    even = [(i, i + 1) for i in range(1, num_qubits - 1, 2)]
    return odd + even


def generator_rotation(name: str, theta: float) -> np.ndarray:
    """exp(i theta H) for a two-qubit Pauli product H; H^2 = I makes this
    cos(theta) I + i sin(theta) H."""
    h = GENERATORS[name]
    return np.cos(theta) * np.eye(4) + 1j * np.sin(theta) * h


def circuit_action(circuit: ParamCircuit) -> GateSequence:
    gates = []
    pairs = adjacent_pairs(circuit.num_qubits)
    k = 0
    for _ in range(circuit.sublayers):
        for name in circuit.generator_names:
            for pair in pairs:
                gates.append(DenseGate(pair, generator_rotation(name, circuit.params[k])))
                k += 1
    assert k == circuit.params.size
    return GateSequence(tuple(gates))


# ---------------------------------------------------------------------------
# residual layers


@dataclass(frozen=True, eq=False)
class ResidualLayer:
    circuit: Unitary
    beta: float

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("residual strength must lie in [0, 1]")


def beta_lower_bound(beta: float) -> float:
    """Worst-case success probability of one residual layer: 1 - 4 beta (1 - beta)."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError("residual strength must lie in [0, 1]")
    return 1.0 - 4.0 * beta * (1.0 - beta)


def residual_step(state: Statevector, layer: ResidualLayer):
    """One residual connection via a one-ancilla LCU program. Returns the
    post-selected state and the layer success probability; the simulated
    probability is checked against the closed form
    1 - 2 beta (1 - beta) (1 - Re<psi|W|psi>)."""
    n = state.num_qubits
    beta = layer.beta
    action = as_action(layer.circuit, n)
    program = LcuProgram(
        ancilla_qubits=1,
        selects={1: action},
        prep_amplitudes=np.array([np.sqrt(1.0 - beta), np.sqrt(beta)]))
    overlap = np.real(np.vdot(state.amps, apply_to_array(state.amps, n, action)))
    closed_form = 1.0 - 2.0 * beta * (1.0 - beta) * (1.0 - overlap)
    if closed_form < 1e-14:
        raise PostSelectionImpossible(f"layer success probability {closed_form!r}")
    outcome = run_lcu(program, state)
    assert abs(outcome.pi_success - closed_form) < 1e-10
    return outcome.post_state, outcome.pi_success


def resnet_forward(layers: Sequence[ResidualLayer], psi0: Statevector):
    """Sequential residual layers; the total success probability is the
    product of the per-layer ones."""
    state = psi0
    per_layer = []
    for index, layer in enumerate(layers):
        try:
            state, pi = residual_step(state, layer)
        except PostSelectionImpossible as exc:
            raise PostSelectionImpossible(f"layer {index}: {exc}") from exc
        per_layer.append(pi)
    return state, float(np.prod(per_layer)) if per_layer else 1.0, per_layer


# ---------------------------------------------------------------------------
# loss decomposition of the one-residual-layer model (beta = 1/2)


@dataclass(frozen=True)
class LossDecomposition:
    """The three loss contributions of the model W2 ((I + W1)/2) |psi>:
    a shallow unitary term, a deep unitary term, and the cross
    (non-unitary) term, plus the (I + W1)/2 success probability
    omega_prime_sq. total_normalized = (sum of terms) / (4 omega_prime_sq)
    equals the post-selected expectation; it is NaN on the zero-probability
    branch."""

    l_no_bp: float
    l_bp: float
    l_nonunitary: float
    total_normalized: float
    omega_prime_sq: float


def loss_decomposition(psi0: Statevector, w1: Unitary, w2: Unitary,
                       obs) -> LossDecomposition:
    n = psi0.num_qubits
    if isinstance(obs, str):
        obs = pauli_string_matrix(obs)
    psi = psi0.amps
    w1_psi = _apply(w1, psi, n)
    w2_psi = _apply(w2, psi, n)
    w2_w1_psi = _apply(w2, w1_psi, n)
    l_no_bp = float(np.real(np.vdot(w2_psi, obs @ w2_psi)))
    l_bp = float(np.real(np.vdot(w2_w1_psi, obs @ w2_w1_psi)))
    l_nonunitary = float(2.0 * np.real(np.vdot(w2_psi, obs @ w2_w1_psi)))
    mid = 0.5 * (psi + w1_psi)
    omega_prime_sq = float(np.real(np.vdot(mid, mid)))
    if omega_prime_sq < 1e-14:
        total = float("nan")
    else:
        total = (l_no_bp + l_bp + l_nonunitary) / (4.0 * omega_prime_sq)
    return LossDecomposition(l_no_bp, l_bp, l_nonunitary, total, omega_prime_sq)


def loss_gradient(loss: Callable[[np.ndarray], float], theta: np.ndarray,
                  index: int) -> float:
    """Derivative of a sublayer-gate loss with respect to theta[index].

    Uses the exact two-point rule f(t + pi/4) - f(t - pi/4), valid for gates
    exp(i theta H) with H^2 = I, and checks it against a central finite
    difference with step 1e-5."""
    theta = np.asarray(theta, dtype=float)

    def at(value):
        shifted = theta.copy()
        shifted[index] = value
        return loss(shifted)

    t = theta[index]
    two_point = at(t + np.pi / 4) - at(t - np.pi / 4)
    step = 1e-5
    finite_diff = (at(t + step) - at(t - step)) / (2 * step)
    assert abs(two_point - finite_diff) < 1e-5, (two_point, finite_diff)
    return two_point


# ---------------------------------------------------------------------------
# gradient-variance experiment


@dataclass(frozen=True)
class PlateauConfig:
    n_list: tuple = (2, 4, 6, 8)
    samples: int = 500
    sublayers_w1: int = 5
    sublayers_w2: int = 5
    generators_w1: tuple = ("XY", "YX", "YZ")
    generators_w2: tuple = ("XY",)
    observable: str = "YY"  # padded with I up to each n
    seed: int = 7
    residual: bool = True


def _observable_matrix(base: str, num_qubits: int) -> np.ndarray:
    padded = base + "I" * (num_qubits - len(base))
    assert len(padded) == num_qubits
    return pauli_string_matrix(padded)


def plateau_experiment(config: PlateauConfig) -> dict:
    """Variance (over random parameters) of the loss derivative with respect
    to the first parameter of the measured block W2, plus the mean magnitude
    of the non-unitary loss term. Deterministic per (seed, n, sample)."""
    assert config.samples >= 50 and all(n >= 2 for n in config.n_list)
    results = {}
    for n in config.n_list:
        obs = _observable_matrix(config.observable, n)
        psi0 = prepare_basis_state(n, 0)
        p1 = param_count(n, config.generators_w1, config.sublayers_w1)
        p2 = param_count(n, config.generators_w2, config.sublayers_w2)
        grads = np.empty(config.samples)
        nonunitary = np.empty(config.samples)
        for sample in range(config.samples):
            rng = np.random.default_rng(
                np.random.SeedSequence((config.seed, n, sample)))
            theta1 = rng.uniform(0.0, 2.0 * np.pi, p1)
            theta2 = rng.uniform(0.0, 2.0 * np.pi, p2)
            w1 = circuit_action(ParamCircuit(n, config.generators_w1,
                                             config.sublayers_w1, theta1))

            def loss(theta):
                w2 = circuit_action(ParamCircuit(n, config.generators_w2,
                                                 config.sublayers_w2, theta))
                if config.residual:
                    return loss_decomposition(psi0, w1, w2, obs).total_normalized
                out = _apply(w2, _apply(w1, psi0.amps, n), n)
                return float(np.real(np.vdot(out, obs @ out)))

            grads[sample] = loss_gradient(loss, theta2, 0)
            if config.residual:
                w2 = circuit_action(ParamCircuit(n, config.generators_w2,
                                                 config.sublayers_w2, theta2))
                nonunitary[sample] = abs(
                    loss_decomposition(psi0, w1, w2, obs).l_nonunitary)
            else:
                nonunitary[sample] = 0.0
        results[n] = {
            "grad_variance": float(np.var(grads)),
            "mean_abs_nonunitary": float(np.mean(nonunitary)),
        }
    return results


# ---------------------------------------------------------------------------
# uniform depth ensemble


def build_uniform_ensemble(num_layers: int, sublayer_factory: Callable,
                           seed, beta: float = 0.5):
    """Residual stack whose operator product expansion contains 2**L unitary
    terms with sublayer depths exactly {1, ..., 2**L}: layer l carries
    2**(l-1) sublayers and an initial single-sublayer block W0 is applied
    first. ``sublayer_factory(rng) -> unitary matrix`` draws one sublayer."""
    assert num_layers >= 1
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    w0 = sublayer_factory(rng)
    layers = []
    for l in range(1, num_layers + 1):
        w = np.eye(w0.shape[0], dtype=complex)
        for _ in range(2 ** (l - 1)):
            w = sublayer_factory(rng) @ w
        layers.append(ResidualLayer(w, beta))
    return layers, w0


def haar_sublayer_factory(num_qubits: int) -> Callable:
    def factory(rng):
        return haar_random_unitary(2 ** num_qubits, rng)
    return factory


def expand_ensemble(layers: Sequence[ResidualLayer], w0: np.ndarray):
    """Brute-force expansion of (.. (1-b)I + b W_l ..) W0 into its 2**L
    unitary terms. Returns a list of (coefficient, sublayer_depth, matrix),
    ordered by subset index."""
    num_layers = len(layers)
    dim = w0.shape[0]
    terms = []
    for subset in range(2 ** num_layers):
        coeff = 1.0
        matrix = np.eye(dim, dtype=complex)
        depth = 1
        for l in range(1, num_layers + 1):
            layer = layers[l - 1]
            if (subset >> (l - 1)) & 1:
                coeff *= layer.beta
                matrix = layer.circuit @ matrix
                depth += 2 ** (l - 1)
            else:
                coeff *= 1.0 - layer.beta
        terms.append((coeff, depth, matrix @ w0))
    return terms


def ensemble_expected_attempts(num_layers: int, beta: float, num_qubits: int,
                               seed) -> float:
    """Expected repetitions 1/pi_S of the full residual stack on |0...0>,
    with Haar-random sublayers; the unitaries depend only on the seed, so a
    beta sweep at fixed seed reuses the same draws."""
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie strictly inside (0, 1)")
    layers, w0 = build_uniform_ensemble(num_layers,
                                        haar_sublayer_factory(num_qubits),
                                        seed, beta=beta)
    psi0 = prepare_basis_state(num_qubits, 0)
    state = Statevector(_apply(w0, psi0.amps, num_qubits))
    _, pi_total, _ = resnet_forward(layers, state)
    return 1.0 / pi_total


# ---------------------------------------------------------------------------
# input-skip variant


@dataclass(frozen=True, eq=False)
class InputSkipSpec:
    """Layers W_1..W_L with a skipped connection from the input into every
    layer boundary; gamma_f weights the branch that enters at layer f."""

    layers: tuple
    gammas: np.ndarray

    def __post_init__(self):
        layers = tuple(self.layers)
        gammas = np.asarray(self.gammas, dtype=complex).reshape(-1)
        if len(layers) != gammas.size or not layers:
            raise ValueError("need one gamma per layer")
        if abs(np.linalg.norm(gammas) - 1.0) > 1e-12:
            raise ValueError("branch amplitudes must be normalized")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "gammas", gammas)


def input_skip_forward(spec: InputSkipSpec, psi0: Statevector):
    """Applies the effective operator Sum_f |gamma_f|^2 W_L ... W_f with
    ceil(log2 L) ancillas; branch f runs the tail of the layer stack
    starting at layer f."""
    n = psi0.num_qubits
    num_layers = len(spec.layers)
    k = max(int(np.ceil(np.log2(num_layers))), 0)
    actions = [as_action(w, n) for w in spec.layers]
    selects = {}
    for f in range(num_layers):
        selects[f] = GateSequence(tuple(actions[f:]))
    amps = np.zeros(2 ** k, dtype=complex)
    amps[:num_layers] = spec.gammas
    if k == 0:
        outcome = run_lcu(LcuProgram(ancilla_qubits=0, selects=selects), psi0)
    else:
        outcome = run_lcu(LcuProgram(ancilla_qubits=k, selects=selects,
                                     prep_amplitudes=amps), psi0)
    return outcome.post_state, outcome.pi_success
