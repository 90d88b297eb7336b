import numpy as np
import pytest

from lculab.lcu import LcuProgram, run_lcu
from lculab.resnet import (
    InputSkipSpec,
    ParamCircuit,
    PlateauConfig,
    ResidualLayer,
    adjacent_pairs,
    beta_lower_bound,
    build_uniform_ensemble,
    circuit_action,
    ensemble_expected_attempts,
    expand_ensemble,
    generator_rotation,
    haar_sublayer_factory,
    input_skip_forward,
    loss_decomposition,
    loss_gradient,
    param_count,
    plateau_experiment,
    resnet_forward,
    residual_step,
)
from lculab.sim import (
    DenseGate,
    GateSequence,
    PostSelectionImpossible,
    Statevector,
    apply_to_array,
    gate_matrix,
    haar_random_unitary,
    pauli_string_matrix,
    prepare_basis_state,
)

X = pauli_string_matrix("X")
Z = pauli_string_matrix("Z")


def random_state(n, rng):
    v = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
    return Statevector(v / np.linalg.norm(v))


def test_residual_identity_skip():
    rng = np.random.default_rng(1)
    psi = random_state(2, rng)
    out, pi = residual_step(psi, ResidualLayer(np.eye(4, dtype=complex), 0.3))
    assert abs(pi - 1.0) < 1e-12
    assert np.allclose(out.amps, psi.amps)


def test_residual_worst_case_raises():
    rng = np.random.default_rng(2)
    psi = random_state(1, rng)
    with pytest.raises(PostSelectionImpossible):
        residual_step(psi, ResidualLayer(-np.eye(2, dtype=complex), 0.5))


def test_residual_z_on_plus_frozen():
    plus = Statevector(np.array([1, 1]) / np.sqrt(2))
    out, pi = residual_step(plus, ResidualLayer(Z, 0.5))
    assert abs(pi - 0.5) < 1e-12
    assert np.allclose(out.amps, [1, 0])


def test_residual_formula_and_bound_on_seeded_cases():
    rng = np.random.default_rng(10)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        psi = random_state(n, rng)
        w = haar_random_unitary(2 ** n, rng)
        beta = rng.uniform(0.05, 0.95)
        overlap = np.real(np.vdot(psi.amps, w @ psi.amps))
        closed = 1 - 2 * beta * (1 - beta) * (1 - overlap)
        _, pi = residual_step(psi, ResidualLayer(w, beta))
        assert abs(pi - closed) < 1e-10
        assert pi >= beta_lower_bound(beta) - 1e-12


def test_beta_lower_bound_values():
    assert beta_lower_bound(0.5) == 0.0
    assert beta_lower_bound(0.0) == 1.0
    assert beta_lower_bound(1.0) == 1.0
    assert abs(beta_lower_bound(0.25) - 0.25) < 1e-15
    with pytest.raises(ValueError):
        beta_lower_bound(1.5)


def test_forward_identity_layers():
    rng = np.random.default_rng(3)
    psi = random_state(2, rng)
    layers = [ResidualLayer(np.eye(4, dtype=complex), 0.4) for _ in range(3)]
    out, pi_total, per_layer = resnet_forward(layers, psi)
    assert abs(pi_total - 1.0) < 1e-12
    assert np.allclose(out.amps, psi.amps)
    assert len(per_layer) == 3


def test_forward_single_layer_equals_step():
    rng = np.random.default_rng(4)
    psi = random_state(2, rng)
    w = haar_random_unitary(4, rng)
    layer = ResidualLayer(w, 0.7)
    a_state, a_pi = residual_step(psi, layer)
    b_state, b_pi, _ = resnet_forward([layer], psi)
    assert abs(a_pi - b_pi) < 1e-14
    assert np.allclose(a_state.amps, b_state.amps)


def test_forward_matches_joint_ancilla_simulation():
    # 2 layers at beta = 0.5 against a single 2-ancilla LCU whose branches
    # carry the accumulated products of the expanded operators
    rng = np.random.default_rng(5)
    n = 3
    psi = random_state(n, rng)
    w1 = haar_random_unitary(2 ** n, rng)
    w2 = haar_random_unitary(2 ** n, rng)
    layers = [ResidualLayer(w1, 0.5), ResidualLayer(w2, 0.5)]
    out, pi_total, _ = resnet_forward(layers, psi)
    # joint program: ancilla basis (a1 a2) selects W2^a1 W1^a2 uniformly
    qubits = tuple(range(n))
    selects = {
        1: DenseGate(qubits, w1),
        2: DenseGate(qubits, w2),
        3: DenseGate(qubits, w2 @ w1),
    }
    program = LcuProgram(ancilla_qubits=2, selects=selects,
                         prep_amplitudes=np.full(4, 0.5))
    joint = run_lcu(program, psi)
    assert abs(joint.pi_success - pi_total) < 1e-10
    assert np.allclose(joint.post_state.amps, out.amps, atol=1e-10)


def test_ansatz_layout_and_param_count():
    assert adjacent_pairs(4) == [(0, 1), (2, 3), (1, 2)]
    assert param_count(4, ("XY", "YX", "YZ"), 5) == 45
    assert param_count(2, ("XY",), 5) == 5
    with pytest.raises(ValueError):
        ParamCircuit(4, ("XY",), 1, np.zeros(5))
    circ = ParamCircuit(2, ("XY",), 1, np.array([0.0]))
    # zero angles give the identity
    assert np.allclose(gate_matrix(circuit_action(circ), 2), np.eye(4))


def test_generator_rotation_is_exp():
    h = pauli_string_matrix("XY")
    theta = 0.77
    expected = (np.cos(theta) * np.eye(4) + 1j * np.sin(theta) * h)
    assert np.allclose(generator_rotation("XY", theta), expected)
    # unitarity
    u = generator_rotation("YZ", -1.3)
    assert np.max(np.abs(u.conj().T @ u - np.eye(4))) < 1e-12


def test_loss_decomposition_identities():
    rng = np.random.default_rng(6)
    n = 3
    psi = random_state(n, rng)
    w2 = haar_random_unitary(2 ** n, rng)
    obs = pauli_string_matrix("YYI")
    dec = loss_decomposition(psi, np.eye(2 ** n, dtype=complex), w2, obs)
    assert abs(dec.l_bp - dec.l_no_bp) < 1e-12
    assert abs(dec.l_nonunitary - 2 * dec.l_no_bp) < 1e-12
    assert abs(dec.omega_prime_sq - 1.0) < 1e-12
    dec = loss_decomposition(psi, -np.eye(2 ** n, dtype=complex), w2, obs)
    assert abs(dec.l_nonunitary + 2 * dec.l_no_bp) < 1e-12
    assert dec.omega_prime_sq < 1e-14
    assert np.isnan(dec.total_normalized)


def test_loss_decomposition_matches_full_simulation():
    rng = np.random.default_rng(7)
    n = 4
    obs = pauli_string_matrix("YY" + "I" * (n - 2))
    for _ in range(20):
        psi = random_state(n, rng)
        w1 = haar_random_unitary(2 ** n, rng)
        w2 = haar_random_unitary(2 ** n, rng)
        dec = loss_decomposition(psi, w1, w2, obs)
        qubits = tuple(range(n))
        program = LcuProgram(
            ancilla_qubits=1,
            selects={0: DenseGate(qubits, w2), 1: DenseGate(qubits, w2 @ w1)},
            prep_amplitudes=np.array([1, 1]) / np.sqrt(2))
        outcome = run_lcu(program, psi)
        direct = np.real(np.vdot(outcome.post_state.amps,
                                 obs @ outcome.post_state.amps))
        assert abs(dec.total_normalized - direct) < 1e-9
        assert abs(dec.omega_prime_sq - outcome.pi_success) < 1e-10


def test_loss_gradient_analytic():
    def loss(theta):
        return float(np.cos(2 * theta[0]))

    assert abs(loss_gradient(loss, np.array([0.0]), 0)) < 1e-10
    assert abs(loss_gradient(loss, np.array([np.pi / 4]), 0) + 2.0) < 1e-5


def test_loss_gradient_on_circuit_expectation():
    rng = np.random.default_rng(8)
    n = 2
    psi0 = prepare_basis_state(n, 0)
    obs = pauli_string_matrix("YY")

    def loss(theta):
        circ = ParamCircuit(n, ("XY",), 2, theta)
        out = apply_to_array(psi0.amps, n, circuit_action(circ))
        return float(np.real(np.vdot(out, obs @ out)))

    theta = rng.uniform(0, 2 * np.pi, param_count(n, ("XY",), 2))
    for index in range(theta.size):
        loss_gradient(loss, theta, index)  # asserts the internal FD agreement


def test_plateau_experiment_deterministic():
    config = PlateauConfig(n_list=(2,), samples=50, sublayers_w1=2,
                           sublayers_w2=2, seed=13, residual=False)
    a = plateau_experiment(config)
    b = plateau_experiment(config)
    assert a == b
    assert a[2]["grad_variance"] > 0


def test_plateau_residual_with_identity_w1_collapses():
    # W1 = identity circuit (zero generator angle contributions): variance of
    # the residual model equals the W2-only model variance
    config = PlateauConfig(n_list=(2,), samples=50, sublayers_w1=1,
                           sublayers_w2=2, generators_w1=("XY",), seed=17)

    base = plateau_experiment(config)

    # monkey-style: rerun with residual but forcing theta1 = 0 is not a
    # config knob, so check the algebra directly instead
    rng = np.random.default_rng(17)
    n = 2
    obs = pauli_string_matrix("YY")
    psi0 = prepare_basis_state(n, 0)
    theta2 = rng.uniform(0, 2 * np.pi, param_count(n, ("XY",), 2))
    w2 = circuit_action(ParamCircuit(n, ("XY",), 2, theta2))
    dec = loss_decomposition(psi0, np.eye(4, dtype=complex), w2, obs)
    out = apply_to_array(psi0.amps, n, w2)
    direct = float(np.real(np.vdot(out, obs @ out)))
    assert abs(dec.total_normalized - direct) < 1e-10
    assert base[2]["grad_variance"] > 0


def test_ensemble_structure_depths():
    for num_layers in (1, 2, 3):
        layers, w0 = build_uniform_ensemble(num_layers, haar_sublayer_factory(2),
                                            seed=23)
        terms = expand_ensemble(layers, w0)
        assert len(terms) == 2 ** num_layers
        depths = sorted(depth for _, depth, _ in terms)
        assert depths == list(range(1, 2 ** num_layers + 1))


def test_ensemble_expansion_matches_forward():
    rng = np.random.default_rng(29)
    n = 2
    for num_layers in (1, 2, 3):
        for beta in (0.5, 0.3):
            layers, w0 = build_uniform_ensemble(
                num_layers, haar_sublayer_factory(n), seed=31, beta=beta)
            terms = expand_ensemble(layers, w0)
            effective = sum(coeff * matrix for coeff, _, matrix in terms)
            psi = random_state(n, rng)
            expected = effective @ psi.amps
            norm = np.linalg.norm(expected)
            out, pi_total, _ = resnet_forward(
                layers, Statevector(w0 @ psi.amps))
            assert abs(pi_total - norm ** 2) < 1e-9
            assert np.allclose(out.amps, expected / norm, atol=1e-9)


def test_expected_attempts_limits():
    assert abs(ensemble_expected_attempts(2, 1 - 1e-9, 2, seed=1) - 1.0) < 1e-6

    layers = [ResidualLayer(np.eye(4, dtype=complex), 0.5) for _ in range(3)]
    _, pi_total, _ = resnet_forward(layers, prepare_basis_state(2, 0))
    assert abs(pi_total - 1.0) < 1e-12


def test_expected_attempts_beta_sweep_seed11():
    betas = [0.5, 0.6, 0.7, 0.8, 0.9]
    attempts = [ensemble_expected_attempts(3, b, 3, seed=11) for b in betas]
    bound = [1.0 / np.prod([beta_lower_bound(b)] * 3) if beta_lower_bound(b) > 0
             else np.inf for b in betas]
    for att, bd in zip(attempts, bound):
        assert att >= 1.0 - 1e-12
        assert att <= bd + 1e-9
    # attempts shrink as beta moves away from 1/2; allow one inversion
    inversions = sum(1 for a, b in zip(attempts, attempts[1:]) if b > a + 1e-12)
    assert inversions <= 1


def test_input_skip_single_layer():
    rng = np.random.default_rng(33)
    psi = random_state(2, rng)
    w = haar_random_unitary(4, rng)
    out, pi = input_skip_forward(InputSkipSpec((w,), np.array([1.0])), psi)
    assert abs(pi - 1.0) < 1e-12
    assert np.allclose(out.amps, w @ psi.amps)


def test_input_skip_two_layer_frozen():
    spec = InputSkipSpec((X, np.eye(2, dtype=complex)),
                         np.array([1, 1]) / np.sqrt(2))
    out, pi = input_skip_forward(spec, prepare_basis_state(1, 0))
    assert abs(pi - 0.5) < 1e-12
    assert np.allclose(out.amps, np.array([1, 1]) / np.sqrt(2))


def test_input_skip_matches_direct_summation():
    rng = np.random.default_rng(37)
    for num_layers in (2, 3, 4):
        n = 2
        ws = [haar_random_unitary(2 ** n, rng) for _ in range(num_layers)]
        gammas = rng.standard_normal(num_layers) + 1j * rng.standard_normal(num_layers)
        gammas /= np.linalg.norm(gammas)
        psi = random_state(n, rng)
        spec = InputSkipSpec(tuple(ws), gammas)
        out, pi = input_skip_forward(spec, psi)
        expected = np.zeros(2 ** n, dtype=complex)
        for f in range(num_layers):
            tail = np.eye(2 ** n, dtype=complex)
            for l in range(f, num_layers):
                tail = ws[l] @ tail
            expected += abs(gammas[f]) ** 2 * (tail @ psi.amps)
        norm = np.linalg.norm(expected)
        assert abs(pi - norm ** 2) < 1e-10
        assert np.allclose(out.amps, expected / norm, atol=1e-10)


def test_input_skip_spec_validation():
    with pytest.raises(ValueError):
        InputSkipSpec((X,), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        InputSkipSpec((X, X), np.array([1.0, 1.0]))
