"""Suite-level acceptance checks, one test per numbered criterion.

Each criterion gets a single pass/fail line in the output so the whole
run reads as a checklist: oracle equivalences, closed-form probability
formulas, circuit lowering, and the qualitative shape of every
experiment, all at frozen seeds and pinned tolerances.
"""

import math

import numpy as np
import pytest

from lculab.kernel import AlphaSweepConfig, alpha_sweep_experiment
from lculab.lcu import LcuProgram, apply_lcu_oracle, run_lcu
from lculab.pooling import (
    ImageGrid,
    PoolingSpec,
    encoded_block,
    lower_decrement_circuit,
    lower_increment_circuit,
    mnist_probability_sweep,
    pool_control_counts,
    pool_image,
    pooling_success_probability,
    synthetic_digit_images,
)
from lculab.projections import (
    ProjectionWeights,
    apply_projector,
    build_projection_program,
    class_character_matrix,
    conjugacy_class_program,
    det_normalized_unitary,
    projection_success_probability,
    projector_matrix,
    qudit_permutation_rep,
    rotational_invariance_experiment,
    schur_singlet_basis,
    subspace_weights,
    symmetric_group,
)
from lculab.resnet import (
    PlateauConfig,
    ResidualLayer,
    beta_lower_bound,
    build_uniform_ensemble,
    ensemble_expected_attempts,
    expand_ensemble,
    haar_sublayer_factory,
    loss_decomposition,
    plateau_experiment,
    resnet_forward,
    residual_step,
)
from lculab.sim import (
    DenseGate,
    GateSequence,
    PostSelectionImpossible,
    Statevector,
    apply_gate,
    expectation_value,
    gate_matrix,
    haar_random_unitary,
)


def _report(number, passed, detail):
    print(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}: {detail}")
    assert passed, f"criterion {number}: {detail}"


def _random_state(rng, dim):
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return Statevector(amps / np.linalg.norm(amps))


# ---------------------------------------------------------------------------
# combination engine


def test_criterion_01_lcu_oracle_equivalence():
    rng = np.random.default_rng(101)
    state_err = 0.0
    prob_err = 0.0
    for case in range(200):
        k = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        selects = {}
        for j in range(2 ** k):
            if rng.random() < 0.25:
                continue  # identity branch
            m = int(rng.integers(1, n + 1))
            qubits = tuple(int(q) for q in rng.choice(n, m, replace=False))
            selects[j] = DenseGate(qubits, haar_random_unitary(2 ** m, rng))
        amps = rng.standard_normal(2 ** k) + 1j * rng.standard_normal(2 ** k)
        program = LcuProgram(ancilla_qubits=k, selects=selects,
                             prep_amplitudes=amps / np.linalg.norm(amps))
        target = _random_state(rng, 2 ** n)
        direct, norm_sq = apply_lcu_oracle(program, target)
        try:
            outcome = run_lcu(program, target)
        except PostSelectionImpossible:
            assert norm_sq < 1e-13
            continue
        state_err = max(state_err, float(np.max(np.abs(
            outcome.post_state.amps - direct / np.sqrt(norm_sq)))))
        prob_err = max(prob_err, abs(outcome.pi_success - norm_sq))
    _report(1, state_err < 1e-10 and prob_err < 1e-10,
            f"200 random programs: state error {state_err:.2e}, "
            f"probability error {prob_err:.2e} (tolerance 1e-10)")


# ---------------------------------------------------------------------------
# residual layers


def test_criterion_02_residual_probability_formula():
    rng = np.random.default_rng(202)
    formula_err = 0.0
    bound_ok = True
    for case in range(100):
        n = int(rng.integers(1, 4))
        beta = float(rng.uniform(0.05, 0.95))
        w = haar_random_unitary(2 ** n, rng)
        psi = _random_state(rng, 2 ** n)
        _, pi = residual_step(psi, ResidualLayer(w, beta))
        overlap = float(np.real(np.vdot(psi.amps, w @ psi.amps)))
        closed = 1.0 - 2.0 * beta * (1.0 - beta) * (1.0 - overlap)
        formula_err = max(formula_err, abs(pi - closed))
        bound_ok = bound_ok and pi >= beta_lower_bound(beta) - 1e-12
    _report(2, formula_err < 1e-10 and bound_ok,
            f"100 cases: closed-form error {formula_err:.2e}, "
            f"lower bound 1-4b(1-b) respected: {bound_ok}")


def test_criterion_03_loss_decomposition_identity():
    rng = np.random.default_rng(303)
    n = 4
    worst = 0.0
    for case in range(50):
        w1 = haar_random_unitary(2 ** n, rng)
        w2 = haar_random_unitary(2 ** n, rng)
        herm = rng.standard_normal((2 ** n, 2 ** n)) \
            + 1j * rng.standard_normal((2 ** n, 2 ** n))
        obs = (herm + herm.conj().T) / 2.0
        psi = _random_state(rng, 2 ** n)
        decomp = loss_decomposition(psi, w1, w2, obs)
        mid, _ = residual_step(psi, ResidualLayer(w1, 0.5))
        final = apply_gate(mid, DenseGate(tuple(range(n)), w2))
        worst = max(worst, abs(decomp.total_normalized
                               - expectation_value(final, obs)))
    _report(3, worst < 1e-9,
            f"50 cases at n=4: decomposition vs circuit expectation "
            f"error {worst:.2e} (tolerance 1e-9)")


@pytest.fixture(scope="module")
def plateau_runs():
    kwargs = dict(n_list=(2, 4, 6, 8), samples=500, seed=7)
    residual = plateau_experiment(PlateauConfig(residual=True, **kwargs))
    plain = plateau_experiment(PlateauConfig(residual=False, **kwargs))
    return residual, plain


def _ln_slope(results, key):
    ns = np.array(sorted(results), dtype=float)
    values = np.log([results[int(n)][key] for n in ns])
    return float(np.polyfit(ns, values, 1)[0])


def test_criterion_04_plateau_mitigation_slope_gap(plateau_runs):
    # The 0.3/qubit separation is calibrated for deep blocks: with 25
    # sublayers per block this protocol measures a gap above 0.4. At the
    # 5-sublayer scale used here the gap sits near 0.25 for every seed
    # tried (0 through 9), so this check is expected to fail; the
    # threshold is kept as stated rather than tuned to the measurement.
    residual, plain = plateau_runs
    slope_residual = _ln_slope(residual, "grad_variance")
    slope_plain = _ln_slope(plain, "grad_variance")
    gap = slope_residual - slope_plain
    _report(4, gap >= 0.3,
            f"ln-variance slopes: no-residual {slope_plain:+.4f}, "
            f"residual {slope_residual:+.4f}, gap {gap:+.4f} "
            f"(required >= +0.3)")


def test_criterion_05_nonunitary_term_decays(plateau_runs):
    residual, _ = plateau_runs
    slope = _ln_slope(residual, "mean_abs_nonunitary")
    _report(5, slope < 0.0,
            f"mean |non-unitary term| fitted ln-slope {slope:+.4f} "
            f"(required negative)")


def test_criterion_06_ensemble_expansion():
    worst = 0.0
    structure_ok = True
    for num_layers in (1, 2, 3):
        layers, w0 = build_uniform_ensemble(
            num_layers, haar_sublayer_factory(2), seed=13)
        terms = expand_ensemble(layers, w0)
        depths = sorted(depth for _, depth, _ in terms)
        structure_ok = (structure_ok
                        and len(terms) == 2 ** num_layers
                        and depths == list(range(1, 2 ** num_layers + 1)))
        dense = sum(coeff * matrix for coeff, _, matrix in terms)
        effective = np.zeros((4, 4), dtype=complex)
        for col in range(4):
            basis = np.zeros(4, dtype=complex)
            basis[col] = 1.0
            out, pi_total, _ = resnet_forward(layers, Statevector(w0 @ basis))
            effective[:, col] = out.amps * np.sqrt(pi_total)
        worst = max(worst, float(np.max(np.abs(dense - effective))))
    _report(6, structure_ok and worst < 1e-9,
            f"L=1..3: 2**L terms with depths 1..2**L: {structure_ok}; "
            f"expanded operator vs forward pass error {worst:.2e}")


def test_criterion_07_expected_attempts_peak_at_half():
    betas = (0.5, 0.6, 0.7, 0.8, 0.9)
    ok = True
    rows = []
    for num_layers in (1, 2, 3):
        attempts = [ensemble_expected_attempts(num_layers, beta, 3, seed=4)
                    for beta in betas]
        inversions = sum(attempts[i + 1] > attempts[i] + 1e-12
                         for i in range(len(attempts) - 1))
        ok = (ok and attempts[0] >= max(attempts[1:]) - 1e-12
              and inversions <= 1)
        rows.append(f"L={num_layers} attempts "
                    + "/".join(f"{a:.3f}" for a in attempts))
    _report(7, ok, "beta=0.5 costs the most and attempts fall with "
            f"|beta-0.5| (<=1 inversion): {'; '.join(rows)}")


# ---------------------------------------------------------------------------
# pooling


def test_criterion_08_pooling_oracle_equivalence():
    rng = np.random.default_rng(808)
    combos = [(side, d, mode)
              for side in (8, 16) for d in (2, 3, 4)
              for mode in ("periodic", "zero_padded")]
    state_err = 0.0
    prob_err = 0.0
    for case in range(50):
        side, d, mode = combos[case % len(combos)]
        img = ImageGrid(rng.uniform(0.0, 1.0, size=(side, side)))
        spec = PoolingSpec(d, mode)
        outcome, reference = pool_image(img, spec)
        if mode == "periodic":
            got = outcome.post_state.amps
        else:
            got = encoded_block(outcome.post_state,
                                reference.n_side).reshape(-1)
        want = reference.pixels.reshape(-1)
        state_err = max(state_err, float(np.max(np.abs(
            got / np.linalg.norm(got) - want / np.linalg.norm(want)))))
        prob_err = max(prob_err, abs(
            outcome.pi_success - pooling_success_probability(img, spec)))
    uniform = ImageGrid(np.full((8, 8), 0.7))
    outcome, _ = pool_image(uniform, PoolingSpec(3))
    uniform_err = abs(outcome.pi_success - 1.0)
    _report(8, state_err < 1e-10 and prob_err < 1e-10 and uniform_err < 1e-12,
            f"50 images: amplitude error {state_err:.2e}, probability "
            f"error {prob_err:.2e}; uniform image success deviates by "
            f"{uniform_err:.2e}")


def test_criterion_09_circuit_lowering():
    exact = True
    for width in range(1, 7):
        dim = 2 ** width
        inc = gate_matrix(GateSequence(lower_increment_circuit(width)), width)
        dec = gate_matrix(GateSequence(lower_decrement_circuit(width)), width)
        want_inc = np.zeros((dim, dim), dtype=complex)
        want_inc[(np.arange(dim) + 1) % dim, np.arange(dim)] = 1.0
        want_dec = np.zeros((dim, dim), dtype=complex)
        want_dec[(np.arange(dim) - 1) % dim, np.arange(dim)] = 1.0
        exact = (exact and np.array_equal(inc, want_inc)
                 and np.array_equal(dec, want_dec))
    counts_ok = all(
        pool_control_counts(d)["controlled_per_axis"]
        == (math.ceil(math.log2(d)) if d > 1 else 0)
        for d in range(1, 9))
    baseline_ok = all(pool_control_counts(d)["multi_controlled_baseline"]
                      == d * d for d in range(1, 9))
    _report(9, exact and counts_ok and baseline_ok,
            f"increment/decrement cascades exact up to width 6: {exact}; "
            f"per-axis controlled count is ceil(log2 D) vs D**2 baseline: "
            f"{counts_ok and baseline_ok}")


def test_criterion_10_image_probability_sweeps():
    images = synthetic_digit_images(100, seed=0)
    rows = mnist_probability_sweep(images, d_values=range(2, 9),
                                   n_values=(8, 16, 28), d_for_n=3)
    d_means = [row[2] for row in rows if row[0] == "D"]
    n_rows = [row for row in rows if row[0] == "N"]
    n_means = [row[2] for row in n_rows]
    non_increasing = all(d_means[i + 1] <= d_means[i] + 1e-12
                         for i in range(len(d_means) - 1))
    decrements = [d_means[i] - d_means[i + 1]
                  for i in range(len(d_means) - 1)]
    leveling = decrements[-1] < decrements[0]
    diffs = np.diff(n_means)
    sign_change = bool(np.any(diffs > 0) and np.any(diffs < 0))
    slope = float(np.polyfit([row[1] for row in n_rows], n_means, 1)[0])
    noise = max(row[3] for row in n_rows) / math.sqrt(100)
    n_ok = sign_change or abs(slope) < noise
    _report(10, non_increasing and leveling and n_ok,
            f"window sweep means fall {d_means[0]:.3f}->{d_means[-1]:.3f} "
            f"and level off ({decrements[0]:.4f}->{decrements[-1]:.4f}); "
            f"size sweep non-monotone (sign change {sign_change}, "
            f"slope {slope:+.5f} vs noise {noise:.5f})")


# ---------------------------------------------------------------------------
# subspace projections


def test_criterion_11_projector_algebra():
    algebra_err = 0.0
    char_err = 0.0
    for degree in (2, 3, 4):
        group = symmetric_group(degree)
        rep = qudit_permutation_rep(degree)
        dim = 2 ** degree
        projectors = [projector_matrix(rep, r)
                      for r in range(group.n_classes)]
        total = np.zeros((dim, dim), dtype=complex)
        for r, p in enumerate(projectors):
            algebra_err = max(algebra_err, float(np.max(np.abs(p @ p - p))))
            for s in range(r + 1, group.n_classes):
                algebra_err = max(algebra_err, float(np.max(np.abs(
                    p @ projectors[s]))))
            total += p
        algebra_err = max(algebra_err, float(np.max(np.abs(
            total - np.eye(dim)))))
        sizes = group.class_sizes()
        gram = (group.characters * sizes) @ group.characters.conj().T \
            / group.order
        char_err = max(char_err, float(np.max(np.abs(
            gram - np.eye(group.n_classes)))))
    root6 = np.sqrt(6.0)
    want = np.array([
        [1.0, 2.0, 1.0, 0.0],
        [np.sqrt(3.0), 0.0, -np.sqrt(3.0), 0.0],
        [np.sqrt(2.0), -np.sqrt(2.0), np.sqrt(2.0), 0.0],
        [0.0, 0.0, 0.0, root6],
    ]) / root6
    table_err = float(np.max(np.abs(
        class_character_matrix(symmetric_group(3)) - want)))
    _report(11, algebra_err < 1e-10 and char_err < 1e-12
            and table_err < 1e-12,
            f"S2/S3/S4 projector algebra error {algebra_err:.2e}, "
            f"character orthogonality error {char_err:.2e}, S3 class "
            f"matrix error {table_err:.2e}")


def test_criterion_12_program_vs_direct_projection():
    state_err = 0.0
    class_err = 0.0
    for degree in (2, 3, 4):
        group = symmetric_group(degree)
        rep = qudit_permutation_rep(degree)
        for case in range(50):
            rng = np.random.default_rng((1212, degree, case))
            a = rng.uniform(0.25, 1.0, group.n_classes)
            if case % 2:
                a = a * np.exp(2j * np.pi * rng.random(group.n_classes))
            weights = ProjectionWeights(a)
            psi = _random_state(rng, 2 ** degree)
            direct = np.zeros_like(psi.amps)
            for r in range(group.n_classes):
                direct += weights.a[r] * apply_projector(rep, r, psi)[0]
            direct /= np.linalg.norm(direct)
            element = run_lcu(build_projection_program(rep, weights), psi)
            state_err = max(state_err, float(np.max(np.abs(
                element.post_state.amps - direct))))
            conjugacy = run_lcu(conjugacy_class_program(rep, weights), psi)
            class_err = max(class_err, float(np.max(np.abs(
                conjugacy.post_state.amps - direct))))
    _report(12, state_err < 1e-10 and class_err < 1e-10,
            f"50 cases per group: element-program error {state_err:.2e}, "
            f"class-program error {class_err:.2e} (tolerance 1e-10)")


def test_criterion_13_rotational_invariance():
    rows = rotational_invariance_experiment(50, 20, seed=0)
    table = np.array([row[1:] for row in rows]).reshape(50, 20, 3)
    invariant_err = float(np.max(np.abs(table[:, :, 1] - 1.0)))
    assert abs(table[0, -1, 0] - np.pi) < 1e-12
    raw_at_pi = float(np.max(table[:, -1, 2]))
    _report(13, invariant_err < 1e-8 and raw_at_pi < 0.9,
            f"50 clouds x 20 angles: invariant overlap deviates by "
            f"{invariant_err:.2e}; raw overlap at half-turn at most "
            f"{raw_at_pi:.4f} (required < 0.9)")


def test_criterion_14_alpha_sweep_shape():
    rows = alpha_sweep_experiment(AlphaSweepConfig())
    alphas = [row[0] for row in rows]
    accs = [row[1] for row in rows]
    dims = [row[3] for row in rows]
    assert alphas[0] == 0.0 and alphas[-1] == 1.0
    dims_ok = all(dims[i + 1] <= dims[i] + 1.0 + 1e-9
                  for i in range(len(dims) - 1))
    interior = max(acc for alpha, acc in zip(alphas, accs)
                   if 0.0 < alpha < 1.0)
    endpoints = max(accs[0], accs[-1])
    _report(14, dims_ok and interior >= endpoints,
            f"effective dimension {dims[0]:.1f}->{dims[-1]:.1f} "
            f"non-increasing (+-1): {dims_ok}; best interior accuracy "
            f"{interior:.3f} vs endpoints {endpoints:.3f}")


def test_criterion_15_schur_singlet_basis():
    basis = schur_singlet_basis()
    gram_err = float(np.max(np.abs(
        basis.conj() @ basis.T - np.eye(2))))
    rng = np.random.default_rng(15)
    invariance_err = 0.0
    for _ in range(20):
        u = det_normalized_unitary(haar_random_unitary(2, rng))
        u4 = np.kron(np.kron(u, u), np.kron(u, u))
        invariance_err = max(invariance_err, float(np.max(np.abs(
            basis @ u4.T - basis))))
    rep = qudit_permutation_rep(4)
    span_err = 0.0
    for _ in range(20):
        psi = _random_state(rng, 16)
        projected, _ = apply_projector(rep, 2, psi)
        residue = projected - basis.T @ (basis.conj() @ projected)
        span_err = max(span_err, float(np.linalg.norm(residue)))
    _report(15, gram_err < 1e-12 and invariance_err < 1e-10
            and span_err < 1e-10,
            f"basis orthonormal to {gram_err:.2e}; 20 collective "
            f"rotations move it by {invariance_err:.2e}; third-irreducible "
            f"projections leave the span by {span_err:.2e}")
