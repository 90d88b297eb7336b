"""Statevector simulation and experiments for LCU-based non-unitary
quantum machine learning layers: residual circuits, amplitude-encoded image
pooling, and finite-group irreducible-representation projections.

The command line interface lives in ``lculab.cli`` and the figure helpers
in ``lculab.plots``; both stay out of the package namespace so importing
the library does not pull in matplotlib.
"""

from lculab.sim import (
    ControlledGate,
    DenseGate,
    GateAction,
    GateSequence,
    PermutationGate,
    PostSelectionImpossible,
    RegisterLayout,
    Statevector,
    adjoint_gate,
    apply_gate,
    expectation_value,
    gate_matrix,
    haar_random_unitary,
    inner_product,
    pauli_string_matrix,
    post_select_register,
    prepare_basis_state,
)
from lculab.lcu import (
    LcuOutcome,
    LcuProgram,
    apply_lcu_oracle,
    complete_unitary,
    run_lcu,
)
from lculab.resnet import (
    InputSkipSpec,
    LossDecomposition,
    ParamCircuit,
    PlateauConfig,
    ResidualLayer,
    beta_lower_bound,
    build_uniform_ensemble,
    circuit_action,
    ensemble_expected_attempts,
    expand_ensemble,
    haar_sublayer_factory,
    input_skip_forward,
    loss_decomposition,
    loss_gradient,
    plateau_experiment,
    residual_step,
    resnet_forward,
)
from lculab.pooling import (
    FilterSpec,
    ImageGrid,
    PoolingSpec,
    ShiftOp,
    amplitude_encode_image,
    apply_convolution,
    apply_pooling,
    build_conv_program,
    build_pool_program,
    classical_conv_oracle,
    classical_pool_oracle,
    downsample_image,
    embed_image,
    encoded_block,
    flag_discard,
    load_mnist_images,
    lower_decrement_circuit,
    lower_increment_circuit,
    mnist_probability_sweep,
    pool_control_counts,
    pool_image,
    pooling_success_probability,
    synthetic_digit_images,
)
from lculab.encodings import (
    Dataset,
    PointCloud,
    bloch_encode,
    bloch_product_state,
    iqp_encode,
    iqp_product_state,
    normalize_to_angle_range,
    rotate_cloud,
    rotation_matrix,
    rotation_su2,
    sample_shape_cloud,
    split_dataset,
)
from lculab.projections import (
    FiniteGroupData,
    ProjectionWeights,
    RepMap,
    amplification_weights,
    amplify_symmetric_subspace,
    apply_projector,
    build_projection_program,
    class_character_matrix,
    conjugacy_class_program,
    det_normalized_unitary,
    parse_group_file,
    permutation_symmetrize,
    projection_success_probability,
    projected_weight_average,
    projector_matrix,
    qudit_permutation_rep,
    rotational_invariance_experiment,
    schur_singlet_basis,
    single_projection_weights,
    subspace_weights,
    symmetric_group,
)
from lculab.kernel import (
    AlphaSweepConfig,
    KernelMatrix,
    SvmResult,
    alpha_sweep_experiment,
    compute_kernel,
    effective_dimension,
    svm_train_predict,
)

__all__ = [
    "AlphaSweepConfig",
    "ControlledGate",
    "Dataset",
    "DenseGate",
    "FilterSpec",
    "FiniteGroupData",
    "GateAction",
    "GateSequence",
    "ImageGrid",
    "InputSkipSpec",
    "KernelMatrix",
    "LcuOutcome",
    "LcuProgram",
    "LossDecomposition",
    "ParamCircuit",
    "PermutationGate",
    "PlateauConfig",
    "PointCloud",
    "PoolingSpec",
    "PostSelectionImpossible",
    "ProjectionWeights",
    "RegisterLayout",
    "RepMap",
    "ResidualLayer",
    "ShiftOp",
    "Statevector",
    "SvmResult",
    "adjoint_gate",
    "alpha_sweep_experiment",
    "amplification_weights",
    "amplify_symmetric_subspace",
    "amplitude_encode_image",
    "apply_convolution",
    "apply_gate",
    "apply_lcu_oracle",
    "apply_pooling",
    "apply_projector",
    "beta_lower_bound",
    "bloch_encode",
    "bloch_product_state",
    "build_conv_program",
    "build_pool_program",
    "build_projection_program",
    "build_uniform_ensemble",
    "circuit_action",
    "class_character_matrix",
    "classical_conv_oracle",
    "classical_pool_oracle",
    "complete_unitary",
    "compute_kernel",
    "conjugacy_class_program",
    "det_normalized_unitary",
    "downsample_image",
    "effective_dimension",
    "embed_image",
    "encoded_block",
    "ensemble_expected_attempts",
    "expand_ensemble",
    "expectation_value",
    "flag_discard",
    "gate_matrix",
    "haar_random_unitary",
    "haar_sublayer_factory",
    "inner_product",
    "input_skip_forward",
    "iqp_encode",
    "iqp_product_state",
    "load_mnist_images",
    "loss_decomposition",
    "loss_gradient",
    "lower_decrement_circuit",
    "lower_increment_circuit",
    "mnist_probability_sweep",
    "normalize_to_angle_range",
    "parse_group_file",
    "pauli_string_matrix",
    "permutation_symmetrize",
    "plateau_experiment",
    "pool_control_counts",
    "pool_image",
    "pooling_success_probability",
    "post_select_register",
    "prepare_basis_state",
    "projected_weight_average",
    "projection_success_probability",
    "projector_matrix",
    "qudit_permutation_rep",
    "residual_step",
    "resnet_forward",
    "rotate_cloud",
    "rotation_matrix",
    "rotation_su2",
    "rotational_invariance_experiment",
    "run_lcu",
    "sample_shape_cloud",
    "schur_singlet_basis",
    "single_projection_weights",
    "split_dataset",
    "subspace_weights",
    "svm_train_predict",
    "symmetric_group",
    "synthetic_digit_images",
]

__version__ = "0.1.0"
