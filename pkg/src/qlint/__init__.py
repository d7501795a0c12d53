"""Exact simulation lab for classical and quantum affinity testing of Boolean functions."""
from .boolean_core import (
    AnfPolynomial,
    TruthTable,
    WalshSpectrum,
    anf_to_truth_table,
    epsilon_far_from_affine,
    hamming_distance,
    make_affine,
    make_bent,
    make_linear,
    nonlinearity,
    normalized_walsh,
    plant_distance,
    random_function,
    truth_table_to_anf,
    walsh_transform,
)
from .quantum_sim import (
    MarkedOracle,
    QueryCounter,
    StateVector,
    angle_split,
    apply_marked_oracle,
    deutsch_jozsa_state,
    grover_iterate,
    measure,
    reflect_about,
)
from .testers import (
    ExactTheta,
    Fixed,
    PaperEpsilon,
    TestReport,
    Verdict,
    blr_test,
    dj_repetition_test,
    exact_algorithm2_error,
    exact_algorithm3_success,
    grover_test,
)
from .harness import ExperimentConfig, SweepResult, fit_exponent, run_sweep

__version__ = "0.1.0"
