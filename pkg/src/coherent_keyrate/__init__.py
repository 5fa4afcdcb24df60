"""Coherence-based key rates for BB84-type QKD with fine-grained statistics."""

from .coherence import (
    binary_entropy,
    quantum_relative_entropy,
    rel_entropy_coherence,
    shannon_entropy,
    von_neumann_entropy,
)
from .entanglement import (
    BasisSearchConfig,
    concurrence,
    devetak_winter_privacy,
    entanglement_of_formation,
    hashing_bound,
    max_keyrate_over_bases,
)
from .errors import *  # noqa: F401,F403
from .finegrained import (
    FineGrainedStats,
    Problem1Solution,
    bb84_opt_keyrate,
    lemma2_closed_form,
    solve_problem1,
    sixstate_opt_keyrate,
    symmetrize,
    tau_matrix,
)
from .keyrate import (
    BellProbs,
    KeyRateReport,
    bb84_keyrate,
    bb84_worstcase_state,
    error_rates,
    keyrate_of_state,
    sixstate_keyrate,
)
from .mismatch import (
    DetectorModel,
    ObservedDiag,
    discard_keyrate_k1,
    koashi_keyrate_k2,
    mismatch_keyrate,
    mismatch_pipeline,
)
from .qecsim import (
    DEFAULT_HASHING,
    HashingMatrix,
    KeyDistribution,
    classical_ec_run,
    ec_cost,
    uncorrectable_probability,
    virtual_qec_run,
)
from .qstate import (
    Basis,
    TwoQubitState,
    bell_diagonal,
    make_state,
    parity_projectors,
    partial_dephase,
    random_state,
    read_state_file,
    write_state_file,
)
from .svgplot import render_svg
from .sweeps import SweepResult, SweepSpec, format_csv, parse_csv, sweep_alpha, sweep_mismatch

__version__ = "0.1.0"
