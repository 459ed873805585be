"""Channel simulation tools for quantum metrology.

Qubit channels and their teleportation simulation, quantum Fisher
information, Gaussian channels with finite-energy resources, a Fock-space
oracle and a Monte Carlo estimation harness.
"""

from .dv_channels import (
    CorrectionTable,
    KrausChannel,
    apply_channel,
    choi,
    correction_table,
    make_channel,
    verify_tele_covariance,
)
from .estimation import ExperimentResult, run_block_experiment, sample_povm, sql_scaling_fit
from .fock import FockState, fock_state, fock_thermal_loss, oracle_fidelity
from .gaussian import (
    GaussianChannel,
    GaussianState,
    bk_error_lower_bound,
    bk_teleport_channel,
    finite_resource,
    gaussian_fidelity,
    gaussian_family,
    qfi_choi_limit,
    qfi_suboptimal,
)
from .linalg import partial_trace, trace_distance, uhlmann_fidelity
from .metrology import (
    QfiResult,
    closed_form_dv_qfi,
    dv_family,
    qcrb,
    qfi_fidelity,
    qfi_sld,
    sld,
    stretching_bound,
)
from .teleport import simulate_and_compare, teleport

__version__ = "0.1.0"
