"""Low-rank tensor recovery by trace-norm and augmented trace-norm minimization."""

from .tensor_core import (
    frobenius_norm,
    inner,
    mode_n_product,
    refold,
    relative_error,
    unfold,
    vec,
)
from .linalg import null_space_basis, random_orthonormal, spectral_norm, svd
from .multilinear import Hosvd, hosvd, n_rank, random_low_rank, truncate_hosvd
from .prox import Objective, augmented_prox, objective_value, svt, tensor_trace_norm
from .operators import SensingOperator, gaussian_operator, mask_operator, random_mask
from .solvers import SolverConfig, SolverReport, solve_completion, solve_equality, solve_noisy
from .guarantees import (
    CertificateReport,
    alpha_lower_bound,
    check_nsp,
    check_nsp_augmented,
    check_rip_uniqueness,
    check_ssp_sufficient,
    estimate_rip,
    estimate_ssp,
    rip_threshold_augmented,
    rip_threshold_plain,
    theta,
)

__version__ = "0.1.0"
