"""Renormalization of generalized interval exchange maps on the circle:
induction, transfer cocycles, piecewise-affine models, and smooth-conjugacy
diagnostics."""

from .affine import (
    AffineIem,
    affine_model_lengths,
    build_affine,
    d_p,
    extract_slope_vector,
    hilbert_metric,
    invariant_masses,
    normalization_check,
    slope_update,
    strong_model,
    t_matrix,
    transport_residuals,
    weak_model_family,
)
from .builtin_maps import BUILTIN_MAPS, builtin
from .branches import (
    AffineBranch,
    CircleDiffeo,
    MoebiusBranch,
    PerturbedAffineBranch,
    compose,
)
from .cocycle import (
    central_space,
    check_intertwine,
    cocycle_inverse,
    cocycle_product,
    genus,
    hyperbolicity_probe,
    is_genus_one,
    omega_matrix,
    periodic_central_space,
    split_vector,
    stable_space,
    theta_inverse,
    theta_matrix,
)
from .combinatorics import (
    CombinatorialData,
    CombinatoricsSequence,
    generate_k_bounded,
    is_k_bounded,
    rauzy_class,
    rauzy_move,
    validate,
)
from .errors import (
    CombinatoricsMismatch,
    ConnectionSuspected,
    ConvergenceError,
    GietError,
    HypothesisError,
    MalformedCombinatorics,
    PrecisionExhausted,
    ReducibleCombinatorics,
)
from .giem import (
    Giem,
    break_at_zero,
    break_invariance_check,
    break_points,
    build_giem,
    c2_distance,
    conjugate,
    eval_Rn,
    eval_rn,
    initial_state,
    mean_log_derivative,
    mean_nonlinearity,
    renormalize,
    rv_step,
    zoom_branch,
)
from .rates import RateEstimate, RateFit, rate_fit
from .rigidity import (
    build_conjugacy,
    c8_estimate,
    dh_check,
    distortion_ratios,
    entry_time,
    matched_points,
    psi_naive,
    psi_series,
    theorem_checks,
)

__version__ = "0.1.0"
