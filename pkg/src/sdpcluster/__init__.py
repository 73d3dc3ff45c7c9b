"""SDP-relaxed K-means clustering with exact-recovery certificates."""

__version__ = "0.1.0"

from ._validation import DegenerateBlockError, DegenerateDrawError
from .baselines import (
    brute_force_kmeans,
    lloyd,
    mle_k2_failure_witness,
    random_partition,
    spectral_init,
)
from .certificate import (
    Certificate,
    CertificateReport,
    build_Wn,
    construct_B,
    construct_alpha,
    construct_certificate,
    construct_lambda,
    estimate_noise_variance,
    verify_certificate,
)
from .datagen import (
    CenterSet,
    Dataset,
    MixtureSpec,
    comparison_bounds,
    cutoff_threshold,
    derive_seed,
    load_dataset,
    min_separation,
    pairwise_harmonic_min,
    place_centers,
    rng_from_seed,
    sample_dataset,
    save_dataset,
)
from .estimator import SDPKMeans
from .experiments import (
    PhaseGrid,
    PhaseRow,
    emit_csv,
    isotonic_fit,
    margin_statistics,
    read_csv,
    run_phase_diagram,
    write_manifest,
)
from .membership import (
    FeasibilityResiduals,
    Partition,
    canonical_labels,
    feasibility_residuals,
    kmeans_objective,
    load_membership,
    load_partition,
    partition_to_assignment,
    partition_to_membership,
    recovery_equal,
    save_membership,
    save_partition,
)
from .projections import (
    project_psd,
    project_psd_trace,
    project_rowsum_nonneg,
    simplex_project,
)
from .rounding import RoundingConfig, is_exact_recovery, round_membership
from .solver import (
    SolverConfig,
    SolverResult,
    build_affinity,
    dual_gap,
    lambda_uniqueness_bound,
    lambda_window,
    solve_regularized,
    solve_sdp,
)

__all__ = [
    "__version__",
    "DegenerateBlockError",
    "DegenerateDrawError",
    "CenterSet",
    "MixtureSpec",
    "Dataset",
    "place_centers",
    "sample_dataset",
    "min_separation",
    "pairwise_harmonic_min",
    "cutoff_threshold",
    "comparison_bounds",
    "derive_seed",
    "rng_from_seed",
    "save_dataset",
    "load_dataset",
    "Partition",
    "FeasibilityResiduals",
    "partition_to_membership",
    "partition_to_assignment",
    "canonical_labels",
    "recovery_equal",
    "feasibility_residuals",
    "kmeans_objective",
    "save_partition",
    "load_partition",
    "save_membership",
    "load_membership",
    "simplex_project",
    "project_rowsum_nonneg",
    "project_psd",
    "project_psd_trace",
    "SolverConfig",
    "SolverResult",
    "build_affinity",
    "solve_sdp",
    "solve_regularized",
    "lambda_window",
    "lambda_uniqueness_bound",
    "dual_gap",
    "Certificate",
    "CertificateReport",
    "construct_lambda",
    "construct_alpha",
    "construct_B",
    "build_Wn",
    "construct_certificate",
    "verify_certificate",
    "estimate_noise_variance",
    "RoundingConfig",
    "round_membership",
    "is_exact_recovery",
    "brute_force_kmeans",
    "spectral_init",
    "lloyd",
    "mle_k2_failure_witness",
    "random_partition",
    "SDPKMeans",
    "PhaseGrid",
    "PhaseRow",
    "run_phase_diagram",
    "margin_statistics",
    "emit_csv",
    "read_csv",
    "write_manifest",
    "isotonic_fit",
]
