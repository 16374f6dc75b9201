//! Recovery of Cauchy points from exact and noise-perturbed Cauchy matrices.
//!
//! A matrix `C` is Cauchy when `C_ij = 1 / (x_i − y_j)`; equivalently, it has
//! no zero entries and its entrywise reciprocal lies in the subspace
//! `𝒟 = { x1ᵀ − 1yᵀ }`. The crate provides four recovery algorithms, the
//! Cauchyness measures `κ_F`, `β_F` and `σ₃` together with their certificates,
//! and the experiment harness used to compare the algorithms.
//!
//! ```
//! use cauchy_core::{alg2_recover, cauchy_build, check_cauchy_points, CauchyPoints};
//!
//! let points = CauchyPoints::new(vec![0.0, 1.0], vec![2.0, 3.0]).unwrap();
//! let c = cauchy_build(&points).unwrap();
//! let g = alg2_recover(&c).unwrap();
//! let rebuilt = cauchy_build(&check_cauchy_points(&g, 1e-12).unwrap()).unwrap();
//! assert!(rebuilt.sub(&c).norm_max() < 1e-14);
//! ```

pub mod diagnostics;
pub mod displacement;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod projectors;

pub use diagnostics::{
    a_posteriori_certificate, bordered_matrix, cur_certificate, kappa_f, kappa_max_oracle, measure,
    normalize_for_cur, sigma3_sandwich_check, APosterioriCertificate, CurPivot, DiagnosticsReport,
};
pub use displacement::{
    alg4_recover, beta_frobenius, beta_kappa_sandwich_check, build_normal_parts,
    displacement_apply, NormalEquationParts,
};
pub use error::{Error, Result};
pub use experiments::{
    interlaced_points, power_law_fit, run_recovery_sweep, run_timing, worst_case_matrix, Algorithm,
    ExperimentId, ExperimentRow, PerturbationKind, PerturbationModel,
};
pub use linalg::{
    hinv, norm_frobenius, norm_max, singular_values, solve_linear, DenseMatrix, RealVector,
};
pub use model::{
    cauchy_build, check_cauchy_points, delta, from_reciprocal_rep, normalize_generators,
    rep_norm_identity_check, to_reciprocal_rep, CauchyPoints, GeneratorPair, ReciprocalRep,
    SeparationFailure, DEFAULT_SEPARATION_TOL,
};
pub use projectors::{
    alg1_recover, alg2_recover, alg3_recover, apply_projector, bound_constants, mu_operator_norms,
    BoundConstants, ProjectorPreset, ProjectorSpec,
};
