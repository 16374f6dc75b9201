//! Inputs shared by the benchmarks.

use cauchy_core::experiments::{apply_perturbation, PerturbationModel};
use cauchy_core::{cauchy_build, interlaced_points, DenseMatrix, PerturbationKind};

/// The Example 1 matrix: interlaced Cauchy points with multiplicative
/// noise of size `delta`.
pub fn example_matrix(n: usize, delta: f64) -> DenseMatrix {
    let c = cauchy_build(&interlaced_points(n)).expect("interlaced points are separated");
    let m = PerturbationModel::new(PerturbationKind::Multiplicative, delta, 42)
        .expect("delta is valid");
    apply_perturbation(&c, &m).expect("perturbation keeps entries nonzero")
}
