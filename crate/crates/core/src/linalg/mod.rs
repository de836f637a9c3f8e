//! Dense complex linear algebra: the matrix type, a cyclic Jacobi
//! Hermitian eigensolver and the unitary eigendecomposition built on it.

pub mod jacobi;
pub mod matrix;
pub mod tridiagonal;
pub mod unitary;

pub use jacobi::{hermitian_eig, HermitianEigen, DEFAULT_JACOBI_TOL};
pub use matrix::{inner, norm_sqr, ComplexMatrix, C64};
pub use tridiagonal::hermitian_eig_tridiagonal;
pub use unitary::{
    circular_distance, eigenspace_projection_probability, unitary_eig, unitary_eig_with, wrap_phase,
    ClusterProbability, HermitianSolver, PhaseCluster, UnitaryEigOptions, UnitaryEigensystem, DEFAULT_CLUSTER_TOL,
    DEFAULT_RESIDUAL_GATE, DEFAULT_UNITARITY_TOL,
};
