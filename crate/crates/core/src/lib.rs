//! Multivariate functional calculus for commuting Hermitian matrix tuples and
//! numerical verification of Jensen-type trace inequalities.

pub mod calculus;
pub mod catalog;
pub mod error;
pub mod factory;
pub mod functionals;
pub mod lp;
pub mod matrix;
pub mod monotone;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod verifiers;

pub use calculus::{apply_multivariate, apply_univariate, partial_eval, ScalarFunction};
pub use error::{Error, Result};
pub use matrix::{commutator, psd_leq, HermitianMatrix, Interval};
pub use spectral::{
    compatible, is_abelian, joint_diagonalize, AbelianTuple, JointSpectralDecomposition,
};
