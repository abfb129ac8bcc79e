//! Higher-order sensitivity of simple singular values of real rectangular
//! matrices.
//!
//! A rectangular `A` is embedded in the self-adjoint dilation
//! `[[0, A], [A^T, 0]]`, whose eigenvalues are `±sigma_i` plus zeros. The
//! eigenvalue expansion of that operator, built on the reduced resolvent at
//! `+sigma_k`, gives every Taylor coefficient of `sigma_k(A + x dA)` and so
//! every directional derivative `D^n sigma_k[dA, ..., dA]`. The first two
//! orders also have closed forms: the Jacobian `u_k v_k^T` and a
//! Kronecker-product Hessian.
//!
//! Singular values are indexed from 1 (`k = 1` is the largest) throughout.
//! `vec` is column-major.
//!
//! | module | contents |
//! |---|---|
//! | [`matrix`] | dense matrices, `vec`, Kronecker products, CSV I/O |
//! | [`svd`] | full SVD with complete bases, gap certificates |
//! | [`dilation`] | dilation eigensystem, blockwise operator action |
//! | [`resolvent`] | reduced resolvent as a sum of projections |
//! | [`expansion`] | n-th order coefficients and directional derivatives |
//! | [`closedform`] | Jacobian, dense and matrix-free Hessian |
//! | [`oracle`] | finite-difference and polynomial-fit ground truth |
//! | [`rng`] | portable seeded matrix generation |
//! | [`report`], [`cli`] | JSON reports and the command-line front end |

pub mod cli;
pub mod closedform;
pub mod dilation;
pub mod error;
pub mod expansion;
pub mod matrix;
pub mod oracle;
pub mod report;
pub mod resolvent;
pub mod rng;
pub mod svd;

pub use closedform::{
    hessian, hessian_from_polarization, hessian_quadratic_form, jacobian, HessianMatrix,
    JacobianMatrix,
};
pub use dilation::{apply_direction, build_dilation_spectrum, BlockVector, DilationSpectrum};
pub use error::{Error, Result};
pub use expansion::{
    directional_derivative, enumerate_compositions, sigma_order_n, Composition, ExpansionResult,
    PerturbationFamily,
};
pub use matrix::{kron, RealMatrix};
pub use oracle::{
    fd_directional, polyfit_directional, polyfit_extrapolated_directional, track_branch,
    BranchTracker, OracleEstimate,
};
pub use resolvent::{apply_reduced_resolvent, ReducedResolvent};
pub use rng::{random_matrix, Distribution, MatrixRng};
pub use svd::{full_svd, FullSvd, GapCertificate, Tolerances};
