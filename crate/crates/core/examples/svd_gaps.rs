//! Full SVD with complete bases, spectral gaps and the simplicity gate.
//!
//! Run with `cargo run --example svd_gaps`.

use svd_perturb::svd::{full_svd, orthogonality_residual, DEFAULT_GAP_TOL, DEFAULT_RANK_TOL};
use svd_perturb::{Distribution, MatrixRng, RealMatrix};

fn main() -> svd_perturb::Result<()> {
    let a = MatrixRng::new(1).matrix(4, 6, Distribution::Normal01)?;
    let svd = full_svd(&a, DEFAULT_RANK_TOL)?;
    println!("sigma = {:.6?}  (rank {})", svd.sigma(), svd.rank());
    println!(
        "orthogonality: U {:.1e}, V {:.1e}; reconstruction {:.1e}",
        orthogonality_residual(svd.u()),
        orthogonality_residual(svd.v()),
        svd.reconstruct()?.max_abs_diff(&a)?
    );
    for k in 1..=svd.rank() {
        let c = svd.gap_certificate(k, DEFAULT_GAP_TOL)?;
        println!(
            "k = {k}: min gap {:.4} (threshold {:.1e}), simple: {}",
            c.min_gap, c.threshold, c.simple
        );
    }

    // A repeated singular value is rejected before any derivative is formed.
    let twin = RealMatrix::diagonal(2, 3, &[1.0, 1.0])?;
    let svd = full_svd(&twin, DEFAULT_RANK_TOL)?;
    match svd.require_simple(1, DEFAULT_GAP_TOL) {
        Ok(_) => println!("unexpectedly simple"),
        Err(e) => println!("diag(1, 1): {e}"),
    }
    Ok(())
}
