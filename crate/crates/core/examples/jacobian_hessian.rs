//! Closed-form Jacobian and Hessian, and their agreement with the expansion.

use svd_perturb::closedform::{
    hessian, hessian_from_polarization, hessian_quadratic_form, jacobian,
};
use svd_perturb::svd::{full_svd, DEFAULT_GAP_TOL, DEFAULT_RANK_TOL};
use svd_perturb::{directional_derivative, Distribution, MatrixRng};

fn main() -> svd_perturb::Result<()> {
    let a = MatrixRng::new(3).matrix(3, 4, Distribution::Normal01)?;
    let d = MatrixRng::with_stream(3, 1).unit_direction(3, 4)?;
    let svd = full_svd(&a, DEFAULT_RANK_TOL)?;

    for k in 1..=3 {
        let j = jacobian(&svd, k, DEFAULT_GAP_TOL)?;
        let h = hessian(&svd, k, DEFAULT_GAP_TOL)?;
        let eig = h.eigenvalues()?;
        println!("k = {k}, sigma = {:.6}", svd.sigma_k(k));
        println!(
            "  <J, A> = {:.12}  (Euler identity)",
            j.matrix().frobenius_dot(&a)?
        );
        println!(
            "  <J, dA> = {:+.12}   D^1 = {:+.12}",
            j.directional(&d)?,
            directional_derivative(&a, &d, k, 1)?
        );
        println!(
            "  dA:H:dA = {:+.12}   matrix-free = {:+.12}   D^2 = {:+.12}",
            h.quadratic_form(&d),
            hessian_quadratic_form(&svd, k, &d, DEFAULT_GAP_TOL)?,
            directional_derivative(&a, &d, k, 2)?
        );
        println!(
            "  symmetry {:.1e}, H vec(A) {:.1e}, eigenvalues in [{:.4}, {:.4}]",
            h.symmetry_residual(),
            h.euler_residual(&a),
            eig[0],
            eig[eig.len() - 1]
        );
        let p = hessian_from_polarization(&a, k, DEFAULT_GAP_TOL)?;
        println!(
            "  polarization vs Kronecker form: {:.1e}",
            p.matrix().max_abs_diff(h.matrix())?
        );
    }
    Ok(())
}
