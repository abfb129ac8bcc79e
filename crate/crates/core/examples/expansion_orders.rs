//! Taylor coefficients of `sigma_1(A + x dA)` to arbitrary order.
//!
//! For `A = diag(2, 1)` and `dA = [[0, 1], [1, 0]]` the branch is
//! `(3 + sqrt(1 + 4 x^2)) / 2 = 2 + x^2 - x^4 + 2 x^6 - ...`.

use svd_perturb::svd::{full_svd, DEFAULT_RANK_TOL};
use svd_perturb::{enumerate_compositions, sigma_order_n, PerturbationFamily, RealMatrix};

fn main() -> svd_perturb::Result<()> {
    let a = RealMatrix::from_rows(&[[2.0, 0.0], [0.0, 1.0]])?;
    let d = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])?;
    let svd = full_svd(&a, DEFAULT_RANK_TOL)?;
    let family = PerturbationFamily::linear(a.clone(), d.clone())?;

    println!(" n  sigma^(n)      D^n sigma_1");
    for n in 1..=6 {
        let r = sigma_order_n(&family, &svd, 1, n)?;
        println!("{n:>2}  {:>12.9}  {:>14.6}", r.sigma_n, r.frechet_n);
    }

    // A quadratic family A + x dA + x^2 E: every composition of n into parts 1 and 2 contributes.
    let e = RealMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]])?;
    let family = PerturbationFamily::new(a, vec![d, e])?;
    let r = sigma_order_n(&family, &svd, 1, 4)?;
    println!("\nquadratic family, n = 4: sigma^(4) = {:.9}", r.sigma_n);
    for term in r.per_composition.iter().filter(|t| t.contribution != 0.0) {
        println!(
            "  {:?}: {:+.9}",
            term.composition.parts(),
            term.contribution
        );
    }
    println!(
        "{} compositions of 4 in total",
        enumerate_compositions(4)?.len()
    );
    Ok(())
}
