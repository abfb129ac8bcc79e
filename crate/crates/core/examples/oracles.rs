//! Formula values against derivative-free oracles on a single branch.

use svd_perturb::{directional_derivative, BranchTracker, Distribution, MatrixRng};

fn main() -> svd_perturb::Result<()> {
    let a = MatrixRng::new(5).matrix(3, 4, Distribution::Uniform01)?;
    let d = MatrixRng::with_stream(5, 1).unit_direction(3, 4)?;
    let k = 2;
    let t = BranchTracker::new(&a, &d, k)?;
    println!(
        "min gap {:.4}, safe radius {:.4}",
        t.min_gap(),
        t.safe_radius()
    );

    for n in 1..=2 {
        let h = t.default_fd_step(n);
        let o = t.fd(n, h)?;
        let f = directional_derivative(&a, &d, k, n)?;
        println!(
            "n = {n}: formula {f:+.10e}  central difference {:+.10e}  (h = {h:.0e}, est. {:.1e})",
            o.value, o.error_estimate
        );
    }
    let r = t.default_polyfit_radius();
    for n in 3..=5 {
        let f = directional_derivative(&a, &d, k, n)?;
        let single = t.polyfit(n, r, 2 * n + 5)?;
        let extrapolated = t.polyfit_extrapolated(n, r, 2 * n + 5)?;
        println!(
            "n = {n}: formula {f:+.10e}  polyfit {:+.10e}  extrapolated {:+.10e}  (rel {:.1e})",
            single.value,
            extrapolated.value,
            (f - extrapolated.value).abs() / extrapolated.value.abs()
        );
    }

    match t.sample(2.0 * t.safe_radius()) {
        Ok(_) => println!("sample outside the safe radius unexpectedly accepted"),
        Err(e) => println!("outside the safe radius: {e}"),
    }
    Ok(())
}
