//! The dilation eigensystem and the reduced resolvent at `+sigma_k`.

use svd_perturb::dilation::dilation_matrix;
use svd_perturb::svd::{full_svd, DEFAULT_GAP_TOL, DEFAULT_RANK_TOL};
use svd_perturb::{
    apply_direction, build_dilation_spectrum, BlockVector, RealMatrix, ReducedResolvent,
};

fn main() -> svd_perturb::Result<()> {
    // 2 x 3: the dilation has eigenvalues ±3, ±2 and a one-dimensional right null space.
    let a = RealMatrix::from_rows(&[[3.0, 0.0, 0.0], [0.0, 2.0, 0.0]])?;
    let svd = full_svd(&a, DEFAULT_RANK_TOL)?;
    let spectrum = build_dilation_spectrum(&svd);
    let values: Vec<f64> = spectrum.iter().map(|(v, _)| v).collect();
    println!("dilation eigenvalues: {values:?}");
    println!(
        "gram residual {:.1e}, eigen residual {:.1e}",
        spectrum.gram_residual(),
        spectrum.eigen_residual(&a)
    );

    let t = dilation_matrix(&a);
    let y = BlockVector::new(vec![1.0, -1.0], vec![0.5, 0.25, 2.0]);
    let dense = t.matvec(&y.stacked());
    let blockwise = apply_direction(&a, &y).stacked();
    println!("blockwise T y = {blockwise:?}\n    dense T y = {dense:?}");

    let r = ReducedResolvent::new(&svd, 1, DEFAULT_GAP_TOL)?;
    let sy = r.apply(&y);
    println!("S_1 y = {:?}", sy.stacked());
    println!(
        "<w_1, S_1 y> = {:.1e}, ||(T - sigma_1) S_1 y - (I - P_1) y|| = {:.1e}",
        r.target().dot(&sy),
        r.resolvent_residual(&a, &y)
    );
    // The right null vector e_3 is scaled by 1 / (0 - 3).
    println!("bottom[2] of S_1 y = {} (= 2 / -3)", sy.bottom[2]);
    Ok(())
}
