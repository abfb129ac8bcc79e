//! Builds a verification report in-process and prints a compact summary,
//! followed by the JSON for the first target.

use svd_perturb::report::{Analysis, Provenance, VerifyTolerances};
use svd_perturb::{Distribution, MatrixRng, Tolerances};

fn main() -> svd_perturb::Result<()> {
    let (seed, rows, cols, dist) = (1, 6, 10, Distribution::Normal01);
    let a = MatrixRng::new(seed).matrix(rows, cols, dist)?;
    let d = MatrixRng::with_stream(seed, 1).unit_direction(rows, cols)?;
    let tolerances = Tolerances::default();
    let analysis = Analysis {
        matrix: &a,
        direction: &d,
        ks: (1..=rows).collect(),
        order: 3,
        hessian: true,
        verify: true,
        tolerances,
        verify_tolerances: VerifyTolerances::default(),
    };
    let provenance = Provenance {
        matrix_source: "generated".into(),
        matrix_file: None,
        seed: Some(seed),
        dist: Some(dist),
        rows,
        cols,
        k: "all".into(),
        order: 3,
        hessian: true,
        verify: true,
        rank_tol: tolerances.rank_tol,
        gap_tol: tolerances.gap_tol,
        direction_source: "generated".into(),
        direction_file: None,
        rng: "ChaCha20".into(),
    };
    let mut report = analysis.run("verify", provenance)?;

    for rec in &report.records {
        let orders: Vec<String> = rec
            .expansion
            .iter()
            .map(|o| {
                let c = o.comparison.as_ref().unwrap();
                format!("n={} rel {:.1e}", o.n, c.rel_error.unwrap_or(f64::NAN))
            })
            .collect();
        println!(
            "k = {}: Jacobian max abs {:.1e}; {}",
            rec.k,
            rec.jacobian.max_abs_error.unwrap_or(f64::NAN),
            orders.join(", ")
        );
    }
    println!("all pass: {}", report.all_pass());

    report.records.truncate(1);
    if let Some(h) = report.records[0].hessian.as_mut() {
        h.vec.clear();
    }
    println!("{}", report.to_json()?);
    Ok(())
}
