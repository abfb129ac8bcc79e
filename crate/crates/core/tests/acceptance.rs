//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::Instant;

use svd_perturb::closedform::{hessian, hessian_from_polarization, jacobian};
use svd_perturb::expansion::{enumerate_compositions, sigma_order_n};
use svd_perturb::resolvent::ReducedResolvent;
use svd_perturb::svd::{full_svd, DEFAULT_GAP_TOL, DEFAULT_RANK_TOL};
use svd_perturb::{
    cli, directional_derivative, BlockVector, BranchTracker, Distribution, MatrixRng,
    PerturbationFamily, RealMatrix,
};

const DISTS: [Distribution; 2] = [Distribution::Normal01, Distribution::Uniform01];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn matrix(seed: u64, rows: usize, cols: usize, dist: Distribution) -> RealMatrix {
    MatrixRng::new(seed).matrix(rows, cols, dist).unwrap()
}

fn jacobian_vs_central_differences() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for dist in DISTS {
        let a = matrix(1, 6, 10, dist);
        let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
        let h = 1e-5 * svd.sigma_max().max(1.0);
        for k in 1..=6 {
            let j = jacobian(&svd, k, DEFAULT_GAP_TOL).unwrap();
            for col in 0..10 {
                for row in 0..6 {
                    let e = RealMatrix::unit(6, 10, row, col);
                    let fd = BranchTracker::from_svd(&svd, &a, &e, k)
                        .unwrap()
                        .fd(1, h)
                        .unwrap()
                        .value;
                    worst = worst.max((j.matrix()[(row, col)] - fd).abs());
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && secs <= 10.0,
        format!("max abs error {worst:.2e} (tol 1e-6), {secs:.2} s (limit 10 s)"),
    )
}

fn hessian_checks() -> Outcome {
    let start = Instant::now();
    let (mut worst_qf, mut worst_sym, mut worst_euler, mut worst_psd) =
        (0.0_f64, 0.0_f64, 0.0_f64, f64::INFINITY);
    for dist in DISTS {
        let a = matrix(1, 6, 10, dist);
        let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
        let mut dirs = MatrixRng::with_stream(1, 2);
        let directions: Vec<RealMatrix> = (0..20)
            .map(|_| dirs.unit_direction(6, 10).unwrap())
            .collect();
        for k in 1..=6 {
            let h = hessian(&svd, k, DEFAULT_GAP_TOL).unwrap();
            worst_sym = worst_sym.max(h.symmetry_residual());
            worst_euler = worst_euler.max(h.euler_residual(&a));
            if k == 1 {
                let eig = h.eigenvalues().unwrap();
                let norm = eig.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
                worst_psd = worst_psd.min(eig[0] / norm);
            }
            for d in &directions {
                let t = BranchTracker::from_svd(&svd, &a, d, k).unwrap();
                let fd = t.fd(2, t.default_fd_step(2)).unwrap().value;
                let qf = h.quadratic_form(d);
                worst_qf = worst_qf.max((qf - fd).abs() / fd.abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_qf <= 1e-4 && worst_sym <= 1e-12 && worst_euler <= 1e-8 && worst_psd >= -1e-9 && secs <= 60.0,
        format!(
            "quadratic form rel {worst_qf:.2e} (1e-4), symmetry {worst_sym:.2e} (1e-12), \
             Euler {worst_euler:.2e} (1e-8), k=1 min eig/||H|| {worst_psd:.2e} (>= -1e-9), {secs:.2} s"
        ),
    )
}

fn general_order_engine() -> Outcome {
    let (mut e1, mut e2, mut e3, mut e4) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut cases = 0;
    for seed in 1..=10 {
        for dist in DISTS {
            let a = matrix(seed, 3, 4, dist);
            let d = MatrixRng::with_stream(seed, 1)
                .unit_direction(3, 4)
                .unwrap();
            let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
            for k in 1..=3 {
                cases += 1;
                let dn = |n| directional_derivative(&a, &d, k, n).unwrap();
                let j = jacobian(&svd, k, DEFAULT_GAP_TOL)
                    .unwrap()
                    .directional(&d)
                    .unwrap();
                e1 = e1.max((dn(1) - j).abs() / svd.sigma_max());
                let q = hessian(&svd, k, DEFAULT_GAP_TOL)
                    .unwrap()
                    .quadratic_form(&d);
                e2 = e2.max((dn(2) - q).abs() / q.abs());
                let t = BranchTracker::from_svd(&svd, &a, &d, k).unwrap();
                let r = t.default_polyfit_radius();
                for (n, worst) in [(3, &mut e3), (4, &mut e4)] {
                    let o = t.polyfit_extrapolated(n, r, 2 * n + 5).unwrap().value;
                    *worst = worst.max((dn(n) - o).abs() / o.abs());
                }
            }
        }
    }
    let a = RealMatrix::from_rows(&[[2.0, 0.0], [0.0, 1.0]]).unwrap();
    let d = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
    let golden = [0.0, 2.0, 0.0, -24.0];
    let golden_err = (1..=4)
        .map(|n| (directional_derivative(&a, &d, 1, n).unwrap() - golden[n - 1]).abs())
        .fold(0.0_f64, f64::max);
    outcome(
        e1 <= 1e-12 && e2 <= 1e-9 && e3 <= 1e-4 && e4 <= 1e-4 && golden_err <= 1e-6,
        format!(
            "{cases} cases: n=1 {e1:.2e}*sigma_1 (1e-12), n=2 rel {e2:.2e} (1e-9), \
             n=3 rel {e3:.2e} (1e-4), n=4 rel {e4:.2e} (1e-4); diag(2,1) golden abs {golden_err:.2e} (1e-6)"
        ),
    )
}

fn null_space_terms() -> Outcome {
    let a = RealMatrix::from_rows(&[[3.0, 0.0, 0.0], [0.0, 2.0, 0.0]]).unwrap();
    let d = RealMatrix::unit(2, 3, 0, 2);
    let d2 = directional_derivative(&a, &d, 1, 2).unwrap();
    let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
    let q = hessian(&svd, 1, DEFAULT_GAP_TOL)
        .unwrap()
        .quadratic_form(&d);
    let err = (d2 - 1.0 / 3.0).abs().max((q - 1.0 / 3.0).abs());
    outcome(
        err <= 1e-9,
        format!("D^2 sigma_1 = {d2:.12}, Hessian form = {q:.12}, error {err:.2e} (1e-9)"),
    )
}

fn resolvent_identities() -> Outcome {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for (i, seed) in (1..=10u64).enumerate() {
        let (m, n) = [(3, 4), (4, 3), (5, 5), (2, 6), (6, 10)][i % 5];
        let a = matrix(100 + seed, m, n, DISTS[i % 2]);
        let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
        let k = 1 + i % m.min(n);
        let r = ReducedResolvent::new(&svd, k, DEFAULT_GAP_TOL).unwrap();
        let scale = 1.0 + svd.sigma_max();
        let mut rng = MatrixRng::with_stream(seed, 3);
        for _ in 0..10 {
            let y = BlockVector::new(
                (0..m).map(|_| rng.normal()).collect(),
                (0..n).map(|_| rng.normal()).collect(),
            );
            let identity = r.resolvent_residual(&a, &y);
            let orth = r.target().dot(&r.apply(&y)).abs();
            worst = worst.max(identity.max(orth) / scale);
            count += 1;
        }
    }
    outcome(
        worst <= 1e-9,
        format!("{count} vectors, worst residual {worst:.2e}*(1+sigma_1) (1e-9)"),
    )
}

fn cross_derivation() -> Outcome {
    let mut worst = 0.0_f64;
    for (seed, (m, n)) in [(1, (3, 4)), (2, (4, 3)), (3, (3, 4)), (4, (4, 3))] {
        let a = matrix(seed, m, n, Distribution::Normal01);
        let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
        for k in 1..=m.min(n) {
            let h = hessian(&svd, k, DEFAULT_GAP_TOL).unwrap();
            let p = hessian_from_polarization(&a, k, DEFAULT_GAP_TOL).unwrap();
            worst = worst.max(h.matrix().max_abs_diff(p.matrix()).unwrap() / h.matrix().norm_max());
        }
    }
    outcome(
        worst <= 1e-9,
        format!("3x4 and 4x3, all k: max entry difference {worst:.2e}*||H||_max (1e-9)"),
    )
}

fn composition_enumeration() -> Outcome {
    let counts: Vec<usize> = (1..=8)
        .map(|n| enumerate_compositions(n).unwrap().len())
        .collect();
    let counts_ok = counts.iter().enumerate().all(|(i, &c)| c == 1 << i);
    let a = matrix(7, 3, 4, Distribution::Normal01);
    let d = MatrixRng::with_stream(7, 1).unit_direction(3, 4).unwrap();
    let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
    let family = PerturbationFamily::linear(a, d).unwrap();
    let collapse_ok = (1..=6).all(|n| {
        let res = sigma_order_n(&family, &svd, 1, n).unwrap();
        let nonzero: Vec<_> = res
            .per_composition
            .iter()
            .filter(|t| t.contribution != 0.0)
            .collect();
        nonzero.len() == 1 && nonzero[0].composition.is_all_ones()
    });
    outcome(
        counts_ok && collapse_ok,
        format!(
            "counts {counts:?}; linear family single all-ones term for n = 1..6: {collapse_ok}"
        ),
    )
}

fn cli_end_to_end() -> Outcome {
    let args = [
        "svd-perturb",
        "verify",
        "--seed",
        "1",
        "--dist",
        "normal01",
        "--rows",
        "6",
        "--cols",
        "10",
        "--k",
        "all",
        "--order",
        "2",
        "--reproducible",
    ];
    let run = || {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = cli::run(args, &mut out, &mut err);
        (code, out)
    };
    let (code, first) = run();
    let (code2, second) = run();
    let schema: serde_json::Value = serde_json::from_str(include_str!(
        "../../../schemas/derivative-report.schema.json"
    ))
    .unwrap();
    let report: serde_json::Value = match serde_json::from_slice(&first) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("exit {code}, report is not JSON: {e}")),
    };
    let valid = jsonschema::is_valid(&schema, &report);
    let identical = first == second;
    outcome(
        code == 0 && code2 == 0 && valid && identical,
        format!("exit {code}, schema valid {valid}, byte-identical rerun {identical}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "Jacobian vs central differences (6x10)",
            jacobian_vs_central_differences,
        ),
        (
            "Hessian quadratic form and invariants (6x10)",
            hessian_checks,
        ),
        ("general-order engine (3x4, goldens)", general_order_engine),
        ("null-space terms", null_space_terms),
        ("reduced-resolvent identities", resolvent_identities),
        (
            "polarization Hessian vs Kronecker Hessian",
            cross_derivation,
        ),
        ("composition enumeration", composition_enumeration),
        ("CLI verify end to end", cli_end_to_end),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {}: {} - {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
