//! Derivative reports: formula values, oracle values and error metrics for
//! each target singular value, serialized as versioned JSON.
//!
//! The layout is described by `schemas/derivative-report.schema.json`.

use serde::{Deserialize, Serialize};

use crate::closedform::{hessian, jacobian};
use crate::error::Result;
use crate::expansion::{sigma_order_n_with, ExpansionConfig, PerturbationFamily};
use crate::matrix::RealMatrix;
use crate::oracle::{BranchTracker, OracleEstimate};
use crate::rng::Distribution;
use crate::svd::{FullSvd, Tolerances};

pub const SCHEMA_VERSION: &str = "1.0.0";
pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pass thresholds for formula-vs-oracle comparisons. A comparison passes
/// when `|formula - oracle| <= atol + rtol * |oracle|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub atol: f64,
    pub rtol: f64,
}

impl Threshold {
    pub fn accepts(&self, formula: f64, oracle: f64) -> bool {
        (formula - oracle).abs() <= self.atol + self.rtol * oracle.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    /// Max-abs error of the Jacobian against entrywise central differences.
    pub jacobian_max_abs: f64,
    pub first_order: Threshold,
    pub second_order: Threshold,
    /// Orders 3 and above, checked against the polynomial fit.
    pub higher_order: Threshold,
    pub hessian_symmetry: f64,
    pub hessian_euler: f64,
    /// Allowed negative eigenvalue of `H_1`, relative to `||H_1||_2`.
    pub hessian_psd: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            jacobian_max_abs: 1e-6,
            first_order: Threshold {
                atol: 1e-6,
                rtol: 0.0,
            },
            second_order: Threshold {
                atol: 1e-7,
                rtol: 1e-4,
            },
            higher_order: Threshold {
                atol: 1e-6,
                rtol: 1e-4,
            },
            hessian_symmetry: 1e-12,
            hessian_euler: 1e-8,
            hessian_psd: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub schema_version: String,
    pub tool: ToolInfo,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub provenance: Provenance,
    pub matrix: MatrixSummary,
    pub records: Vec<KRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// `"generated"` or `"file"`.
    pub matrix_source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Distribution>,
    pub rows: usize,
    pub cols: usize,
    pub k: String,
    pub order: usize,
    pub hessian: bool,
    pub verify: bool,
    pub rank_tol: f64,
    pub gap_tol: f64,
    /// `"generated"` or `"file"`.
    pub direction_source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction_file: Option<String>,
    pub rng: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Column-major entries of the unit-norm direction used for directional derivatives.
    pub direction_vec: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KRecord {
    pub k: usize,
    pub sigma: f64,
    pub min_gap: f64,
    pub jacobian: JacobianRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hessian: Option<HessianRecord>,
    pub expansion: Vec<OrderRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianRecord {
    /// `vec(u_k v_k^T)`, column-major.
    pub vec: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_vec: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_abs_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_frobenius_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianRecord {
    pub dim: usize,
    /// Column-major entries of the symmetric `mn x mn` Hessian.
    pub vec: Vec<f64>,
    pub symmetry_residual: f64,
    pub euler_residual: f64,
    pub min_eigenvalue: f64,
    pub spectral_norm: f64,
    /// `vec(dA)^T H vec(dA)` along the report direction.
    pub quadratic_form: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariants_pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub n: usize,
    /// Taylor coefficient `sigma_k^(n)`.
    pub sigma_n: f64,
    /// `D^n sigma_k[dA, ..., dA] = n! sigma_k^(n)`.
    pub frechet: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

/// Formula value checked against an oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `"central_difference"` or `"polyfit"`.
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_error: Option<f64>,
    pub threshold: Threshold,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Comparison {
    fn from_estimate(
        method: &str,
        formula: f64,
        est: Result<OracleEstimate>,
        threshold: Threshold,
    ) -> Self {
        match est {
            Ok(e) => {
                let abs = (formula - e.value).abs();
                Self {
                    method: method.into(),
                    oracle: Some(e.value),
                    step: Some(e.step_used),
                    error_estimate: Some(e.error_estimate),
                    abs_error: Some(abs),
                    rel_error: Some(relative_error(formula, e.value)),
                    threshold,
                    pass: threshold.accepts(formula, e.value),
                    error: None,
                }
            }
            Err(err) => Self {
                method: method.into(),
                oracle: None,
                step: None,
                error_estimate: None,
                abs_error: None,
                rel_error: None,
                threshold,
                pass: false,
                error: Some(err.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub comparisons: usize,
    pub failures: usize,
    pub all_pass: bool,
}

/// `|a - b| / |b|`, or `|a - b|` when `b` is zero.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if b == 0.0 {
        d
    } else {
        d / b.abs()
    }
}

/// Everything needed to produce a report.
#[derive(Debug, Clone)]
pub struct Analysis<'a> {
    pub matrix: &'a RealMatrix,
    pub direction: &'a RealMatrix,
    pub ks: Vec<usize>,
    pub order: usize,
    pub hessian: bool,
    pub verify: bool,
    pub tolerances: Tolerances,
    pub verify_tolerances: VerifyTolerances,
}

impl Analysis<'_> {
    /// Runs every computation. Fails on the first target that is not a
    /// simple nonzero singular value; oracle failures are recorded per entry.
    pub fn run(&self, command: &str, provenance: Provenance) -> Result<DerivativeReport> {
        let svd = FullSvd::new(self.matrix, self.tolerances.rank_tol)?;
        for &k in &self.ks {
            svd.require_simple(k, self.tolerances.gap_tol)?;
        }
        let records = self
            .ks
            .iter()
            .map(|&k| self.record(&svd, k))
            .collect::<Result<Vec<_>>>()?;
        let summary = self.verify.then(|| summarize(&records));
        Ok(DerivativeReport {
            schema_version: SCHEMA_VERSION.into(),
            tool: ToolInfo {
                name: TOOL_NAME.into(),
                version: TOOL_VERSION.into(),
            },
            command: command.into(),
            generated_at_unix: None,
            provenance,
            matrix: MatrixSummary {
                rows: self.matrix.rows(),
                cols: self.matrix.cols(),
                rank: svd.rank(),
                singular_values: svd.sigma().to_vec(),
                direction_vec: self.direction.vec(),
            },
            records,
            summary,
        })
    }

    fn record(&self, svd: &FullSvd, k: usize) -> Result<KRecord> {
        let gap_tol = self.tolerances.gap_tol;
        let cert = svd.require_simple(k, gap_tol)?;
        let jac = jacobian(svd, k, gap_tol)?;
        let mut jrec = JacobianRecord {
            vec: jac.matrix().vec(),
            oracle_vec: None,
            max_abs_error: None,
            rel_frobenius_error: None,
            tolerance: None,
            pass: None,
            error: None,
        };
        if self.verify {
            self.verify_jacobian(svd, k, &mut jrec);
        }

        let hessian_record = if self.hessian {
            Some(self.hessian_record(svd, k)?)
        } else {
            None
        };

        let family = PerturbationFamily::linear(self.matrix.clone(), self.direction.clone())?;
        let config = ExpansionConfig {
            gap_tol,
            ..ExpansionConfig::default()
        };
        let tracker = if self.verify {
            Some(BranchTracker::from_svd(
                svd,
                self.matrix,
                self.direction,
                k,
            )?)
        } else {
            None
        };
        let mut expansion = Vec::with_capacity(self.order);
        for n in 1..=self.order {
            let res = sigma_order_n_with(&family, svd, k, n, &config)?;
            let comparison = tracker.as_ref().map(|t| {
                let vt = &self.verify_tolerances;
                match n {
                    1 => Comparison::from_estimate(
                        "central_difference",
                        res.frechet_n,
                        t.fd(1, t.default_fd_step(1)),
                        vt.first_order,
                    ),
                    2 => Comparison::from_estimate(
                        "central_difference",
                        res.frechet_n,
                        t.fd(2, t.default_fd_step(2)),
                        vt.second_order,
                    ),
                    _ => Comparison::from_estimate(
                        "polyfit",
                        res.frechet_n,
                        t.polyfit_extrapolated(n, t.default_polyfit_radius(), 2 * n + 5),
                        vt.higher_order,
                    ),
                }
            });
            expansion.push(OrderRecord {
                n,
                sigma_n: res.sigma_n,
                frechet: res.frechet_n,
                comparison,
            });
        }

        Ok(KRecord {
            k,
            sigma: svd.sigma_k(k),
            min_gap: cert.min_gap,
            jacobian: jrec,
            hessian: hessian_record,
            expansion,
        })
    }

    fn verify_jacobian(&self, svd: &FullSvd, k: usize, rec: &mut JacobianRecord) {
        let (m, n) = self.matrix.shape();
        let tol = self.verify_tolerances.jacobian_max_abs;
        rec.tolerance = Some(tol);
        let oracle: Result<Vec<f64>> = (0..m * n)
            .map(|idx| {
                let e = RealMatrix::unit(m, n, idx % m, idx / m);
                let t = BranchTracker::from_svd(svd, self.matrix, &e, k)?;
                Ok(t.fd(1, t.default_fd_step(1))?.value)
            })
            .collect();
        match oracle {
            Ok(o) => {
                let max_abs = rec
                    .vec
                    .iter()
                    .zip(&o)
                    .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
                let diff: f64 = rec
                    .vec
                    .iter()
                    .zip(&o)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let norm: f64 = o.iter().map(|b| b * b).sum::<f64>().sqrt();
                rec.max_abs_error = Some(max_abs);
                rec.rel_frobenius_error = Some(if norm > 0.0 { diff / norm } else { diff });
                rec.pass = Some(max_abs <= tol);
                rec.oracle_vec = Some(o);
            }
            Err(e) => {
                rec.pass = Some(false);
                rec.error = Some(e.to_string());
            }
        }
    }

    fn hessian_record(&self, svd: &FullSvd, k: usize) -> Result<HessianRecord> {
        let h = hessian(svd, k, self.tolerances.gap_tol)?;
        let eig = h.eigenvalues()?;
        let min_eig = eig.first().copied().unwrap_or(0.0);
        let spectral = eig.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let vt = &self.verify_tolerances;
        let symmetry = h.symmetry_residual();
        let euler = h.euler_residual(self.matrix);
        let qf = h.quadratic_form(self.direction);
        let (comparison, invariants_pass) = if self.verify {
            let t = BranchTracker::from_svd(svd, self.matrix, self.direction, k)?;
            let cmp = Comparison::from_estimate(
                "central_difference",
                qf,
                t.fd(2, t.default_fd_step(2)),
                vt.second_order,
            );
            let psd_ok = k != 1 || min_eig >= -vt.hessian_psd * spectral;
            (
                Some(cmp),
                Some(symmetry <= vt.hessian_symmetry && euler <= vt.hessian_euler && psd_ok),
            )
        } else {
            (None, None)
        };
        Ok(HessianRecord {
            dim: h.matrix().rows(),
            vec: h.matrix().vec(),
            symmetry_residual: symmetry,
            euler_residual: euler,
            min_eigenvalue: min_eig,
            spectral_norm: spectral,
            quadratic_form: qf,
            comparison,
            invariants_pass,
        })
    }
}

fn summarize(records: &[KRecord]) -> Summary {
    let mut flags = Vec::new();
    for r in records {
        flags.extend(r.jacobian.pass);
        if let Some(h) = &r.hessian {
            flags.extend(h.comparison.as_ref().map(|c| c.pass));
            flags.extend(h.invariants_pass);
        }
        flags.extend(
            r.expansion
                .iter()
                .filter_map(|o| o.comparison.as_ref().map(|c| c.pass)),
        );
    }
    let failures = flags.iter().filter(|&&p| !p).count();
    Summary {
        comparisons: flags.len(),
        failures,
        all_pass: failures == 0,
    }
}

impl DerivativeReport {
    pub fn all_pass(&self) -> bool {
        self.summary.as_ref().is_none_or(|s| s.all_pass)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| crate::Error::Io(e.into()))?;
        s.push('\n');
        Ok(s)
    }
}
