//! Full singular value decomposition with complete orthogonal bases, plus
//! the spectral-gap test that every derivative formula depends on.

use faer::linalg::solvers::Svd;

use crate::error::{Error, Result};
use crate::matrix::{dot, RealMatrix};

/// Relative rank threshold: `sigma_i` counts toward the rank when
/// `sigma_i > rank_tol * sigma_1`.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Relative simplicity threshold: a singular value is simple when its gap
/// exceeds `gap_tol * max(sigma_1, 1)`.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

const ORTHO_TOL: f64 = 1e-12;
const RECON_TOL: f64 = 1e-10;

/// Numerical thresholds shared by the SVD, the resolvent and the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub gap_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            gap_tol: DEFAULT_GAP_TOL,
        }
    }
}

/// `A = U diag(sigma) V^T` with square orthogonal `U` (`m x m`) and `V`
/// (`n x n`).
///
/// Singular values are indexed from 1 in all accessors taking `k`, so
/// `sigma_k(1)` is the largest. Each `u_k` (k ≤ min(m, n)) has its
/// largest-magnitude entry positive and `v_k` is flipped jointly with it;
/// trailing null-space columns follow the same rule individually.
#[derive(Debug, Clone)]
pub struct FullSvd {
    u: RealMatrix,
    v: RealMatrix,
    sigma: Vec<f64>,
    rank: usize,
}

/// Full SVD with the default rank tolerance.
pub fn full_svd(a: &RealMatrix, rank_tol: f64) -> Result<FullSvd> {
    FullSvd::new(a, rank_tol)
}

impl FullSvd {
    pub fn new(a: &RealMatrix, rank_tol: f64) -> Result<Self> {
        if !(rank_tol > 0.0 && rank_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rank_tol must lie in (0, 1), got {rank_tol}"
            )));
        }
        let (m, n) = a.shape();
        let dec = Svd::new(a.to_faer().as_ref()).map_err(|_| Error::SvdFailure)?;
        let mut u = RealMatrix::from_faer(dec.U())?;
        let mut v = RealMatrix::from_faer(dec.V())?;
        let s = dec.S().column_vector();
        let p = m.min(n);
        let sigma: Vec<f64> = (0..p).map(|i| s[i].max(0.0)).collect();

        for c in 0..p {
            if leading_sign(u.column(c)) < 0.0 {
                negate_column(&mut u, c);
                negate_column(&mut v, c);
            }
        }
        for c in p..m {
            if leading_sign(u.column(c)) < 0.0 {
                negate_column(&mut u, c);
            }
        }
        for c in p..n {
            if leading_sign(v.column(c)) < 0.0 {
                negate_column(&mut v, c);
            }
        }

        let s1 = sigma.first().copied().unwrap_or(0.0);
        let rank = sigma.iter().filter(|&&x| x > rank_tol * s1).count();
        let svd = Self { u, v, sigma, rank };
        svd.check_invariants(a)?;
        Ok(svd)
    }

    fn check_invariants(&self, a: &RealMatrix) -> Result<()> {
        if self.sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::SvdInvariant("singular values not sorted".into()));
        }
        let ou = orthogonality_residual(&self.u);
        let ov = orthogonality_residual(&self.v);
        if ou > ORTHO_TOL || ov > ORTHO_TOL {
            return Err(Error::SvdInvariant(format!(
                "orthogonality residuals U: {ou:e}, V: {ov:e}"
            )));
        }
        let recon = self.reconstruct()?.max_abs_diff(a)?;
        if recon > RECON_TOL * (1.0 + self.sigma_max()) {
            return Err(Error::SvdInvariant(format!(
                "reconstruction residual {recon:e}"
            )));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.v.rows()
    }

    /// Left factor `U` (`m x m`).
    pub fn u(&self) -> &RealMatrix {
        &self.u
    }

    /// Right factor `V` (`n x n`).
    pub fn v(&self) -> &RealMatrix {
        &self.v
    }

    /// All `min(m, n)` singular values, descending.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Numerical rank.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// `sigma_k`, 1-based; zero for `k > min(m, n)`.
    pub fn sigma_k(&self, k: usize) -> f64 {
        self.sigma.get(k.wrapping_sub(1)).copied().unwrap_or(0.0)
    }

    /// `u_k`, 1-based over all `m` columns of `U`.
    pub fn left_vector(&self, k: usize) -> &[f64] {
        self.u.column(k - 1)
    }

    /// `v_k`, 1-based over all `n` columns of `V`.
    pub fn right_vector(&self, k: usize) -> &[f64] {
        self.v.column(k - 1)
    }

    /// `U diag(sigma) V^T`.
    pub fn reconstruct(&self) -> Result<RealMatrix> {
        let (m, n) = (self.rows(), self.cols());
        let us = RealMatrix::from_fn(m, n, |i, j| {
            if j < self.sigma.len() {
                self.u[(i, j)] * self.sigma[j]
            } else {
                0.0
            }
        })?;
        us.matmul(&self.v.transpose())
    }

    /// Spectral-gap certificate for target `k` (1-based).
    ///
    /// The gap is the distance from `sigma_k` to every other eigenvalue of
    /// the dilation `[[0, A], [A^T, 0]]`: the other `±sigma_i`, `-sigma_k`
    /// itself, and zero whenever a null space exists.
    pub fn gap_certificate(&self, k: usize, gap_tol: f64) -> Result<GapCertificate> {
        let p = self.sigma.len();
        if k == 0 || k > p {
            return Err(Error::InvalidArgument(format!(
                "target index k = {k} outside 1..={p}"
            )));
        }
        let sk = self.sigma[k - 1];
        let mut gap = 2.0 * sk;
        for (i, &si) in self.sigma.iter().enumerate() {
            if i + 1 != k {
                gap = gap.min((sk - si).abs());
            }
        }
        if self.rows() != self.cols() || self.rank < p {
            gap = gap.min(sk);
        }
        let threshold = gap_tol * self.sigma_max().max(1.0);
        Ok(GapCertificate {
            target_index_k: k,
            min_gap: gap,
            simple: gap > threshold,
            threshold,
        })
    }

    /// Certificate for `k`, turned into an error when `sigma_k` is zero or
    /// not simple.
    pub fn require_simple(&self, k: usize, gap_tol: f64) -> Result<GapCertificate> {
        let cert = self.gap_certificate(k, gap_tol)?;
        let sk = self.sigma_k(k);
        let zero_threshold = gap_tol * self.sigma_max();
        if k > self.rank || sk <= zero_threshold {
            return Err(Error::ZeroSingularValue {
                k,
                sigma: sk,
                threshold: zero_threshold,
            });
        }
        if !cert.simple {
            return Err(Error::DegenerateSpectrum {
                k,
                gap: cert.min_gap,
                threshold: cert.threshold,
            });
        }
        Ok(cert)
    }
}

/// Result of the simplicity test for one singular value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapCertificate {
    pub target_index_k: usize,
    pub min_gap: f64,
    pub simple: bool,
    /// `gap_tol * max(sigma_1, 1)`.
    pub threshold: f64,
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &RealMatrix) -> Result<Vec<f64>> {
    let mut s = a
        .to_faer()
        .as_ref()
        .singular_values()
        .map_err(|_| Error::SvdFailure)?;
    s.iter_mut().for_each(|x| *x = x.max(0.0));
    Ok(s)
}

/// Spectral norm `||a||_2`.
pub fn spectral_norm(a: &RealMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// `max |Q^T Q - I|`.
pub fn orthogonality_residual(q: &RealMatrix) -> f64 {
    let n = q.cols();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(q.column(i), q.column(j)) - target).abs());
        }
    }
    worst
}

fn leading_sign(col: &[f64]) -> f64 {
    let mut best = 0.0_f64;
    for &x in col {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn negate_column(a: &mut RealMatrix, c: usize) {
    for i in 0..a.rows() {
        a[(i, c)] = -a[(i, c)];
    }
}
