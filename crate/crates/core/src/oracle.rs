//! Derivative-free ground truth for `x ↦ sigma_k(A + x dA)`.
//!
//! Branch values are read off by sorted index, which is exact as long as
//! `|x| ||dA||_2 < gap / 4`: by Weyl's inequality no singular value moves
//! farther than `|x| ||dA||_2`, so no two branches can swap order.
//!
//! The differencing oracles work on increments `sigma_k(A + x dA) -
//! sigma_k(A)`. Each value is the Rayleigh quotient `u^T (A + x dA) v /
//! (|u| |v|)` of the computed singular pair, accumulated in double-double
//! arithmetic. The quotient is second-order accurate in the vector error, so
//! an increment carries an absolute error far below `eps * sigma_1`, which is
//! what makes fourth-order coefficients recoverable from small radii.

use faer::linalg::solvers::Svd;

use crate::error::{Error, Result};
use crate::expansion::{factorial, DEFAULT_MAX_ORDER};
use crate::matrix::RealMatrix;
use crate::svd::{singular_values, spectral_norm, FullSvd, DEFAULT_GAP_TOL, DEFAULT_RANK_TOL};

/// Largest acceptable condition number of the fitting matrix.
pub const MAX_FIT_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSample {
    pub x: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub order_n: usize,
    pub value: f64,
    pub step_used: f64,
    pub error_estimate: f64,
}

/// Samples the `k`-th branch of `A + x dA` inside the safe radius.
#[derive(Debug, Clone)]
pub struct BranchTracker {
    a: RealMatrix,
    direction: RealMatrix,
    k: usize,
    sigma_1: f64,
    min_gap: f64,
    direction_norm: f64,
    base: Dd,
}

impl BranchTracker {
    pub fn new(a: &RealMatrix, direction: &RealMatrix, k: usize) -> Result<Self> {
        let svd = FullSvd::new(a, DEFAULT_RANK_TOL)?;
        Self::from_svd(&svd, a, direction, k)
    }

    pub fn from_svd(
        svd: &FullSvd,
        a: &RealMatrix,
        direction: &RealMatrix,
        k: usize,
    ) -> Result<Self> {
        if direction.shape() != a.shape() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", a.rows(), a.cols()),
                found: format!("{}x{}", direction.rows(), direction.cols()),
            });
        }
        let cert = svd.gap_certificate(k, DEFAULT_GAP_TOL)?;
        let base = rayleigh(a, direction, 0.0, svd.left_vector(k), svd.right_vector(k));
        Ok(Self {
            a: a.clone(),
            direction: direction.clone(),
            k,
            sigma_1: svd.sigma_max(),
            min_gap: cert.min_gap,
            direction_norm: spectral_norm(direction)?,
            base,
        })
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// `gap / (4 ||dA||_2)`; samples must satisfy `|x| <` this.
    pub fn safe_radius(&self) -> f64 {
        if self.direction_norm == 0.0 {
            f64::INFINITY
        } else {
            self.min_gap / (4.0 * self.direction_norm)
        }
    }

    pub fn sample(&self, x: f64) -> Result<BranchSample> {
        let excursion = x.abs() * self.direction_norm;
        let limit = self.min_gap / 4.0;
        if excursion.is_nan() || excursion >= limit {
            return Err(Error::BranchAmbiguity {
                k: self.k,
                x,
                excursion,
                limit,
            });
        }
        let sigma = if x == 0.0 {
            singular_values(&self.a)?[self.k - 1]
        } else {
            singular_values(&self.a.add_scaled(x, &self.direction)?)?[self.k - 1]
        };
        Ok(BranchSample { x, sigma })
    }

    /// `sigma_k(A + x dA) - sigma_k(A)` to roughly double-double accuracy.
    pub fn increment(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        self.sample(x)?;
        let perturbed = self.a.add_scaled(x, &self.direction)?;
        let svd = FullSvd::new(&perturbed, DEFAULT_RANK_TOL)?;
        let value = rayleigh(
            &self.a,
            &self.direction,
            x,
            svd.left_vector(self.k),
            svd.right_vector(self.k),
        );
        Ok(value.add(self.base.neg()).to_f64())
    }

    /// `1e-5 max(1, sigma_1)` for first order, `1e-4 sqrt(max(1, sigma_1))`
    /// for second order.
    pub fn default_fd_step(&self, n: usize) -> f64 {
        let scale = self.sigma_1.max(1.0);
        if n == 1 {
            1e-5 * scale
        } else {
            1e-4 * scale.sqrt()
        }
    }

    /// `min(safe_radius / 2, 1e-2 max(1, sigma_1))`.
    pub fn default_polyfit_radius(&self) -> f64 {
        (self.safe_radius() / 2.0).min(1e-2 * self.sigma_1.max(1.0))
    }

    fn stencil(&self, n: usize, h: f64) -> Result<f64> {
        let f = |x: f64| self.increment(x);
        match n {
            1 => Ok((f(h)? - f(-h)?) / (2.0 * h)),
            2 => Ok((f(h)? + f(-h)?) / (h * h)),
            _ => Err(Error::InvalidArgument(format!(
                "finite differences support n = 1, 2 (got {n})"
            ))),
        }
    }

    /// Central difference of order `n ∈ {1, 2}`; the error estimate comes
    /// from one step halving assuming `O(h^2)` truncation.
    pub fn fd(&self, n: usize, h: f64) -> Result<OracleEstimate> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step must be positive, got {h}"
            )));
        }
        let coarse = self.stencil(n, h)?;
        let fine = self.stencil(n, h / 2.0)?;
        Ok(OracleEstimate {
            order_n: n,
            value: coarse,
            step_used: h,
            error_estimate: (coarse - fine).abs() * 4.0 / 3.0,
        })
    }

    /// Least-squares polynomial fit of degree `n + 2` on `num_nodes`
    /// Chebyshev nodes in `[-radius, radius]`; returns `n!` times the
    /// coefficient of `x^n`.
    pub fn polyfit(&self, n: usize, radius: f64, num_nodes: usize) -> Result<OracleEstimate> {
        if n == 0 {
            return Err(Error::InvalidArgument("order must be at least 1".into()));
        }
        if n > DEFAULT_MAX_ORDER {
            return Err(Error::OrderTooLarge {
                n,
                max: DEFAULT_MAX_ORDER,
            });
        }
        if num_nodes < 2 * n + 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least {} nodes for order {n}, got {num_nodes}",
                2 * n + 3
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "radius must be positive, got {radius}"
            )));
        }
        let degree = n + 2;
        let nodes: Vec<f64> = (0..num_nodes)
            .map(|i| ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * num_nodes) as f64).cos())
            .collect();
        let values = nodes
            .iter()
            .map(|&t| self.increment(radius * t))
            .collect::<Result<Vec<_>>>()?;

        // Fit in the scaled variable t = x / radius.
        let vander = faer::Mat::from_fn(num_nodes, degree + 1, |i, j| nodes[i].powi(j as i32));
        let dec = Svd::new_thin(vander.as_ref()).map_err(|_| Error::SvdFailure)?;
        let s = dec.S().column_vector();
        let (s_max, s_min) = (s[0], s[degree]);
        let cond = if s_min > 0.0 {
            s_max / s_min
        } else {
            f64::INFINITY
        };
        if cond > MAX_FIT_CONDITION {
            return Err(Error::IllConditionedFit { cond });
        }
        let u = dec.U();
        let v = dec.V();
        let mut coeffs = vec![0.0; degree + 1];
        for c in 0..=degree {
            let proj: f64 = (0..num_nodes).map(|i| u[(i, c)] * values[i]).sum::<f64>() / s[c];
            for (j, coef) in coeffs.iter_mut().enumerate() {
                *coef += v[(j, c)] * proj;
            }
        }
        let rss: f64 = nodes
            .iter()
            .zip(&values)
            .map(|(&t, &y)| {
                let fit = coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c);
                (y - fit).powi(2)
            })
            .sum();
        let scale = factorial(n) / radius.powi(n as i32);
        Ok(OracleEstimate {
            order_n: n,
            value: scale * coeffs[n],
            step_used: radius,
            error_estimate: scale * (rss / num_nodes as f64).sqrt(),
        })
    }

    /// Richardson combination of [`polyfit`](Self::polyfit) at `radius` and
    /// `radius / 2`. The leading error of a degree-`n + 2` fit is `O(r^4)`,
    /// so `(16 fine - coarse) / 15` cancels it.
    pub fn polyfit_extrapolated(
        &self,
        n: usize,
        radius: f64,
        num_nodes: usize,
    ) -> Result<OracleEstimate> {
        let coarse = self.polyfit(n, radius, num_nodes)?;
        let fine = self.polyfit(n, radius / 2.0, num_nodes)?;
        Ok(OracleEstimate {
            order_n: n,
            value: (16.0 * fine.value - coarse.value) / 15.0,
            step_used: radius,
            error_estimate: (fine.value - coarse.value).abs() / 15.0 + fine.error_estimate,
        })
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd(f64, f64);

impl Dd {
    const ZERO: Dd = Dd(0.0, 0.0);

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd(s, (a - (s - bb)) + (b - bb))
    }

    fn product(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd(p, a.mul_add(b, -p))
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.0, o.0);
        let lo = s.1 + self.1 + o.1;
        Dd::two_sum(s.0, lo)
    }

    fn mul_f64(self, c: f64) -> Dd {
        let p = Dd::product(self.0, c);
        Dd::two_sum(p.0, p.1 + self.1 * c)
    }

    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }

    fn to_f64(self) -> f64 {
        self.0 + self.1
    }
}

/// `u^T (A + x dA) v / (|u| |v|)` in double-double.
fn rayleigh(a: &RealMatrix, direction: &RealMatrix, x: f64, u: &[f64], v: &[f64]) -> Dd {
    let (mut sa, mut sd) = (Dd::ZERO, Dd::ZERO);
    for (j, &vj) in v.iter().enumerate() {
        for (i, &ui) in u.iter().enumerate() {
            let w = Dd::product(ui, vj);
            sa = sa.add(w.mul_f64(a[(i, j)]));
            sd = sd.add(w.mul_f64(direction[(i, j)]));
        }
    }
    let norm_sq = |w: &[f64]| {
        w.iter()
            .fold(Dd::ZERO, |acc, &c| acc.add(Dd::product(c, c)))
    };
    let (nu, nv) = (norm_sq(u), norm_sq(v));
    // |u|^2 |v|^2 = 1 + delta with delta ~ eps, so 1/sqrt(1 + delta) = 1 - delta/2 to working accuracy.
    let delta = (nu.0 - 1.0) + nu.1 + (nv.0 - 1.0) + nv.1;
    let num = sa.add(sd.mul_f64(x));
    num.add(Dd(-0.5 * delta * num.0, 0.0))
}

/// `sigma_k(A + x dA)` matched to the unperturbed branch.
pub fn track_branch(
    a: &RealMatrix,
    direction: &RealMatrix,
    k: usize,
    x: f64,
) -> Result<BranchSample> {
    BranchTracker::new(a, direction, k)?.sample(x)
}

pub fn fd_directional(
    a: &RealMatrix,
    direction: &RealMatrix,
    k: usize,
    n: usize,
    h: f64,
) -> Result<OracleEstimate> {
    BranchTracker::new(a, direction, k)?.fd(n, h)
}

pub fn polyfit_directional(
    a: &RealMatrix,
    direction: &RealMatrix,
    k: usize,
    n: usize,
    radius: f64,
    num_nodes: usize,
) -> Result<OracleEstimate> {
    BranchTracker::new(a, direction, k)?.polyfit(n, radius, num_nodes)
}

pub fn polyfit_extrapolated_directional(
    a: &RealMatrix,
    direction: &RealMatrix,
    k: usize,
    n: usize,
    radius: f64,
    num_nodes: usize,
) -> Result<OracleEstimate> {
    BranchTracker::new(a, direction, k)?.polyfit_extrapolated(n, radius, num_nodes)
}
