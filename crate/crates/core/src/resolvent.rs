//! Reduced resolvent of the dilation at a simple eigenvalue `±sigma_k`.
//!
//! `S_k = (T - lambda I)^{-1} (I - P_k)` is applied as a sum of rank-one
//! projections over the eigenbasis of [`DilationSpectrum`], skipping the
//! target pair. For `lambda = sigma_k` the coefficients are
//! `1/(sigma_i - sigma_k)` on the positive pairs, `-1/(sigma_i + sigma_k)`
//! on the negative pairs (including `i = k`) and `-1/sigma_k` on both null
//! spaces.

use crate::dilation::{apply_direction, build_dilation_spectrum, BlockVector, DilationSpectrum};
use crate::error::Result;
use crate::matrix::RealMatrix;
use crate::svd::{FullSvd, GapCertificate};

/// Which eigenvalue of the dilation is targeted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `+sigma_k`, eigenvector `(u_k; v_k)/√2`.
    Positive,
    /// `-sigma_k`, eigenvector `(u_k; -v_k)/√2`.
    Negative,
}

#[derive(Debug, Clone)]
pub struct ReducedResolvent {
    spectrum: DilationSpectrum,
    k: usize,
    sigma_k: f64,
    branch: Branch,
    certificate: GapCertificate,
}

impl ReducedResolvent {
    /// Reduced resolvent at `+sigma_k` (1-based `k`).
    ///
    /// Fails with `ZeroSingularValue` or `DegenerateSpectrum` when `sigma_k`
    /// is not a simple nonzero singular value.
    pub fn new(svd: &FullSvd, k: usize, gap_tol: f64) -> Result<Self> {
        Self::with_branch(svd, k, gap_tol, Branch::Positive)
    }

    #[doc(hidden)]
    pub fn with_branch(svd: &FullSvd, k: usize, gap_tol: f64, branch: Branch) -> Result<Self> {
        let certificate = svd.require_simple(k, gap_tol)?;
        Ok(Self {
            spectrum: build_dilation_spectrum(svd),
            k,
            sigma_k: svd.sigma_k(k),
            branch,
            certificate,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma_k(&self) -> f64 {
        self.sigma_k
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn spectrum(&self) -> &DilationSpectrum {
        &self.spectrum
    }

    pub fn certificate(&self) -> &GapCertificate {
        &self.certificate
    }

    /// Targeted eigenvalue of the dilation.
    pub fn eigenvalue(&self) -> f64 {
        match self.branch {
            Branch::Positive => self.sigma_k,
            Branch::Negative => -self.sigma_k,
        }
    }

    /// Unit eigenvector `w_k` of the targeted eigenvalue.
    pub fn target(&self) -> &BlockVector {
        let pairs = match self.branch {
            Branch::Positive => &self.spectrum.pos_pairs,
            Branch::Negative => &self.spectrum.neg_pairs,
        };
        &pairs[self.k - 1].vector
    }

    /// `S_k y`.
    pub fn apply(&self, y: &BlockVector) -> BlockVector {
        let (m, n) = self.spectrum.dims();
        assert_eq!(
            y.dims(),
            (m, n),
            "block vector does not conform to the spectrum"
        );
        let lambda = self.eigenvalue();
        let (own_pos, own_neg) = match self.branch {
            Branch::Positive => (Some(self.k - 1), None),
            Branch::Negative => (None, Some(self.k - 1)),
        };
        let mut out = BlockVector::zeros(m, n);
        let mut project = |value: f64, w: &BlockVector| {
            let c = w.dot(y) / (value - lambda);
            out.axpy(c, w);
        };
        for (i, p) in self.spectrum.pos_pairs.iter().enumerate() {
            if Some(i) != own_pos {
                project(p.value, &p.vector);
            }
        }
        for (i, p) in self.spectrum.neg_pairs.iter().enumerate() {
            if Some(i) != own_neg {
                project(p.value, &p.vector);
            }
        }
        for w in self
            .spectrum
            .left_null
            .iter()
            .chain(&self.spectrum.right_null)
        {
            project(0.0, w);
        }
        out
    }

    /// `S_k^power y`; `power = 0` returns `y`.
    pub fn apply_power(&self, y: &BlockVector, power: usize) -> BlockVector {
        let mut z = y.clone();
        for _ in 0..power {
            z = self.apply(&z);
        }
        z
    }

    /// `||(T - lambda I) S_k y - (I - P_k) y||_2`, with `T` applied densely
    /// from `a`. Only meaningful as a check of the defining identity.
    pub fn resolvent_residual(&self, a: &RealMatrix, y: &BlockVector) -> f64 {
        let sy = self.apply(y);
        let mut lhs = apply_direction(a, &sy);
        lhs.axpy(-self.eigenvalue(), &sy);
        let w = self.target();
        let mut rhs = y.clone();
        rhs.axpy(-w.dot(y), w);
        lhs.sub(&rhs).norm()
    }
}

/// `S_k y` for the `+sigma_k` resolvent.
pub fn apply_reduced_resolvent(r: &ReducedResolvent, y: &BlockVector) -> BlockVector {
    r.apply(y)
}

pub fn resolvent_residual(r: &ReducedResolvent, a: &RealMatrix, y: &BlockVector) -> f64 {
    r.resolvent_residual(a, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::svd::{full_svd, DEFAULT_GAP_TOL, DEFAULT_RANK_TOL};

    fn diag21_resolvent() -> (RealMatrix, ReducedResolvent) {
        let a = RealMatrix::from_rows(&[[2.0, 0.0], [0.0, 1.0]]).unwrap();
        let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
        let r = ReducedResolvent::new(&svd, 1, DEFAULT_GAP_TOL).unwrap();
        (a, r)
    }

    fn assert_close(a: &BlockVector, b: &BlockVector, tol: f64) {
        assert!(a.sub(b).norm() <= tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn annihilates_own_eigenvector() {
        let (a, r) = diag21_resolvent();
        let w = r.target().clone();
        assert!(r.apply(&w).norm() < 1e-15);
        assert!(r.resolvent_residual(&a, &w) < 1e-15);
    }

    #[test]
    fn single_term_coefficients() {
        let (_, r) = diag21_resolvent();
        // 1 / (sigma_2 - sigma_1) = -1
        let w2p = r.spectrum().pos_pairs[1].vector.clone();
        assert_close(&r.apply(&w2p), &w2p.scale(-1.0), 1e-15);
        // 1 / (-sigma_1 - sigma_1) = -1/4
        let w1m = r.spectrum().neg_pairs[0].vector.clone();
        assert_close(&r.apply(&w1m), &w1m.scale(-0.25), 1e-15);
    }

    #[test]
    fn null_space_coefficient() {
        let a = RealMatrix::from_rows(&[[3.0, 0.0, 0.0], [0.0, 2.0, 0.0]]).unwrap();
        let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
        let r = ReducedResolvent::new(&svd, 1, DEFAULT_GAP_TOL).unwrap();
        let b3 = BlockVector::new(vec![0.0, 0.0], vec![0.0, 0.0, 1.0]);
        assert_close(&r.apply(&b3), &b3.scale(-1.0 / 3.0), 1e-15);
    }

    #[test]
    fn residual_on_generic_vector() {
        let (a, r) = diag21_resolvent();
        let y = BlockVector::new(vec![0.3, -1.2], vec![0.7, 2.0]);
        assert!(r.resolvent_residual(&a, &y) <= 1e-12);
        assert!(r.target().dot(&r.apply(&y)).abs() <= 1e-15);
    }

    #[test]
    fn negative_branch_identity() {
        let a = RealMatrix::from_rows(&[[3.0, 0.5, 0.0], [0.1, 2.0, 1.0]]).unwrap();
        let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
        let r = ReducedResolvent::with_branch(&svd, 2, DEFAULT_GAP_TOL, Branch::Negative).unwrap();
        assert!(r.eigenvalue() < 0.0);
        let y = BlockVector::new(vec![1.0, -0.5], vec![0.2, 0.0, 0.9]);
        assert!(r.resolvent_residual(&a, &y) <= 1e-12);
    }

    #[test]
    fn construction_errors() {
        let a = RealMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
        assert!(matches!(
            ReducedResolvent::new(&svd, 1, DEFAULT_GAP_TOL),
            Err(Error::DegenerateSpectrum { .. })
        ));
        let a = RealMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let svd = full_svd(&a, DEFAULT_RANK_TOL).unwrap();
        assert!(matches!(
            ReducedResolvent::new(&svd, 2, DEFAULT_GAP_TOL),
            Err(Error::ZeroSingularValue { .. })
        ));
    }
}
