//! Closed-form Jacobian and Hessian of a simple singular value.
//!
//! With column-major `vec`, the gradient of `sigma_k` is `u_k v_k^T`
//! (equivalently `vec = v_k ⊗ u_k`) and the Hessian is
//!
//! ```text
//! H_k = sum_{i != k, i <= m} s_k / (s_k^2 - s_i^2) (v_k ⊗ u_i)(v_k ⊗ u_i)^T          left
//!     + sum_{j != k, j <= n} s_k / (s_k^2 - s_j^2) (v_j ⊗ u_k)(v_j ⊗ u_k)^T          right
//!     + sum_{l != k, l <= r} s_l / (s_k^2 - s_l^2) [ (v_k ⊗ u_l)(v_l ⊗ u_k)^T
//!                                                    + (v_l ⊗ u_k)(v_k ⊗ u_l)^T ]   interaction
//! ```
//!
//! where `s_i = 0` for every index past the rank, so null directions enter
//! the left and right sums with coefficient `1 / s_k`.

use faer::Side;

use crate::error::{Error, Result};
use crate::expansion::{sigma_order_n_with, ExpansionConfig, PerturbationFamily};
use crate::matrix::{dot, kron_vec, RealMatrix, DEFAULT_DENSE_CAP};
use crate::svd::{FullSvd, DEFAULT_RANK_TOL};

/// `∂sigma_k / ∂A = u_k v_k^T`.
#[derive(Debug, Clone)]
pub struct JacobianMatrix {
    pub k: usize,
    matrix: RealMatrix,
    vec_form: Vec<f64>,
}

impl JacobianMatrix {
    /// `m x n` gradient in denominator layout.
    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    /// `v_k ⊗ u_k`, built independently of [`JacobianMatrix::matrix`].
    pub fn kron_form(&self) -> &[f64] {
        &self.vec_form
    }

    /// `<J_k, dA>_F`.
    pub fn directional(&self, direction: &RealMatrix) -> Result<f64> {
        self.matrix.frobenius_dot(direction)
    }
}

pub fn jacobian(svd: &FullSvd, k: usize, gap_tol: f64) -> Result<JacobianMatrix> {
    svd.require_simple(k, gap_tol)?;
    let u = svd.left_vector(k);
    let v = svd.right_vector(k);
    let matrix = RealMatrix::from_fn(svd.rows(), svd.cols(), |i, j| u[i] * v[j])?;
    Ok(JacobianMatrix {
        k,
        matrix,
        vec_form: kron_vec(v, u),
    })
}

/// Dense `mn x mn` Hessian of `sigma_k` with respect to `vec(A)`.
#[derive(Debug, Clone)]
pub struct HessianMatrix {
    pub k: usize,
    matrix: RealMatrix,
}

impl HessianMatrix {
    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    /// `vec(dA)^T H vec(dA)`.
    pub fn quadratic_form(&self, direction: &RealMatrix) -> f64 {
        let x = direction.vec();
        dot(&x, &self.matrix.matvec(&x))
    }

    /// `max |H - H^T| / max |H|` (0 for a zero Hessian).
    pub fn symmetry_residual(&self) -> f64 {
        let scale = self.matrix.norm_max();
        if scale == 0.0 {
            0.0
        } else {
            self.matrix.asymmetry() / scale
        }
    }

    /// `||H vec(a)|| / (||H||_F ||a||_F)`; vanishes because `sigma_k` is
    /// positively homogeneous of degree one.
    pub fn euler_residual(&self, a: &RealMatrix) -> f64 {
        let denom = self.matrix.norm_fro() * a.norm_fro();
        if denom == 0.0 {
            return 0.0;
        }
        let hv = self.matrix.matvec(&a.vec());
        dot(&hv, &hv).sqrt() / denom
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.matrix
            .to_faer()
            .as_ref()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::SvdFailure)
    }
}

fn check_dense_cap(svd: &FullSvd) -> Result<usize> {
    let mn = svd.rows() * svd.cols();
    let requested = (mn as u128) * (mn as u128);
    if requested > DEFAULT_DENSE_CAP {
        return Err(Error::SizeOverflow {
            requested,
            cap: DEFAULT_DENSE_CAP,
        });
    }
    Ok(mn)
}

/// Singular value with the `s_i = 0` extension past the rank.
fn extended_sigma(svd: &FullSvd, i: usize) -> f64 {
    if i <= svd.rank() {
        svd.sigma_k(i)
    } else {
        0.0
    }
}

pub fn hessian(svd: &FullSvd, k: usize, gap_tol: f64) -> Result<HessianMatrix> {
    svd.require_simple(k, gap_tol)?;
    let mn = check_dense_cap(svd)?;
    let (m, n) = (svd.rows(), svd.cols());
    let sk = svd.sigma_k(k);
    let uk = svd.left_vector(k);
    let vk = svd.right_vector(k);
    let mut h = RealMatrix::zeros(mn, mn);

    let mut add_dyad = |c: f64, x: &[f64], y: &[f64]| {
        for (col, &yc) in y.iter().enumerate() {
            let s = c * yc;
            if s == 0.0 {
                continue;
            }
            for (row, &xr) in x.iter().enumerate() {
                h[(row, col)] += xr * s;
            }
        }
    };

    for i in (1..=m).filter(|&i| i != k) {
        let si = extended_sigma(svd, i);
        let x = kron_vec(vk, svd.left_vector(i));
        add_dyad(sk / (sk * sk - si * si), &x, &x);
    }
    for j in (1..=n).filter(|&j| j != k) {
        let sj = extended_sigma(svd, j);
        let x = kron_vec(svd.right_vector(j), uk);
        add_dyad(sk / (sk * sk - sj * sj), &x, &x);
    }
    for l in (1..=svd.rank()).filter(|&l| l != k) {
        let sl = svd.sigma_k(l);
        let c = sl / (sk * sk - sl * sl);
        let left = kron_vec(vk, svd.left_vector(l));
        let right = kron_vec(svd.right_vector(l), uk);
        add_dyad(c, &left, &right);
        add_dyad(c, &right, &left);
    }
    Ok(HessianMatrix { k, matrix: h })
}

/// `vec(dA)^T H_k vec(dA)` without forming `H_k`.
pub fn hessian_quadratic_form(
    svd: &FullSvd,
    k: usize,
    direction: &RealMatrix,
    gap_tol: f64,
) -> Result<f64> {
    svd.require_simple(k, gap_tol)?;
    if direction.shape() != (svd.rows(), svd.cols()) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", svd.rows(), svd.cols()),
            found: format!("{}x{}", direction.rows(), direction.cols()),
        });
    }
    let sk = svd.sigma_k(k);
    // alpha_i = u_i^T dA v_k, beta_j = u_k^T dA v_j
    let alpha = svd.u().tr_matvec(&direction.matvec(svd.right_vector(k)));
    let beta = svd.v().tr_matvec(&direction.tr_matvec(svd.left_vector(k)));

    let mut total = 0.0;
    for (i, a) in alpha.iter().enumerate().filter(|(i, _)| i + 1 != k) {
        let si = extended_sigma(svd, i + 1);
        total += sk / (sk * sk - si * si) * a * a;
    }
    for (j, b) in beta.iter().enumerate().filter(|(j, _)| j + 1 != k) {
        let sj = extended_sigma(svd, j + 1);
        total += sk / (sk * sk - sj * sj) * b * b;
    }
    for l in (1..=svd.rank()).filter(|&l| l != k) {
        let sl = svd.sigma_k(l);
        total += 2.0 * sl / (sk * sk - sl * sl) * alpha[l - 1] * beta[l - 1];
    }
    Ok(total)
}

/// Hessian assembled entry by entry from second-order directional
/// derivatives of the general expansion, via
/// `D^2[X, Y] = (D^2[X + Y] - D^2[X - Y]) / 4` on pairs of unit matrices.
///
/// Independent of [`hessian`]; used to cross-check the two.
pub fn hessian_from_polarization(a: &RealMatrix, k: usize, gap_tol: f64) -> Result<HessianMatrix> {
    let svd = FullSvd::new(a, DEFAULT_RANK_TOL)?;
    svd.require_simple(k, gap_tol)?;
    let mn = check_dense_cap(&svd)?;
    let (m, n) = a.shape();
    let config = ExpansionConfig {
        gap_tol,
        ..ExpansionConfig::default()
    };
    let second = |d: RealMatrix| -> Result<f64> {
        let family = PerturbationFamily::linear(a.clone(), d)?;
        Ok(sigma_order_n_with(&family, &svd, k, 2, &config)?.frechet_n)
    };
    let unit = |idx: usize| RealMatrix::unit(m, n, idx % m, idx / m);

    let mut h = RealMatrix::zeros(mn, mn);
    for p in 0..mn {
        h[(p, p)] = second(unit(p))?;
        for q in 0..p {
            let plus = unit(p).add_scaled(1.0, &unit(q))?;
            let minus = unit(p).add_scaled(-1.0, &unit(q))?;
            let v = (second(plus)? - second(minus)?) / 4.0;
            h[(p, q)] = v;
            h[(q, p)] = v;
        }
    }
    Ok(HessianMatrix { k, matrix: h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svd::DEFAULT_GAP_TOL;

    fn svd_of(rows: &[&[f64]]) -> (RealMatrix, FullSvd) {
        let a = RealMatrix::from_rows(rows).unwrap();
        let svd = FullSvd::new(&a, DEFAULT_RANK_TOL).unwrap();
        (a, svd)
    }

    #[test]
    fn jacobian_of_diagonal() {
        let (_, svd) = svd_of(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let j1 = jacobian(&svd, 1, DEFAULT_GAP_TOL).unwrap();
        assert_eq!(
            j1.matrix(),
            &RealMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap()
        );
        let j2 = jacobian(&svd, 2, DEFAULT_GAP_TOL).unwrap();
        assert_eq!(
            j2.matrix(),
            &RealMatrix::from_rows(&[[0.0, 0.0], [0.0, 1.0]]).unwrap()
        );
        assert_eq!(j2.matrix().vec(), j2.kron_form());
    }

    #[test]
    fn hessian_of_diagonal() {
        let (_, svd) = svd_of(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let h1 = hessian(&svd, 1, DEFAULT_GAP_TOL).unwrap();
        let mut want = RealMatrix::zeros(4, 4);
        want[(1, 1)] = 2.0 / 3.0;
        want[(2, 2)] = 2.0 / 3.0;
        want[(1, 2)] = 1.0 / 3.0;
        want[(2, 1)] = 1.0 / 3.0;
        assert!(h1.matrix().max_abs_diff(&want).unwrap() < 1e-15);

        let h2 = hessian(&svd, 2, DEFAULT_GAP_TOL).unwrap();
        let mut want = RealMatrix::zeros(4, 4);
        want[(1, 1)] = -1.0 / 3.0;
        want[(2, 2)] = -1.0 / 3.0;
        want[(1, 2)] = -2.0 / 3.0;
        want[(2, 1)] = -2.0 / 3.0;
        assert!(h2.matrix().max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn quadratic_form_examples() {
        let (a, svd) = svd_of(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let swap = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let q = hessian_quadratic_form(&svd, 1, &swap, DEFAULT_GAP_TOL).unwrap();
        assert!((q - 2.0).abs() < 1e-15);
        assert!(
            hessian_quadratic_form(&svd, 1, &a, DEFAULT_GAP_TOL)
                .unwrap()
                .abs()
                < 1e-15
        );

        let (_, svd) = svd_of(&[&[3.0, 0.0, 0.0], &[0.0, 2.0, 0.0]]);
        let q = hessian_quadratic_form(&svd, 2, &RealMatrix::unit(2, 3, 1, 2), DEFAULT_GAP_TOL)
            .unwrap();
        assert!((q - 0.5).abs() < 1e-15);
        let e13 = RealMatrix::unit(2, 3, 0, 2);
        let h = hessian(&svd, 1, DEFAULT_GAP_TOL).unwrap();
        assert!((h.quadratic_form(&e13) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn polarization_matches_on_diagonal() {
        let (a, svd) = svd_of(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let hp = hessian_from_polarization(&a, 1, DEFAULT_GAP_TOL).unwrap();
        let h = hessian(&svd, 1, DEFAULT_GAP_TOL).unwrap();
        assert!(hp.matrix().max_abs_diff(h.matrix()).unwrap() < 1e-10);
        assert_eq!(hp.matrix().asymmetry(), 0.0);
    }

    #[test]
    fn dense_cap_enforced() {
        let a = RealMatrix::from_fn(65, 64, |i, j| if i == j { 100.0 - i as f64 } else { 0.0 })
            .unwrap();
        let svd = FullSvd::new(&a, DEFAULT_RANK_TOL).unwrap();
        assert!(matches!(
            hessian(&svd, 1, DEFAULT_GAP_TOL),
            Err(Error::SizeOverflow { .. })
        ));
        // the matrix-free form has no cap
        assert!(hessian_quadratic_form(&svd, 1, &a, DEFAULT_GAP_TOL).is_ok());
    }

    #[test]
    fn degenerate_targets_rejected() {
        let (_, svd) = svd_of(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            jacobian(&svd, 1, DEFAULT_GAP_TOL),
            Err(Error::DegenerateSpectrum { .. })
        ));
        assert!(matches!(
            hessian(&svd, 2, DEFAULT_GAP_TOL),
            Err(Error::DegenerateSpectrum { .. })
        ));
        let (_, svd) = svd_of(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            hessian_quadratic_form(&svd, 2, &RealMatrix::identity(2), DEFAULT_GAP_TOL),
            Err(Error::ZeroSingularValue { .. })
        ));
    }
}
