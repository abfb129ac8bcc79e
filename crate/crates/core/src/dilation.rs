//! The self-adjoint dilation `T = [[0, A], [A^T, 0]]` of a rectangular `A`
//! and its eigensystem, assembled from a [`FullSvd`].
//!
//! For `i ≤ r` the dilation has eigenpairs `(±sigma_i, (u_i; ±v_i)/√2)`;
//! the trailing columns of `U` and `V` give zero eigenvectors `(u_j; 0)`
//! and `(0; v_j)`. `T` itself is only ever applied blockwise.

use crate::matrix::{dot, RealMatrix};
use crate::svd::FullSvd;

/// Element of `R^m ⊕ R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    pub top: Vec<f64>,
    pub bottom: Vec<f64>,
}

impl BlockVector {
    pub fn new(top: Vec<f64>, bottom: Vec<f64>) -> Self {
        Self { top, bottom }
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self::new(vec![0.0; m], vec![0.0; n])
    }

    /// Splits a stacked vector of length `m + n`.
    pub fn from_stacked(v: &[f64], m: usize) -> Self {
        Self::new(v[..m].to_vec(), v[m..].to_vec())
    }

    pub fn stacked(&self) -> Vec<f64> {
        let mut v = self.top.clone();
        v.extend_from_slice(&self.bottom);
        v
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.top.len(), self.bottom.len())
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.top, &other.top) + dot(&self.bottom, &other.bottom)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(
            self.top.iter().map(|x| c * x).collect(),
            self.bottom.iter().map(|x| c * x).collect(),
        )
    }

    /// `self += c * x`.
    pub fn axpy(&mut self, c: f64, x: &Self) {
        for (a, b) in self.top.iter_mut().zip(&x.top) {
            *a += c * b;
        }
        for (a, b) in self.bottom.iter_mut().zip(&x.bottom) {
            *a += c * b;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }
}

/// Eigenvalue together with its unit eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: BlockVector,
}

/// Complete orthonormal eigenbasis of the dilation of `A`.
#[derive(Debug, Clone)]
pub struct DilationSpectrum {
    m: usize,
    n: usize,
    pub pos_pairs: Vec<EigenPair>,
    pub neg_pairs: Vec<EigenPair>,
    pub left_null: Vec<BlockVector>,
    pub right_null: Vec<BlockVector>,
}

pub fn build_dilation_spectrum(svd: &FullSvd) -> DilationSpectrum {
    let (m, n) = (svd.rows(), svd.cols());
    let r = svd.rank();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut pos_pairs = Vec::with_capacity(r);
    let mut neg_pairs = Vec::with_capacity(r);
    for i in 1..=r {
        let u = svd.left_vector(i);
        let v = svd.right_vector(i);
        let s = svd.sigma_k(i);
        pos_pairs.push(EigenPair {
            value: s,
            vector: BlockVector::new(
                u.iter().map(|x| h * x).collect(),
                v.iter().map(|x| h * x).collect(),
            ),
        });
        neg_pairs.push(EigenPair {
            value: -s,
            vector: BlockVector::new(
                u.iter().map(|x| h * x).collect(),
                v.iter().map(|x| -h * x).collect(),
            ),
        });
    }
    let left_null = (r + 1..=m)
        .map(|j| BlockVector::new(svd.left_vector(j).to_vec(), vec![0.0; n]))
        .collect();
    let right_null = (r + 1..=n)
        .map(|j| BlockVector::new(vec![0.0; m], svd.right_vector(j).to_vec()))
        .collect();
    DilationSpectrum {
        m,
        n,
        pos_pairs,
        neg_pairs,
        left_null,
        right_null,
    }
}

impl DilationSpectrum {
    /// `(m, n)` of the underlying matrix.
    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn rank(&self) -> usize {
        self.pos_pairs.len()
    }

    /// Every `(eigenvalue, eigenvector)` in the order positive, negative,
    /// left-null, right-null.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &BlockVector)> {
        self.pos_pairs
            .iter()
            .chain(&self.neg_pairs)
            .map(|p| (p.value, &p.vector))
            .chain(
                self.left_null
                    .iter()
                    .chain(&self.right_null)
                    .map(|v| (0.0, v)),
            )
    }

    /// `max |W^T W - I|` over the full eigenbasis.
    pub fn gram_residual(&self) -> f64 {
        let vecs: Vec<&BlockVector> = self.iter().map(|(_, v)| v).collect();
        let mut worst: f64 = 0.0;
        for (i, a) in vecs.iter().enumerate() {
            for (j, b) in vecs.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }

    /// `max ||T w - lambda w||_2` over all eigenpairs, with `T` the dilation of `a`.
    pub fn eigen_residual(&self, a: &RealMatrix) -> f64 {
        self.iter()
            .map(|(lambda, w)| apply_direction(a, w).sub(&w.scale(lambda)).norm())
            .fold(0.0, f64::max)
    }
}

/// Action of the dilation of `direction` on `w`:
/// `(direction * bottom ; direction^T * top)`.
///
/// # Panics
/// If `w` is not conformable with `direction`.
pub fn apply_direction(direction: &RealMatrix, w: &BlockVector) -> BlockVector {
    assert_eq!(
        w.dims(),
        direction.shape(),
        "block vector does not conform to the direction matrix"
    );
    BlockVector::new(direction.matvec(&w.bottom), direction.tr_matvec(&w.top))
}

/// Dense `(m + n) x (m + n)` dilation of `a`. Test and diagnostics helper only.
pub fn dilation_matrix(a: &RealMatrix) -> RealMatrix {
    let (m, n) = a.shape();
    let mut t = RealMatrix::zeros(m + n, m + n);
    for i in 0..m {
        for j in 0..n {
            t[(i, m + j)] = a[(i, j)];
            t[(m + j, i)] = a[(i, j)];
        }
    }
    t
}
