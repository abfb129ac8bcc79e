//! Portable seeded random matrices.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`. Uniform variates take the top 53 bits of each
//! `u64` output, `(x >> 11) * 2^-53`, giving values in `[0, 1)`. Normal
//! variates use the Box–Muller transform on consecutive uniform pairs
//! `(u1, u2)`: `r = sqrt(-2 ln(1 - u1))`, yielding `r cos(2π u2)` then
//! `r sin(2π u2)`. The transcendental functions come from `libm`, so the
//! same seed produces the same bits on every platform.
//!
//! Matrices are filled in row-major order (row 0 left to right, then row 1, ...).
//! Independent streams for the same seed (matrix, directions, ...) are
//! selected with ChaCha's stream counter.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;

/// Entry distribution for generated matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distribution {
    #[serde(rename = "normal01")]
    Normal01,
    #[serde(rename = "uniform01")]
    Uniform01,
}

impl Distribution {
    pub fn name(self) -> &'static str {
        match self {
            Distribution::Normal01 => "normal01",
            Distribution::Uniform01 => "uniform01",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal01" => Ok(Distribution::Normal01),
            "uniform01" => Ok(Distribution::Uniform01),
            other => Err(Error::InvalidArgument(format!(
                "unknown distribution {other:?} (expected normal01 or uniform01)"
            ))),
        }
    }
}

/// Stream used for the matrix itself.
pub const MATRIX_STREAM: u64 = 0;
/// Stream used for perturbation directions.
pub const DIRECTION_STREAM: u64 = 1;

pub struct MatrixRng {
    rng: ChaCha20Rng,
    spare_normal: Option<f64>,
}

impl MatrixRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, MATRIX_STREAM)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            spare_normal: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(1.0 - u1));
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }

    pub fn sample(&mut self, dist: Distribution) -> f64 {
        match dist {
            Distribution::Normal01 => self.normal(),
            Distribution::Uniform01 => self.uniform(),
        }
    }

    pub fn matrix(&mut self, rows: usize, cols: usize, dist: Distribution) -> Result<RealMatrix> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        let mut data = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                data[j * rows + i] = self.sample(dist);
            }
        }
        RealMatrix::from_col_major(rows, cols, data)
    }

    /// Standard-normal matrix scaled to unit Frobenius norm.
    pub fn unit_direction(&mut self, rows: usize, cols: usize) -> Result<RealMatrix> {
        let d = self.matrix(rows, cols, Distribution::Normal01)?;
        let norm = d.norm_fro();
        Ok(d.scale(1.0 / norm))
    }
}

/// Matrix drawn from `dist` with the given seed.
pub fn random_matrix(
    seed: u64,
    rows: usize,
    cols: usize,
    dist: Distribution,
) -> Result<RealMatrix> {
    MatrixRng::new(seed).matrix(rows, cols, dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = random_matrix(1, 6, 10, Distribution::Normal01).unwrap();
        let b = random_matrix(1, 6, 10, Distribution::Normal01).unwrap();
        let c = random_matrix(2, 6, 10, Distribution::Normal01).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_range() {
        let a = random_matrix(1, 6, 10, Distribution::Uniform01).unwrap();
        assert!(a.as_slice().iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn normal_moments_are_plausible() {
        let mut rng = MatrixRng::new(7);
        let xs: Vec<f64> = (0..20000).map(|_| rng.normal()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.03, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn streams_are_independent() {
        let a = MatrixRng::with_stream(1, MATRIX_STREAM)
            .matrix(2, 2, Distribution::Uniform01)
            .unwrap();
        let b = MatrixRng::with_stream(1, DIRECTION_STREAM)
            .matrix(2, 2, Distribution::Uniform01)
            .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn unit_direction_has_unit_norm() {
        let d = MatrixRng::new(3).unit_direction(3, 4).unwrap();
        assert!((d.norm_fro() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parses_names() {
        assert_eq!(
            "normal01".parse::<Distribution>().unwrap(),
            Distribution::Normal01
        );
        assert!("gauss".parse::<Distribution>().is_err());
    }
}
