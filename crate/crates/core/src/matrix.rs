//! Dense real matrices with column-major storage.
//!
//! `vec` stacks columns, so entry `(i, j)` (0-based) of an `m x n` matrix
//! sits at position `j * m + i`. Kronecker products follow the usual
//! convention `vec(C X B^T) = (B ⊗ C) vec(X)`.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::path::Path;

use crate::error::{Error, Result};

/// Default cap on the number of entries of a dense Kronecker product
/// (a 4096 x 4096 output).
pub const DEFAULT_DENSE_CAP: u128 = 4096 * 4096;

/// Dense real `rows x cols` matrix. Entries are finite.
#[derive(Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos % rows,
                col: pos / rows,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.as_ref().len() != n) {
            return Err(Error::DimensionMismatch {
                expected: format!("rows of length {n}"),
                found: format!("row of length {}", bad.as_ref().len()),
            });
        }
        let mut data = vec![0.0; m * n];
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.as_ref().iter().enumerate() {
                data[j * m + i] = x;
            }
        }
        Self::from_col_major(m, n, data)
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::from_col_major(rows, cols, data)
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 1.0;
        }
        a
    }

    /// Column vector (`len x 1`).
    pub fn column_vector(values: &[f64]) -> Result<Self> {
        Self::from_col_major(values.len(), 1, values.to_vec())
    }

    /// The `rows x cols` matrix with a single one at `(i, j)` (0-based).
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut a = Self::zeros(rows, cols);
        a[(i, j)] = 1.0;
        a
    }

    /// Diagonal `rows x cols` matrix with `diag` on the main diagonal.
    pub fn diagonal(rows: usize, cols: usize, diag: &[f64]) -> Result<Self> {
        if diag.len() > rows.min(cols) {
            return Err(Error::DimensionMismatch {
                expected: format!("at most {} diagonal entries", rows.min(cols)),
                found: format!("{}", diag.len()),
            });
        }
        Self::from_fn(rows, cols, |i, j| {
            if i == j && i < diag.len() {
                diag[i]
            } else {
                0.0
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Column-major backing storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    /// Column-major vectorization.
    pub fn vec(&self) -> Vec<f64> {
        self.data.clone()
    }

    /// Inverse of [`RealMatrix::vec`].
    pub fn unvec(v: &[f64], rows: usize, cols: usize) -> Result<Self> {
        Self::from_col_major(rows, cols, v.to_vec())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows on the right", self.cols),
                found: format!("{}x{}", rhs.rows, rhs.cols),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for l in 0..self.cols {
                let b = rhs[(l, j)];
                if b == 0.0 {
                    continue;
                }
                for (d, a) in dst.iter_mut().zip(self.column(l)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (yi, a) in y.iter_mut().zip(self.column(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    /// `A^T x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "tr_matvec dimension mismatch");
        (0..self.cols).map(|j| dot(self.column(j), x)).collect()
    }

    /// `u^T A v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, &self.matvec(v))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    /// Frobenius inner product `<A, B>_F`.
    pub fn frobenius_dot(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(dot(&self.data, &other.data))
    }

    pub fn norm_fro(&self) -> f64 {
        norm2(&self.data)
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `max |A - A^T|` for square matrices.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "asymmetry of a non-square matrix");
        let mut worst: f64 = 0.0;
        for j in 0..self.cols {
            for i in 0..j {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                found: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(())
    }

    pub(crate) fn to_faer(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, f64>) -> Result<Self> {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Reads an RFC-4180 CSV file, one matrix row per record.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv_from(file)
    }

    pub fn read_csv_from(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let row = record
                .iter()
                .enumerate()
                .map(|(col, f)| {
                    f.parse::<f64>().map_err(|e| {
                        Error::Parse(format!(
                            "record {}, field {}: {f:?}: {e}",
                            line + 1,
                            col + 1
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("no matrix rows found".into()));
        }
        Self::from_rows(&rows).map_err(|e| match e {
            Error::NonFinite { row, col } => Error::Parse(format!(
                "non-finite value at row {}, column {}",
                row + 1,
                col + 1
            )),
            Error::DimensionMismatch { .. } => Error::Parse("ragged rows".into()),
            other => other,
        })
    }

    /// Writes CSV with 17 significant digits per entry.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv_to(file)
    }

    pub fn write_csv_to(&self, writer: impl std::io::Write) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for i in 0..self.rows {
            wtr.write_record(self.row(i).iter().map(|x| format!("{x:.16e}")))
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RealMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Kronecker product `B ⊗ C` under [`DEFAULT_DENSE_CAP`].
pub fn kron(b: &RealMatrix, c: &RealMatrix) -> Result<RealMatrix> {
    kron_with_cap(b, c, DEFAULT_DENSE_CAP)
}

pub fn kron_with_cap(b: &RealMatrix, c: &RealMatrix, cap: u128) -> Result<RealMatrix> {
    let requested = (b.rows * c.rows) as u128 * (b.cols * c.cols) as u128;
    if requested > cap {
        return Err(Error::SizeOverflow { requested, cap });
    }
    let (p, q) = c.shape();
    let mut out = RealMatrix::zeros(b.rows * p, b.cols * q);
    for jb in 0..b.cols {
        for ib in 0..b.rows {
            let s = b[(ib, jb)];
            if s == 0.0 {
                continue;
            }
            for jc in 0..q {
                for ic in 0..p {
                    out[(ib * p + ic, jb * q + jc)] = s * c[(ic, jc)];
                }
            }
        }
    }
    Ok(out)
}

/// `a ⊗ b` for plain vectors.
pub fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_is_column_major() {
        let a = RealMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(a.vec(), vec![1.0, 3.0, 2.0, 4.0]);

        let b = RealMatrix::from_rows(&[[0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]).unwrap();
        let mut e5 = vec![0.0; 6];
        e5[4] = 1.0;
        assert_eq!(b.vec(), e5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            RealMatrix::from_col_major(0, 3, vec![]),
            Err(Error::EmptyMatrix { .. })
        ));
        assert!(matches!(
            RealMatrix::from_rows(&[[1.0, f64::NAN]]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            RealMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kron_basics() {
        assert_eq!(
            kron(&RealMatrix::identity(2), &RealMatrix::identity(2)).unwrap(),
            RealMatrix::identity(4)
        );
        let e2 = RealMatrix::column_vector(&[0.0, 1.0]).unwrap();
        let e1 = RealMatrix::column_vector(&[1.0, 0.0]).unwrap();
        assert_eq!(kron(&e2, &e1).unwrap().vec(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(kron_vec(&[0.0, 1.0], &[1.0, 0.0]), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn kron_cap() {
        let a = RealMatrix::zeros(3, 3);
        assert!(matches!(
            kron_with_cap(&a, &a, 80),
            Err(Error::SizeOverflow {
                requested: 81,
                cap: 80
            })
        ));
        assert!(kron_with_cap(&a, &a, 81).is_ok());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let a =
            RealMatrix::from_rows(&[[0.1, -2.0 / 3.0, 1e-300], [std::f64::consts::PI, 5.0, -0.0]])
                .unwrap();
        let mut buf = Vec::new();
        a.write_csv_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("1.0000000000000001e-1,"));
        let b = RealMatrix::read_csv_from(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_reader_accepts_loose_floats() {
        let b = RealMatrix::read_csv_from(" 1, 2.5\n\"3\",4e0\n".as_bytes()).unwrap();
        assert_eq!(b, RealMatrix::from_rows(&[[1.0, 2.5], [3.0, 4.0]]).unwrap());
        assert!(matches!(
            RealMatrix::read_csv_from("1,x\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            RealMatrix::read_csv_from("1,2\n3\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            RealMatrix::read_csv_from("1,NaN\n".as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn matmul_and_transpose() {
        let a = RealMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let ata = a.transpose().matmul(&a).unwrap();
        assert_eq!(ata.shape(), (3, 3));
        assert_eq!(ata[(0, 0)], 17.0);
        assert_eq!(ata[(1, 2)], 36.0);
        assert_eq!(a.matvec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
        assert_eq!(a.tr_matvec(&[1.0, 1.0]), vec![5.0, 7.0, 9.0]);
        assert!(a.matmul(&a).is_err());
    }
}
