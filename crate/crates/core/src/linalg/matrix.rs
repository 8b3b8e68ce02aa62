use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Row-major dense `f64` matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        Matrix::new(raw.rows, raw.cols, raw.data)
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("matrix"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        self.matmul_with(rhs, Execution::default())
    }

    /// `self · rhs`. Each output row accumulates over the inner index in
    /// ascending order, so both execution modes agree bit for bit.
    pub fn matmul_with(&self, rhs: &Matrix, exec: Execution) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        if rhs.cols == 0 {
            return Ok(out);
        }
        exec.for_each_chunk(&mut out.data, rhs.cols, |i, orow| {
            for (k, &a) in self.row(i).iter().enumerate() {
                for (o, &b) in orow.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        });
        Ok(out)
    }

    /// `selfᵀ · rhs`.
    pub fn t_matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        self.t_matmul_with(rhs, Execution::default())
    }

    pub fn t_matmul_with(&self, rhs: &Matrix, exec: Execution) -> Result<Matrix> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot form AᵀB with {} and {} rows",
                self.rows, rhs.rows
            )));
        }
        self.transpose().matmul_with(rhs, exec)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    /// Adds `s` to every diagonal entry of a square matrix.
    pub fn add_diagonal(&mut self, s: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += s;
        }
    }

    /// Largest eigenvalue of a symmetric positive semi-definite matrix by
    /// power iteration.
    pub fn spd_spectral_radius(&self) -> f64 {
        let n = self.rows;
        if n == 0 {
            return 0.0;
        }
        // Irregular start vector so it is unlikely to be orthogonal to the top
        // eigenvector; the diagonal maximum is a floor for PSD input.
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + (i as f64 * 0.618_034).fract())
            .collect();
        let floor = (0..n).map(|i| self.get(i, i)).fold(0.0, f64::max);
        let mut lambda = 0.0;
        for _ in 0..200 {
            let w: Vec<f64> = (0..n)
                .map(|r| self.row(r).iter().zip(&v).map(|(a, b)| a * b).sum())
                .collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return floor;
            }
            let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
            v = w.into_iter().map(|x| x / norm).collect();
            if (next - lambda).abs() <= 1e-12 * next.abs() {
                return next.max(floor);
            }
            lambda = next;
        }
        lambda.max(floor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_data() {
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(matches!(
            Matrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFiniteInput(_))
        ));
    }

    #[test]
    fn matmul_small() {
        let a = Matrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = Matrix::new(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
        let g = a.t_matmul(&a).unwrap();
        assert_eq!(
            g.data(),
            &[17.0, 22.0, 27.0, 22.0, 29.0, 36.0, 27.0, 36.0, 45.0]
        );
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn modes_agree_bitwise() {
        let a = Matrix::from_fn(37, 13, |r, c| ((r * 31 + c * 17) % 23) as f64 / 7.0 - 1.3);
        let b = Matrix::from_fn(13, 11, |r, c| ((r * 5 + c * 3) % 19) as f64 / 3.0 - 2.9);
        assert_eq!(
            a.matmul_with(&b, Execution::Sequential).unwrap(),
            a.matmul_with(&b, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn spectral_radius_of_diagonal() {
        let mut m = Matrix::zeros(3, 3);
        m.set(0, 0, 2.0);
        m.set(1, 1, 5.0);
        m.set(2, 2, 1.0);
        assert!((m.spd_spectral_radius() - 5.0).abs() < 1e-9);
        assert_eq!(Matrix::zeros(2, 2).spd_spectral_radius(), 0.0);
    }

    #[test]
    fn serde_validates() {
        let m: Matrix = serde_json::from_str(r#"{"rows":1,"cols":2,"data":[1.5,-2]}"#).unwrap();
        assert_eq!(m.row(0), &[1.5, -2.0]);
        assert!(serde_json::from_str::<Matrix>(r#"{"rows":2,"cols":2,"data":[1]}"#).is_err());
    }
}
