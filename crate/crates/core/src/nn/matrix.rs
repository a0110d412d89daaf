//! Minimal row-major f64 matrix with just the operations the engine needs.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        let m = DenseMatrix { rows: r, cols: c, data };
        m.debug_check();
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// self (r x k) times rhs (k x c).
    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let rr = rhs.row(k);
                let or = out.row_mut(i);
                for (o, &b) in or.iter_mut().zip(rr) {
                    *o += a * b;
                }
            }
        }
        out.debug_check();
        out
    }

    /// selfᵀ (k x r)ᵀ times rhs (k x c) — i.e. self.transpose() * rhs.
    pub fn t_matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, rhs.rows, "t_matmul shape mismatch");
        let mut out = DenseMatrix::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let ar = self.row(k);
            let br = rhs.row(k);
            for (i, &a) in ar.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let or = out.row_mut(i);
                for (o, &b) in or.iter_mut().zip(br) {
                    *o += a * b;
                }
            }
        }
        out.debug_check();
        out
    }

    /// self (r x k) times rhsᵀ (c x k)ᵀ.
    pub fn matmul_t(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.cols, "matmul_t shape mismatch");
        let mut out = DenseMatrix::zeros(self.rows, rhs.rows);
        for i in 0..self.rows {
            let ar = self.row(i);
            for j in 0..rhs.rows {
                let br = rhs.row(j);
                let mut acc = 0.0;
                for (&a, &b) in ar.iter().zip(br) {
                    acc += a * b;
                }
                out.set(i, j, acc);
            }
        }
        out.debug_check();
        out
    }

    /// Column sums as a 1 x cols matrix.
    pub fn col_sum(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(1, self.cols);
        for i in 0..self.rows {
            let r = self.row(i);
            let o = out.row_mut(0);
            for (o, &v) in o.iter_mut().zip(r) {
                *o += v;
            }
        }
        out
    }

    /// Adds a 1 x cols bias row to every row.
    pub fn add_row_broadcast(&mut self, bias: &DenseMatrix) {
        assert_eq!(bias.rows, 1, "bias must be a row vector");
        assert_eq!(bias.cols, self.cols, "bias width mismatch");
        for i in 0..self.rows {
            let b = &bias.data[..];
            let r = self.row_mut(i);
            for (x, &bv) in r.iter_mut().zip(b) {
                *x += bv;
            }
        }
        self.debug_check();
    }

    pub fn add_assign(&mut self, other: &DenseMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in &mut self.data {
            *a *= s;
        }
    }

    pub fn fill_uniform<R: Rng>(&mut self, bound: f64, rng: &mut R) {
        for a in &mut self.data {
            *a = rng.random_range(-bound..bound);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    #[inline]
    pub fn debug_check(&self) {
        debug_assert!(self.is_finite(), "non-finite matrix entry");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = DenseMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_rows(vec![vec![5.0, 6.0], vec![7.0, 8.0]]).unwrap();
        let c = a.matmul(&b);
        assert_eq!(c.row(0), &[19.0, 22.0]);
        assert_eq!(c.row(1), &[43.0, 50.0]);
    }

    #[test]
    fn transposed_products_agree() {
        let a = DenseMatrix::from_rows(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let b = DenseMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]])
            .unwrap();
        // (aᵀ)ᵀ b == a b
        let direct = a.matmul(&b);
        let via_t = {
            let mut at = DenseMatrix::zeros(a.cols(), a.rows());
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    at.set(j, i, a.get(i, j));
                }
            }
            at.t_matmul(&b)
        };
        assert_eq!(direct, via_t);
    }
}
