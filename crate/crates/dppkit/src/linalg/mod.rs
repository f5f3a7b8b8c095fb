//! Dense complex matrices and the small set of factorizations the toolkit needs.

mod jacobi;
pub mod nnls;
mod tridiag;

pub use jacobi::{eigh, eigh_jacobi, Eigh, TRIDIAG_THRESHOLD};

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, v: &[f64]) -> Self {
        assert_eq!(v.len(), rows * cols);
        CMat { rows, cols, data: v.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for (o, b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Principal submatrix on the given index list.
    pub fn submatrix(&self, idx: &[usize]) -> CMat {
        CMat::from_fn(idx.len(), idx.len(), |a, b| self[(idx[a], idx[b])])
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Determinant by LU with partial pivoting.
pub fn det(m: &CMat) -> C64 {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a = m.data.clone();
    let mut d = ONE;
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].norm();
        for i in k + 1..n {
            let v = a[i * n + k].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return ZERO;
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            d = -d;
        }
        let akk = a[k * n + k];
        d *= akk;
        let inv = akk.inv();
        for i in k + 1..n {
            let f = a[i * n + k] * inv;
            if f == ZERO {
                continue;
            }
            for j in k + 1..n {
                let t = a[k * n + j];
                a[i * n + j] -= f * t;
            }
        }
    }
    d
}

/// Outcome of a Cholesky attempt on a Hermitian positive semidefinite matrix.
#[derive(Debug, Clone)]
pub enum Cholesky {
    /// Lower factor, row-major, all pivots at least `floor`.
    Factor(CMat),
    /// A pivot fell below `floor`; carries its index and value.
    SmallPivot { index: usize, pivot: f64 },
}

/// Plain Cholesky; stops at the first pivot below `floor`.
pub fn cholesky(m: &CMat, floor: f64) -> Cholesky {
    let n = m.rows;
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut s = m[(j, j)].re;
        for k in 0..j {
            s -= l[(j, k)].norm_sqr();
        }
        if !(s >= floor) {
            return Cholesky::SmallPivot { index: j, pivot: s };
        }
        let d = s.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut t = m[(i, j)];
            for k in 0..j {
                t -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = t / d;
        }
    }
    Cholesky::Factor(l)
}

/// Solve `L w = b` for lower-triangular `L`.
pub fn forward_subst(l: &CMat, b: &[C64]) -> Vec<C64> {
    let n = l.rows;
    let mut w = vec![ZERO; n];
    for i in 0..n {
        let mut t = b[i];
        for k in 0..i {
            t -= l[(i, k)] * w[k];
        }
        w[i] = t / l[(i, i)];
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_det(m: &CMat) -> C64 {
        let n = m.rows();
        if n == 0 {
            return ONE;
        }
        if n == 1 {
            return m[(0, 0)];
        }
        let mut s = ZERO;
        for j in 0..n {
            let minor = CMat::from_fn(n - 1, n - 1, |a, b| m[(a + 1, if b < j { b } else { b + 1 })]);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += m[(0, j)] * brute_det(&minor) * sign;
        }
        s
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        let m = CMat::from_fn(4, 4, |i, j| C64::new((i * 3 + j * 7 % 5) as f64 * 0.3 - 1.0, (i as f64 - j as f64) * 0.2));
        assert!((det(&m) - brute_det(&m)).norm() < 1e-12);
    }

    #[test]
    fn cholesky_reconstructs() {
        let b = CMat::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, (i * j) as f64 * 0.5));
        let mut g = b.adjoint().matmul(&b);
        for i in 0..3 {
            g[(i, i)] += ONE;
        }
        let Cholesky::Factor(l) = cholesky(&g, 1e-14) else { panic!() };
        assert!(l.matmul(&l.adjoint()).max_abs_diff(&g) < 1e-12);
    }

    #[test]
    fn cholesky_flags_singular() {
        let g = CMat::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(cholesky(&g, 1e-14), Cholesky::SmallPivot { index: 1, .. }));
    }
}
