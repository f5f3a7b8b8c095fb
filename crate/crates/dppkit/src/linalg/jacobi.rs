//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Each rotation zeroes `a[p][q]` with the unitary
//! `U = [[c, s], [-s·conj(e), c·conj(e)]]`, `e = a[p][q]/|a[p][q]|`, embedded in
//! rows/cols `p, q`. Eigenvectors are kept as rows of `V^T` so every update
//! walks contiguous memory. Real symmetric input takes a separate `f64` path.

use super::{CMat, C64, ZERO};
use crate::error::{Error, Result};

/// Eigenpairs sorted by descending eigenvalue; `vectors` has eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
    pub sweeps: usize,
}

/// Real symmetric matrices above this size go through tridiagonal QL instead of Jacobi.
pub const TRIDIAG_THRESHOLD: usize = 96;

/// Decompose a Hermitian matrix. Jacobi is converged when the off-diagonal Frobenius norm
/// drops below `tol · max(1, ‖A‖_F)`.
pub fn eigh(a: &CMat, tol: f64, max_sweeps: usize) -> Result<Eigh> {
    assert_eq!(a.rows(), a.cols());
    if a.is_real() {
        if a.rows() > TRIDIAG_THRESHOLD {
            return eigh_tridiag(a);
        }
        eigh_real(a, tol, max_sweeps)
    } else {
        eigh_complex(a, tol, max_sweeps)
    }
}

/// Cyclic Jacobi regardless of size.
pub fn eigh_jacobi(a: &CMat, tol: f64, max_sweeps: usize) -> Result<Eigh> {
    if a.is_real() {
        eigh_real(a, tol, max_sweeps)
    } else {
        eigh_complex(a, tol, max_sweeps)
    }
}

fn eigh_tridiag(a: &CMat) -> Result<Eigh> {
    let n = a.rows();
    let m: Vec<f64> = a.data().iter().map(|z| z.re).collect();
    let (d, v) = super::tridiag::symmetric_eigen(&m, n).map_err(Error::Numerical)?;
    let rows = (0..n).map(|k| (0..n).map(|i| C64::new(v[i * n + k], 0.0)).collect()).collect();
    Ok(finish(d, rows, 0))
}

#[inline]
fn rotation(app: f64, aqq: f64, r: f64) -> (f64, f64, f64) {
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (t, c, t * c)
}

fn finish(mut values: Vec<f64>, vt_rows: Vec<Vec<C64>>, sweeps: usize) -> Eigh {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap().then(i.cmp(&j)));
    let vectors = CMat::from_fn(n, n, |i, k| vt_rows[order[k]][i]);
    values = order.iter().map(|&k| values[k]).collect();
    Eigh { values, vectors, sweeps }
}

fn eigh_real(a: &CMat, tol: f64, max_sweeps: usize) -> Result<Eigh> {
    let n = a.rows();
    let mut m: Vec<f64> = a.data().iter().map(|z| z.re).collect();
    let mut vt: Vec<f64> = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let scale = a.frobenius().max(1.0);
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&m) > tol * scale {
        if sweeps == max_sweeps {
            return Err(Error::Numerical(format!("Jacobi did not converge in {max_sweeps} sweeps")));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let (t, c, s) = rotation(app, aqq, apq.abs());
                let e = apq.signum();
                let (lo, hi) = m.split_at_mut(q * n);
                let rp = &mut lo[p * n..p * n + n];
                let rq = &mut hi[..n];
                for k in 0..n {
                    let x = rp[k];
                    let y = rq[k];
                    rp[k] = c * x - s * e * y;
                    rq[k] = s * x + c * e * y;
                }
                for k in 0..n {
                    if k != p && k != q {
                        m[k * n + p] = m[p * n + k];
                        m[k * n + q] = m[q * n + k];
                    }
                }
                m[p * n + p] = app - t * apq.abs();
                m[q * n + q] = aqq + t * apq.abs();
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                let (lo, hi) = vt.split_at_mut(q * n);
                let vp = &mut lo[p * n..p * n + n];
                let vq = &mut hi[..n];
                for k in 0..n {
                    let x = vp[k];
                    let y = vq[k];
                    vp[k] = c * x - s * e * y;
                    vq[k] = s * x + c * e * y;
                }
            }
        }
    }
    let values = (0..n).map(|i| m[i * n + i]).collect();
    let rows = (0..n).map(|i| vt[i * n..(i + 1) * n].iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
    Ok(finish(values, rows, sweeps))
}

fn eigh_complex(a: &CMat, tol: f64, max_sweeps: usize) -> Result<Eigh> {
    let n = a.rows();
    let mut m: Vec<C64> = a.data().to_vec();
    // Rows of conj(V)^T: row p holds conj(V[:, p]) so that V <- V U is a row update.
    let mut w: Vec<C64> = vec![ZERO; n * n];
    for i in 0..n {
        w[i * n + i] = C64::new(1.0, 0.0);
    }
    let scale = a.frobenius().max(1.0);
    let off = |m: &[C64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&m) > tol * scale {
        if sweeps == max_sweeps {
            return Err(Error::Numerical(format!("Jacobi did not converge in {max_sweeps} sweeps")));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let e = apq / r;
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let (t, c, s) = rotation(app, aqq, r);
                // Rows of U^* A.
                let (lo, hi) = m.split_at_mut(q * n);
                let rp = &mut lo[p * n..p * n + n];
                let rq = &mut hi[..n];
                for k in 0..n {
                    let x = rp[k];
                    let y = rq[k];
                    rp[k] = x * c - e * y * s;
                    rq[k] = x * s + e * y * c;
                }
                for k in 0..n {
                    if k != p && k != q {
                        m[k * n + p] = m[p * n + k].conj();
                        m[k * n + q] = m[q * n + k].conj();
                    }
                }
                m[p * n + p] = C64::new(app - t * r, 0.0);
                m[q * n + q] = C64::new(aqq + t * r, 0.0);
                m[p * n + q] = ZERO;
                m[q * n + p] = ZERO;
                // Columns of V U, conjugated: conj(V'_kp) = c conj(V_kp) - s e conj(V_kq).
                let (lo, hi) = w.split_at_mut(q * n);
                let vp = &mut lo[p * n..p * n + n];
                let vq = &mut hi[..n];
                for k in 0..n {
                    let x = vp[k];
                    let y = vq[k];
                    vp[k] = x * c - e * y * s;
                    vq[k] = x * s + e * y * c;
                }
            }
        }
    }
    let values = (0..n).map(|i| m[i * n + i].re).collect();
    let rows = (0..n).map(|i| w[i * n..(i + 1) * n].iter().map(|z| z.conj()).collect()).collect();
    Ok(finish(values, rows, sweeps))
}
