//! Lawson–Hanson non-negative least squares.
//!
//! Householder form of the original algorithm: columns stay in the rotated coordinates of
//! the current passive set, the gradient is read off the untouched rows, and a column only
//! enters if it is numerically independent of the passive set.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

const FACTOR: f64 = 0.01;

/// Householder vector for `u[p..]`, stored in place; returns the extra component `up`.
fn householder(u: &mut [f64], p: usize) -> f64 {
    let m = u.len();
    if p + 1 >= m {
        return 0.0;
    }
    let cl = u[p..].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if cl <= 0.0 {
        return 0.0;
    }
    let sm: f64 = u[p..].iter().map(|v| (v / cl).powi(2)).sum();
    let mut c = cl * sm.sqrt();
    if u[p] > 0.0 {
        c = -c;
    }
    let up = u[p] - c;
    u[p] = c;
    up
}

fn apply_householder(u: &[f64], up: f64, p: usize, c: &mut [f64]) {
    let m = u.len();
    if p + 1 >= m {
        return;
    }
    let b = up * u[p];
    if b >= 0.0 {
        return;
    }
    let mut sm = c[p] * up;
    for i in p + 1..m {
        sm += c[i] * u[i];
    }
    if sm != 0.0 {
        sm /= b;
        c[p] += sm * up;
        for i in p + 1..m {
            c[i] += sm * u[i];
        }
    }
}

fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    if a.abs() > b.abs() {
        let xr = b / a;
        let yr = (1.0 + xr * xr).sqrt();
        let c = (1.0 / yr).copysign(a);
        (c, c * xr, a.abs() * yr)
    } else if b != 0.0 {
        let xr = a / b;
        let yr = (1.0 + xr * xr).sqrt();
        let s = (1.0 / yr).copysign(b);
        (s * xr, s, b.abs() * yr)
    } else {
        (0.0, 1.0, 0.0)
    }
}

fn back_substitute(cols: &[Vec<f64>], index: &[usize], nsetp: usize, zz: &mut [f64]) {
    let mut jj = 0;
    for l in 0..nsetp {
        let ip = nsetp - 1 - l;
        if l != 0 {
            for ii in 0..=ip {
                zz[ii] -= cols[jj][ii] * zz[ip + 1];
            }
        }
        jj = index[ip];
        zz[ip] /= cols[jj][ip];
    }
}

/// Minimize ‖A x − b‖₂ subject to x ≥ 0. `max_iter` bounds the inner (removal) iterations.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> NnlsSolution {
    let (m, n) = (a.nrows(), a.ncols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j).iter().copied().collect()).collect();
    let mut b: Vec<f64> = b.iter().copied().collect();
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut zz = vec![0.0; m];
    let mut index: Vec<usize> = (0..n).collect();
    let mut iz1 = 0;
    let mut nsetp = 0;
    let mut iterations = 0;
    'main: while iz1 < n && nsetp < m {
        for &j in &index[iz1..] {
            w[j] = (nsetp..m).map(|l| cols[j][l] * b[l]).sum();
        }
        let (iz, j, up) = loop {
            let mut best: Option<usize> = None;
            let mut wmax = 0.0;
            for iz in iz1..n {
                if w[index[iz]] > wmax {
                    wmax = w[index[iz]];
                    best = Some(iz);
                }
            }
            let Some(iz) = best else { break 'main };
            let j = index[iz];
            let asave = cols[j][nsetp];
            let up = householder(&mut cols[j], nsetp);
            let unorm = cols[j][..nsetp].iter().map(|v| v * v).sum::<f64>().sqrt();
            if (unorm + cols[j][nsetp].abs() * FACTOR) - unorm > 0.0 {
                zz.copy_from_slice(&b);
                apply_householder(&cols[j], up, nsetp, &mut zz);
                if zz[nsetp] / cols[j][nsetp] > 0.0 {
                    break (iz, j, up);
                }
            }
            cols[j][nsetp] = asave;
            w[j] = 0.0;
        };
        b.copy_from_slice(&zz);
        index[iz] = index[iz1];
        index[iz1] = j;
        iz1 += 1;
        let pivot = nsetp;
        nsetp += 1;
        let u = cols[j].clone();
        for &jj in &index[iz1..] {
            apply_householder(&u, up, pivot, &mut cols[jj]);
        }
        for v in cols[j][nsetp..].iter_mut() {
            *v = 0.0;
        }
        w[j] = 0.0;
        back_substitute(&cols, &index, nsetp, &mut zz);
        loop {
            iterations += 1;
            if iterations > max_iter {
                break 'main;
            }
            let mut alpha = 2.0;
            let mut jj = 0;
            for ip in 0..nsetp {
                let l = index[ip];
                if zz[ip] <= 0.0 {
                    let t = -x[l] / (zz[ip] - x[l]);
                    if alpha > t {
                        alpha = t;
                        jj = ip;
                    }
                }
            }
            if alpha == 2.0 {
                break;
            }
            for ip in 0..nsetp {
                let l = index[ip];
                x[l] += alpha * (zz[ip] - x[l]);
            }
            let mut i = index[jj];
            loop {
                x[i] = 0.0;
                for jpos in jj + 1..nsetp {
                    let ii = index[jpos];
                    index[jpos - 1] = ii;
                    let (c, s, sig) = givens(cols[ii][jpos - 1], cols[ii][jpos]);
                    cols[ii][jpos - 1] = sig;
                    cols[ii][jpos] = 0.0;
                    for (l, col) in cols.iter_mut().enumerate() {
                        if l != ii {
                            let (p, q) = (col[jpos - 1], col[jpos]);
                            col[jpos - 1] = c * p + s * q;
                            col[jpos] = -s * p + c * q;
                        }
                    }
                    let (p, q) = (b[jpos - 1], b[jpos]);
                    b[jpos - 1] = c * p + s * q;
                    b[jpos] = -s * p + c * q;
                }
                nsetp -= 1;
                iz1 -= 1;
                index[iz1] = i;
                match (0..nsetp).find(|&p| x[index[p]] <= 0.0) {
                    Some(p) => {
                        jj = p;
                        i = index[p];
                    }
                    None => break,
                }
            }
            zz.copy_from_slice(&b);
            back_substitute(&cols, &index, nsetp, &mut zz);
        }
        for ip in 0..nsetp {
            x[index[ip]] = zz[ip];
        }
    }
    let residual_norm = b[nsetp.min(m)..].iter().map(|v| v * v).sum::<f64>().sqrt();
    NnlsSolution { x, residual_norm, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_nonnegative_solution() {
        let a = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 2.0, 1.0, 1.0]);
        let x_true = DVector::from_vec(vec![0.5, 0.0, 2.0]);
        let b = &a * &x_true;
        let s = nnls(&a, &b, 100);
        for (u, v) in s.x.iter().zip(x_true.iter()) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn clamps_negative_direction() {
        // Unconstrained optimum is x = -1.
        let a = DMatrix::from_row_slice(1, 1, &[1.0]);
        let b = DVector::from_vec(vec![-1.0]);
        let s = nnls(&a, &b, 10);
        assert_eq!(s.x, vec![0.0]);
        assert!((s.residual_norm - 1.0).abs() < 1e-15);
    }
}
