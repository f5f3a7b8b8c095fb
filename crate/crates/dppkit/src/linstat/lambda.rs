//! The energy `Λ(ψ1, ψ2) = ∬ (ψ1(x)−ψ1(y))(ψ2(x)−ψ2(y)) / (x−y)² dx dy`.

use std::sync::OnceLock;

use rayon::prelude::*;

use super::bump::{BumpFunction, Profile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct QuadParams {
    /// Cells across `[-R, R]` on the first level.
    pub initial_cells: usize,
    /// Stop when two successive levels differ by at most this much.
    pub tol: f64,
    pub max_levels: usize,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams { initial_cells: 512, tol: 1e-5, max_levels: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaValue {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error: f64,
    pub cells: usize,
}

/// One tensor-midpoint level with `n` cells on `[-r, r]`.
fn level<A: Profile + ?Sized, B: Profile + ?Sized>(a: &A, b: &B, r: f64, n: usize) -> f64 {
    let h = 2.0 * r / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| -r + (i as f64 + 0.5) * h).collect();
    let (ca, cb) = (a.far_value(), b.far_value());
    let va: Vec<f64> = xs.iter().map(|&x| a.value(x)).collect();
    let vb: Vec<f64> = xs.iter().map(|&x| b.value(x)).collect();
    let inv_sq: Vec<f64> = (0..n).map(|k| if k == 0 { 0.0 } else { 1.0 / ((k as f64) * h).powi(2) }).collect();
    let off: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0;
            if i + 1 < n {
                s += 0.5 * (va[i] - va[i + 1]) * (vb[i] - vb[i + 1]) * inv_sq[1];
            }
            for j in i + 2..n {
                s += (va[i] - va[j]) * (vb[i] - vb[j]) * inv_sq[j - i];
            }
            s
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let band: f64 = xs.iter().map(|&x| a.derivative(x) * b.derivative(x)).sum::<f64>() * 2.0 * h;
    let far: f64 = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (va[i] - ca) * (vb[i] - cb) * (1.0 / (r - x) + 1.0 / (r + x)))
        .sum::<f64>()
        * 2.0;
    h * h * 2.0 * off + h * band + h * far
}

/// Quadrature for `Λ` with refinement by halving the mesh (and the diagonal band with it).
pub fn lambda_form<A: Profile + ?Sized, B: Profile + ?Sized>(a: &A, b: &B, quad: &QuadParams) -> Result<LambdaValue> {
    let r = a.support_radius().max(b.support_radius());
    if r == 0.0 {
        return Ok(LambdaValue { value: 0.0, error: 0.0, cells: 0 });
    }
    let mut n = quad.initial_cells.max(4);
    let mut prev = level(a, b, r, n);
    for _ in 0..quad.max_levels {
        n *= 2;
        let cur = level(a, b, r, n);
        let err = (cur - prev).abs();
        if err <= quad.tol {
            return Ok(LambdaValue { value: cur, error: err, cells: n });
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!("Λ did not settle to {} within {} levels", quad.tol, quad.max_levels)))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { z } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

fn composite<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for (x, w) in gl.0.iter().zip(&gl.1) {
            s += w * f(mid + 0.5 * h * x);
        }
    }
    s * 0.5 * h
}

/// `Λ(φ, φ_r)` for the reference bump and `r ≥ 2`, where `φ_r ≡ 1` on `supp φ` and the
/// energy reduces to `2∫ φ(x) J(x) dx` with a one-dimensional inner integral `J`.
pub fn nested_cross_term(r: f64) -> f64 {
    assert!(r >= 2.0);
    let gl = gauss_legendre(20);
    let phi = BumpFunction::reference();
    let j = |x: f64| {
        let inner = composite(
            |t: f64| {
                let y = r * t;
                (1.0 - phi.value(t)) * (1.0 / (y - x).powi(2) + 1.0 / (y + x).powi(2))
            },
            1.0,
            2.0,
            32,
            &gl,
        ) * r;
        inner + 1.0 / (2.0 * r - x) + 1.0 / (2.0 * r + x)
    };
    let g = |x: f64| phi.value(x) * j(x);
    4.0 * (composite(g, 0.0, 1.0, 8, &gl) + composite(g, 1.0, 2.0, 32, &gl))
}

/// `Λ(φ, φ)` for the reference bump, computed once.
pub fn reference_self_energy() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| {
        let phi = BumpFunction::reference();
        let q = QuadParams { initial_cells: 1024, tol: 1e-7, max_levels: 6 };
        lambda_form(&phi, &phi, &q).expect("reference bump energy converges").value
    })
}

/// `Λ(φ, φ_s)` for any ratio `s > 0`, using scale invariance and symmetry.
pub fn cross_term(s: f64) -> Result<f64> {
    let r = if s >= 1.0 { s } else { 1.0 / s };
    if r == 1.0 {
        return Ok(reference_self_energy());
    }
    if r >= 2.0 {
        return Ok(nested_cross_term(r));
    }
    let phi = BumpFunction::reference();
    let q = QuadParams { initial_cells: 1024, tol: 1e-7, max_levels: 6 };
    Ok(lambda_form(&phi, &phi.scaled(r), &q)?.value)
}

/// `Λ(φ, φ_{λ^{-1}})` for each `λ`, used to watch the decay toward 0.
pub fn decay_profile(lambdas: &[f64]) -> Result<Vec<f64>> {
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("lambdas must be strictly decreasing".into()));
    }
    if lambdas.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
        return Err(Error::Domain("lambdas must lie in (0, 1]".into()));
    }
    lambdas.iter().map(|&l| cross_term(1.0 / l)).collect()
}

#[cfg(test)]
mod tests {
    use super::super::bump::ConstantProfile;
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_second_factor_vanishes() {
        let phi = BumpFunction::reference();
        let v = lambda_form(&phi, &ConstantProfile(0.7), &QuadParams::default()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn symmetric_in_arguments() {
        let q = QuadParams { initial_cells: 256, tol: 1e-3, max_levels: 4 };
        let a = BumpFunction::reference();
        let b = a.scaled(1.5);
        let x = lambda_form(&a, &b, &q).unwrap().value;
        let y = lambda_form(&b, &a, &q).unwrap().value;
        assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn nested_matches_quadrature() {
        let q = QuadParams { initial_cells: 1024, tol: 1e-6, max_levels: 6 };
        let phi = BumpFunction::reference();
        for r in [2.0, 3.0] {
            let quad = lambda_form(&phi, &phi.scaled(r), &q).unwrap();
            let nest = nested_cross_term(r);
            assert!((quad.value - nest).abs() < 1e-5, "r={r}: {} vs {nest}", quad.value);
        }
    }

    #[test]
    fn self_energy_stable_across_levels() {
        let phi = BumpFunction::reference();
        let a = level(&phi, &phi, 2.0, 1024);
        let b = level(&phi, &phi, 2.0, 2048);
        assert!(a > 0.0);
        assert!(((a - b) / b).abs() < 5e-4);
    }
}
