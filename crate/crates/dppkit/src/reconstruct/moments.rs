//! Moments `m_k = ∫ f^k` from `HM(1 − t f)^{-1} = Σ_k m_k t^k`, and the value distribution
//! `ν(ξ) = |{f ≥ ξ}|` from moments.
//!
//! Both inversions are ill-posed; positivity does the regularizing. `HM^{-1}(t)` is fitted as
//! `Σ_j w_j / (1 − t v_j)` with `w ≥ 0` on a grid of atoms `v_j ∈ [0, 1]`, so the moments are
//! those of a positive measure. `ν` is a non-increasing step function on 64 bins written as a
//! sum of non-negative drops, with a light smoothness penalty on the drops.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::nnls::nnls;
use crate::linstat::gauss_legendre;
use crate::spectra::{Symbol, SymbolKind};

pub const MAX_MOMENTS: usize = 12;
pub const HM_NODES: usize = 64;
pub const NU_BINS: usize = 64;
const ATOMS: usize = 512;
const HEAVY: f64 = 1e3;
const VANDERMONDE_LIMIT: f64 = 1e10;
const SMOOTHING: f64 = 1e-8;
const MOMENT_TOL: f64 = 1e-6;

/// `HM(1 − t f)^{-1} = (1/2π) ∫ dx / (1 − t f(x))`, closed form where available and
/// composite Gauss–Legendre otherwise.
pub fn hm_inverse(symbol: &Symbol, t: f64) -> f64 {
    match symbol.kind() {
        SymbolKind::Constant { t: c } => 1.0 / (1.0 - t * c),
        SymbolKind::Indicator { a } => {
            let w = a / PI;
            (1.0 - w) + w / (1.0 - t)
        }
        _ => hm_inverse_fn(|x| symbol.eval(x), t),
    }
}

/// The same mean for any `f` on `(−π, π]`, by 256 panels of 8-point Gauss–Legendre.
pub fn hm_inverse_fn(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let (x, w) = gauss_legendre(8);
    let panels = 256;
    let h = 2.0 * PI / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let mid = -PI + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * 0.5 * h / (1.0 - t * f(mid + 0.5 * h * xi));
        }
    }
    s / (2.0 * PI)
}

fn chebyshev_nodes(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| 0.5 * t_max * (1.0 - (PI * (j as f64 + 0.5) / n as f64).cos())).collect()
}

/// `m_1..=m_K` from an oracle for `HM(1 − t f)^{-1}` on `[0, t_max]`.
pub fn moments_from_hm(hm_inv: impl Fn(f64) -> f64, t_max: f64, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > MAX_MOMENTS {
        return Err(Error::Domain(format!("moment count must be in 1..={MAX_MOMENTS}")));
    }
    if !(t_max > 0.0 && t_max < 1.0) {
        return Err(Error::Domain("t_max must lie in (0, 1)".into()));
    }
    let t = chebyshev_nodes(t_max, HM_NODES);
    let vander = DMatrix::from_fn(t.len(), k + 1, |i, p| (t[i] / t_max).powi(p as i32));
    let sv = vander.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= VANDERMONDE_LIMIT) {
        return Err(Error::IllConditioned(format!("Vandermonde condition {cond:.2e}; reduce K")));
    }
    let g: Vec<f64> = t.iter().map(|&x| hm_inv(x)).collect();
    // For 0 ≤ f ≤ 1 the mean of 1/(1 − t f) lies in [1, 1/(1 − t)].
    let in_range = |(&t, &v): (&f64, &f64)| v.is_finite() && v >= 1.0 - 1e-12 && v <= 1.0 / (1.0 - t) + 1e-12;
    if !t.iter().zip(&g).all(in_range) {
        return Err(Error::Domain("oracle is not a harmonic-mean inverse of a [0, 1] function on [0, t_max]".into()));
    }
    let v: Vec<f64> = (0..=ATOMS).map(|j| j as f64 / ATOMS as f64).collect();
    let rows = t.len() + 1;
    let a = DMatrix::from_fn(rows, v.len(), |i, j| if i < t.len() { 1.0 / (1.0 - t[i] * v[j]) } else { HEAVY });
    let b = DVector::from_fn(rows, |i, _| if i < t.len() { g[i] } else { HEAVY });
    let sol = nnls(&a, &b, 20 * v.len());
    Ok((1..=k).map(|p| sol.x.iter().zip(&v).map(|(w, x)| w * x.powi(p as i32)).sum()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueDistribution {
    /// `ν̂` on bins `[b/64, (b+1)/64)`.
    pub nu: Vec<f64>,
    /// Mass of `{f = 0}` that the bins do not carry.
    pub slack: f64,
    /// Moment residual `‖A d − m‖₂`.
    pub residual: f64,
}

impl ValueDistribution {
    pub fn bin_left(b: usize) -> f64 {
        b as f64 / NU_BINS as f64
    }

    /// CSV with columns `xi_bin, nu`; `xi_bin` is the left edge of the bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi_bin,nu\n");
        for (b, v) in self.nu.iter().enumerate() {
            out.push_str(&format!("{:.6},{:.12e}\n", Self::bin_left(b), v));
        }
        out
    }
}

fn check_hausdorff(m: &[f64]) -> Result<()> {
    let mut full = vec![1.0];
    full.extend_from_slice(m);
    for (k, &x) in full.iter().enumerate() {
        if !(x >= -MOMENT_TOL && x <= 1.0 + MOMENT_TOL) {
            return Err(Error::MomentInconsistency(format!("m_{k} = {x} outside [0, 1]")));
        }
    }
    for k in 1..full.len() {
        if full[k] > full[k - 1] + MOMENT_TOL {
            return Err(Error::MomentInconsistency(format!("m_{k} exceeds m_{}", k - 1)));
        }
        if k + 1 < full.len() && full[k] * full[k] > full[k - 1] * full[k + 1] + MOMENT_TOL {
            return Err(Error::MomentInconsistency(format!("moments are not log-convex at k = {k}")));
        }
    }
    Ok(())
}

/// Non-increasing step `ν̂ ≤ 1` on 64 bins with `k ∫ ξ^{k−1} ν̂ = m_k`.
///
/// With drops `d_j ≥ 0` and `ν̂_b = Σ_{j ≥ b} d_j`, the moment of a step function is exactly
/// `Σ_j d_j ((j+1)/64)^k`; a slack atom at zero absorbs `1 − Σ d`.
pub fn value_distribution_from_moments(m: &[f64]) -> Result<ValueDistribution> {
    if m.is_empty() {
        return Err(Error::Domain("need at least one moment".into()));
    }
    check_hausdorff(m)?;
    let k = m.len();
    let b = NU_BINS;
    let cols = b + 1;
    let rows = k + (b - 1) + 1;
    let tau = SMOOTHING.sqrt();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut rhs = DVector::<f64>::zeros(rows);
    for p in 0..k {
        for j in 0..b {
            a[(p, j)] = ((j + 1) as f64 / b as f64).powi(p as i32 + 1);
        }
        rhs[p] = m[p];
    }
    for j in 0..b - 1 {
        a[(k + j, j)] = tau;
        a[(k + j, j + 1)] = -tau;
    }
    for j in 0..cols {
        a[(rows - 1, j)] = 100.0;
    }
    rhs[rows - 1] = 100.0;
    let sol = nnls(&a, &rhs, 50 * cols);
    let d = &sol.x;
    let residual = (0..k)
        .map(|p| {
            let fit: f64 = (0..b).map(|j| a[(p, j)] * d[j]).sum();
            (fit - m[p]).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    if residual > 1e-3 {
        return Err(Error::MomentInconsistency(format!("no monotone profile fits the moments (residual {residual:.2e})")));
    }
    let mut nu = vec![0.0; b];
    let mut acc = 0.0;
    for j in (0..b).rev() {
        acc += d[j];
        nu[j] = acc.min(1.0);
    }
    Ok(ValueDistribution { nu, slack: d[b], residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(x: f64) -> f64 {
        (x + PI) / (2.0 * PI)
    }

    #[test]
    fn constant_moments() {
        let m = moments_from_hm(|t| 1.0 / (1.0 - 0.5 * t), 0.9, 6).unwrap();
        for (k, v) in m.iter().enumerate() {
            assert!((v - 0.5f64.powi(k as i32 + 1)).abs() <= 1e-8);
        }
    }

    #[test]
    fn indicator_and_zero_moments() {
        let s = Symbol::indicator(PI / 2.0).unwrap();
        let m = moments_from_hm(|t| hm_inverse(&s, t), 0.9, 8).unwrap();
        assert!(m.iter().all(|v| (v - 0.5).abs() < 1e-8));
        let z = moments_from_hm(|_| 1.0, 0.9, 8).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn quadrature_round_trip() {
        let m = moments_from_hm(|t| hm_inverse_fn(ramp, t), 0.9, 8).unwrap();
        for (k, v) in m.iter().enumerate() {
            assert!((v - 1.0 / (k as f64 + 2.0)).abs() <= 1e-7, "k={} {v}", k + 1);
        }
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(matches!(moments_from_hm(|_| 1.0, 0.9, 13), Err(Error::Domain(_))));
        assert!(matches!(moments_from_hm(|t| 1.0 / (1.0 - t / 0.5), 0.9, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn ramp_distribution() {
        let m: Vec<f64> = (1..=8).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let v = value_distribution_from_moments(&m).unwrap();
        for (b, nu) in v.nu.iter().enumerate() {
            let mid = (b as f64 + 0.5) / NU_BINS as f64;
            assert!((nu - (1.0 - mid)).abs() <= 0.05);
        }
    }

    #[test]
    fn step_distribution() {
        let m: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
        let v = value_distribution_from_moments(&m).unwrap();
        for (b, nu) in v.nu.iter().enumerate() {
            let mid = (b as f64 + 0.5) / NU_BINS as f64;
            if mid < 0.5 - 1.5 / 64.0 {
                assert!(*nu > 0.9);
            } else if mid > 0.5 + 1.5 / 64.0 {
                assert!(*nu < 0.1);
            }
        }
        let z = value_distribution_from_moments(&[0.0; 6]).unwrap();
        assert!(z.nu.iter().all(|&x| x < 1e-12));
        assert!((z.slack - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inconsistent_moments() {
        assert!(matches!(value_distribution_from_moments(&[0.5, 0.6]), Err(Error::MomentInconsistency(_))));
        assert!(matches!(value_distribution_from_moments(&[0.5, 0.1, 0.09]), Err(Error::MomentInconsistency(_))));
    }
}
