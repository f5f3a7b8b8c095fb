use rustfft::{num_complex::Complex, FftPlanner};

use super::bump::Profile;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::sampler::SampleArchive;
use crate::spectra::{Labels, Symbol};

const NEG_VAR_TOL: f64 = 1e-10;
const FFT_THRESHOLD: usize = 2048;

fn clamp_variance(v: f64) -> Result<f64> {
    if v < -NEG_VAR_TOL {
        return Err(Error::Numerical(format!("negative variance {v:.3e}")));
    }
    Ok(v.max(0.0))
}

/// Autocorrelation `C(k) = Σ_i ψ_i ψ_{i+k}` of a dense vector, for `k = 0..len`.
fn autocorrelation(psi: &[f64]) -> Vec<f64> {
    let m = psi.len();
    if m <= FFT_THRESHOLD {
        return (0..m).map(|k| psi[..m - k].iter().zip(&psi[k..]).map(|(a, b)| a * b).sum()).collect();
    }
    let size = (2 * m).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = psi.iter().map(|&x| Complex::new(x, 0.0)).collect();
    buf.resize(size, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    buf[..m].iter().map(|z| z.re / size as f64).collect()
}

/// Dense weights on `min..=max` from a sparse site map.
fn densify(weights: &[(i64, f64)]) -> (i64, Vec<f64>) {
    let lo = weights.iter().map(|w| w.0).min().unwrap_or(0);
    let hi = weights.iter().map(|w| w.0).max().unwrap_or(-1);
    let mut v = vec![0.0; (hi - lo + 1).max(0) as usize];
    for &(k, w) in weights {
        v[(k - lo) as usize] += w;
    }
    (lo, v)
}

/// Exact `Var(Σ ψ(i) ω(i))` under the stationary process of `symbol`.
///
/// Uses `f̂(0)(1 − f̂(0)) Σψ² − 2 Σ_{k≥1} |f̂(k)|² C(k)`, which equals the Parseval-split form
/// term by term and needs only the modes up to the span of `ψ`.
pub fn analytic_variance_discrete(symbol: &Symbol, weights: &[(i64, f64)]) -> Result<f64> {
    let (_, psi) = densify(weights);
    if psi.is_empty() {
        return Ok(0.0);
    }
    let c = autocorrelation(&psi);
    let a0 = symbol.mean();
    let mut v = a0 * (1.0 - a0) * c[0];
    for (k, ck) in c.iter().enumerate().skip(1) {
        if *ck == 0.0 {
            continue;
        }
        v -= 2.0 * symbol.fourier_coefficient(k as i64)?.norm_sqr() * ck;
    }
    clamp_variance(v)
}

/// `(f̂(0) − Σ|f̂(k)|²) Σψ²`, the part of the variance that no plateau averaging removes.
pub fn variance_lower_bound(symbol: &Symbol, weights: &[(i64, f64)]) -> f64 {
    let s2: f64 = weights.iter().map(|w| w.1 * w.1).sum();
    ((symbol.mean() - symbol.l2_norm_sq()) * s2).max(0.0)
}

/// A product symbol `f(x, y) = f1(x) f2(y)` on the 2-torus.
#[derive(Debug, Clone)]
pub struct ProductSymbol2d(pub Symbol, pub Symbol);

/// Lower-bound term on `ℤ²` for product symbols, with weights on lattice points.
pub fn variance_lower_bound_2d(symbol: &ProductSymbol2d, weights: &[((i64, i64), f64)]) -> f64 {
    let mean = symbol.0.mean() * symbol.1.mean();
    let l2 = symbol.0.l2_norm_sq() * symbol.1.l2_norm_sq();
    let s2: f64 = weights.iter().map(|w| w.1 * w.1).sum();
    ((mean - l2) * s2).max(0.0)
}

/// `Var(Σ ψ_i ω_i) = Σ ψ_i² K_ii − Σ_{i,j} ψ_i ψ_j |K_ij|²` for a finite kernel.
pub fn kernel_variance(k: &CMat, psi: &[f64]) -> Result<f64> {
    let n = k.rows();
    let mut v = 0.0;
    for i in 0..n {
        if psi[i] == 0.0 {
            continue;
        }
        v += psi[i] * psi[i] * k[(i, i)].re;
        for j in 0..n {
            v -= psi[i] * psi[j] * k[(i, j)].norm_sqr();
        }
    }
    clamp_variance(v)
}

/// Evaluate a profile centered at `center` on every site.
pub fn profile_weights<P: Profile + ?Sized>(profile: &P, labels: &Labels, center: f64) -> Vec<f64> {
    (0..labels.len()).map(|i| profile.value(labels.position(i).0 - center)).collect()
}

/// Integer-site weights `(k, ψ(k − center))` over the support of the profile.
pub fn lattice_weights<P: Profile + ?Sized>(profile: &P, center: f64) -> Vec<(i64, f64)> {
    let r = profile.support_radius();
    let lo = (center - r).floor() as i64;
    let hi = (center + r).ceil() as i64;
    (lo..=hi).map(|k| (k, profile.value(k as f64 - center))).filter(|w| w.1 != 0.0).collect()
}

/// Sample variance of `Σ ψ_i ω_i` over replicas with its jackknife standard error.
/// `psi` is indexed by ground-set position.
pub fn empirical_variance(archive: &SampleArchive, psi: &[f64]) -> Result<(f64, f64)> {
    let r = archive.replicas.len();
    if r < 3 {
        return Err(Error::InsufficientData(format!("{r} replicas; need at least 3")));
    }
    if psi.len() != archive.n_sites() {
        return Err(Error::Domain("weights do not cover the window".into()));
    }
    let x: Vec<f64> = archive.replicas.iter().map(|c| c.points.iter().map(|&p| psi[p]).sum()).collect();
    let rf = r as f64;
    let mean = x.iter().sum::<f64>() / rf;
    let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let ss: f64 = dev.iter().map(|d| d * d).sum();
    let var = ss / (rf - 1.0);
    // Leave-one-out variances: removing d_i shifts the mean by -d_i/(r-1).
    let loo: Vec<f64> = dev.iter().map(|d| (ss - d * d * rf / (rf - 1.0)) / (rf - 2.0)).collect();
    let loo_mean = loo.iter().sum::<f64>() / rf;
    let jk = ((rf - 1.0) / rf * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>()).sqrt();
    Ok((var, jk))
}
