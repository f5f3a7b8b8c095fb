//! Inductive recovery of `a_0, a_1, …` from one-, two-, three- and four-point intensities.
//!
//! Two- and three-point intensities of `(0, 1, n)` and `(0, 2, n)` give
//!
//! ```text
//! ρ₂(0,n)   = a₀² − |a_n|²
//! ρ₃(0,k,n) = a₀³ − a₀(|a_k|² + |a_{n−k}|² + |a_n|²) + 2 Re(a_n · conj(a_k a_{n−k}))
//! ```
//!
//! so each step leaves two candidate phases for `a_n`; a second intensity picks one.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use serde::Serialize;

use crate::correlations::{exact_rho, replica_frequencies};
use crate::error::{Error, Result};
use crate::linalg::{det, CMat, C64};
use crate::sampler::SampleArchive;
use crate::spectra::Symbol;

/// Source of k-point intensities at integer sites.
pub trait CorrelationOracle {
    fn rho(&self, sites: &[i64]) -> Result<f64>;
}

impl CorrelationOracle for Symbol {
    fn rho(&self, sites: &[i64]) -> Result<f64> {
        exact_rho(self, sites)
    }
}

/// Adapts a closure into an oracle.
pub struct FnOracle<F>(pub F);

impl<F: Fn(&[i64]) -> Result<f64>> CorrelationOracle for FnOracle<F> {
    fn rho(&self, sites: &[i64]) -> Result<f64> {
        (self.0)(sites)
    }
}

/// Coefficients in the gauge `a_1 > 0`, `Im a_2 > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeNormalForm {
    /// `a_0..=a_N`.
    pub coefficients: Vec<C64>,
    /// `Some(N)` once all coefficients past `N` were found to vanish; `None` if recovery
    /// ran to the requested horizon without seeing the tail vanish.
    pub degree: Option<usize>,
    /// Real-coefficient branch: signs resolved by the reflection-symmetric procedure, which
    /// carries no uniqueness guarantee.
    pub remark_grade: bool,
    /// Largest mismatch between a disambiguating intensity and its prediction.
    pub consistency_residual: f64,
    /// Indices `n` whose two phase candidates the data could not separate; the better fit
    /// was kept. Only sampled intensities produce these.
    pub ambiguous_phases: Vec<usize>,
}

/// Translate so that `a_1 > 0`, then flip if `Im a_2 < 0`.
pub fn gauge_normalize(coeffs: &[C64]) -> Vec<C64> {
    let mut c = coeffs.to_vec();
    if c.len() > 1 && c[1].norm() > 0.0 {
        let th = c[1].arg();
        for (j, a) in c.iter_mut().enumerate() {
            *a *= C64::from_polar(1.0, -(j as f64) * th);
        }
        c[1] = C64::new(c[1].re, 0.0);
    }
    if c.len() > 2 && c[2].im < 0.0 {
        for a in c.iter_mut() {
            *a = a.conj();
        }
    }
    c
}

/// `det[a(x_i − x_j)]` from a coefficient list covering every difference.
pub fn predicted_rho(coeffs: &[C64], sites: &[i64]) -> f64 {
    let k = sites.len();
    let a = |d: i64| if d >= 0 { coeffs[d as usize] } else { coeffs[(-d) as usize].conj() };
    det(&CMat::from_fn(k, k, |i, j| a(sites[i] - sites[j]))).re
}

fn with_candidate(coef: &[C64], c: C64) -> Vec<C64> {
    let mut v = coef.to_vec();
    v.push(c);
    v
}

/// Recover the gauge normal form from `(0)`, `(0,n)`, `(0,1,n)`, `(0,2,n)` and, for the
/// third coefficient, `(0,1,2,3)`.
pub fn recover_symbol<O: CorrelationOracle + ?Sized>(rho: &O, max_degree: usize, tol: f64) -> Result<GaugeNormalForm> {
    recover_with(rho, max_degree, Tol { modulus: tol, intensity: tol, strict: true })
}

/// Thresholds on coefficient moduli and on intensity-scale quantities. They coincide for exact
/// oracles; with sampled intensities a zero modulus estimates to the square root of the noise.
#[derive(Debug, Clone, Copy)]
struct Tol {
    modulus: f64,
    intensity: f64,
    /// Fail, rather than flag, when two phases fit equally well.
    strict: bool,
}

fn recover_with<O: CorrelationOracle + ?Sized>(rho: &O, max_degree: usize, tol: Tol) -> Result<GaugeNormalForm> {
    let Tol { modulus: tm, intensity: ti, strict } = tol;
    let mut ambiguous = Vec::new();
    let a0 = rho.rho(&[0])?;
    let mut moduli = vec![0.0; max_degree + 1];
    for (n, m) in moduli.iter_mut().enumerate().skip(1) {
        let d = a0 * a0 - rho.rho(&[0, n as i64])?;
        if d < -ti {
            return Err(Error::DataInconsistency(format!("a_0² − ρ₂(0,{n}) = {d:.3e} < 0")));
        }
        *m = d.max(0.0).sqrt();
    }
    let tail_vanishes = |from: usize| moduli.iter().skip(from).all(|&m| m <= tm);
    let done = |coefficients: Vec<C64>, degree, remark_grade, residual, ambiguous_phases| {
        Ok(GaugeNormalForm { coefficients, degree, remark_grade, consistency_residual: residual, ambiguous_phases })
    };
    let mut coef = vec![C64::new(a0, 0.0)];
    if tail_vanishes(1) {
        return done(coef, Some(0), false, 0.0, ambiguous);
    }
    if moduli[1] <= tm {
        return Err(Error::ClassViolation("a_1 vanishes while later coefficients do not".into()));
    }
    let a1 = moduli[1];
    coef.push(C64::new(a1, 0.0));
    if max_degree == 1 {
        return done(coef, None, false, 0.0, ambiguous);
    }
    if tail_vanishes(2) {
        return done(coef, Some(1), false, 0.0, ambiguous);
    }
    let m2 = moduli[2];
    let mut real_branch = m2 <= tm;
    if real_branch {
        coef.push(C64::new(0.0, 0.0));
    } else {
        let r3 = rho.rho(&[0, 1, 2])?;
        let re = (r3 - a0.powi(3) + a0 * (2.0 * a1 * a1 + m2 * m2)) / (2.0 * a1 * a1);
        let im2 = m2 * m2 - re * re;
        if im2 < -ti.max(1e-12) {
            return Err(Error::DataInconsistency(format!("Re a_2 = {re:.6} exceeds |a_2| = {m2:.6}")));
        }
        let im = im2.max(0.0).sqrt();
        real_branch = im <= (1e-6 * m2).max(tm);
        coef.push(if real_branch { C64::new(re.clamp(-m2, m2), 0.0) } else { C64::new(re, im) });
    }
    let mut residual: f64 = 0.0;
    for n in 3..=max_degree {
        let m = moduli[n];
        let ni = n as i64;
        if real_branch {
            if tail_vanishes(n) {
                return done(coef, Some(n - 1), true, residual, ambiguous);
            }
            if m <= tm {
                coef.push(C64::new(0.0, 0.0));
                continue;
            }
            let (plus, minus) = (with_candidate(&coef, C64::new(m, 0.0)), with_candidate(&coef, C64::new(-m, 0.0)));
            let mut tuples: Vec<Vec<i64>> = (1..ni).map(|k| vec![0, k, ni]).collect();
            for j in 1..ni {
                for k in j + 1..ni {
                    tuples.push(vec![0, j, k, ni]);
                }
            }
            let Some(t) = tuples.into_iter().find(|t| (predicted_rho(&plus, t) - predicted_rho(&minus, t)).abs() > 10.0 * ti.max(1e-13))
            else {
                return Err(Error::ClassViolation(format!("sign of a_{n} is not determined by intensities up to order 4")));
            };
            let obs = rho.rho(&t)?;
            let (ep, em) = ((predicted_rho(&plus, &t) - obs).abs(), (predicted_rho(&minus, &t) - obs).abs());
            residual = residual.max(ep.min(em));
            coef = if ep <= em { plus } else { minus };
            continue;
        }
        if m <= tm {
            if tail_vanishes(n) {
                return done(coef, Some(n - 1), false, residual, ambiguous);
            }
            return Err(Error::ClassViolation(format!("a_{n} vanishes while later coefficients do not")));
        }
        let prev = coef[n - 1];
        let c = (rho.rho(&[0, 1, ni])? - a0.powi(3) + a0 * (a1 * a1 + prev.norm_sqr() + m * m)) / (2.0 * a1);
        let cos = c / (m * prev.norm());
        if cos.abs() > 1.0 + 1e-6 + ti / (m * prev.norm()) {
            return Err(Error::DataInconsistency(format!("cosine {cos:.6} out of range at n = {n}")));
        }
        let delta = cos.clamp(-1.0, 1.0).acos();
        let cands = [C64::from_polar(m, prev.arg() + delta), C64::from_polar(m, prev.arg() - delta)];
        if (cands[0] - cands[1]).norm() <= tm {
            coef.push(cands[0]);
            continue;
        }
        let probe: Vec<i64> = if n == 3 { vec![0, 1, 2, 3] } else { vec![0, 2, ni] };
        let preds = cands.map(|z| predicted_rho(&with_candidate(&coef, z), &probe));
        if (preds[0] - preds[1]).abs() <= ti {
            if strict {
                return Err(Error::ClassViolation(format!("both phases of a_{n} fit the second intensity")));
            }
            ambiguous.push(n);
        }
        let obs = rho.rho(&probe)?;
        let errs = preds.map(|p| (p - obs).abs());
        let best = if errs[0] <= errs[1] { 0 } else { 1 };
        if errs[best] > ti {
            return Err(Error::ClassViolation(format!("no phase of a_{n} fits the second intensity (miss {:.3e})", errs[best])));
        }
        residual = residual.max(errs[best]);
        coef.push(cands[best]);
    }
    done(coef, None, real_branch, residual, ambiguous)
}

/// Standard errors of one recovered coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientSe {
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub arg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecovery {
    pub form: GaugeNormalForm,
    pub se: Vec<CoefficientSe>,
    /// `|a_n|` within two standard errors of zero.
    pub unresolved: Vec<bool>,
    pub queries: usize,
    /// Modulus and intensity tolerances after the noise floor.
    pub tol_modulus: f64,
    pub tol_intensity: f64,
}

struct RecordingOracle<'a> {
    archive: &'a SampleArchive,
    cache: Mutex<HashMap<Vec<i64>, (f64, Vec<f64>)>>,
    order: Mutex<Vec<Vec<i64>>>,
}

impl CorrelationOracle for RecordingOracle<'_> {
    fn rho(&self, sites: &[i64]) -> Result<f64> {
        if let Some(v) = self.cache.lock().unwrap().get(sites) {
            return Ok(v.0);
        }
        let x = replica_frequencies(self.archive, sites, true)?;
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        self.cache.lock().unwrap().insert(sites.to_vec(), (mean, x));
        self.order.lock().unwrap().push(sites.to_vec());
        Ok(mean)
    }
}

fn coefficient_features(c: &[C64]) -> Vec<[f64; 4]> {
    c.iter().map(|z| [z.re, z.im, z.norm(), z.arg()]).collect()
}

fn mean_se(x: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.clone().sum::<f64>() / n;
    let var = x.map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Largest standard error of `a_0² − ρ₂(0,n)` over `n`.
fn noise_floor(rec: &RecordingOracle, max_degree: usize) -> Result<f64> {
    rec.rho(&[0])?;
    for n in 1..=max_degree {
        rec.rho(&[0, n as i64])?;
    }
    let cache = rec.cache.lock().unwrap();
    let x1 = &cache[&vec![0]].1;
    let a0 = mean_se(x1.iter().copied()).0;
    let worst = (1..=max_degree)
        .map(|n| {
            let x2 = &cache[&vec![0, n as i64]].1;
            mean_se(x1.iter().zip(x2).map(|(u, v)| 2.0 * a0 * u - v)).1
        })
        .fold(0.0, f64::max);
    Ok(worst)
}

/// Plug empirical intensities (translation averaged) into [`recover_symbol`] and propagate
/// their replica covariance through the recovery map by central differences.
///
/// `tol` is raised to four standard errors on intensities and to the square root of that on
/// moduli; the values used are reported.
pub fn recover_symbol_from_samples(archive: &SampleArchive, max_degree: usize, tol: f64) -> Result<SampleRecovery> {
    if archive.replicas.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 replicas".into()));
    }
    let rec = RecordingOracle { archive, cache: Mutex::new(HashMap::new()), order: Mutex::new(Vec::new()) };
    let noise = 4.0 * noise_floor(&rec, max_degree)?;
    let tol = Tol { modulus: tol.max(noise.sqrt()), intensity: tol.max(noise), strict: false };
    let form = recover_with(&rec, max_degree, tol)?;
    let order = rec.order.into_inner().unwrap();
    let cache = rec.cache.into_inner().unwrap();
    let q = order.len();
    let r = archive.replicas.len();
    let rf = r as f64;
    let xs: Vec<&(f64, Vec<f64>)> = order.iter().map(|s| &cache[s]).collect();
    let mut cov = vec![0.0; q * q];
    for a in 0..q {
        for b in a..q {
            let (ma, xa) = (xs[a].0, &xs[a].1);
            let (mb, xb) = (xs[b].0, &xs[b].1);
            let c = xa.iter().zip(xb).map(|(u, v)| (u - ma) * (v - mb)).sum::<f64>() / (rf - 1.0) / rf;
            cov[a * q + b] = c;
            cov[b * q + a] = c;
        }
    }
    let base = coefficient_features(&form.coefficients);
    let values: HashMap<Vec<i64>, f64> = order.iter().map(|s| (s.clone(), cache[s].0)).collect();
    let h = 1e-7;
    let mut jac = vec![vec![[0.0; 4]; base.len()]; q];
    for (qi, key) in order.iter().enumerate() {
        // A constant intensity contributes nothing and may sit on a threshold.
        if cov[qi * q + qi] == 0.0 {
            continue;
        }
        let eval = |shift: f64| -> Option<Vec<[f64; 4]>> {
            let oracle = FnOracle(|s: &[i64]| {
                let v = values.get(s).copied().ok_or_else(|| Error::Numerical("query set changed under perturbation".into()))?;
                Ok(if s == key.as_slice() { v + shift } else { v })
            });
            let f = recover_with(&oracle, max_degree, tol).ok()?;
            (f.coefficients.len() == base.len()).then(|| coefficient_features(&f.coefficients))
        };
        let (Some(up), Some(dn)) = (eval(h), eval(-h)) else {
            return Err(Error::Numerical("recovery is not differentiable at the estimate".into()));
        };
        for j in 0..base.len() {
            for c in 0..4 {
                let mut d = up[j][c] - dn[j][c];
                if c == 3 {
                    d = (d + PI).rem_euclid(2.0 * PI) - PI;
                }
                jac[qi][j][c] = d / (2.0 * h);
            }
        }
    }
    let se: Vec<CoefficientSe> = (0..base.len())
        .map(|j| {
            let comp = |c: usize| {
                let mut v = 0.0;
                for a in 0..q {
                    for b in 0..q {
                        v += jac[a][j][c] * cov[a * q + b] * jac[b][j][c];
                    }
                }
                v.max(0.0).sqrt()
            };
            CoefficientSe { re: comp(0), im: comp(1), abs: comp(2), arg: comp(3) }
        })
        .collect();
    let unresolved = base.iter().zip(&se).map(|(f, s)| f[2] <= 2.0 * s.abs).collect();
    Ok(SampleRecovery { form, se, unresolved, queries: q, tol_modulus: tol.modulus, tol_intensity: tol.intensity })
}

/// CSV with columns `j, re, im`.
pub fn coefficients_csv(coeffs: &[C64]) -> String {
    let mut out = String::from("j,re,im\n");
    for (j, a) in coeffs.iter().enumerate() {
        out.push_str(&format!("{j},{:.17e},{:.17e}\n", a.re, a.im));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruct::check_f_class;

    fn reference() -> Vec<C64> {
        vec![C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.04, 0.06), C64::from_polar(0.03, 2.5)]
    }

    fn symbol_of(c: &[C64]) -> Symbol {
        let pairs: Vec<(i64, C64)> = c.iter().enumerate().map(|(j, &a)| (j as i64, a)).collect();
        Symbol::trig_poly(&pairs).unwrap()
    }

    fn brute_det3(m: [[C64; 3]; 3]) -> C64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn three_point_formula_matches_cofactor_expansion() {
        let c = [
            C64::new(0.45, 0.0),
            C64::new(0.07, 0.03),
            C64::new(-0.02, 0.05),
            C64::new(0.01, -0.04),
            C64::new(0.03, 0.02),
            C64::new(-0.015, 0.01),
        ];
        let a = |d: i64| if d >= 0 { c[d as usize] } else { c[(-d) as usize].conj() };
        for (k, n) in [(1i64, 2i64), (1, 3), (1, 5), (2, 3), (2, 4), (2, 5)] {
            let s = [0, k, n];
            let m = [0, 1, 2].map(|i| [0, 1, 2].map(|j| a(s[i] - s[j])));
            let a0 = c[0].re;
            let formula = a0.powi(3) - a0 * (a(k).norm_sqr() + a(n - k).norm_sqr() + a(n).norm_sqr())
                + 2.0 * (a(n) * (a(k) * a(n - k)).conj()).re;
            assert!((brute_det3(m).re - formula).abs() < 1e-15);
            assert!(brute_det3(m).im.abs() < 1e-15);
        }
    }

    #[test]
    fn reference_round_trip() {
        let c = reference();
        let s = symbol_of(&c);
        assert!(check_f_class(&c, 3).passes());
        let f = recover_symbol(&s, 5, 1e-10).unwrap();
        assert_eq!(f.degree, Some(3));
        assert!(!f.remark_grade);
        let g = gauge_normalize(&c);
        for (x, y) in f.coefficients.iter().zip(&g) {
            assert!((x - y).norm() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn gauge_invariance() {
        let s = symbol_of(&reference());
        let base = recover_symbol(&s, 4, 1e-10).unwrap();
        for xi in [0.3, -1.7, 2.9] {
            for flip in [false, true] {
                let mut t = s.translated(xi).unwrap();
                if flip {
                    t = t.flipped().unwrap();
                }
                let f = recover_symbol(&t, 4, 1e-10).unwrap();
                for (x, y) in f.coefficients.iter().zip(&base.coefficients) {
                    assert!((x - y).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn degree_one_and_constant() {
        let s = symbol_of(&[C64::new(0.5, 0.0), C64::new(0.2, 0.0)]);
        let f = recover_symbol(&s, 1, 1e-12).unwrap();
        assert!((f.coefficients[1].re - 0.2).abs() < 1e-14);
        let f = recover_symbol(&s, 4, 1e-10).unwrap();
        assert_eq!(f.degree, Some(1));
        let c = recover_symbol(&Symbol::constant(0.3).unwrap(), 4, 1e-10).unwrap();
        assert_eq!(c.degree, Some(0));
        assert!((c.coefficients[0].re - 0.3).abs() < 1e-15);
    }

    #[test]
    fn real_branch_recovers_indicator() {
        let s = Symbol::indicator(1.1).unwrap();
        let f = recover_symbol(&s, 6, 1e-10).unwrap();
        assert!(f.remark_grade);
        let truth = s.coefficients(6).unwrap();
        for (x, y) in f.coefficients.iter().zip(&truth) {
            assert!((x - y).norm() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn inconsistent_data_is_rejected() {
        let bad = FnOracle(|s: &[i64]| Ok(if s.len() == 1 { 0.5 } else { 0.3 }));
        assert!(matches!(recover_symbol(&bad, 2, 1e-10), Err(Error::DataInconsistency(_))));
    }

    #[test]
    fn csv_rows() {
        let csv = coefficients_csv(&[C64::new(0.5, 0.0), C64::new(0.1, -0.2)]);
        assert!(csv.starts_with("j,re,im\n0,5.00000000000000000e-1,0.00000000000000000e0\n1,"));
    }

    fn archive(c: &[C64], sites: i64, reps: usize, seed: u64) -> SampleArchive {
        use crate::sampler::sample_batch;
        use crate::spectra::{build_toeplitz_kernel, eigendecompose};
        let k = eigendecompose(&build_toeplitz_kernel(&symbol_of(c), 0..=sites - 1).unwrap()).unwrap();
        sample_batch(&k, reps, seed).unwrap()
    }

    #[test]
    fn degree_one_from_samples() {
        let a = archive(&[C64::new(0.5, 0.0), C64::new(0.2, 0.0)], 64, 100_000, 5);
        let r = recover_symbol_from_samples(&a, 3, 1e-9).unwrap();
        let (a1, se) = (r.form.coefficients[1].re, r.se[1].abs);
        assert!((a1 - 0.2).abs() <= 4.0 * se, "{a1} ± {se}");
        assert_eq!(r.form.degree, Some(1));
        assert!(!r.unresolved[1]);
    }

    #[test]
    fn identity_archive_gives_constant_one() {
        use crate::sampler::sample_batch;
        use crate::spectra::{eigendecompose, KernelMatrix};
        let k = eigendecompose(&KernelMatrix::diagonal(&[1.0; 32]).unwrap()).unwrap();
        let a = sample_batch(&k, 10, 1).unwrap();
        let r = recover_symbol_from_samples(&a, 4, 1e-9).unwrap();
        assert_eq!(r.form.degree, Some(0));
        assert_eq!(r.form.coefficients, vec![C64::new(1.0, 0.0)]);
    }

    #[test]
    fn reference_phase_from_samples() {
        let a = archive(&reference(), 64, 100_000, 6);
        let r = recover_symbol_from_samples(&a, 5, 1e-9).unwrap();
        let truth = gauge_normalize(&reference())[3].arg();
        let got = r.form.coefficients[3].arg();
        let d = (got - truth + PI).rem_euclid(2.0 * PI) - PI;
        // ρ(0,1,2,3) separates the two phase candidates by less than its noise at this size.
        assert_eq!(r.form.ambiguous_phases, vec![3]);
        assert!(d.abs() <= 4.0 * r.se[3].arg, "arg {got} vs {truth} ± {}", r.se[3].arg);
    }
}
