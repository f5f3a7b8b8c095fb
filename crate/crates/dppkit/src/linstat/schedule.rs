//! Averaged plateaus `Φⁿ_L = (1/n) Σ_{i=1..n} φ_{L λ^{-i}}`.

use super::bump::{BumpFunction, BumpMixture, Profile};
use super::lambda::{cross_term, reference_self_energy};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PhiSchedule {
    pub n: usize,
    pub lambda: f64,
    /// Dilation `L`: `Φⁿ_L ≡ 1` on `[-L, L]`.
    pub l: f64,
    /// `Λ(φ, φ_{λ^{-i}})` for `i = 1..=n`.
    pub cross_terms: Vec<f64>,
    /// `Λ(φ, φ)`.
    pub self_energy: f64,
    /// `Λ(Φⁿ, Φⁿ)`.
    pub energy: f64,
    /// `C(φ) = Λ(φ,φ) + 2 Σ_{d<n} |Λ(φ, φ_{λ^{-d}})|`, so `energy ≤ C(φ)/n`.
    pub c_phi: f64,
    /// Whether `|Λ(φ, φ_{λ^{-i}})| ≤ 2^{-i}` holds for every `i`.
    pub certified: bool,
}

impl PhiSchedule {
    fn from_lambda(n: usize, lambda: f64, l: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        let cross_terms: Vec<f64> = (1..=n).map(|i| cross_term(lambda.powi(-(i as i32)))).collect::<Result<_>>()?;
        let self_energy = reference_self_energy();
        let nf = n as f64;
        let mut energy = nf * self_energy;
        let mut c_phi = self_energy;
        for d in 1..n {
            energy += 2.0 * (nf - d as f64) * cross_terms[d - 1];
            c_phi += 2.0 * cross_terms[d - 1].abs();
        }
        energy /= nf * nf;
        let certified = cross_terms.iter().enumerate().all(|(i, c)| c.abs() <= 0.5f64.powi(i as i32 + 1));
        Ok(PhiSchedule { n, lambda, l, cross_terms, self_energy, energy, c_phi, certified })
    }

    /// Scales `L λ^{-i}` of the averaged bumps.
    pub fn scales(&self) -> Vec<f64> {
        (1..=self.n).map(|i| self.l * self.lambda.powi(-(i as i32))).collect()
    }

    pub fn profile(&self) -> BumpMixture {
        let w = 1.0 / self.n as f64;
        BumpMixture { terms: self.scales().into_iter().map(|s| (w, s)).collect() }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.profile().value(x)
    }

    pub fn support_radius(&self) -> f64 {
        2.0 * self.l * self.lambda.powi(-(self.n as i32))
    }

    /// The same averaged bump with dilation `l`.
    pub fn with_dilation(&self, l: f64) -> PhiSchedule {
        PhiSchedule { l, ..self.clone() }
    }

    /// Table rows `(i, λ^i, Λ(φ, φ_{λ^{-i}}))`.
    pub fn table(&self) -> Vec<(usize, f64, f64)> {
        self.cross_terms.iter().enumerate().map(|(i, &c)| (i + 1, self.lambda.powi(i as i32 + 1), c)).collect()
    }

    /// Geometric schedule equal to 1 at least on `[-inner, inner]`, whose widest bump has scale `outer`,
    /// so the support is `[-2·outer, 2·outer]`. `certified` reports whether the cross-term
    /// constraints happen to hold.
    pub fn fit_window(n: usize, inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::Domain("need 0 < inner < outer".into()));
        }
        let lambda = (inner / outer).powf(1.0 / n as f64);
        Self::from_lambda(n, lambda, inner)
    }
}

/// Largest `λ` whose first cross term is at most 1/2, found by bisection; then every level is checked.
pub fn build_phi_schedule(_phi: &BumpFunction, n: usize, target_l: f64) -> Result<PhiSchedule> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if !(target_l >= 1.0) {
        return Err(Error::Domain("L must be at least 1".into()));
    }
    let c1 = |lam: f64| cross_term(1.0 / lam).map(f64::abs);
    let (mut lo, mut hi) = (1e-6, 0.5);
    if c1(lo)? > 0.5 {
        return Err(Error::ScheduleInfeasible { deepest: 0, msg: "first cross term never reaches 1/2".into() });
    }
    if c1(hi)? <= 0.5 {
        lo = hi;
    } else {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if c1(mid)? <= 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 {
                break;
            }
        }
    }
    let s = PhiSchedule::from_lambda(n, lo, target_l)?;
    if !s.certified {
        let deepest = s.cross_terms.iter().enumerate().take_while(|(i, c)| c.abs() <= 0.5f64.powi(*i as i32 + 1)).count();
        return Err(Error::ScheduleInfeasible { deepest, msg: format!("λ = {lo:.6}") });
    }
    Ok(s)
}
