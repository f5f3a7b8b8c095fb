use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Slack allowed on `0 ≤ f ≤ 1` when validating a symbol.
pub const SYMBOL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolKind {
    /// Coefficients `a_j` for `j ≥ 0`; negative modes follow from `a_{-j} = conj(a_j)`.
    TrigPoly(BTreeMap<i64, C64>),
    /// Indicator of `[-a, a]`.
    Indicator { a: f64 },
    Constant { t: f64 },
    /// Samples at `x_m = -π + 2π(m+1)/M`, `m = 0..M`.
    Tabulated(Vec<f64>),
}

/// A function `f: 𝕋 → [0, 1]` with `f̂(k) = (1/2π)∫ f e^{-ikx} dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    kind: SymbolKind,
}

impl Symbol {
    pub fn indicator(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < PI) {
            return Err(Error::Domain(format!("indicator half-width {a} outside (0, π)")));
        }
        Ok(Symbol { kind: SymbolKind::Indicator { a } })
    }

    pub fn constant(t: f64) -> Result<Self> {
        if !(-SYMBOL_EPS..=1.0 + SYMBOL_EPS).contains(&t) {
            return Err(Error::ContractionViolation(format!("constant level {t} outside [0, 1]")));
        }
        Ok(Symbol { kind: SymbolKind::Constant { t: t.clamp(0.0, 1.0) } })
    }

    /// Build from `(j, a_j)` pairs. Negative `j` must agree with the conjugate of `-j`.
    pub fn trig_poly(coeffs: &[(i64, C64)]) -> Result<Self> {
        let mut map: BTreeMap<i64, C64> = BTreeMap::new();
        for &(j, a) in coeffs.iter().filter(|(j, _)| *j >= 0) {
            if map.insert(j, a).is_some() {
                return Err(Error::Domain(format!("coefficient {j} given twice")));
            }
        }
        for &(j, a) in coeffs.iter().filter(|(j, _)| *j < 0) {
            let partner = map.get(&-j).copied().unwrap_or_default();
            if (partner - a.conj()).norm() > 1e-14 {
                return Err(Error::Domain(format!("coefficient {j} breaks Hermitian symmetry")));
            }
            map.entry(-j).or_insert(a.conj());
        }
        if let Some(a0) = map.get(&0) {
            if a0.im.abs() > 1e-14 {
                return Err(Error::Domain("a_0 must be real".into()));
            }
        }
        map.retain(|_, a| *a != C64::default());
        let s = Symbol { kind: SymbolKind::TrigPoly(map) };
        let deg = s.degree().unwrap_or(0) as usize;
        s.validate_range((16 * deg).max(4096))?;
        Ok(s)
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.len() < 8 {
            return Err(Error::Domain("tabulated symbol needs at least 8 samples".into()));
        }
        if let Some(v) = values.iter().find(|v| !(-SYMBOL_EPS..=1.0 + SYMBOL_EPS).contains(*v)) {
            return Err(Error::ContractionViolation(format!("tabulated value {v} outside [0, 1]")));
        }
        Ok(Symbol { kind: SymbolKind::Tabulated(values) })
    }

    fn validate_range(&self, m: usize) -> Result<()> {
        for i in 0..m {
            let x = -PI + 2.0 * PI * (i as f64 + 0.5) / m as f64;
            let v = self.eval(x);
            if !(-SYMBOL_EPS..=1.0 + SYMBOL_EPS).contains(&v) {
                return Err(Error::ContractionViolation(format!("f({x:.6}) = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self.kind, SymbolKind::Indicator { .. })
    }

    /// Highest nonzero mode for trigonometric polynomials and constants.
    pub fn degree(&self) -> Option<i64> {
        match &self.kind {
            SymbolKind::TrigPoly(m) => Some(m.keys().next_back().copied().unwrap_or(0)),
            SymbolKind::Constant { .. } => Some(0),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            SymbolKind::TrigPoly(m) => m
                .iter()
                .map(|(&j, &a)| {
                    let e = C64::from_polar(1.0, j as f64 * x);
                    if j == 0 {
                        a.re
                    } else {
                        2.0 * (a * e).re
                    }
                })
                .sum(),
            SymbolKind::Indicator { a } => {
                let y = (x + PI).rem_euclid(2.0 * PI) - PI;
                if y.abs() <= *a {
                    1.0
                } else {
                    0.0
                }
            }
            SymbolKind::Constant { t } => *t,
            SymbolKind::Tabulated(v) => {
                let m = v.len();
                let pos = ((x + PI) / (2.0 * PI) * m as f64 - 1.0).rem_euclid(m as f64);
                let i = pos.floor() as usize % m;
                let frac = pos - pos.floor();
                v[i] * (1.0 - frac) + v[(i + 1) % m] * frac
            }
        }
    }

    pub fn fourier_coefficient(&self, k: i64) -> Result<C64> {
        Ok(match &self.kind {
            SymbolKind::TrigPoly(m) => {
                let a = m.get(&k.abs()).copied().unwrap_or_default();
                if k < 0 {
                    a.conj()
                } else {
                    a
                }
            }
            SymbolKind::Indicator { a } => {
                if k == 0 {
                    C64::new(a / PI, 0.0)
                } else {
                    C64::new((a * k as f64).sin() / (PI * k as f64), 0.0)
                }
            }
            SymbolKind::Constant { t } => C64::new(if k == 0 { *t } else { 0.0 }, 0.0),
            SymbolKind::Tabulated(v) => {
                let m = v.len();
                if 2 * k.unsigned_abs() as usize >= m {
                    return Err(Error::Resolution(format!("mode {k} needs more than {m} samples")));
                }
                let mut s = C64::default();
                for (i, &f) in v.iter().enumerate() {
                    let x = -PI + 2.0 * PI * (i as f64 + 1.0) / m as f64;
                    s += C64::from_polar(f, -(k as f64) * x);
                }
                s / m as f64
            }
        })
    }

    /// `f̂(0)`, the first intensity.
    pub fn mean(&self) -> f64 {
        self.fourier_coefficient(0).map(|z| z.re).unwrap_or(0.0)
    }

    /// `Σ_k |f̂(k)|² = (1/2π)∫|f|²`, in closed form where one exists.
    pub fn l2_norm_sq(&self) -> f64 {
        match &self.kind {
            SymbolKind::TrigPoly(m) => m.iter().map(|(&j, a)| if j == 0 { a.norm_sqr() } else { 2.0 * a.norm_sqr() }).sum(),
            SymbolKind::Indicator { a } => a / PI,
            SymbolKind::Constant { t } => t * t,
            SymbolKind::Tabulated(v) => v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64,
        }
    }

    /// Coefficients `a_0..=a_n`.
    pub fn coefficients(&self, n: usize) -> Result<Vec<C64>> {
        (0..=n as i64).map(|k| self.fourier_coefficient(k)).collect()
    }

    /// Translate by `ξ`: `a_j → a_j e^{ijξ}`. Trigonometric polynomials only.
    pub fn translated(&self, xi: f64) -> Result<Symbol> {
        match &self.kind {
            SymbolKind::TrigPoly(m) => {
                let c: Vec<_> = m.iter().map(|(&j, &a)| (j, a * C64::from_polar(1.0, j as f64 * xi))).collect();
                Symbol::trig_poly(&c)
            }
            _ => Err(Error::Domain("translation implemented for trigonometric polynomials".into())),
        }
    }

    /// Reflect `x → -x`: `a_j → conj(a_j)`. Trigonometric polynomials only.
    pub fn flipped(&self) -> Result<Symbol> {
        match &self.kind {
            SymbolKind::TrigPoly(m) => {
                let c: Vec<_> = m.iter().map(|(&j, &a)| (j, a.conj())).collect();
                Symbol::trig_poly(&c)
            }
            _ => Err(Error::Domain("flip implemented for trigonometric polynomials".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_coefficients() {
        let s = Symbol::indicator(PI / 2.0).unwrap();
        assert!((s.fourier_coefficient(0).unwrap().re - 0.5).abs() < 1e-15);
        assert!(s.fourier_coefficient(2).unwrap().norm() < 1e-16);
        assert!((s.fourier_coefficient(1).unwrap().re - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn indicator_matches_quadrature() {
        // Independent check of sin(ak)/(πk) by direct midpoint integration.
        let a = 1.1;
        let s = Symbol::indicator(a).unwrap();
        let m = 200_000;
        for k in 0..5i64 {
            let mut acc = 0.0;
            for i in 0..m {
                let x = -a + 2.0 * a * (i as f64 + 0.5) / m as f64;
                acc += (k as f64 * x).cos();
            }
            let q = acc * (2.0 * a / m as f64) / (2.0 * PI);
            assert!((q - s.fourier_coefficient(k).unwrap().re).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_has_no_modes() {
        let s = Symbol::constant(0.3).unwrap();
        assert_eq!(s.fourier_coefficient(1).unwrap(), C64::default());
        assert!(Symbol::constant(1.5).is_err());
    }

    #[test]
    fn trig_poly_rejects_out_of_range() {
        let e = Symbol::trig_poly(&[(0, C64::new(0.5, 0.0)), (1, C64::new(0.4, 0.0))]);
        assert!(matches!(e, Err(Error::ContractionViolation(_))));
    }

    #[test]
    fn trig_poly_hermitian_negative_modes() {
        let s = Symbol::trig_poly(&[(0, C64::new(0.5, 0.0)), (1, C64::new(0.1, 0.1)), (-1, C64::new(0.1, -0.1))]).unwrap();
        assert_eq!(s.fourier_coefficient(-1).unwrap(), C64::new(0.1, -0.1));
        assert!(Symbol::trig_poly(&[(1, C64::new(0.1, 0.1)), (-1, C64::new(0.1, 0.1))]).is_err());
    }

    #[test]
    fn tabulated_recovers_low_modes() {
        let s = Symbol::trig_poly(&[(0, C64::new(0.5, 0.0)), (2, C64::new(0.1, -0.05))]).unwrap();
        let m = 64;
        let v: Vec<f64> = (0..m).map(|i| s.eval(-PI + 2.0 * PI * (i as f64 + 1.0) / m as f64)).collect();
        let t = Symbol::tabulated(v).unwrap();
        for k in -3..=3 {
            assert!((t.fourier_coefficient(k).unwrap() - s.fourier_coefficient(k).unwrap()).norm() < 1e-14);
        }
        assert!(matches!(t.fourier_coefficient(32), Err(Error::Resolution(_))));
        assert!((t.l2_norm_sq() - s.l2_norm_sq()).abs() < 1e-14);
    }
}
