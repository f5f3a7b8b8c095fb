use std::f64::consts::PI;

use serde::Serialize;

use crate::linalg::C64;

const VANISH: f64 = 1e-12;

/// Which coefficient conditions hold, with angular margins in radians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FClassReport {
    pub horizon: usize,
    /// Entry `k - 1`: `a_k ≠ 0`.
    pub nonvanishing: Vec<bool>,
    /// Entry `n - 2`: for `n = 2`, `Arg a_2 − 2 Arg a_1 ≢ 0 (mod π)`; for `n ≥ 3`,
    /// `Arg a_n − Arg a_{n−1} ≢ Arg a_2 − Arg a_1 (mod π)`.
    pub argument_gap: Vec<bool>,
    /// Distance of each tested angle from the nearest multiple of `π`.
    pub margins: Vec<f64>,
}

impl FClassReport {
    pub fn passes(&self) -> bool {
        self.nonvanishing.iter().all(|&b| b) && self.argument_gap.iter().all(|&b| b)
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn distance_to_pi_multiple(x: f64) -> f64 {
    (x - PI * (x / PI).round()).abs()
}

/// Evaluate both conditions on `a_0..a_N` up to `min(horizon, N)`.
pub fn check_f_class(coeffs: &[C64], horizon: usize) -> FClassReport {
    let h = horizon.min(coeffs.len().saturating_sub(1));
    let nonvanishing: Vec<bool> = (1..=h).map(|k| coeffs[k].norm() > VANISH).collect();
    let mut argument_gap = Vec::new();
    let mut margins = Vec::new();
    for n in 2..=h {
        let involved = if n == 2 { vec![1, 2] } else { vec![1, 2, n - 1, n] };
        if involved.iter().any(|&k| coeffs[k].norm() <= VANISH) {
            argument_gap.push(false);
            margins.push(0.0);
            continue;
        }
        let arg = |k: usize| coeffs[k].arg();
        let angle = if n == 2 { arg(2) - 2.0 * arg(1) } else { arg(n) - arg(n - 1) - (arg(2) - arg(1)) };
        let m = distance_to_pi_multiple(angle);
        argument_gap.push(m > VANISH);
        margins.push(m);
    }
    FClassReport { horizon: h, nonvanishing, argument_gap, margins }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Symbol;

    pub fn reference() -> Vec<C64> {
        vec![C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.04, 0.06), C64::from_polar(0.03, 2.5)]
    }

    #[test]
    fn reference_vector_is_in_class() {
        let r = check_f_class(&reference(), 3);
        assert!(r.passes());
        assert!(r.min_margin() > 0.1, "{:?}", r.margins);
        // Direct angle arithmetic.
        let t2 = 0.06f64.atan2(0.04);
        assert!((r.margins[0] - t2).abs() < 1e-12);
        assert!((r.margins[1] - (2.5 - 2.0 * t2)).abs() < 1e-12);
    }

    #[test]
    fn vanishing_coefficient() {
        let c = vec![C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.0, 0.0), C64::new(0.02, 0.01)];
        let r = check_f_class(&c, 3);
        assert_eq!(r.nonvanishing, vec![true, false, true]);
        assert!(!r.passes());
    }

    #[test]
    fn indicator_fails_argument_condition() {
        let c = Symbol::indicator(1.0).unwrap().coefficients(6).unwrap();
        let r = check_f_class(&c, 6);
        assert!(r.nonvanishing.iter().all(|&b| b));
        assert!(r.argument_gap.iter().all(|&b| !b));
    }
}
