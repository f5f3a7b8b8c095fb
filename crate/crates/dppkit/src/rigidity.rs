//! Recover the number of hidden points from the exterior configuration.
//!
//! With `Φ ≡ 1` on the hidden set `S` and `E = Σ_k Φ(k) ρ₁(k)`, the estimate is
//! `raw = E − Σ_{k ∉ S} Φ(k) ω(k)`. Its error is the centered linear statistic, so the
//! variance of `Σ Φ ω` bounds how often rounding fails.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linstat::{analytic_variance_discrete, kernel_variance, PhiSchedule};
use crate::sampler::sample_batch;
use crate::spectra::{build_grid_kernel, build_toeplitz_kernel, eigendecompose, Grid, GridModel, KernelMatrix, Symbol};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityEstimate {
    pub count: usize,
    pub raw: f64,
    pub variance_bound: f64,
    /// `|raw − round(raw)| ≤ 0.25` and `4·Var ≤ 0.2`.
    pub high_confidence: bool,
    pub warning: Option<String>,
}

/// A fixed window, hidden set and schedule; estimates are then a dot product per trial.
#[derive(Debug, Clone)]
pub struct RigidityProblem {
    weights: Vec<f64>,
    in_hidden: Vec<bool>,
    hidden_len: usize,
    expected: f64,
    variance: f64,
    warning: Option<String>,
}

fn check_geometry(positions: &[f64], hidden: &[usize], schedule: &PhiSchedule, center: f64) -> Result<()> {
    let lo = positions.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = positions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let r = schedule.support_radius();
    if center - r < lo - 1e-9 || center + r > hi + 1e-9 {
        return Err(Error::Geometry(format!(
            "support [{:.3}, {:.3}] exceeds window [{lo}, {hi}]",
            center - r,
            center + r
        )));
    }
    for &s in hidden {
        if (schedule.value(positions[s] - center) - 1.0).abs() > 1e-12 {
            return Err(Error::Geometry(format!("plateau does not cover hidden site at {}", positions[s])));
        }
    }
    Ok(())
}

fn center_of(positions: &[f64], hidden: &[usize]) -> f64 {
    if hidden.is_empty() {
        let lo = positions.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = positions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return 0.5 * (lo + hi);
    }
    let lo = hidden.iter().map(|&s| positions[s]).fold(f64::INFINITY, f64::min);
    let hi = hidden.iter().map(|&s| positions[s]).fold(f64::NEG_INFINITY, f64::max);
    0.5 * (lo + hi)
}

impl RigidityProblem {
    /// Stationary process of `symbol` on an integer window; `hidden` lists labels.
    pub fn lattice(symbol: &Symbol, window: RangeInclusive<i64>, hidden: &[i64], schedule: &PhiSchedule) -> Result<Self> {
        let (a, b) = (*window.start(), *window.end());
        if b < a {
            return Err(Error::Domain("empty window".into()));
        }
        let positions: Vec<f64> = (a..=b).map(|k| k as f64).collect();
        let mut idx = Vec::with_capacity(hidden.len());
        for &s in hidden {
            if s < a || s > b {
                return Err(Error::Geometry(format!("hidden site {s} outside the window")));
            }
            idx.push((s - a) as usize);
        }
        let center = center_of(&positions, &idx);
        check_geometry(&positions, &idx, schedule, center)?;
        let weights: Vec<f64> = positions.iter().map(|&x| schedule.value(x - center)).collect();
        let expected = symbol.mean() * weights.iter().sum::<f64>();
        let sparse: Vec<(i64, f64)> = (a..=b).zip(&weights).filter(|w| *w.1 != 0.0).map(|(k, &w)| (k, w)).collect();
        let variance = analytic_variance_discrete(symbol, &sparse)?;
        let warning = (!symbol.is_indicator()).then(|| "symbol is not an indicator; rigidity is not guaranteed".to_string());
        Ok(Self::assemble(weights, &idx, expected, variance, warning))
    }

    /// Any kernel on sites of a line (for example a sine grid); `hidden` lists site indices.
    pub fn kernel(kernel: &KernelMatrix, hidden: &[usize], schedule: &PhiSchedule) -> Result<Self> {
        let n = kernel.len();
        if hidden.iter().any(|&s| s >= n) {
            return Err(Error::Geometry("hidden index outside the ground set".into()));
        }
        let positions: Vec<f64> = (0..n).map(|i| kernel.labels().position(i).0).collect();
        let center = center_of(&positions, hidden);
        check_geometry(&positions, hidden, schedule, center)?;
        let weights: Vec<f64> = positions.iter().map(|&x| schedule.value(x - center)).collect();
        let expected = weights.iter().enumerate().map(|(i, w)| w * kernel.diag(i)).sum();
        let variance = kernel_variance(kernel.entries(), &weights)?;
        Ok(Self::assemble(weights, hidden, expected, variance, None))
    }

    fn assemble(weights: Vec<f64>, hidden: &[usize], expected: f64, variance: f64, warning: Option<String>) -> Self {
        let mut in_hidden = vec![false; weights.len()];
        for &s in hidden {
            in_hidden[s] = true;
        }
        let hidden_len = in_hidden.iter().filter(|&&b| b).count();
        RigidityProblem { weights, in_hidden, hidden_len, expected, variance, warning }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E = Σ_k Φ(k) ρ₁(k)`.
    pub fn expected(&self) -> f64 {
        self.expected
    }

    /// Exact variance of `Σ Φ ω` over the window.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Estimate from the occupied sites outside `S` (ground-set indices).
    pub fn estimate(&self, omega_out: &[usize]) -> Result<RigidityEstimate> {
        if self.hidden_len == 0 {
            return Ok(RigidityEstimate {
                count: 0,
                raw: 0.0,
                variance_bound: 0.0,
                high_confidence: true,
                warning: self.warning.clone(),
            });
        }
        let mut s = 0.0;
        for &k in omega_out {
            if k >= self.weights.len() || self.in_hidden[k] {
                return Err(Error::Domain(format!("site {k} is hidden or outside the window")));
            }
            s += self.weights[k];
        }
        let raw = self.expected - s;
        let rounded = raw.round();
        let count = rounded.clamp(0.0, self.hidden_len as f64) as usize;
        let high_confidence = (raw - rounded).abs() <= 0.25 && 4.0 * self.variance <= 0.2;
        Ok(RigidityEstimate { count, raw, variance_bound: self.variance, high_confidence, warning: self.warning.clone() })
    }

    /// Split a full configuration into `(truth, exterior)`.
    pub fn split(&self, points: &[usize]) -> (usize, Vec<usize>) {
        let truth = points.iter().filter(|&&p| self.in_hidden[p]).count();
        (truth, points.iter().copied().filter(|&p| !self.in_hidden[p]).collect())
    }
}

/// Estimate from a stationary lattice process.
pub fn estimate_hidden_count(
    omega_out: &[usize],
    hidden: &[i64],
    symbol: &Symbol,
    schedule: &PhiSchedule,
    window: RangeInclusive<i64>,
) -> Result<RigidityEstimate> {
    RigidityProblem::lattice(symbol, window, hidden, schedule)?.estimate(omega_out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub truth: usize,
    pub raw: f64,
    pub estimate: usize,
    pub high_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub success_rate: f64,
    /// Binomial standard error of the success rate.
    pub success_se: f64,
    pub mean_abs_error: f64,
    pub variance_bound: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityCurve {
    pub points: Vec<CurvePoint>,
    pub trials: Vec<Vec<TrialRecord>>,
}

fn run_trials(kernel: &KernelMatrix, problem: &RigidityProblem, n_trials: usize, master_seed: u64) -> Result<Vec<TrialRecord>> {
    let archive = sample_batch(kernel, n_trials, master_seed)?;
    if let Some((i, msg)) = archive.failures.first() {
        return Err(Error::Degeneracy(format!("trial {i}: {msg}")));
    }
    archive
        .replicas
        .par_iter()
        .enumerate()
        .map(|(t, c)| {
            let (truth, out) = problem.split(&c.points);
            let e = problem.estimate(&out)?;
            Ok(TrialRecord { trial: t, seed: c.seed, truth, raw: e.raw, estimate: e.count, high_confidence: e.high_confidence })
        })
        .collect()
}

fn summarize(n: usize, problem: &RigidityProblem, certified: bool, trials: &[TrialRecord]) -> CurvePoint {
    let m = trials.len() as f64;
    let success = trials.iter().filter(|t| t.estimate == t.truth).count() as f64 / m;
    let mae = trials.iter().map(|t| (t.raw - t.truth as f64).abs()).sum::<f64>() / m;
    CurvePoint {
        n,
        success_rate: success,
        success_se: (success * (1.0 - success) / m).sqrt(),
        mean_abs_error: mae,
        variance_bound: problem.variance(),
        certified,
    }
}

/// Success rates along a list of schedules. Every schedule sees the same sampled trials.
pub fn rigidity_curve(
    symbol: &Symbol,
    window: RangeInclusive<i64>,
    hidden: &[i64],
    schedules: &[PhiSchedule],
    n_trials: usize,
    master_seed: u64,
) -> Result<RigidityCurve> {
    if n_trials == 0 {
        return Err(Error::Domain("n_trials must be at least 1".into()));
    }
    if schedules.windows(2).any(|w| w[1].n <= w[0].n) {
        return Err(Error::Domain("schedules must have increasing n".into()));
    }
    let problems: Vec<RigidityProblem> = schedules
        .iter()
        .map(|s| RigidityProblem::lattice(symbol, window.clone(), hidden, s))
        .collect::<Result<_>>()?;
    let kernel = eigendecompose(&build_toeplitz_kernel(symbol, window)?)?;
    let mut points = Vec::new();
    let mut trials = Vec::new();
    for (s, p) in schedules.iter().zip(&problems) {
        let t = run_trials(&kernel, p, n_trials, master_seed)?;
        points.push(summarize(s.n, p, s.certified, &t));
        trials.push(t);
    }
    Ok(RigidityCurve { points, trials })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRigidityReport {
    pub alpha: f64,
    pub mesh: f64,
    pub sites: usize,
    pub hidden_sites: usize,
    pub point: CurvePoint,
    pub trials: Vec<TrialRecord>,
}

/// The same estimator on the sine kernel discretized on `[-half_window, half_window]`,
/// recovering the count in the closed interval `u`.
pub fn sine_grid_rigidity(
    alpha: f64,
    mesh: f64,
    u: (f64, f64),
    schedule: &PhiSchedule,
    n_trials: usize,
    master_seed: u64,
    half_window: f64,
) -> Result<GridRigidityReport> {
    if n_trials == 0 {
        return Err(Error::Domain("n_trials must be at least 1".into()));
    }
    let grid = Grid::interval(-half_window, half_window, mesh)?;
    let kernel = eigendecompose(&build_grid_kernel(GridModel::Sine(alpha), &grid)?)?;
    let hidden: Vec<usize> = (0..kernel.len())
        .filter(|&i| {
            let x = kernel.labels().position(i).0;
            x >= u.0 - 1e-9 && x <= u.1 + 1e-9
        })
        .collect();
    if !hidden.is_empty() && (u.0 <= -half_window || u.1 >= half_window) {
        return Err(Error::Geometry("U must be interior to the window".into()));
    }
    let problem = RigidityProblem::kernel(&kernel, &hidden, schedule)?;
    let trials = run_trials(&kernel, &problem, n_trials, master_seed)?;
    let point = summarize(schedule.n, &problem, schedule.certified, &trials);
    Ok(GridRigidityReport { alpha, mesh, sites: kernel.len(), hidden_sites: hidden.len(), point, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn full_lattice_is_exact() {
        let s = Symbol::constant(1.0).unwrap();
        let sched = PhiSchedule::fit_window(4, 1.0, 8.0).unwrap();
        let p = RigidityProblem::lattice(&s, -20..=20, &[0], &sched).unwrap();
        let out: Vec<usize> = (0..41).filter(|&i| i != 20).collect();
        let e = p.estimate(&out).unwrap();
        assert!((e.raw - 1.0).abs() < 1e-12);
        assert_eq!(e.count, 1);
    }

    #[test]
    fn decomposition_identity() {
        let s = Symbol::indicator(PI / 2.0).unwrap();
        let sched = PhiSchedule::fit_window(3, 1.0, 6.0).unwrap();
        let p = RigidityProblem::lattice(&s, -15..=15, &[0, 1], &sched).unwrap();
        let points = vec![2usize, 5, 15, 16, 20, 27];
        let (truth, out) = p.split(&points);
        assert_eq!(truth, 2);
        let raw = p.estimate(&out).unwrap().raw;
        let total: f64 = points.iter().map(|&k| p.weights()[k]).sum();
        // The error is minus the centered statistic over the whole window.
        assert!(((raw - truth as f64) - (p.expected() - total)).abs() < 1e-12);
    }

    #[test]
    fn geometry_errors() {
        let s = Symbol::indicator(PI / 2.0).unwrap();
        let sched = PhiSchedule::fit_window(2, 1.0, 8.0).unwrap();
        assert!(matches!(RigidityProblem::lattice(&s, -10..=10, &[0], &sched), Err(Error::Geometry(_))));
        let narrow = PhiSchedule::fit_window(1, 0.5, 0.9).unwrap();
        assert!(matches!(RigidityProblem::lattice(&s, -20..=20, &[0, 1, 2], &narrow), Err(Error::Geometry(_))));
    }

    #[test]
    fn empty_hidden_set() {
        let s = Symbol::indicator(PI / 2.0).unwrap();
        let sched = PhiSchedule::fit_window(2, 1.0, 4.0).unwrap();
        let p = RigidityProblem::lattice(&s, -10..=10, &[], &sched).unwrap();
        assert_eq!(p.estimate(&[1, 2, 3]).unwrap().count, 0);
    }

    #[test]
    fn non_indicator_warns() {
        let s = Symbol::constant(0.5).unwrap();
        let sched = PhiSchedule::fit_window(2, 1.0, 4.0).unwrap();
        let e = estimate_hidden_count(&[], &[0], &s, &sched, -10..=10).unwrap();
        assert!(e.warning.is_some());
    }

    #[test]
    fn zero_trials_rejected() {
        let s = Symbol::indicator(PI / 2.0).unwrap();
        let sched = PhiSchedule::fit_window(2, 1.0, 4.0).unwrap();
        assert!(rigidity_curve(&s, -10..=10, &[0], &[sched], 0, 1).is_err());
    }
}
