//! Gram determinants, conditional intensities and completeness residuals.
//!
//! The conditional intensity `p(x | x_1..x_n) = K(x,x) − v* G⁻¹ v` is the squared distance from
//! `K(·, x)` to the span of `K(·, x_i)`. It only shrinks as points are added, and it vanishes
//! once the span holds the whole range of a finite-rank projection.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, forward_subst, CMat, Cholesky, C64};
use crate::sampler::{sample_batch, SampleArchive, PROJECTION_TOL};
use crate::spectra::{build_grid_kernel, eigendecompose, Grid, GridModel, KernelMatrix};

/// Pivots below this make the Gram matrix singular.
pub const SINGULAR_PIVOT: f64 = 1e-14;
/// Negative pivots or residuals within this are rounding.
pub const PSD_SLACK: f64 = 1e-10;
pub const JITTER: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GramLogDet {
    /// `log det G`, or `−∞` when `G` is singular.
    pub value: f64,
    /// The factorization needed a diagonal shift of [`JITTER`].
    pub jittered: bool,
}

impl GramLogDet {
    pub fn is_singular(&self) -> bool {
        self.value == f64::NEG_INFINITY
    }
}

fn check_points(kernel: &KernelMatrix, points: &[usize]) -> Result<()> {
    let n = kernel.len();
    for (a, &p) in points.iter().enumerate() {
        if p >= n {
            return Err(Error::Domain(format!("site {p} outside the ground set")));
        }
        if points[..a].contains(&p) {
            return Err(Error::Domain(format!("repeated site {p}")));
        }
    }
    Ok(())
}

/// `log det [K(x_i, x_j)]` by Cholesky.
pub fn gram_logdet(kernel: &KernelMatrix, points: &[usize]) -> Result<GramLogDet> {
    check_points(kernel, points)?;
    let g = kernel.entries().submatrix(points);
    let logdet = |l: &CMat| (0..l.rows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum::<f64>();
    match cholesky(&g, SINGULAR_PIVOT) {
        Cholesky::Factor(l) => Ok(GramLogDet { value: logdet(&l), jittered: false }),
        Cholesky::SmallPivot { pivot, .. } if pivot >= -PSD_SLACK => Ok(GramLogDet { value: f64::NEG_INFINITY, jittered: false }),
        Cholesky::SmallPivot { .. } => {
            let mut gj = g.clone();
            for i in 0..gj.rows() {
                gj[(i, i)] += C64::new(JITTER, 0.0);
            }
            match cholesky(&gj, SINGULAR_PIVOT) {
                Cholesky::Factor(l) => Ok(GramLogDet { value: logdet(&l), jittered: true }),
                Cholesky::SmallPivot { pivot, .. } if pivot >= -PSD_SLACK => Ok(GramLogDet { value: f64::NEG_INFINITY, jittered: true }),
                Cholesky::SmallPivot { index, pivot } => {
                    Err(Error::Numerical(format!("Gram matrix not positive semidefinite (pivot {pivot:.3e} at {index})")))
                }
            }
        }
    }
}

fn clamp_residual(r: f64) -> Result<f64> {
    if r < -PSD_SLACK {
        return Err(Error::Numerical(format!("negative conditional intensity {r:.3e}")));
    }
    Ok(r.max(0.0))
}

fn column(kernel: &KernelMatrix, points: &[usize], x: usize) -> Vec<C64> {
    points.iter().map(|&p| kernel.get(p, x)).collect()
}

/// `K(x,x) − v* G⁻¹ v` with `v_i = K(x_i, x)`; zero when `x` is itself conditioned on.
pub fn conditional_intensity(kernel: &KernelMatrix, x: usize, points: &[usize]) -> Result<f64> {
    check_points(kernel, points)?;
    if x >= kernel.len() {
        return Err(Error::Domain(format!("probe {x} outside the ground set")));
    }
    if points.contains(&x) {
        return Ok(0.0);
    }
    let l = match cholesky(&kernel.entries().submatrix(points), SINGULAR_PIVOT) {
        Cholesky::Factor(l) => l,
        Cholesky::SmallPivot { index, pivot } => {
            return Err(Error::Conditioning(format!("singular Gram matrix (pivot {pivot:.3e} at {index})")))
        }
    };
    let w = forward_subst(&l, &column(kernel, points, x));
    clamp_residual(kernel.diag(x) - w.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Residuals at one probe after conditioning on the nearest `k` points, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualProfile {
    pub probe: usize,
    pub kernel_id: String,
    /// Conditioning points in the order they were added.
    pub order: Vec<usize>,
    /// Entry `k` is the residual after the first `k` points of `order`.
    pub residuals: Vec<f64>,
}

impl ResidualProfile {
    pub fn last(&self) -> f64 {
        *self.residuals.last().expect("profile holds k = 0")
    }
}

/// Nearest-first conditioning, one Cholesky row per added point. Each step subtracts a square,
/// so the raw profile is non-increasing in exact arithmetic and in floating point alike.
pub fn residual_profile(kernel: &KernelMatrix, points: &[usize], probe: usize) -> Result<ResidualProfile> {
    check_points(kernel, points)?;
    if probe >= kernel.len() {
        return Err(Error::Domain(format!("probe {probe} outside the ground set")));
    }
    if points.contains(&probe) {
        return Err(Error::Domain(format!("probe {probe} is a configuration point")));
    }
    let labels = kernel.labels();
    let mut order = points.to_vec();
    order.sort_by(|&a, &b| labels.distance(a, probe).total_cmp(&labels.distance(b, probe)).then(a.cmp(&b)));
    let n = order.len();
    let mut l = CMat::zeros(n, n);
    let mut w = Vec::with_capacity(n);
    let mut acc = kernel.diag(probe);
    let mut raw = vec![acc];
    for k in 0..n {
        let pk = order[k];
        let mut piv = kernel.diag(pk);
        for j in 0..k {
            let mut t = kernel.get(pk, order[j]);
            for m in 0..j {
                t -= l[(k, m)] * l[(j, m)].conj();
            }
            let lkj = t / l[(j, j)].re;
            l[(k, j)] = lkj;
            piv -= lkj.norm_sqr();
        }
        if !(piv >= SINGULAR_PIVOT) {
            return Err(Error::Conditioning(format!("singular Gram matrix after {k} points (pivot {piv:.3e})")));
        }
        let d = piv.sqrt();
        l[(k, k)] = C64::new(d, 0.0);
        let mut t = kernel.get(pk, probe);
        for m in 0..k {
            t -= l[(k, m)] * w[m];
        }
        let wk = t / d;
        acc -= wk.norm_sqr();
        w.push(wk);
        raw.push(acc);
    }
    let residuals = raw.into_iter().map(clamp_residual).collect::<Result<Vec<_>>>()?;
    Ok(ResidualProfile { probe, kernel_id: kernel.id(), order, residuals })
}

/// CSV with columns `probe, k, residual`.
pub fn profiles_csv(profiles: &[ResidualProfile]) -> String {
    let mut out = String::from("probe,k,residual\n");
    for p in profiles {
        for (k, r) in p.residuals.iter().enumerate() {
            out.push_str(&format!("{},{},{:.12e}\n", p.probe, k, r));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessCheck {
    pub rank: usize,
    pub replicas: usize,
    /// Fraction of replicas whose Gram matrix is nonsingular.
    pub fraction_nonsingular: f64,
    /// Replicas whose point count differs from the rank.
    pub wrong_count: usize,
    /// Largest conditional intensity, over replicas and over unoccupied sites, after
    /// conditioning on the whole configuration.
    pub max_final_residual: f64,
}

/// For a rank-`N` projection every replica has `N` points with nonsingular Gram matrix, and
/// conditioning on them leaves no residual anywhere.
pub fn finite_rank_completeness_check(kernel: &KernelMatrix, archive: &SampleArchive) -> Result<CompletenessCheck> {
    let owned;
    let sp = match kernel.spectrum() {
        Some(s) => s,
        None => {
            owned = eigendecompose(kernel)?;
            owned.spectrum().expect("eigendecompose attaches a spectrum")
        }
    };
    if !sp.is_projection(PROJECTION_TOL) {
        return Err(Error::Domain("kernel is not a projection".into()));
    }
    if archive.n_sites() != kernel.len() {
        return Err(Error::Domain("archive and kernel have different ground sets".into()));
    }
    if archive.is_empty() {
        return Err(Error::InsufficientData("empty archive".into()));
    }
    let rank = sp.rank(PROJECTION_TOL);
    let rows: Vec<(bool, bool, f64)> = archive
        .replicas
        .par_iter()
        .map(|c| {
            let ld = gram_logdet(kernel, &c.points)?;
            if ld.is_singular() {
                return Ok((false, c.len() != rank, f64::INFINITY));
            }
            let l = match cholesky(&kernel.entries().submatrix(&c.points), SINGULAR_PIVOT) {
                Cholesky::Factor(l) => l,
                Cholesky::SmallPivot { .. } => return Ok((false, c.len() != rank, f64::INFINITY)),
            };
            let occ = c.occupancy(kernel.len());
            let mut worst = 0.0f64;
            for x in (0..kernel.len()).filter(|&x| !occ[x]) {
                let w = forward_subst(&l, &column(kernel, &c.points, x));
                let r = clamp_residual(kernel.diag(x) - w.iter().map(|z| z.norm_sqr()).sum::<f64>())?;
                worst = worst.max(r);
            }
            Ok((true, c.len() != rank, worst))
        })
        .collect::<Result<_>>()?;
    let r = rows.len();
    Ok(CompletenessCheck {
        rank,
        replicas: r,
        fraction_nonsingular: rows.iter().filter(|x| x.0).count() as f64 / r as f64,
        wrong_count: rows.iter().filter(|x| x.1).count(),
        max_final_residual: rows.iter().map(|x| x.2).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayPoint {
    /// Half-width of the window `[−L, L]`.
    pub half_width: f64,
    pub sites: usize,
    pub trials: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    /// Final residual of each trial, in trial order.
    pub finals: Vec<f64>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Final residual at the probe on discretized sine kernels over growing windows. The probe is
/// the unoccupied site nearest the origin. Trials share seeds across windows.
pub fn sine_residual_decay(alpha: f64, mesh: f64, half_widths: &[f64], n_trials: usize, seed: u64) -> Result<Vec<DecayPoint>> {
    if n_trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    half_widths
        .iter()
        .map(|&lw| {
            let grid = Grid::interval(-lw, lw, mesh)?;
            let kernel = eigendecompose(&build_grid_kernel(GridModel::Sine(alpha), &grid)?)?;
            let archive = sample_batch(&kernel, n_trials, seed)?;
            if let Some((i, msg)) = archive.failures.first() {
                return Err(Error::Numerical(format!("replica {i} failed: {msg}")));
            }
            let labels = kernel.labels();
            let finals: Vec<f64> = archive
                .replicas
                .par_iter()
                .map(|c| {
                    let occ = c.occupancy(kernel.len());
                    let probe = (0..kernel.len())
                        .filter(|&i| !occ[i])
                        .min_by(|&a, &b| labels.position(a).0.abs().total_cmp(&labels.position(b).0.abs()).then(a.cmp(&b)))
                        .ok_or_else(|| Error::Geometry("every site is occupied".into()))?;
                    Ok(residual_profile(&kernel, &c.points, probe)?.last())
                })
                .collect::<Result<_>>()?;
            let mut sorted = finals.clone();
            sorted.sort_by(f64::total_cmp);
            Ok(DecayPoint {
                half_width: lw,
                sites: kernel.len(),
                trials: n_trials,
                median: quantile(&sorted, 0.5),
                q25: quantile(&sorted, 0.25),
                q75: quantile(&sorted, 0.75),
                finals,
            })
        })
        .collect()
}

/// CSV with columns `half_width, sites, trials, median, q25, q75`.
pub fn decay_csv(points: &[DecayPoint]) -> String {
    let mut out = String::from("half_width,sites,trials,median,q25,q75\n");
    for p in points {
        out.push_str(&format!("{},{},{},{:.12e},{:.12e},{:.12e}\n", p.half_width, p.sites, p.trials, p.median, p.q25, p.q75));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{build_toeplitz_kernel, Labels, Symbol};
    use std::f64::consts::PI;

    fn half(n: i64) -> KernelMatrix {
        build_toeplitz_kernel(&Symbol::indicator(PI / 2.0).unwrap(), 0..=n - 1).unwrap()
    }

    #[test]
    fn small_gram_determinants() {
        let k = half(8);
        assert!((gram_logdet(&k, &[3]).unwrap().value - 0.5f64.ln()).abs() < 1e-14);
        let two = gram_logdet(&k, &[0, 1]).unwrap().value;
        assert!((two - (0.25 - 1.0 / (PI * PI)).ln()).abs() < 1e-13);
        assert_eq!(gram_logdet(&k, &[]).unwrap().value, 0.0);
        let r1 = KernelMatrix::new(Labels::Integers(vec![0, 1]), CMat::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
        assert!(gram_logdet(&r1, &[0, 1]).unwrap().is_singular());
        assert!(matches!(gram_logdet(&k, &[1, 1]), Err(Error::Domain(_))));
    }

    #[test]
    fn indefinite_gram_is_an_error() {
        let bad = KernelMatrix::new(Labels::Integers(vec![0, 1]), CMat::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0])).unwrap();
        assert!(matches!(gram_logdet(&bad, &[0, 1]), Err(Error::Numerical(_))));
    }

    #[test]
    fn intensity_trivia() {
        let k = half(8);
        assert_eq!(conditional_intensity(&k, 2, &[]).unwrap(), k.diag(2));
        assert_eq!(conditional_intensity(&k, 2, &[0, 2, 5]).unwrap(), 0.0);
        let r1 = KernelMatrix::new(Labels::Integers(vec![0, 1]), CMat::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
        assert!(conditional_intensity(&r1, 1, &[0]).unwrap() < 1e-15);
    }

    #[test]
    fn schur_matches_determinant_ratio() {
        let k = half(12);
        let pts = [1, 4, 6, 9];
        for x in [0, 3, 5, 11] {
            let p = conditional_intensity(&k, x, &pts).unwrap();
            let mut all = pts.to_vec();
            all.push(x);
            let ratio = (gram_logdet(&k, &all).unwrap().value - gram_logdet(&k, &pts).unwrap().value).exp();
            assert!((p - ratio).abs() <= 1e-8 * ratio.max(1e-300), "{p} vs {ratio}");
        }
    }

    #[test]
    fn profile_is_monotone_and_matches_direct() {
        let k = half(16);
        let pts = [0, 3, 7, 10, 15];
        let prof = residual_profile(&k, &pts, 8).unwrap();
        assert_eq!(prof.order[0], 7);
        assert_eq!(prof.residuals.len(), 6);
        assert!(prof.residuals.windows(2).all(|w| w[1] <= w[0] + 1e-10));
        for m in 0..=pts.len() {
            let direct = conditional_intensity(&k, 8, &prof.order[..m]).unwrap();
            assert!((direct - prof.residuals[m]).abs() < 1e-12);
        }
        assert!(matches!(residual_profile(&k, &pts, 3), Err(Error::Domain(_))));
        assert!(profiles_csv(&[prof]).starts_with("probe,k,residual\n8,0,"));
    }

    #[test]
    fn massless_probe() {
        let k = KernelMatrix::diagonal(&[0.7, 0.0, 0.4]).unwrap();
        let prof = residual_profile(&k, &[0, 2], 1).unwrap();
        assert!(prof.residuals.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn rank_three_projection() {
        let k = eigendecompose(&half(12)).unwrap().top_projection(3).unwrap();
        let k = eigendecompose(&k).unwrap();
        let a = sample_batch(&k, 40, 2).unwrap();
        let c = finite_rank_completeness_check(&k, &a).unwrap();
        assert_eq!(c.rank, 3);
        assert_eq!(c.fraction_nonsingular, 1.0);
        assert_eq!(c.wrong_count, 0);
        assert!(c.max_final_residual <= 1e-8);
        assert!(matches!(finite_rank_completeness_check(&half(12), &a), Err(Error::Domain(_))));
    }

    #[test]
    fn rank_zero_is_vacuous() {
        let k = eigendecompose(&KernelMatrix::diagonal(&[0.0; 5]).unwrap()).unwrap();
        let a = sample_batch(&k, 5, 1).unwrap();
        let c = finite_rank_completeness_check(&k, &a).unwrap();
        assert_eq!((c.rank, c.fraction_nonsingular), (0, 1.0));
    }

    #[test]
    fn small_decay_run() {
        let pts = sine_residual_decay(1.0, 0.25, &[4.0, 8.0], 10, 3).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.finals.len() == 10 && p.q25 <= p.median && p.median <= p.q75));
        assert!(decay_csv(&pts).lines().count() == 3);
    }
}
