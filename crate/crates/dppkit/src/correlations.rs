//! k-point intensities: exact determinants and empirical frequencies from archives.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{det, CMat};
use crate::sampler::SampleArchive;
use crate::spectra::{KernelMatrix, Labels, Symbol};

pub const MAX_TUPLE: usize = 6;
pub const MIN_TRANSLATES: usize = 10;
const NEG_RHO_TOL: f64 = 1e-10;

fn check_distinct<T: PartialEq + std::fmt::Debug>(sites: &[T]) -> Result<()> {
    if sites.len() > MAX_TUPLE {
        return Err(Error::Domain(format!("at most {MAX_TUPLE} sites")));
    }
    for i in 0..sites.len() {
        if sites[i + 1..].contains(&sites[i]) {
            return Err(Error::Domain(format!("repeated site {:?}", sites[i])));
        }
    }
    Ok(())
}

fn real_det(m: &CMat) -> Result<f64> {
    let d = det(m).re;
    if d < -NEG_RHO_TOL {
        return Err(Error::Numerical(format!("negative intensity {d:.3e}")));
    }
    Ok(d.max(0.0))
}

/// `ρ_k(x_1..x_k) = det[f̂(x_i − x_j)]` for the stationary process of `symbol`.
pub fn exact_rho(symbol: &Symbol, sites: &[i64]) -> Result<f64> {
    check_distinct(sites)?;
    let k = sites.len();
    let mut m = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = symbol.fourier_coefficient(sites[i] - sites[j])?;
        }
    }
    real_det(&m)
}

/// `det K_A` for ground-set indices `A` of a finite kernel.
pub fn kernel_rho(kernel: &KernelMatrix, idx: &[usize]) -> Result<f64> {
    check_distinct(idx)?;
    if idx.iter().any(|&i| i >= kernel.len()) {
        return Err(Error::Domain("index outside the ground set".into()));
    }
    real_det(&kernel.entries().submatrix(idx))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoEstimate {
    pub estimate: f64,
    /// Jackknife over replicas.
    pub se: f64,
    /// Replica-translate pairs that contributed.
    pub n_eff: usize,
}

/// Frequency of joint occupancy of `offsets`.
///
/// On integer labels, `translation_averaging` slides the tuple over every position that fits
/// and averages within each replica first. Offsets are labels; otherwise they are ground-set
/// indices and averaging is ignored.
pub fn empirical_rho(archive: &SampleArchive, offsets: &[i64], translation_averaging: bool) -> Result<RhoEstimate> {
    let x = replica_frequencies(archive, offsets, translation_averaging)?;
    let t = if translation_averaging && matches!(archive.labels, Labels::Integers(_)) {
        let span = offsets.iter().max().unwrap_or(&0) - offsets.iter().min().unwrap_or(&0);
        archive.n_sites() - span as usize
    } else {
        1
    };
    let rf = x.len() as f64;
    let mean = x.iter().sum::<f64>() / rf;
    // For a mean, the jackknife se reduces to the sample standard error.
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (rf - 1.0);
    Ok(RhoEstimate { estimate: mean, se: (var / rf).sqrt(), n_eff: x.len() * t })
}

/// Per-replica joint-occupancy frequency of `offsets`, averaged over translates when enabled.
pub fn replica_frequencies(archive: &SampleArchive, offsets: &[i64], translation_averaging: bool) -> Result<Vec<f64>> {
    check_distinct(offsets)?;
    let r = archive.replicas.len();
    if r < 2 {
        return Err(Error::InsufficientData(format!("{r} replicas; need at least 2")));
    }
    let n = archive.n_sites();
    let (anchors, rel): (Vec<i64>, Vec<i64>) = match &archive.labels {
        Labels::Integers(_) if translation_averaging => {
            let lo = offsets.iter().min().copied().unwrap_or(0);
            let hi = offsets.iter().max().copied().unwrap_or(0);
            let rel: Vec<i64> = offsets.iter().map(|o| o - lo).collect();
            let span = hi - lo;
            ((0..n as i64 - span).collect(), rel)
        }
        Labels::Integers(l) => {
            let mut rel = Vec::with_capacity(offsets.len());
            for &o in offsets {
                let i = l
                    .iter()
                    .position(|&x| x == o)
                    .ok_or_else(|| Error::InsufficientData(format!("site {o} outside the window")))?;
                rel.push(i as i64);
            }
            (vec![0], rel)
        }
        _ => {
            if offsets.iter().any(|&o| o < 0 || o as usize >= n) {
                return Err(Error::InsufficientData("index outside the ground set".into()));
            }
            (vec![0], offsets.to_vec())
        }
    };
    if translation_averaging && matches!(archive.labels, Labels::Integers(_)) && anchors.len() < MIN_TRANSLATES {
        return Err(Error::InsufficientData(format!("{} translates; need {MIN_TRANSLATES}", anchors.len())));
    }
    let t = anchors.len() as f64;
    Ok(archive
        .replicas
        .par_iter()
        .map(|c| {
            let occ = c.occupancy(n);
            let hits = anchors.iter().filter(|&&a| rel.iter().all(|&o| occ[(a + o) as usize])).count();
            hits as f64 / t
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub sites: Vec<i64>,
    pub exact: Option<f64>,
    pub empirical: Option<RhoEstimate>,
}

/// Rows of `sites, exact, estimate, se, n_eff`; missing entries stay empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTable {
    pub rows: Vec<CorrelationRow>,
}

impl CorrelationTable {
    pub fn build(symbol: Option<&Symbol>, archive: Option<&SampleArchive>, tuples: &[Vec<i64>]) -> Result<Self> {
        let rows = tuples
            .par_iter()
            .map(|s| {
                let exact = symbol.map(|f| exact_rho(f, s)).transpose()?;
                let empirical = archive.map(|a| empirical_rho(a, s, true)).transpose()?;
                Ok(CorrelationRow { sites: s.clone(), exact, empirical })
            })
            .collect::<Result<_>>()?;
        Ok(CorrelationTable { rows })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sites", "exact", "estimate", "se", "n_eff"]).map_err(csv_err)?;
        for r in &self.rows {
            let sites = r.sites.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
            let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
            w.write_record([
                sites,
                opt(r.exact),
                opt(r.empirical.map(|e| e.estimate)),
                opt(r.empirical.map(|e| e.se)),
                r.empirical.map(|e| e.n_eff.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linstat::analytic_variance_discrete;
    use crate::sampler::sample_batch;
    use crate::spectra::{build_toeplitz_kernel, eigendecompose};
    use std::f64::consts::PI;

    fn half() -> Symbol {
        Symbol::indicator(PI / 2.0).unwrap()
    }

    #[test]
    fn small_tuples() {
        let s = half();
        assert!((exact_rho(&s, &[0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((exact_rho(&s, &[0, 2]).unwrap() - 0.25).abs() < 1e-15);
        let r01 = 0.25 - 1.0 / (PI * PI);
        assert!((exact_rho(&s, &[0, 1]).unwrap() - r01).abs() < 1e-15);
        assert!((exact_rho(&s, &[]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(exact_rho(&s, &[0, 3, 0]), Err(Error::Domain(_))));
        assert!(matches!(exact_rho(&s, &[0, 1, 2, 3, 4, 5, 6]), Err(Error::Domain(_))));
    }

    #[test]
    fn permutation_and_repulsion() {
        let s = half();
        let a = exact_rho(&s, &[0, 1, 5]).unwrap();
        for p in [[1, 0, 5], [5, 1, 0], [0, 5, 1]] {
            assert!((exact_rho(&s, &p).unwrap() - a).abs() < 1e-12);
        }
        for n in 1..=64 {
            assert!(exact_rho(&s, &[0, n]).unwrap() <= 0.25 + 1e-15);
        }
    }

    #[test]
    fn count_variance_from_pair_intensities() {
        for s in [half(), Symbol::indicator(1.1).unwrap(), Symbol::constant(0.3).unwrap()] {
            let n = 21i64;
            let rho1 = exact_rho(&s, &[0]).unwrap();
            let mut pairs = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        pairs += exact_rho(&s, &[i, j]).unwrap();
                    }
                }
            }
            let nf = n as f64;
            let via_rho = nf * rho1 + pairs - (nf * rho1).powi(2);
            let w: Vec<(i64, f64)> = (0..n).map(|k| (k, 1.0)).collect();
            let lin = analytic_variance_discrete(&s, &w).unwrap();
            assert!((via_rho - lin).abs() < 1e-10, "{via_rho} vs {lin}");
        }
    }

    #[test]
    fn identity_kernel_archive() {
        let k = eigendecompose(&build_toeplitz_kernel(&Symbol::constant(1.0).unwrap(), 0..=19).unwrap()).unwrap();
        let a = sample_batch(&k, 5, 3).unwrap();
        let e = empirical_rho(&a, &[0, 3, 4], true).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert_eq!(e.se, 0.0);
    }

    #[test]
    fn empirical_matches_exact() {
        let s = half();
        let k = eigendecompose(&build_toeplitz_kernel(&s, 0..=39).unwrap()).unwrap();
        let a = sample_batch(&k, 2000, 17).unwrap();
        for t in [vec![0, 1], vec![0, 1, 2]] {
            let e = empirical_rho(&a, &t, true).unwrap();
            let x = exact_rho(&s, &t).unwrap();
            assert!((e.estimate - x).abs() <= 4.0 * e.se, "{t:?}: {} vs {x} se {}", e.estimate, e.se);
        }
        assert!(matches!(empirical_rho(&a, &[0, 35], true), Err(Error::InsufficientData(_))));
        let single = empirical_rho(&a, &[3, 4], false).unwrap();
        assert_eq!(single.n_eff, 2000);
    }

    #[test]
    fn csv_layout() {
        let t = CorrelationTable::build(Some(&half()), None, &[vec![0, 2]]).unwrap();
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("sites,exact,estimate,se,n_eff\n0;2,2.5"));
    }
}
