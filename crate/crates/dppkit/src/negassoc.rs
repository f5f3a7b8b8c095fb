//! Lower-tail negative association of counts in disjoint sets:
//! `P(∩ {N(A_i) ≤ m_i}) ≤ Π P(N(A_i) ≤ m_i)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigh, CMat, C64};
use crate::rng::{replica_seed, SplitMix64};
use crate::sampler::{exact_law, SampleArchive};
use crate::spectra::{build_toeplitz_kernel, KernelMatrix, Labels, Symbol};

pub const MAX_EXACT_SITES: usize = 16;
pub const MIN_MC_REPLICAS: usize = 1000;
const EXACT_SLACK: f64 = 1e-12;
const LAW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegAssocReport {
    pub lhs: f64,
    pub rhs: f64,
    pub method: Method,
    /// Binomial standard error of `lhs` (Monte Carlo only).
    pub se_lhs: Option<f64>,
    /// Delta-method standard error of `rhs` (Monte Carlo only).
    pub se_rhs: Option<f64>,
    /// Standard error of `lhs − rhs` from its influence function (Monte Carlo only).
    pub se: Option<f64>,
    /// `(lhs − rhs) / se` (Monte Carlo only).
    pub z: Option<f64>,
    pub violation: bool,
}

fn check_sets(n: usize, sets: &[Vec<usize>], thresholds: &[i64]) -> Result<()> {
    if sets.len() != thresholds.len() {
        return Err(Error::Domain("one threshold per set".into()));
    }
    let mut seen = vec![false; n];
    for s in sets {
        for &i in s {
            if i >= n {
                return Err(Error::Domain(format!("site {i} outside the ground set")));
            }
            if seen[i] {
                return Err(Error::Domain(format!("sets overlap at site {i}")));
            }
            seen[i] = true;
        }
    }
    Ok(())
}

fn masks(sets: &[Vec<usize>]) -> Vec<u64> {
    sets.iter().map(|s| s.iter().fold(0u64, |m, &i| m | 1 << i)).collect()
}

/// Both sides by enumerating all `2ⁿ` subsets.
pub fn exact_negassoc(kernel: &KernelMatrix, sets: &[Vec<usize>], thresholds: &[i64]) -> Result<NegAssocReport> {
    let n = kernel.len();
    if n > MAX_EXACT_SITES {
        return Err(Error::Domain(format!("exact enumeration limited to {MAX_EXACT_SITES} sites")));
    }
    check_sets(n, sets, thresholds)?;
    let law = exact_law(kernel)?;
    let total: f64 = law.iter().sum();
    if (total - 1.0).abs() > LAW_SUM_TOL {
        return Err(Error::Numerical(format!("subset law sums to {total}")));
    }
    let ms = masks(sets);
    let k = sets.len();
    // Fixed chunks summed in order keep the result independent of the thread count.
    let parts: Vec<(f64, Vec<f64>)> = law
        .par_chunks(1024)
        .enumerate()
        .map(|(c, chunk)| {
            let mut j = 0.0;
            let mut m = vec![0.0; k];
            for (off, &p) in chunk.iter().enumerate() {
                let s = (c * 1024 + off) as u64;
                let mut all = true;
                for i in 0..k {
                    let ok = ((s & ms[i]).count_ones() as i64) <= thresholds[i];
                    if ok {
                        m[i] += p;
                    }
                    all &= ok;
                }
                if all {
                    j += p;
                }
            }
            (j, m)
        })
        .collect();
    let joint: f64 = parts.iter().map(|p| p.0).sum();
    let marg: Vec<f64> = (0..k).map(|i| parts.iter().map(|p| p.1[i]).sum()).collect();
    let lhs = joint.clamp(0.0, 1.0);
    let rhs = marg.iter().map(|p| p.clamp(0.0, 1.0)).product::<f64>();
    Ok(NegAssocReport {
        lhs,
        rhs,
        method: Method::Exact,
        se_lhs: None,
        se_rhs: None,
        se: None,
        z: None,
        violation: lhs - rhs > EXACT_SLACK,
    })
}

fn counts(points: &[usize], sets: &[Vec<usize>], owner: &[Option<usize>]) -> Vec<i64> {
    let mut c = vec![0i64; sets.len()];
    for &p in points {
        if let Some(i) = owner[p] {
            c[i] += 1;
        }
    }
    c
}

fn owners(n: usize, sets: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut o = vec![None; n];
    for (i, s) in sets.iter().enumerate() {
        for &j in s {
            o[j] = Some(i);
        }
    }
    o
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let r = x.len() as f64;
    let m = x.iter().sum::<f64>() / r;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (r - 1.0);
    (m, v.sqrt())
}

/// One-sided Monte Carlo test; a report without violation means only "not rejected at 3σ".
pub fn mc_negassoc(archive: &SampleArchive, sets: &[Vec<usize>], thresholds: &[i64]) -> Result<NegAssocReport> {
    let r = archive.replicas.len();
    if r < MIN_MC_REPLICAS {
        return Err(Error::InsufficientData(format!("{r} replicas; need {MIN_MC_REPLICAS}")));
    }
    let n = archive.n_sites();
    check_sets(n, sets, thresholds)?;
    let own = owners(n, sets);
    let k = sets.len();
    let events: Vec<Vec<bool>> = archive
        .replicas
        .par_iter()
        .map(|c| counts(&c.points, sets, &own).iter().zip(thresholds).map(|(c, m)| c <= m).collect())
        .collect();
    let rf = r as f64;
    let p: Vec<f64> = (0..k).map(|i| events.iter().filter(|e| e[i]).count() as f64 / rf).collect();
    let joint: Vec<f64> = events.iter().map(|e| e.iter().all(|&b| b) as u8 as f64).collect();
    let lhs = joint.iter().sum::<f64>() / rf;
    let rhs: f64 = p.iter().product();
    let others = |i: usize| -> f64 { (0..k).filter(|&j| j != i).map(|j| p[j]).product() };
    let infl_rhs: Vec<f64> = events.iter().map(|e| (0..k).map(|i| others(i) * e[i] as u8 as f64).sum()).collect();
    let diff: Vec<f64> = joint.iter().zip(&infl_rhs).map(|(j, g)| j - g).collect();
    let se = mean_sd(&diff).1 / rf.sqrt();
    let se_rhs = mean_sd(&infl_rhs).1 / rf.sqrt();
    let se_lhs = (lhs * (1.0 - lhs) / rf).sqrt();
    let d = lhs - rhs;
    let z = if se > 0.0 { d / se } else if d > 0.0 { f64::INFINITY } else { 0.0 };
    Ok(NegAssocReport {
        lhs,
        rhs,
        method: Method::Mc,
        se_lhs: Some(se_lhs),
        se_rhs: Some(se_rhs),
        se: Some(se),
        z: Some(z),
        violation: z > 3.0,
    })
}

/// Covariance form: `E[f g] ≤ E[f] E[g]` for `f`, `g` non-decreasing in each block count.
/// `f` sees the counts of `a_blocks`, `g` those of `b_blocks`; monotonicity is the caller's
/// responsibility.
pub fn monotone_functional_test(
    archive: &SampleArchive,
    a_blocks: &[Vec<usize>],
    b_blocks: &[Vec<usize>],
    f: impl Fn(&[i64]) -> f64 + Sync,
    g: impl Fn(&[i64]) -> f64 + Sync,
) -> Result<NegAssocReport> {
    let r = archive.replicas.len();
    if r < 3 {
        return Err(Error::InsufficientData(format!("{r} replicas; need at least 3")));
    }
    let n = archive.n_sites();
    let all: Vec<Vec<usize>> = a_blocks.iter().chain(b_blocks).cloned().collect();
    check_sets(n, &all, &vec![0; all.len()])?;
    let own = owners(n, &all);
    let ka = a_blocks.len();
    let xy: Vec<(f64, f64)> = archive
        .replicas
        .par_iter()
        .map(|c| {
            let cnt = counts(&c.points, &all, &own);
            (f(&cnt[..ka]), g(&cnt[ka..]))
        })
        .collect();
    let rf = r as f64;
    let (mx, my) = (xy.iter().map(|v| v.0).sum::<f64>() / rf, xy.iter().map(|v| v.1).sum::<f64>() / rf);
    let lhs = xy.iter().map(|v| v.0 * v.1).sum::<f64>() / rf;
    let rhs = mx * my;
    let cross: Vec<f64> = xy.iter().map(|v| (v.0 - mx) * (v.1 - my)).collect();
    let se = mean_sd(&cross).1 / rf.sqrt();
    let d = lhs - rhs;
    let z = if se > 0.0 { d / se } else if d > 1e-12 { f64::INFINITY } else { 0.0 };
    Ok(NegAssocReport {
        lhs,
        rhs,
        method: Method::Mc,
        se_lhs: None,
        se_rhs: None,
        se: Some(se),
        z: Some(z),
        violation: z > 3.0,
    })
}

/// A random contraction `U diag(λ) U*` with `λ ∈ [0, 1]` on `n` integer sites.
pub fn random_contraction(n: usize, rng: &mut SplitMix64) -> Result<KernelMatrix> {
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(rng.next_f64() - 0.5, 0.0);
        for j in i + 1..n {
            let z = C64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    let e = eigh(&h, 1e-13, 100)?;
    let lam: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let u = &e.vectors;
    let k = CMat::from_fn(n, n, |i, j| (0..n).map(|m| u[(i, m)] * lam[m] * u[(j, m)].conj()).sum());
    let k = CMat::from_fn(n, n, |i, j| if i == j { C64::new(k[(i, i)].re, 0.0) } else { (k[(i, j)] + k[(j, i)].conj()) * 0.5 });
    KernelMatrix::new(Labels::Integers((0..n as i64).collect()), k)
}

fn random_symbol(rng: &mut SplitMix64) -> Result<Symbol> {
    match rng.below(3) {
        0 => Symbol::indicator(0.1 + rng.next_f64() * (std::f64::consts::PI - 0.2)),
        1 => Symbol::constant(rng.next_f64()),
        _ => {
            // |f − a_0| ≤ 2 Σ|a_j| ≤ min(a_0, 1 − a_0).
            let a0 = 0.2 + 0.6 * rng.next_f64();
            let budget = a0.min(1.0 - a0) / 2.0;
            let deg = 1 + rng.below(4) as usize;
            let w: Vec<f64> = (0..deg).map(|_| rng.next_f64()).collect();
            let tot: f64 = w.iter().sum();
            let mut c = vec![(0i64, C64::new(a0, 0.0))];
            for (j, wj) in w.iter().enumerate() {
                c.push((j as i64 + 1, C64::from_polar(budget * wj / tot, 2.0 * std::f64::consts::PI * rng.next_f64())));
            }
            Symbol::trig_poly(&c)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub instance: usize,
    pub seed: u64,
    pub kernel: String,
    pub sites: usize,
    pub sets: Vec<Vec<usize>>,
    pub thresholds: Vec<i64>,
    pub report: NegAssocReport,
}

/// Randomized exact instances: a random symbol window or random contraction, random disjoint
/// sets and thresholds. Sizes cycle through 4..=12 with every tenth instance at 16 sites.
pub fn exact_sweep(n_instances: usize, master_seed: u64) -> Result<Vec<SweepRow>> {
    (0..n_instances)
        .into_par_iter()
        .map(|inst| {
            let seed = replica_seed(master_seed, inst as u64);
            let mut rng = SplitMix64::new(seed);
            let n = if inst % 10 == 9 { MAX_EXACT_SITES } else { 4 + rng.below(9) as usize };
            let (kernel, label) = if rng.bernoulli(0.5) {
                let s = random_symbol(&mut rng)?;
                let label = format!("{:?}", s.kind()).split(['(', ' ', '{']).next().unwrap_or("symbol").to_lowercase();
                (build_toeplitz_kernel(&s, 0..=n as i64 - 1)?, label)
            } else {
                (random_contraction(n, &mut rng)?, "contraction".to_string())
            };
            let n_sets = 2 + rng.below(2) as usize;
            let mut sets = vec![Vec::new(); n_sets];
            for i in 0..n {
                let slot = rng.below(n_sets as u64 + 1) as usize;
                if slot < n_sets {
                    sets[slot].push(i);
                }
            }
            let thresholds: Vec<i64> = sets.iter().map(|s| rng.below(s.len() as u64 + 1) as i64 - (rng.bernoulli(0.1) as i64)).collect();
            let report = exact_negassoc(&kernel, &sets, &thresholds)?;
            Ok(SweepRow { instance: inst, seed, kernel: label, sites: n, sets, thresholds, report })
        })
        .collect()
}

/// Randomized Monte Carlo instances on indicator kernels with `min_sites..=max_sites` sites:
/// two or three disjoint blocks of 3 to 8 consecutive sites, thresholds near the block means and
/// below the block sizes so that no event is sure.
pub fn mc_sweep(n_instances: usize, n_reps: usize, min_sites: usize, max_sites: usize, master_seed: u64) -> Result<Vec<SweepRow>> {
    if min_sites < 30 || max_sites < min_sites {
        return Err(Error::Domain("need 30 <= min_sites <= max_sites".into()));
    }
    (0..n_instances)
        .map(|inst| {
            let seed = replica_seed(master_seed, inst as u64);
            let mut rng = SplitMix64::new(seed);
            let n = min_sites + rng.below((max_sites - min_sites + 1) as u64) as usize;
            let a = 0.3 + rng.next_f64() * (std::f64::consts::PI - 0.6);
            let symbol = Symbol::indicator(a)?;
            let kernel = crate::spectra::eigendecompose(&build_toeplitz_kernel(&symbol, 0..=n as i64 - 1)?)?;
            let n_sets = 2 + rng.below(2) as usize;
            let mut sets: Vec<Vec<usize>> = Vec::new();
            let mut cursor = rng.below(6) as usize;
            for _ in 0..n_sets {
                let len = 3 + rng.below(6) as usize;
                sets.push((cursor..cursor + len).collect());
                cursor += len + rng.below(6) as usize;
            }
            let density = symbol.mean();
            let thresholds: Vec<i64> =
                sets.iter().map(|s| ((density * s.len() as f64).floor() as i64 + rng.below(3) as i64 - 1).clamp(0, s.len() as i64 - 1)).collect();
            let archive = crate::sampler::sample_batch(&kernel, n_reps, seed)?;
            if let Some((i, msg)) = archive.failures.first() {
                return Err(Error::Numerical(format!("replica {i} failed: {msg}")));
            }
            let report = mc_negassoc(&archive, &sets, &thresholds)?;
            Ok(SweepRow { instance: inst, seed, kernel: format!("indicator({a:.6})"), sites: n, sets, thresholds, report })
        })
        .collect()
}

/// CSV with columns `instance, seed, kernel, sites, sets, thresholds, lhs, rhs, diff, se, z, violation`.
/// Sets are `;`-separated blocks of `:`-separated sites; `se` and `z` are empty for exact rows.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("instance,seed,kernel,sites,sets,thresholds,lhs,rhs,diff,se,z,violation\n");
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(":");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.15e},{:.15e},{:.6e},{},{},{}\n",
            r.instance,
            r.seed,
            r.kernel,
            r.sites,
            r.sets.iter().map(|s| join(s)).collect::<Vec<_>>().join(";"),
            r.thresholds.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"),
            r.report.lhs,
            r.report.rhs,
            r.report.lhs - r.report.rhs,
            opt(r.report.se),
            opt(r.report.z),
            r.report.violation
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::sample_batch;
    use crate::spectra::eigendecompose;
    use std::f64::consts::PI;

    #[test]
    fn rank_one_pair() {
        let k = KernelMatrix::new(Labels::Integers(vec![0, 1]), CMat::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
        let r = exact_negassoc(&k, &[vec![0], vec![1]], &[0, 0]).unwrap();
        assert!(r.lhs.abs() < 1e-15);
        assert!((r.rhs - 0.25).abs() < 1e-15);
        assert!(!r.violation);
    }

    #[test]
    fn sure_and_impossible_events() {
        let k = build_toeplitz_kernel(&Symbol::indicator(1.0).unwrap(), 0..=5).unwrap();
        let sets = vec![vec![0, 1], vec![3, 4, 5]];
        let r = exact_negassoc(&k, &sets, &[2, 3]).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-9 && (r.rhs - 1.0).abs() < 1e-9);
        let r = exact_negassoc(&k, &sets, &[-1, -1]).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(matches!(exact_negassoc(&k, &[vec![0, 1], vec![1]], &[0, 0]), Err(Error::Domain(_))));
    }

    #[test]
    fn four_site_indicator() {
        let k = build_toeplitz_kernel(&Symbol::indicator(PI / 2.0).unwrap(), 0..=3).unwrap();
        let r = exact_negassoc(&k, &[vec![0, 1], vec![2, 3]], &[0, 0]).unwrap();
        assert!(r.lhs <= r.rhs + 1e-12);
        assert!(r.lhs > 0.0);
    }

    #[test]
    fn small_sweep_has_no_violation() {
        let rows = exact_sweep(30, 5).unwrap();
        assert!(rows.iter().all(|r| !r.report.violation));
        assert!(sweep_csv(&rows).lines().count() == 31);
    }

    #[test]
    fn monte_carlo_agrees_with_enumeration() {
        let k = eigendecompose(&build_toeplitz_kernel(&Symbol::indicator(1.2).unwrap(), 0..=9).unwrap()).unwrap();
        let sets = vec![vec![0, 1, 2], vec![4, 5], vec![7, 8, 9]];
        let th = [1, 0, 1];
        let ex = exact_negassoc(&k, &sets, &th).unwrap();
        let a = sample_batch(&k, 4000, 9).unwrap();
        let mc = mc_negassoc(&a, &sets, &th).unwrap();
        assert!((mc.lhs - ex.lhs).abs() <= 4.0 * mc.se_lhs.unwrap());
        assert!(!mc.violation);
        let small = sample_batch(&k, 10, 9).unwrap();
        assert!(matches!(mc_negassoc(&small, &sets, &th), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn functional_forms() {
        let k = eigendecompose(&build_toeplitz_kernel(&Symbol::indicator(PI / 2.0).unwrap(), 0..=19).unwrap()).unwrap();
        let a = sample_batch(&k, 2000, 4).unwrap();
        let ab = vec![(5..10).collect::<Vec<_>>()];
        let bb = vec![(10..15).collect::<Vec<_>>()];
        let sum = |c: &[i64]| c.iter().sum::<i64>() as f64;
        let r = monotone_functional_test(&a, &ab, &bb, sum, sum).unwrap();
        assert!(!r.violation);
        assert!(r.lhs < r.rhs, "sums of adjacent blocks repel");
        let r = monotone_functional_test(&a, &ab, &bb, |_| 1.0, sum).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-12);
    }
}
