//! Exact DPP sampling by sequential Schur downdates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::rng::{replica_seed, SplitMix64};
use crate::spectra::{KernelMatrix, Labels};

/// Eigenvalues this close to 0 or 1 count as a projection.
pub const PROJECTION_TOL: f64 = 1e-6;
const NEG_TOL: f64 = 1e-8;

/// Occupied sites (ground-set indices, ascending) of one draw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub points: Vec<usize>,
    pub seed: u64,
    pub kernel_id: String,
}

impl PointConfiguration {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn occupancy(&self, n_sites: usize) -> Vec<bool> {
        let mut o = vec![false; n_sites];
        for &p in &self.points {
            o[p] = true;
        }
        o
    }
}

/// Draw from the projection kernel `V V*`, `V` an `n × r` matrix with orthonormal columns.
pub fn sample_frame(v: &CMat, rng: &mut SplitMix64) -> Result<Vec<usize>> {
    let (n, r) = (v.rows(), v.cols());
    let mut d: Vec<f64> = (0..n).map(|j| v.row(j).iter().map(|z| z.norm_sqr()).sum()).collect();
    let mut us: Vec<Vec<C64>> = Vec::with_capacity(r);
    let mut picked = Vec::with_capacity(r);
    for _ in 0..r {
        let total: f64 = d.iter().sum();
        let target = rng.next_f64() * total;
        let mut acc = 0.0;
        let mut i = n - 1;
        for (j, &dj) in d.iter().enumerate() {
            acc += dj;
            if acc > target && dj > 0.0 {
                i = j;
                break;
            }
        }
        while d[i] <= 0.0 && i > 0 {
            i -= 1;
        }
        let di = d[i];
        if di <= 0.0 {
            return Err(Error::Degeneracy("no remaining mass; consider jitter".into()));
        }
        // Column i of the current conditional kernel, normalized.
        let vi: Vec<C64> = v.row(i).iter().map(|z| z.conj()).collect();
        let mut col: Vec<C64> = (0..n).map(|j| v.row(j).iter().zip(&vi).map(|(a, b)| a * b).sum()).collect();
        for u in &us {
            let c = u[i].conj();
            for (x, y) in col.iter_mut().zip(u) {
                *x -= y * c;
            }
        }
        let s = di.sqrt();
        for x in col.iter_mut() {
            *x /= s;
        }
        for (j, dj) in d.iter_mut().enumerate() {
            *dj -= col[j].norm_sqr();
            if *dj < 0.0 {
                if *dj < -NEG_TOL {
                    return Err(Error::Degeneracy(format!("conditional probability {dj:.3e} at site {j}; consider jitter")));
                }
                *dj = 0.0;
            }
        }
        d[i] = 0.0;
        us.push(col);
        picked.push(i);
    }
    picked.sort_unstable();
    Ok(picked)
}

fn require_spectrum(kernel: &KernelMatrix) -> Result<&crate::spectra::Spectrum> {
    kernel.spectrum().ok_or_else(|| Error::Domain("kernel must be decomposed before sampling".into()))
}

/// Sample a projection kernel; the count equals the rank.
pub fn sample_projection(kernel: &KernelMatrix, rng: &mut SplitMix64) -> Result<Vec<usize>> {
    let sp = require_spectrum(kernel)?;
    if !sp.is_projection(PROJECTION_TOL) {
        return Err(Error::Domain("spectrum is not 0/1 within tolerance".into()));
    }
    let keep: Vec<usize> = (0..sp.values.len()).filter(|&k| sp.values[k] >= 0.5).collect();
    sample_frame(&select_columns(&sp.vectors, &keep), rng)
}

/// Sample any contraction: keep eigenvector `k` with probability `λ_k`, then sample the projection.
pub fn sample_contraction(kernel: &KernelMatrix, rng: &mut SplitMix64) -> Result<Vec<usize>> {
    let sp = require_spectrum(kernel)?;
    let keep: Vec<usize> = (0..sp.values.len()).filter(|&k| rng.bernoulli(sp.values[k])).collect();
    sample_frame(&select_columns(&sp.vectors, &keep), rng)
}

fn select_columns(v: &CMat, keep: &[usize]) -> CMat {
    CMat::from_fn(v.rows(), keep.len(), |i, j| v[(i, keep[j])])
}

/// Replicas drawn from one kernel, each reproducible from `(master_seed, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleArchive {
    pub kernel_id: String,
    pub master_seed: u64,
    pub labels: Labels,
    pub replicas: Vec<PointConfiguration>,
    /// Replica index of each entry of `replicas`.
    pub indices: Vec<usize>,
    /// Replica indices that failed, with the error message.
    pub failures: Vec<(usize, String)>,
}

impl SampleArchive {
    pub fn n_sites(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.replicas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicas.is_empty()
    }

    /// Serialize as JSON lines: a manifest line, then one line per replica.
    pub fn to_jsonl(&self) -> String {
        let first = match &self.labels {
            Labels::Integers(v) => serde_json::json!(v.first()),
            _ => serde_json::Value::Null,
        };
        let head = serde_json::json!({
            "kernel_id": self.kernel_id,
            "master_seed": self.master_seed,
            "n_sites": self.n_sites(),
            "labels": self.labels.kind(),
            "first_label": first,
            "n_reps": self.replicas.len() + self.failures.len(),
        });
        let mut lines = vec![head.to_string()];
        let mut rows: Vec<(usize, String)> = self
            .replicas
            .iter()
            .zip(&self.indices)
            .map(|(r, &i)| (i, serde_json::json!({"i": i, "seed": r.seed, "points": r.points}).to_string()))
            .collect();
        for (i, msg) in &self.failures {
            let seed = replica_seed(self.master_seed, *i as u64);
            rows.push((*i, serde_json::json!({"i": i, "seed": seed, "error": msg}).to_string()));
        }
        rows.sort_by_key(|r| r.0);
        lines.extend(rows.into_iter().map(|r| r.1));
        lines.join("\n") + "\n"
    }
}

/// Draw `n_reps` replicas in parallel; output order never depends on scheduling.
pub fn sample_batch(kernel: &KernelMatrix, n_reps: usize, master_seed: u64) -> Result<SampleArchive> {
    if n_reps == 0 {
        return Err(Error::Domain("n_reps must be at least 1".into()));
    }
    require_spectrum(kernel)?;
    let id = kernel.id();
    let results: Vec<(usize, u64, Result<Vec<usize>>)> = (0..n_reps)
        .into_par_iter()
        .map(|i| {
            let seed = replica_seed(master_seed, i as u64);
            let mut rng = SplitMix64::new(seed);
            (i, seed, sample_contraction(kernel, &mut rng))
        })
        .collect();
    let mut replicas = Vec::with_capacity(n_reps);
    let mut indices = Vec::with_capacity(n_reps);
    let mut failures = Vec::new();
    for (i, seed, r) in results {
        match r {
            Ok(points) => {
                replicas.push(PointConfiguration { points, seed, kernel_id: id.clone() });
                indices.push(i);
            }
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    Ok(SampleArchive { kernel_id: id, master_seed, labels: kernel.labels().clone(), replicas, indices, failures })
}

/// Exact probability `P(X = S) = |det(K − I_{S^c})|` for a subset given as a bitmask.
pub fn exact_subset_probability(k: &CMat, mask: u64) -> f64 {
    let n = k.rows();
    let mut m = k.clone();
    for i in 0..n {
        if mask >> i & 1 == 0 {
            m[(i, i)] -= C64::new(1.0, 0.0);
        }
    }
    crate::linalg::det(&m).norm()
}

/// The full subset law of a kernel on at most 20 sites, indexed by bitmask.
pub fn exact_law(kernel: &KernelMatrix) -> Result<Vec<f64>> {
    let n = kernel.len();
    if n > 20 {
        return Err(Error::Domain("exact law limited to 20 sites".into()));
    }
    let k = kernel.entries();
    Ok((0..1u64 << n).into_par_iter().map(|m| exact_subset_probability(k, m)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{build_toeplitz_kernel, eigendecompose, Symbol};
    use std::f64::consts::PI;

    fn half_rank_one() -> KernelMatrix {
        let k = KernelMatrix::new(Labels::Integers(vec![0, 1]), CMat::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
        eigendecompose(&k).unwrap()
    }

    #[test]
    fn rank_one_two_sites() {
        let k = half_rank_one();
        let mut rng = SplitMix64::new(11);
        let n = 10_000;
        let mut zero = 0;
        for _ in 0..n {
            let p = sample_projection(&k, &mut rng).unwrap();
            assert_eq!(p.len(), 1);
            zero += (p[0] == 0) as usize;
        }
        let f = zero as f64 / n as f64;
        assert!((f - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn identity_and_zero() {
        let id = eigendecompose(&KernelMatrix::diagonal(&[1.0; 5]).unwrap()).unwrap();
        let z = eigendecompose(&KernelMatrix::diagonal(&[0.0; 5]).unwrap()).unwrap();
        let mut rng = SplitMix64::new(1);
        assert_eq!(sample_projection(&id, &mut rng).unwrap(), vec![0, 1, 2, 3, 4]);
        assert!(sample_projection(&z, &mut rng).unwrap().is_empty());
        assert!(sample_contraction(&z, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn diagonal_is_bernoulli() {
        let p = [0.1, 0.5, 0.9, 0.3];
        let k = eigendecompose(&KernelMatrix::diagonal(&p).unwrap()).unwrap();
        let a = sample_batch(&k, 10_000, 5).unwrap();
        let mean = a.replicas.iter().map(|r| r.len() as f64).sum::<f64>() / 1e4;
        let var: f64 = p.iter().map(|q| q * (1.0 - q)).sum();
        assert!((mean - 1.8).abs() <= 3.0 * (var / 1e4).sqrt());
    }

    #[test]
    fn indicator_mean_count() {
        let k = eigendecompose(&build_toeplitz_kernel(&Symbol::indicator(PI / 2.0).unwrap(), 0..=39).unwrap()).unwrap();
        let a = sample_batch(&k, 4000, 9).unwrap();
        let c: Vec<f64> = a.replicas.iter().map(|r| r.len() as f64).collect();
        let m = c.iter().sum::<f64>() / c.len() as f64;
        let v = c.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (c.len() - 1) as f64;
        assert!((m - 20.0).abs() <= 3.0 * (v / c.len() as f64).sqrt());
    }

    #[test]
    fn batch_is_deterministic() {
        let k = half_rank_one();
        let a = sample_batch(&k, 50, 3).unwrap();
        let b = sample_batch(&k, 50, 3).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        assert!(sample_batch(&k, 0, 3).is_err());
        assert_eq!(a.to_jsonl().lines().count(), 51);
    }

    #[test]
    fn exact_law_sums_to_one() {
        let k = build_toeplitz_kernel(&Symbol::indicator(1.0).unwrap(), 0..=5).unwrap();
        let law = exact_law(&k).unwrap();
        assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
