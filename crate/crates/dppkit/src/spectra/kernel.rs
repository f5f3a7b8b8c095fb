use std::ops::RangeInclusive;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::symbol::Symbol;
use crate::error::{Error, Result};
use crate::linalg::{eigh, CMat, C64, ZERO};

/// Default cap on window size for Toeplitz kernels.
pub const MAX_WINDOW: usize = 4096;
/// Largest tolerated eigenvalue excursion outside `[0, 1]` before clamping.
pub const SPECTRUM_SLACK: f64 = 1e-8;

/// Ground-set identifiers.
#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Integers(Vec<i64>),
    Line(Vec<f64>),
    Plane(Vec<(f64, f64)>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Integers(v) => v.len(),
            Labels::Line(v) => v.len(),
            Labels::Plane(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Labels::Integers(_) => "int",
            Labels::Line(_) => "line",
            Labels::Plane(_) => "plane",
        }
    }

    /// Site coordinates in the plane (lines and lattices sit on the real axis).
    pub fn position(&self, i: usize) -> (f64, f64) {
        match self {
            Labels::Integers(v) => (v[i] as f64, 0.0),
            Labels::Line(v) => (v[i], 0.0),
            Labels::Plane(v) => v[i],
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = self.position(i);
        let (c, d) = self.position(j);
        (a - c).hypot(b - d)
    }

    /// Index of an integer label, if present.
    pub fn index_of(&self, label: i64) -> Option<usize> {
        match self {
            Labels::Integers(v) => {
                let first = *v.first()?;
                let i = (label - first) as usize;
                if label >= first && v.get(i) == Some(&label) {
                    Some(i)
                } else {
                    v.iter().position(|&x| x == label)
                }
            }
            _ => None,
        }
    }
}

/// Eigenpairs of a kernel. Columns of `vectors` beyond those listed carry eigenvalue 0.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMat,
    /// Largest pre-clamp distance of an eigenvalue from `[0, 1]`.
    pub clamped: f64,
}

impl Spectrum {
    /// True when every eigenvalue is within `tol` of 0 or 1.
    pub fn is_projection(&self, tol: f64) -> bool {
        self.values.iter().all(|&l| l <= tol || l >= 1.0 - tol)
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.values.iter().filter(|&&l| l >= 1.0 - tol).count()
    }
}

/// A Hermitian kernel on a finite labeled ground set.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    labels: Labels,
    entries: CMat,
    spectrum: Option<Spectrum>,
    symbol: Option<Symbol>,
}

impl KernelMatrix {
    pub fn new(labels: Labels, entries: CMat) -> Result<Self> {
        if entries.rows() != labels.len() || entries.cols() != labels.len() {
            return Err(Error::Domain("kernel size does not match labels".into()));
        }
        let d = entries.hermitian_defect();
        if d > 1e-12 {
            return Err(Error::Domain(format!("kernel not Hermitian (defect {d:.3e})")));
        }
        Ok(KernelMatrix { labels, entries, spectrum: None, symbol: None })
    }

    pub(crate) fn with_spectrum(labels: Labels, entries: CMat, spectrum: Spectrum) -> Self {
        KernelMatrix { labels, entries, spectrum: Some(spectrum), symbol: None }
    }

    pub fn diagonal(p: &[f64]) -> Result<Self> {
        let n = p.len();
        let m = CMat::from_fn(n, n, |i, j| if i == j { C64::new(p[i], 0.0) } else { ZERO });
        Self::new(Labels::Integers((0..n as i64).collect()), m)
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn spectrum(&self) -> Option<&Spectrum> {
        self.spectrum.as_ref()
    }

    /// The generating symbol when the kernel is a Toeplitz compression.
    pub fn symbol(&self) -> Option<&Symbol> {
        self.symbol.as_ref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.entries[(i, i)].re
    }

    /// Short content hash of labels and entries.
    pub fn id(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.labels.kind().as_bytes());
        match &self.labels {
            Labels::Integers(v) => v.iter().for_each(|x| h.update(x.to_le_bytes())),
            Labels::Line(v) => v.iter().for_each(|x| h.update(x.to_le_bytes())),
            Labels::Plane(v) => v.iter().for_each(|(x, y)| {
                h.update(x.to_le_bytes());
                h.update(y.to_le_bytes());
            }),
        }
        for z in self.entries.data() {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }

    /// Principal compression onto a subset of sites.
    pub fn compress(&self, idx: &[usize]) -> KernelMatrix {
        let labels = match &self.labels {
            Labels::Integers(v) => Labels::Integers(idx.iter().map(|&i| v[i]).collect()),
            Labels::Line(v) => Labels::Line(idx.iter().map(|&i| v[i]).collect()),
            Labels::Plane(v) => Labels::Plane(idx.iter().map(|&i| v[i]).collect()),
        };
        KernelMatrix { labels, entries: self.entries.submatrix(idx), spectrum: None, symbol: self.symbol.clone() }
    }

    /// The projection onto the `k` leading eigenvectors.
    pub fn top_projection(&self, k: usize) -> Result<KernelMatrix> {
        let dec = eigendecompose(self)?;
        let sp = dec.spectrum.as_ref().unwrap();
        if k > sp.values.len() {
            return Err(Error::Domain(format!("rank {k} exceeds ground set")));
        }
        let n = self.len();
        let v = CMat::from_fn(n, k, |i, j| sp.vectors[(i, j)]);
        let entries = v.matmul(&v.adjoint());
        let spectrum = Spectrum { values: vec![1.0; k], vectors: v, clamped: 0.0 };
        Ok(KernelMatrix::with_spectrum(self.labels.clone(), entries, spectrum))
    }
}

/// Toeplitz compression `K(i, j) = f̂(i − j)` on an integer window.
pub fn build_toeplitz_kernel(symbol: &Symbol, window: RangeInclusive<i64>) -> Result<KernelMatrix> {
    let (lo, hi) = (*window.start(), *window.end());
    if hi < lo {
        return Err(Error::Domain("empty window".into()));
    }
    let n = (hi - lo + 1) as usize;
    if n > MAX_WINDOW {
        return Err(Error::Domain(format!("window of {n} sites exceeds cap {MAX_WINDOW}")));
    }
    let coeffs: Vec<C64> = (0..n as i64).map(|k| symbol.fourier_coefficient(k)).collect::<Result<_>>()?;
    let entries = CMat::from_fn(n, n, |i, j| if i >= j { coeffs[i - j] } else { coeffs[j - i].conj() });
    Ok(KernelMatrix {
        labels: Labels::Integers((lo..=hi).collect()),
        entries,
        spectrum: None,
        symbol: Some(symbol.clone()),
    })
}

/// Populate the spectrum. Idempotent.
pub fn eigendecompose(kernel: &KernelMatrix) -> Result<KernelMatrix> {
    if kernel.spectrum.is_some() {
        return Ok(kernel.clone());
    }
    let e = eigh(&kernel.entries, 1e-12, 100)?;
    let mut clamped: f64 = 0.0;
    let mut values = e.values;
    for l in values.iter_mut() {
        let excess = if *l < 0.0 { -*l } else { (*l - 1.0).max(0.0) };
        if excess > SPECTRUM_SLACK {
            return Err(Error::ContractionViolation(format!("eigenvalue {l:.3e} outside [0, 1]")));
        }
        clamped = clamped.max(excess);
        *l = l.clamp(0.0, 1.0);
    }
    let spectrum = Spectrum { values, vectors: e.vectors, clamped };
    let err = reconstruction_error(&kernel.entries, &spectrum);
    if err > 1e-8 {
        return Err(Error::Numerical(format!("eigen reconstruction error {err:.3e}")));
    }
    Ok(KernelMatrix { spectrum: Some(spectrum), ..kernel.clone() })
}

/// `‖K − VΛV*‖_max`.
pub fn reconstruction_error(k: &CMat, s: &Spectrum) -> f64 {
    let n = k.rows();
    let m = s.values.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in 0..n {
                let mut z = ZERO;
                for l in 0..m {
                    if s.values[l] != 0.0 {
                        z += s.vectors[(i, l)] * s.vectors[(j, l)].conj() * s.values[l];
                    }
                }
                worst = worst.max((z - k[(i, j)]).norm());
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}
