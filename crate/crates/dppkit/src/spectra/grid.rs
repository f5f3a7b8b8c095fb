use std::f64::consts::PI;

use super::kernel::{KernelMatrix, Labels, Spectrum};
use crate::error::{Error, Result};
use crate::linalg::{eigh, CMat, C64, ZERO};

/// Quadrature sites with weights.
#[derive(Debug, Clone)]
pub struct Grid {
    pub sites: Labels,
    pub weights: Vec<f64>,
}

impl Grid {
    /// Uniform sites `lo, lo + h, …` up to `hi`, weight `h` each.
    pub fn interval(lo: f64, hi: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || hi < lo {
            return Err(Error::Domain("bad interval grid".into()));
        }
        let n = ((hi - lo) / h + 1e-9).floor() as usize + 1;
        let sites: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        Ok(Grid { weights: vec![h; n], sites: Labels::Line(sites) })
    }

    /// Square-lattice sites of mesh `h` inside the closed disk of the given radius, weight `h²`.
    pub fn disk(radius: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && radius > 0.0) {
            return Err(Error::Domain("bad disk grid".into()));
        }
        let m = (radius / h).floor() as i64;
        let mut sites = Vec::new();
        for i in -m..=m {
            for j in -m..=m {
                let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                if x.hypot(y) <= radius {
                    sites.push((x, y));
                }
            }
        }
        Ok(Grid { weights: vec![h * h; sites.len()], sites: Labels::Plane(sites) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridModel {
    /// Rank-`n` finite Ginibre ensemble.
    Ginibre(usize),
    /// Sine process with density `alpha`.
    Sine(f64),
}

pub fn build_grid_kernel(model: GridModel, grid: &Grid) -> Result<KernelMatrix> {
    match model {
        GridModel::Ginibre(n) => ginibre(n, grid),
        GridModel::Sine(alpha) => sine(alpha, grid),
    }
}

fn ginibre(n: usize, grid: &Grid) -> Result<KernelMatrix> {
    let Labels::Plane(z) = &grid.sites else {
        return Err(Error::Domain("Ginibre kernel needs planar sites".into()));
    };
    let need = (n as f64).sqrt() + 3.0;
    let reach = z.iter().map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max);
    let mesh = grid.weights.first().map(|w| w.sqrt()).unwrap_or(1.0);
    if reach + mesh < need {
        return Err(Error::Domain(format!("grid reaches radius {reach:.3}, need {need:.3}")));
    }
    let m = z.len();
    // Features φ_k(z) = z^k e^{-|z|²/2} / √(π k!), built by recursion in k.
    let mut f = CMat::zeros(m, n);
    for (i, &(x, y)) in z.iter().enumerate() {
        let zz = C64::new(x, y);
        let mut phi = C64::new((-(x * x + y * y) / 2.0).exp() / PI.sqrt(), 0.0) * grid.weights[i].sqrt();
        for k in 0..n {
            if k > 0 {
                phi = phi * zz / (k as f64).sqrt();
            }
            f[(i, k)] = phi;
        }
    }
    // Löwdin re-orthonormalization Q = F (F*F)^{-1/2}.
    let gram = f.adjoint().matmul(&f);
    let e = eigh(&gram, 1e-14, 100)?;
    let (smax, smin) = (e.values[0], *e.values.last().unwrap_or(&1.0));
    if n > 0 && (smin <= 0.0 || smax / smin > 1e12) {
        return Err(Error::Discretization(format!(
            "feature Gram condition {:.3e}; use a finer grid",
            smax / smin.max(f64::MIN_POSITIVE)
        )));
    }
    let u = &e.vectors;
    let inv_sqrt = CMat::from_fn(n, n, |a, b| {
        let mut s = ZERO;
        for l in 0..n {
            s += u[(a, l)] * u[(b, l)].conj() / e.values[l].sqrt();
        }
        s
    });
    let q = f.matmul(&inv_sqrt);
    let entries = q.matmul(&q.adjoint());
    let spectrum = Spectrum { values: vec![1.0; n], vectors: q, clamped: 0.0 };
    Ok(KernelMatrix::with_spectrum(grid.sites.clone(), entries, spectrum))
}

fn sine(alpha: f64, grid: &Grid) -> Result<KernelMatrix> {
    let Labels::Line(x) = &grid.sites else {
        return Err(Error::Domain("sine kernel needs sites on a line".into()));
    };
    if alpha < 0.0 {
        return Err(Error::Domain("negative density".into()));
    }
    let h = grid.weights.first().copied().unwrap_or(0.0);
    if h > 0.25 + 1e-12 {
        return Err(Error::Domain(format!("mesh {h} exceeds 0.25")));
    }
    let uniform = x.windows(2).all(|w| ((w[1] - w[0]) - h).abs() < 1e-9) && grid.weights.iter().all(|&w| w == h);
    if !uniform {
        return Err(Error::Domain("sine grid must be uniform with weight equal to the mesh".into()));
    }
    let n = x.len();
    let entries = CMat::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(h * alpha, 0.0)
        } else {
            let d = x[i] - x[j];
            C64::new(h * (PI * alpha * d).sin() / (PI * d), 0.0)
        }
    });
    KernelMatrix::new(grid.sites.clone(), entries)
}
