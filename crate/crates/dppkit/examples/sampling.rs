//! Draw replicas from a Toeplitz kernel and a Ginibre grid kernel, then check the
//! sampler against the exact subset law on a small window.
//!
//! cargo run --release --example sampling

use std::f64::consts::PI;

use dppkit::sampler::{exact_law, sample_batch};
use dppkit::spectra::{build_grid_kernel, build_toeplitz_kernel, eigendecompose, Grid, GridModel, Symbol};

fn main() -> dppkit::Result<()> {
    let s = Symbol::indicator(PI / 2.0)?;
    let k = eigendecompose(&build_toeplitz_kernel(&s, -20..=20)?)?;
    let sp = k.spectrum().expect("eigendecomposed");
    println!("indicator a=pi/2 on [-20,20]: trace {:.4}, eigenvalues clamped {:.1e}", sp.values.iter().sum::<f64>(), sp.clamped);

    let a = sample_batch(&k, 1000, 1)?;
    let mean = a.replicas.iter().map(|c| c.len() as f64).sum::<f64>() / a.len() as f64;
    println!("mean count over {} replicas: {mean:.3} (expected {:.3})", a.len(), 41.0 * s.mean());
    print!("first lines of the archive:\n{}", a.to_jsonl().lines().take(3).map(|l| format!("  {l}\n")).collect::<String>());

    // Projection kernels give exactly `rank` points.
    let g = build_grid_kernel(GridModel::Ginibre(4), &Grid::disk(4.0f64.sqrt() + 3.5, 0.5)?)?;
    let counts: Vec<usize> = sample_batch(&g, 20, 2)?.replicas.iter().map(|c| c.len()).collect();
    println!("Ginibre rank 4 on {} grid sites, counts {counts:?}", g.len());

    // Total variation against the enumerated law.
    let small = eigendecompose(&build_toeplitz_kernel(&Symbol::indicator(PI / 6.0)?, 0..=9)?)?;
    let law = exact_law(&small)?;
    let n = 50_000;
    let mut freq = vec![0.0; law.len()];
    for c in &sample_batch(&small, n, 3)?.replicas {
        freq[c.points.iter().fold(0usize, |m, &i| m | 1 << i)] += 1.0 / n as f64;
    }
    let tv = 0.5 * freq.iter().zip(&law).map(|(f, p)| (f - p).abs()).sum::<f64>();
    println!("TV distance to the exact law over {} subsets: {tv:.4}", law.len());
    Ok(())
}
