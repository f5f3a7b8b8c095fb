//! How well a configuration predicts the kernel at an empty site.
//!
//! cargo run --release --example completeness

use std::f64::consts::PI;

use dppkit::completeness::{conditional_intensity, decay_csv, finite_rank_completeness_check, residual_profile, sine_residual_decay};
use dppkit::sampler::sample_batch;
use dppkit::spectra::{build_grid_kernel, build_toeplitz_kernel, eigendecompose, Grid, GridModel, Symbol};

fn main() -> dppkit::Result<()> {
    // Projections of rank r: r points span everything, so the residual vanishes.
    let g = build_grid_kernel(GridModel::Ginibre(3), &Grid::disk(3.0f64.sqrt() + 3.5, 0.5)?)?;
    let c = finite_rank_completeness_check(&g, &sample_batch(&g, 50, 51)?)?;
    println!(
        "Ginibre rank {}: {} replicas, nonsingular fraction {}, max final residual {:.1e}",
        c.rank, c.replicas, c.fraction_nonsingular, c.max_final_residual
    );

    // On an infinite-rank kernel the residual shrinks as more points are conditioned on.
    let k = eigendecompose(&build_toeplitz_kernel(&Symbol::indicator(PI / 2.0)?, -30..=30)?)?;
    let pts = sample_batch(&k, 1, 52)?.replicas[0].points.clone();
    let probe = (0..k.len()).find(|i| !pts.contains(i)).expect("an empty site");
    let prof = residual_profile(&k, &pts, probe)?;
    println!("probe {probe}: K(x,x) {:.4}, after {} points {:.3e}", prof.residuals[0], pts.len(), prof.last());
    println!("conditional intensity {:.3e}", conditional_intensity(&k, probe, &pts)?);

    let d = sine_residual_decay(1.0, 0.25, &[8.0, 16.0], 20, 53)?;
    print!("{}", decay_csv(&d));
    Ok(())
}
