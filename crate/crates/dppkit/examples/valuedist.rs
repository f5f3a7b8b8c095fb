//! Moments and the value distribution of a symbol from its Hardy-Littlewood inverse.
//!
//! cargo run --release --example valuedist

use std::f64::consts::PI;

use dppkit::reconstruct::{hm_inverse_fn, moments_from_hm, value_distribution_from_moments, ValueDistribution, NU_BINS};

fn main() -> dppkit::Result<()> {
    // The ramp takes every value in [0, 1) equally often, so its moments are 1/(k+2) shifted.
    let ramp = |x: f64| (x + PI).rem_euclid(2.0 * PI) / (2.0 * PI);
    let m = moments_from_hm(|t| hm_inverse_fn(ramp, t), 0.9, 8)?;
    for (k, v) in m.iter().enumerate() {
        println!("moment {}: {v:.5} (exact {:.5})", k + 1, 1.0 / (k as f64 + 2.0));
    }
    let v = value_distribution_from_moments(&m)?;
    println!("residual {:.2e}, slack {:.3}", v.residual, v.slack);
    for b in (0..NU_BINS).step_by(8) {
        println!("nu[{:.3}, ...) = {:.4}", ValueDistribution::bin_left(b), v.nu[b]);
    }
    Ok(())
}
