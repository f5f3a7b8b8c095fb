//! Variance of a smooth linear statistic: Fourier side, window kernel, and Monte Carlo.
//!
//! cargo run --release --example variance

use std::f64::consts::PI;

use dppkit::linstat::{
    analytic_variance_discrete, empirical_variance, kernel_variance, lattice_weights, profile_weights, variance_lower_bound,
    BumpFunction, PhiSchedule, Profile,
};
use dppkit::sampler::sample_batch;
use dppkit::spectra::{build_toeplitz_kernel, eigendecompose, Symbol};

fn main() -> dppkit::Result<()> {
    let s = Symbol::indicator(PI / 2.0)?;
    let sched = PhiSchedule::fit_window(2, 1.0, 8.0)?;
    println!("schedule (j, scale, weight): {:?}", sched.table());
    let prof = sched.profile();
    println!("support radius {:.1}", prof.support_radius());
    let k = eigendecompose(&build_toeplitz_kernel(&s, -40..=40)?)?;
    let psi = profile_weights(&prof, k.labels(), 0.0);

    let analytic = analytic_variance_discrete(&s, &lattice_weights(&prof, 0.0))?;
    let direct = kernel_variance(k.entries(), &psi)?;
    let (emp, se) = empirical_variance(&sample_batch(&k, 5000, 7)?, &psi)?;
    println!("analytic {analytic:.6}  window kernel {direct:.6}  empirical {emp:.6} ± {se:.6}");

    // For a constant symbol the variance grows linearly in the dilation.
    let c = Symbol::constant(0.5)?;
    let phi = BumpFunction::reference();
    for l in [8.0, 16.0, 32.0, 64.0] {
        let b = variance_lower_bound(&c, &lattice_weights(&phi.scaled(l), 0.0));
        println!("constant symbol, L={l:>4}: bound/L = {:.5}", b / l);
    }
    println!("limit t(1-t)||phi||^2 = {:.5}", 0.25 * phi.l2_norm_sq());
    Ok(())
}
