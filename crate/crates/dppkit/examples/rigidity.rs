//! Recover the number of points hidden in a window from the points outside it.
//!
//! cargo run --release --example rigidity

use std::f64::consts::PI;

use dppkit::linstat::PhiSchedule;
use dppkit::rigidity::{rigidity_curve, sine_grid_rigidity, RigidityProblem};
use dppkit::sampler::sample_batch;
use dppkit::spectra::{build_toeplitz_kernel, eigendecompose, Symbol};

fn main() -> dppkit::Result<()> {
    let s = Symbol::indicator(PI / 2.0)?;

    // One replica, by hand.
    let sched = PhiSchedule::fit_window(16, 0.5, 32.0)?;
    let problem = RigidityProblem::lattice(&s, -128..=128, &[0], &sched)?;
    let k = eigendecompose(&build_toeplitz_kernel(&s, -128..=128)?)?;
    let c = &sample_batch(&k, 1, 11)?.replicas[0];
    let (truth, outside) = problem.split(&c.points);
    let e = problem.estimate(&outside)?;
    println!("hidden {truth}, raw {:.3}, estimate {}, high confidence {}", e.raw, e.count, e.high_confidence);

    // Success rate along n, every schedule seeing the same trials.
    let schedules: Vec<PhiSchedule> = [1, 4, 16].iter().map(|&n| PhiSchedule::fit_window(n, 0.5, 32.0)).collect::<Result<_, _>>()?;
    let curve = rigidity_curve(&s, -128..=128, &[0], &schedules, 200, 12)?;
    for p in &curve.points {
        println!(
            "n={:>2}: success {:.3} ± {:.3}, variance bound {:.4}, mean |error| {:.3}",
            p.n, p.success_rate, p.success_se, p.variance_bound, p.mean_abs_error
        );
    }

    // The sine kernel on a grid, hiding the sites in [-1, 1].
    let g = sine_grid_rigidity(1.0, 0.25, (-1.0, 1.0), &PhiSchedule::fit_window(16, 1.0, 16.0)?, 100, 13, 32.0)?;
    println!(
        "sine grid: {} sites, {} hidden, success {:.3}, variance bound {:.4}",
        g.sites, g.hidden_sites, g.point.success_rate, g.point.variance_bound
    );
    Ok(())
}
