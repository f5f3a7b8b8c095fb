//! Negative association of threshold events, exactly on small sets and by Monte Carlo.
//!
//! cargo run --release --example negassoc

use std::f64::consts::PI;

use dppkit::negassoc::{exact_negassoc, exact_sweep, mc_negassoc, monotone_functional_test, sweep_csv};
use dppkit::sampler::sample_batch;
use dppkit::spectra::{build_toeplitz_kernel, eigendecompose, Symbol};

fn main() -> dppkit::Result<()> {
    let k = eigendecompose(&build_toeplitz_kernel(&Symbol::indicator(PI / 2.0)?, 0..=11)?)?;
    let sets = vec![vec![0, 1, 2, 3], vec![4, 5, 6], vec![8, 9, 10, 11]];
    let r = exact_negassoc(&k, &sets, &[2, 1, 2])?;
    println!("exact: lhs {:.6} <= rhs {:.6}, violation {}", r.lhs, r.rhs, r.violation);

    let big = eigendecompose(&build_toeplitz_kernel(&Symbol::indicator(1.0)?, 0..=59)?)?;
    let a = sample_batch(&big, 5000, 41)?;
    let sets = vec![(10..16).collect::<Vec<_>>(), (30..36).collect()];
    let r = mc_negassoc(&a, &sets, &[2, 2])?;
    println!("mc: lhs {:.4} rhs {:.4} se {:.4} z {:.2}", r.lhs, r.rhs, r.se.unwrap_or(0.0), r.z.unwrap_or(0.0));

    // Increasing functions of disjoint blocks are negatively correlated.
    let cov = monotone_functional_test(&a, &[(0..10).collect()], &[(20..30).collect()], |n| n[0] as f64, |n| (n[0] as f64).min(3.0))?;
    println!("E[fg] {:.4} vs E[f]E[g] {:.4}, z {:.2}", cov.lhs, cov.rhs, cov.z.unwrap_or(0.0));

    let rows = exact_sweep(10, 42)?;
    print!("{}", sweep_csv(&rows));
    Ok(())
}
