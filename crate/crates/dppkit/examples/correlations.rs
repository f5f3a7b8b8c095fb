//! Exact correlation functions next to their translation-averaged estimates.
//!
//! cargo run --release --example correlations

use std::f64::consts::PI;

use dppkit::correlations::{exact_rho, CorrelationTable};
use dppkit::sampler::sample_batch;
use dppkit::spectra::{build_toeplitz_kernel, eigendecompose, Symbol};

fn main() -> dppkit::Result<()> {
    let s = Symbol::indicator(PI / 3.0)?;
    let rho1 = exact_rho(&s, &[0])?;
    for d in 1..=6 {
        let r2 = exact_rho(&s, &[0, d])?;
        println!("rho2(0,{d}) = {r2:.6}  (rho1^2 = {:.6})", rho1 * rho1);
    }

    let k = eigendecompose(&build_toeplitz_kernel(&s, 0..=199)?)?;
    let a = sample_batch(&k, 500, 21)?;
    let tuples = vec![vec![0], vec![0, 1], vec![0, 3], vec![0, 1, 2], vec![0, 2, 5]];
    print!("{}", CorrelationTable::build(Some(&s), Some(&a), &tuples)?.to_csv()?);
    Ok(())
}
