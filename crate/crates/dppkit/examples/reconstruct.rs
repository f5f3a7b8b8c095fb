//! Recover a trigonometric symbol, up to translation and reflection, from its correlations.
//!
//! cargo run --release --example reconstruct

use dppkit::linalg::C64;
use dppkit::reconstruct::{check_f_class, coefficients_csv, gauge_normalize, recover_symbol, recover_symbol_from_samples};
use dppkit::sampler::sample_batch;
use dppkit::spectra::{build_toeplitz_kernel, eigendecompose, Symbol};

fn main() -> dppkit::Result<()> {
    let c = vec![C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.04, 0.06), C64::from_polar(0.03, 2.5)];
    let pairs: Vec<(i64, C64)> = c.iter().enumerate().map(|(j, &a)| (j as i64, a)).collect();
    let s = Symbol::trig_poly(&pairs)?;
    let class = check_f_class(&c, 6);
    println!("admissible {}, smallest margin {:.3}", class.passes(), class.min_margin());

    let r = recover_symbol(&s, 6, 1e-9)?;
    println!("degree {:?}", r.degree);
    print!("recovered\n{}", coefficients_csv(&r.coefficients));
    print!("gauge normal form of the truth\n{}", coefficients_csv(&gauge_normalize(&c)));

    // A translate-and-flip of the same symbol has the same correlations.
    let t = recover_symbol(&s.translated(0.9)?.flipped()?, 6, 1e-9)?;
    let d = t.coefficients.iter().zip(&r.coefficients).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("translated and flipped: max difference {d:.1e}");

    // From samples the intensities carry noise; small coefficients may be unresolved.
    let k = eigendecompose(&build_toeplitz_kernel(&s, -60..=60)?)?;
    let est = recover_symbol_from_samples(&sample_batch(&k, 2000, 31)?, 6, 1e-9)?;
    println!("degree {:?}; moduli below {:.3} read as zero at this sample size", est.form.degree, est.tol_modulus);
    for (j, (a, se)) in est.form.coefficients.iter().zip(&est.se).enumerate() {
        println!("a_{j} = {:.4}{:+.4}i  (se {:.4})", a.re, a.im, se.abs);
    }
    Ok(())
}
