use std::f64::consts::PI;

use dppkit::completeness::{conditional_intensity, gram_logdet, residual_profile};
use dppkit::correlations::exact_rho;
use dppkit::linalg::C64;
use dppkit::linstat::{
    analytic_variance_discrete, kernel_variance, lambda_form, lattice_weights, BumpFunction, PhiSchedule, QuadParams,
};
use dppkit::negassoc::{exact_negassoc, random_contraction};
use dppkit::reconstruct::{check_f_class, gauge_normalize, recover_symbol};
use dppkit::rigidity::RigidityProblem;
use dppkit::rng::SplitMix64;
use dppkit::sampler::{exact_law, sample_batch};
use dppkit::spectra::{build_toeplitz_kernel, eigendecompose, KernelMatrix, Symbol};
use proptest::prelude::*;

fn any_symbol() -> impl Strategy<Value = Symbol> {
    prop_oneof![
        (0.05..PI - 0.05).prop_map(|a| Symbol::indicator(a).unwrap()),
        (0.0..=1.0f64).prop_map(|t| Symbol::constant(t).unwrap()),
        (0.2..0.8f64, prop::collection::vec((0.0..1.0f64, -PI..PI), 1..4)).prop_map(|(a0, c)| {
            // Keep 2 Σ|a_j| ≤ min(a0, 1 − a0).
            let scale = a0.min(1.0 - a0) / (2.0 * c.len() as f64);
            let mut p = vec![(0, C64::new(a0, 0.0))];
            p.extend(c.iter().enumerate().map(|(j, &(r, t))| (j as i64 + 1, C64::from_polar(scale * r, t))));
            Symbol::trig_poly(&p).unwrap()
        }),
    ]
}

fn subset(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(0..n, 0..n.min(8)).prop_map(|s| s.into_iter().collect())
}

fn f_class_vector() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((0.03..0.08f64, -PI..PI), 3).prop_filter_map("f-class with margin", |c| {
        let mut v = vec![C64::new(0.5, 0.0)];
        v.extend(c.iter().map(|&(r, t)| C64::from_polar(r, t)));
        let r = check_f_class(&v, 3);
        (r.passes() && r.min_margin() > 0.1).then_some(v)
    })
}

fn symbol_of(c: &[C64]) -> Symbol {
    let p: Vec<(i64, C64)> = c.iter().enumerate().map(|(j, &a)| (j as i64, a)).collect();
    Symbol::trig_poly(&p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn compression_is_a_submatrix(s in any_symbol(), lo in -20i64..0, len in 4i64..30, a in 0i64..4, b in 0i64..4) {
        let big = build_toeplitz_kernel(&s, lo..=lo + len).unwrap();
        let small = build_toeplitz_kernel(&s, lo + a..=lo + len - b).unwrap();
        let idx: Vec<usize> = (a as usize..=(len - b) as usize).collect();
        let sub = big.compress(&idx);
        prop_assert_eq!(sub.entries(), small.entries());
    }

    #[test]
    fn spectra_are_contractions(s in any_symbol(), n in 2i64..40) {
        let k = eigendecompose(&build_toeplitz_kernel(&s, 0..=n - 1).unwrap()).unwrap();
        let sp = k.spectrum().unwrap();
        prop_assert!(sp.clamped <= 1e-8);
        prop_assert!(sp.values.iter().all(|&l| (0.0..=1.0).contains(&l)));
    }

    #[test]
    fn parseval_for_polynomials(s in any_symbol()) {
        prop_assume!(s.degree().is_some());
        let m = 4096;
        let quad: f64 = (0..m).map(|i| s.eval(-PI + 2.0 * PI * (i as f64 + 0.5) / m as f64).powi(2)).sum::<f64>() / m as f64;
        prop_assert!((quad - s.l2_norm_sq()).abs() <= 1e-8);
    }

    #[test]
    fn projection_counts_equal_rank(n in 6i64..24, r in 0usize..6, seed: u64) {
        let base = build_toeplitz_kernel(&Symbol::indicator(1.0).unwrap(), 0..=n - 1).unwrap();
        let k = base.top_projection(r).unwrap();
        let a = sample_batch(&k, 20, seed).unwrap();
        prop_assert!(a.replicas.iter().all(|c| c.len() == r));
    }

    #[test]
    fn same_seed_same_archive(seed: u64) {
        let k = eigendecompose(&build_toeplitz_kernel(&Symbol::indicator(1.3).unwrap(), 0..=15).unwrap()).unwrap();
        prop_assert_eq!(sample_batch(&k, 10, seed).unwrap(), sample_batch(&k, 10, seed).unwrap());
    }

    #[test]
    fn variance_agrees_with_window_kernel(s in any_symbol(), w in prop::collection::vec(-1.0..1.0f64, 1..25)) {
        let weights: Vec<(i64, f64)> = w.iter().enumerate().map(|(i, &x)| (i as i64, x)).collect();
        let v = analytic_variance_discrete(&s, &weights).unwrap();
        let k = build_toeplitz_kernel(&s, 0..=w.len() as i64 - 1).unwrap();
        let direct = kernel_variance(k.entries(), &w).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!((v - direct).abs() <= 1e-10 * (1.0 + direct));
    }

    #[test]
    fn rigidity_error_is_the_centered_statistic(pts in subset(41), n in 1usize..6) {
        let s = Symbol::indicator(PI / 2.0).unwrap();
        let sched = PhiSchedule::fit_window(n, 1.0, 10.0).unwrap();
        let p = RigidityProblem::lattice(&s, -20..=20, &[0], &sched).unwrap();
        let (truth, out) = p.split(&pts);
        let raw = p.estimate(&out).unwrap().raw;
        let total: f64 = pts.iter().map(|&k| p.weights()[k]).sum();
        prop_assert!(((raw - truth as f64) - (p.expected() - total)).abs() <= 1e-12);
    }

    #[test]
    fn intensities_are_symmetric_and_repulsive(s in any_symbol(), sites in prop::collection::btree_set(-30i64..30, 1..5), n in 1i64..64) {
        let sites: Vec<i64> = sites.into_iter().collect();
        let base = exact_rho(&s, &sites).unwrap();
        let mut rev = sites.clone();
        rev.reverse();
        prop_assert!((exact_rho(&s, &rev).unwrap() - base).abs() <= 1e-12);
        rev.rotate_left(1);
        prop_assert!((exact_rho(&s, &rev).unwrap() - base).abs() <= 1e-12);
        let r1 = exact_rho(&s, &[0]).unwrap();
        prop_assert!(exact_rho(&s, &[0, n]).unwrap() <= r1 * r1 + 1e-15);
    }

    #[test]
    fn recovery_round_trip_and_gauge(c in f_class_vector(), xi in -PI..PI, flip: bool) {
        let s = symbol_of(&c);
        let base = recover_symbol(&s, 6, 1e-9).unwrap();
        let truth = gauge_normalize(&c);
        prop_assert_eq!(base.degree, Some(3));
        for (a, b) in base.coefficients.iter().zip(&truth) {
            prop_assert!((a - b).norm() <= 1e-10);
        }
        let t = s.translated(xi).unwrap();
        let t = if flip { t.flipped().unwrap() } else { t };
        let other = recover_symbol(&t, 6, 1e-9).unwrap();
        prop_assert_eq!(other.coefficients.len(), base.coefficients.len());
        for (a, b) in other.coefficients.iter().zip(&base.coefficients) {
            prop_assert!((a - b).norm() <= 1e-9);
        }
    }

    #[test]
    fn subset_law_sums_to_one(n in 1usize..11, seed: u64) {
        let k = random_contraction(n, &mut SplitMix64::new(seed)).unwrap();
        let total: f64 = exact_law(&k).unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn exact_negative_association(n in 2usize..11, seed: u64, cut in 1usize..10, m1 in -1i64..5, m2 in -1i64..5) {
        let k = random_contraction(n, &mut SplitMix64::new(seed)).unwrap();
        let cut = cut.min(n - 1);
        let sets = vec![(0..cut).collect::<Vec<_>>(), (cut..n).collect()];
        let r = exact_negassoc(&k, &sets, &[m1, m2]).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.lhs) && (0.0..=1.0).contains(&r.rhs));
        prop_assert!(r.lhs <= r.rhs + 1e-12);
        prop_assert!(!r.violation);
    }

    #[test]
    fn conditional_intensity_properties(pts in subset(20), x in 0usize..20, a in 0.2..3.0f64) {
        prop_assume!(!pts.contains(&x));
        let k = build_toeplitz_kernel(&Symbol::indicator(a).unwrap(), 0..=19).unwrap();
        let p = conditional_intensity(&k, x, &pts).unwrap();
        prop_assert!(p >= 0.0 && p <= k.diag(x) + 1e-10);
        let mut all = pts.clone();
        all.push(x);
        let (g1, g0) = (gram_logdet(&k, &all).unwrap(), gram_logdet(&k, &pts).unwrap());
        if !g1.is_singular() && !g0.is_singular() {
            let ratio = (g1.value - g0.value).exp();
            prop_assert!((p - ratio).abs() <= 1e-8 * ratio.max(1e-12));
        }
        let prof = residual_profile(&k, &pts, x).unwrap();
        prop_assert!(prof.residuals.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!((prof.last() - p).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn lambda_is_symmetric(s1 in 0.5..3.0f64, s2 in 0.5..3.0f64) {
        let q = QuadParams { initial_cells: 96, tol: 1.0, max_levels: 1 };
        let (a, b) = (BumpFunction::reference().scaled(s1), BumpFunction::reference().scaled(s2));
        prop_assert_eq!(lambda_form(&a, &b, &q).unwrap().value, lambda_form(&b, &a, &q).unwrap().value);
    }
}

#[test]
fn variance_of_plateau_weights_on_larger_windows() {
    // Sanity anchor for the property above: both routes on a real schedule.
    let s = Symbol::indicator(PI / 2.0).unwrap();
    let prof = PhiSchedule::fit_window(4, 1.0, 6.0).unwrap().profile();
    let w = lattice_weights(&prof, 0.0);
    let lo = w.first().unwrap().0;
    let k: KernelMatrix = build_toeplitz_kernel(&s, lo..=w.last().unwrap().0).unwrap();
    let psi: Vec<f64> = w.iter().map(|x| x.1).collect();
    let a = analytic_variance_discrete(&s, &w).unwrap();
    assert!((a - kernel_variance(k.entries(), &psi).unwrap()).abs() < 1e-12);
}
