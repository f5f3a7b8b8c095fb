//! Experiment pipelines. Each returns its files in memory; nothing touches disk here.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde_json::json;

use super::config::{field, Config, Field, Params, Type};
use super::svg::{Plot, Series};
use crate::completeness::{decay_csv, finite_rank_completeness_check, sine_residual_decay};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::linstat::{
    analytic_variance_discrete, empirical_variance, lattice_weights, profile_weights, variance_lower_bound, BumpFunction,
    PhiSchedule,
};
use crate::negassoc::{exact_sweep, mc_sweep, sweep_csv};
use crate::reconstruct::{
    check_f_class, coefficients_csv, gauge_normalize, hm_inverse, hm_inverse_fn, moments_from_hm, recover_symbol,
    recover_symbol_from_samples, value_distribution_from_moments,
};
use crate::rigidity::rigidity_curve;
use crate::sampler::sample_batch;
use crate::spectra::{build_grid_kernel, build_toeplitz_kernel, eigendecompose, Grid, GridModel, KernelMatrix, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Sample,
    Variance,
    Rigidity,
    Reconstruct,
    Negassoc,
    Residual,
    Valuedist,
}

impl Kind {
    pub const EXPERIMENTS: [Kind; 6] =
        [Kind::Variance, Kind::Rigidity, Kind::Reconstruct, Kind::Negassoc, Kind::Residual, Kind::Valuedist];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Sample => "sample",
            Kind::Variance => "variance",
            Kind::Rigidity => "rigidity",
            Kind::Reconstruct => "reconstruct",
            Kind::Negassoc => "negassoc",
            Kind::Residual => "residual",
            Kind::Valuedist => "valuedist",
        }
    }

    pub fn from_name(s: &str) -> Result<Kind> {
        std::iter::once(Kind::Sample)
            .chain(Self::EXPERIMENTS)
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }

    pub fn schema(self) -> Vec<Field> {
        let mut s = Vec::new();
        let symbol = |s: &mut Vec<Field>, default: &'static str| {
            s.push(field("symbol", Type::Choice(&["indicator", "constant", "trigpoly", "ramp"]), default));
            s.push(field("a", Type::F64, "pi/2"));
            s.push(field("t", Type::F64, "0.5"));
            s.push(field("coeffs", Type::C64List, REFERENCE_COEFFS));
        };
        s.push(field("seed", Type::U64, "0"));
        match self {
            Kind::Sample => {
                s.push(field("model", Type::Choice(&["toeplitz", "sine", "ginibre"]), "toeplitz"));
                symbol(&mut s, "indicator");
                s.push(field("half_window", Type::F64, "20"));
                s.push(field("mesh", Type::F64, "0.25"));
                s.push(field("alpha", Type::F64, "1"));
                s.push(field("rank", Type::Usize, "3"));
                s.push(field("reps", Type::Usize, "100"));
            }
            Kind::Variance => {
                symbol(&mut s, "indicator");
                s.push(field("half_window", Type::F64, "40"));
                s.push(field("n", Type::UsizeList, "2"));
                s.push(field("inner", Type::F64, "1"));
                s.push(field("outer", Type::F64, "8"));
                s.push(field("reps", Type::Usize, "10000"));
                s.push(field("scan_l", Type::F64List, "8, 16, 32, 64"));
            }
            Kind::Rigidity => {
                symbol(&mut s, "indicator");
                s.push(field("half_window", Type::F64, "128"));
                s.push(field("hidden", Type::I64List, "0"));
                s.push(field("n", Type::UsizeList, "1, 16"));
                s.push(field("inner", Type::F64, "0.5"));
                s.push(field("outer", Type::F64, "32"));
                s.push(field("trials", Type::Usize, "200"));
            }
            Kind::Reconstruct => {
                s.push(field("coeffs", Type::C64List, REFERENCE_COEFFS));
                s.push(field("mode", Type::Choice(&["exact", "samples"]), "exact"));
                s.push(field("max_degree", Type::Usize, "6"));
                s.push(field("tol", Type::F64, "1e-9"));
                s.push(field("horizon", Type::Usize, "6"));
                s.push(field("half_window", Type::F64, "60"));
                s.push(field("reps", Type::Usize, "2000"));
            }
            Kind::Negassoc => {
                s.push(field("instances", Type::Usize, "200"));
                s.push(field("mc_instances", Type::Usize, "20"));
                s.push(field("mc_reps", Type::Usize, "10000"));
                s.push(field("mc_min_sites", Type::Usize, "40"));
                s.push(field("mc_max_sites", Type::Usize, "80"));
            }
            Kind::Residual => {
                s.push(field("alpha", Type::F64, "1"));
                s.push(field("mesh", Type::F64, "0.25"));
                s.push(field("half_widths", Type::F64List, "8, 16, 32"));
                s.push(field("trials", Type::Usize, "50"));
                s.push(field("ranks", Type::UsizeList, "3, 5"));
                s.push(field("finite_reps", Type::Usize, "100"));
            }
            Kind::Valuedist => {
                symbol(&mut s, "ramp");
                s.push(field("moments", Type::Usize, "8"));
                s.push(field("t_max", Type::F64, "0.9"));
            }
        }
        s
    }
}

/// `0.5, 0.1, 0.04 + 0.06i, 0.03 e^{2.5i}`.
pub const REFERENCE_COEFFS: &str = "0.5, 0.1, 0.04+0.06i, -0.02403430846640801+0.017954164323118697i";

/// Everything a run produces, before it is written.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub plot: Option<Plot>,
    pub summary: serde_json::Value,
}

pub fn ramp(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI);
    y / (2.0 * PI)
}

/// `symbol = ramp` is tabulated on 4096 points; exact evaluations use [`ramp`].
pub fn symbol_from(p: &Params) -> Result<Symbol> {
    match p.str("symbol")? {
        "indicator" => Symbol::indicator(p.f64("a")?),
        "constant" => Symbol::constant(p.f64("t")?),
        "trigpoly" => {
            let c: Vec<(i64, C64)> = p.c64_list("coeffs")?.into_iter().enumerate().map(|(j, a)| (j as i64, a)).collect();
            Symbol::trig_poly(&c)
        }
        _ => {
            let m = 4096;
            Symbol::tabulated((0..m).map(|i| (i + 1) as f64 / m as f64).collect())
        }
    }
}

fn half_window_int(p: &Params) -> Result<i64> {
    let h = p.f64("half_window")?;
    if !(h >= 1.0) || h.fract() != 0.0 {
        return Err(Error::Config("half_window must be a positive integer for lattice models".into()));
    }
    Ok(h as i64)
}

fn positive(p: &Params, key: &str) -> Result<usize> {
    let v = p.usize(key)?;
    if v == 0 {
        return Err(Error::Config(format!("`{key}` must be positive")));
    }
    Ok(v)
}

/// Run one kind on a resolved parameter set.
pub fn run_kind(kind: Kind, p: &Params) -> Result<Artifacts> {
    let seed = p.u64("seed")?;
    match kind {
        Kind::Sample => sample(p, seed),
        Kind::Variance => variance(p, seed),
        Kind::Rigidity => rigidity(p, seed),
        Kind::Reconstruct => reconstruct(p, seed),
        Kind::Negassoc => negassoc(p, seed),
        Kind::Residual => residual(p, seed),
        Kind::Valuedist => valuedist(p),
    }
}

/// Parse and validate a config for `kind` without running anything.
pub fn resolve(kind: Kind, config: &Config, seed: Option<u64>) -> Result<Params> {
    let mut p = config.resolve(&kind.schema())?;
    if let Some(s) = seed {
        p.set("seed", s.to_string());
    }
    Ok(p)
}

pub fn sample_kernel(p: &Params) -> Result<KernelMatrix> {
    let k = match p.str("model")? {
        "toeplitz" => {
            let h = half_window_int(p)?;
            build_toeplitz_kernel(&symbol_from(p)?, -h..=h)?
        }
        "sine" => {
            let h = p.f64("half_window")?;
            build_grid_kernel(GridModel::Sine(p.f64("alpha")?), &Grid::interval(-h, h, p.f64("mesh")?)?)?
        }
        _ => {
            let r = p.usize("rank")?;
            let radius = (r as f64).sqrt() + 3.5;
            build_grid_kernel(GridModel::Ginibre(r), &Grid::disk(radius, p.f64("mesh")?.max(0.25))?)?
        }
    };
    eigendecompose(&k)
}

fn sample(p: &Params, seed: u64) -> Result<Artifacts> {
    let kernel = sample_kernel(p)?;
    let a = sample_batch(&kernel, positive(p, "reps")?, seed)?;
    let counts: Vec<(f64, f64)> = a.replicas.iter().enumerate().map(|(i, c)| (i as f64, c.len() as f64)).collect();
    let mean = counts.iter().map(|c| c.1).sum::<f64>() / counts.len().max(1) as f64;
    Ok(Artifacts {
        files: vec![("archive.jsonl".into(), a.to_jsonl().into_bytes())],
        plot: Some(Plot {
            title: "points per replica".into(),
            x_label: "replica".into(),
            y_label: "count".into(),
            log_y: false,
            series: vec![Series { name: "count".into(), points: counts }],
        }),
        summary: json!({"kernel_id": a.kernel_id, "replicas": a.len(), "failures": a.failures.len(), "mean_count": mean}),
    })
}

fn variance(p: &Params, seed: u64) -> Result<Artifacts> {
    let symbol = symbol_from(p)?;
    let h = half_window_int(p)?;
    let (inner, outer) = (p.f64("inner")?, p.f64("outer")?);
    let ns = p.usize_list("n")?;
    if ns.is_empty() {
        return Err(Error::Config("`n` must list at least one level".into()));
    }
    if 2.0 * outer > h as f64 {
        return Err(Error::Geometry(format!("support radius {} exceeds half_window {h}", 2.0 * outer)));
    }
    let kernel = eigendecompose(&build_toeplitz_kernel(&symbol, -h..=h)?)?;
    let archive = sample_batch(&kernel, positive(p, "reps")?, seed)?;
    let mut csv = String::from("n,inner,outer,analytic,empirical,se,z\n");
    let (mut an, mut em) = (Vec::new(), Vec::new());
    let mut rows = Vec::new();
    for &n in &ns {
        let sched = PhiSchedule::fit_window(n, inner, outer)?;
        let prof = sched.profile();
        let analytic = analytic_variance_discrete(&symbol, &lattice_weights(&prof, 0.0))?;
        let (emp, se) = empirical_variance(&archive, &profile_weights(&prof, kernel.labels(), 0.0))?;
        let z = if se > 0.0 { (emp - analytic) / se } else { 0.0 };
        writeln!(csv, "{n},{inner},{outer},{analytic:.12e},{emp:.12e},{se:.6e},{z:.4}").unwrap();
        an.push((n as f64, analytic));
        em.push((n as f64, emp));
        rows.push(json!({"n": n, "analytic": analytic, "empirical": emp, "se": se, "z": z}));
    }
    let phi = BumpFunction::reference();
    let limit = (symbol.mean() - symbol.l2_norm_sq()).max(0.0) * phi.l2_norm_sq();
    let mut lb = String::from("l,sum_sq,lower_bound,ratio,limit\n");
    for l in p.f64_list("scan_l")? {
        let w = lattice_weights(&phi.scaled(l), 0.0);
        let s2: f64 = w.iter().map(|x| x.1 * x.1).sum();
        let bound = variance_lower_bound(&symbol, &w);
        writeln!(lb, "{l},{s2:.12e},{bound:.12e},{:.12e},{limit:.12e}", bound / l).unwrap();
    }
    Ok(Artifacts {
        files: vec![("variance.csv".into(), csv.into_bytes()), ("lower_bound.csv".into(), lb.into_bytes())],
        plot: Some(Plot {
            title: "variance of the averaged plateau statistic".into(),
            x_label: "n".into(),
            y_label: "variance".into(),
            log_y: false,
            series: vec![Series { name: "analytic".into(), points: an }, Series { name: "empirical".into(), points: em }],
        }),
        summary: json!({"rows": rows, "lower_bound_limit": limit}),
    })
}

fn rigidity(p: &Params, seed: u64) -> Result<Artifacts> {
    let symbol = symbol_from(p)?;
    let h = half_window_int(p)?;
    let (inner, outer) = (p.f64("inner")?, p.f64("outer")?);
    let schedules: Vec<PhiSchedule> =
        p.usize_list("n")?.into_iter().map(|n| PhiSchedule::fit_window(n, inner, outer)).collect::<Result<_>>()?;
    if schedules.is_empty() {
        return Err(Error::Config("`n` must list at least one level".into()));
    }
    let curve = rigidity_curve(&symbol, -h..=h, &p.i64_list("hidden")?, &schedules, positive(p, "trials")?, seed)?;
    let mut csv = String::from("n,success_rate,success_se,mean_abs_error,variance_bound,high_confidence_rate,certified\n");
    let mut tr = String::from("n,trial,seed,truth,raw,estimate,high_confidence\n");
    for (pt, trials) in curve.points.iter().zip(&curve.trials) {
        let hc = trials.iter().filter(|t| t.high_confidence).count() as f64 / trials.len() as f64;
        writeln!(
            csv,
            "{},{:.6},{:.6},{:.6e},{:.6e},{hc:.6},{}",
            pt.n, pt.success_rate, pt.success_se, pt.mean_abs_error, pt.variance_bound, pt.certified
        )
        .unwrap();
        for t in trials {
            writeln!(tr, "{},{},{},{},{:.12e},{},{}", pt.n, t.trial, t.seed, t.truth, t.raw, t.estimate, t.high_confidence).unwrap();
        }
    }
    Ok(Artifacts {
        files: vec![("rigidity.csv".into(), csv.into_bytes()), ("trials.csv".into(), tr.into_bytes())],
        plot: Some(Plot {
            title: "hidden-count recovery".into(),
            x_label: "n".into(),
            y_label: "success rate".into(),
            log_y: false,
            series: vec![Series {
                name: "success rate".into(),
                points: curve.points.iter().map(|c| (c.n as f64, c.success_rate)).collect(),
            }],
        }),
        summary: serde_json::to_value(&curve.points).map_err(|e| Error::Io(e.to_string()))?,
    })
}

fn reconstruct(p: &Params, seed: u64) -> Result<Artifacts> {
    let coeffs = p.c64_list("coeffs")?;
    let pairs: Vec<(i64, C64)> = coeffs.iter().enumerate().map(|(j, &a)| (j as i64, a)).collect();
    let symbol = Symbol::trig_poly(&pairs)?;
    let (max_degree, tol) = (p.usize("max_degree")?, p.f64("tol")?);
    let truth = gauge_normalize(&coeffs);
    let (form, se) = match p.str("mode")? {
        "exact" => (recover_symbol(&symbol, max_degree, tol)?, None),
        _ => {
            let h = half_window_int(p)?;
            let kernel = eigendecompose(&build_toeplitz_kernel(&symbol, -h..=h)?)?;
            let archive = sample_batch(&kernel, positive(p, "reps")?, seed)?;
            let r = recover_symbol_from_samples(&archive, max_degree, tol)?;
            (r.form.clone(), Some(r))
        }
    };
    let got = &form.coefficients;
    let len = got.len().max(truth.len());
    let at = |v: &[C64], j: usize| v.get(j).copied().unwrap_or_default();
    let max_error = (0..len).map(|j| (at(got, j) - at(&truth, j)).norm()).fold(0.0, f64::max);
    let fclass = check_f_class(&coeffs, p.usize("horizon")?);
    let mut files =
        vec![("coefficients.csv".into(), coefficients_csv(got).into_bytes()), ("truth.csv".into(), coefficients_csv(&truth).into_bytes())];
    if let Some(r) = &se {
        let mut s = String::from("j,se_re,se_im,se_abs,se_arg,unresolved\n");
        for (j, (e, u)) in r.se.iter().zip(&r.unresolved).enumerate() {
            writeln!(s, "{j},{:.6e},{:.6e},{:.6e},{:.6e},{u}", e.re, e.im, e.abs, e.arg).unwrap();
        }
        files.push(("coefficients_se.csv".into(), s.into_bytes()));
    }
    let summary = json!({
        "degree": form.degree,
        "remark_grade": form.remark_grade,
        "consistency_residual": form.consistency_residual,
        "ambiguous_phases": form.ambiguous_phases,
        "max_error": max_error,
        "f_class": fclass,
        "queries": se.as_ref().map(|r| r.queries),
        "tol_modulus": se.as_ref().map(|r| r.tol_modulus),
        "tol_intensity": se.as_ref().map(|r| r.tol_intensity),
    });
    files.push(("report.json".into(), (serde_json::to_string_pretty(&summary).unwrap() + "\n").into_bytes()));
    Ok(Artifacts {
        files,
        plot: Some(Plot {
            title: "coefficient moduli".into(),
            x_label: "j".into(),
            y_label: "|a_j|".into(),
            log_y: false,
            series: vec![
                Series { name: "recovered".into(), points: got.iter().enumerate().map(|(j, a)| (j as f64, a.norm())).collect() },
                Series { name: "true".into(), points: truth.iter().enumerate().map(|(j, a)| (j as f64, a.norm())).collect() },
            ],
        }),
        summary,
    })
}

fn negassoc(p: &Params, seed: u64) -> Result<Artifacts> {
    let exact = exact_sweep(p.usize("instances")?, seed)?;
    let mc_n = p.usize("mc_instances")?;
    let mc = if mc_n > 0 {
        mc_sweep(mc_n, p.usize("mc_reps")?, p.usize("mc_min_sites")?, p.usize("mc_max_sites")?, seed ^ 0x6d63)?
    } else {
        Vec::new()
    };
    let gap = |rows: &[crate::negassoc::SweepRow]| -> Vec<(f64, f64)> {
        rows.iter().map(|r| (r.instance as f64, r.report.rhs - r.report.lhs)).collect()
    };
    let summary = json!({
        "exact_instances": exact.len(),
        "exact_violations": exact.iter().filter(|r| r.report.violation).count(),
        "max_exact_excess": exact.iter().map(|r| r.report.lhs - r.report.rhs).fold(f64::NEG_INFINITY, f64::max),
        "mc_instances": mc.len(),
        "mc_violations": mc.iter().filter(|r| r.report.violation).count(),
        "max_mc_z": mc.iter().filter_map(|r| r.report.z).fold(f64::NEG_INFINITY, f64::max),
    });
    Ok(Artifacts {
        files: vec![
            ("negassoc_exact.csv".into(), sweep_csv(&exact).into_bytes()),
            ("negassoc_mc.csv".into(), sweep_csv(&mc).into_bytes()),
        ],
        plot: Some(Plot {
            title: "product of marginals minus joint probability".into(),
            x_label: "instance".into(),
            y_label: "rhs - lhs".into(),
            log_y: false,
            series: vec![Series { name: "exact".into(), points: gap(&exact) }, Series { name: "monte carlo".into(), points: gap(&mc) }],
        }),
        summary,
    })
}

fn residual(p: &Params, seed: u64) -> Result<Artifacts> {
    let decay = sine_residual_decay(p.f64("alpha")?, p.f64("mesh")?, &p.f64_list("half_widths")?, positive(p, "trials")?, seed)?;
    let mut finals = String::from("half_width,trial,final_residual\n");
    for d in &decay {
        for (t, r) in d.finals.iter().enumerate() {
            writeln!(finals, "{},{t},{r:.12e}", d.half_width).unwrap();
        }
    }
    let reps = positive(p, "finite_reps")?;
    let mut fr = String::from("model,rank,replicas,fraction_nonsingular,wrong_count,max_final_residual\n");
    let mut checks = Vec::new();
    for r in p.usize_list("ranks")? {
        let radius = (r as f64).sqrt() + 3.5;
        let gin = build_grid_kernel(GridModel::Ginibre(r), &Grid::disk(radius, 0.5)?)?;
        let ind = eigendecompose(&build_toeplitz_kernel(&Symbol::indicator(PI / 2.0)?, 0..=15)?)?.top_projection(r)?;
        for (name, k) in [("ginibre", gin), ("indicator_top", ind)] {
            let a = sample_batch(&k, reps, seed)?;
            let c = finite_rank_completeness_check(&k, &a)?;
            writeln!(fr, "{name},{r},{},{},{},{:.6e}", c.replicas, c.fraction_nonsingular, c.wrong_count, c.max_final_residual).unwrap();
            checks.push(json!({"model": name, "check": c}));
        }
    }
    let medians: Vec<f64> = decay.iter().map(|d| d.median).collect();
    Ok(Artifacts {
        files: vec![
            ("decay.csv".into(), decay_csv(&decay).into_bytes()),
            ("finals.csv".into(), finals.into_bytes()),
            ("finite_rank.csv".into(), fr.into_bytes()),
        ],
        plot: Some(Plot {
            title: "final conditional intensity at the probe".into(),
            x_label: "window half-width".into(),
            y_label: "residual".into(),
            log_y: true,
            series: vec![
                Series { name: "median".into(), points: decay.iter().map(|d| (d.half_width, d.median)).collect() },
                Series { name: "upper quartile".into(), points: decay.iter().map(|d| (d.half_width, d.q75)).collect() },
            ],
        }),
        summary: json!({
            "medians": medians,
            "strictly_decreasing": medians.windows(2).all(|w| w[1] < w[0]),
            "finite_rank": checks,
        }),
    })
}

fn valuedist(p: &Params) -> Result<Artifacts> {
    let k = p.usize("moments")?;
    let t_max = p.f64("t_max")?;
    let m = if p.str("symbol")? == "ramp" {
        moments_from_hm(|t| hm_inverse_fn(ramp, t), t_max, k)?
    } else {
        let s = symbol_from(p)?;
        moments_from_hm(|t| hm_inverse(&s, t), t_max, k)?
    };
    let v = value_distribution_from_moments(&m)?;
    let mut mc = String::from("k,moment\n");
    for (i, x) in m.iter().enumerate() {
        writeln!(mc, "{},{x:.15e}", i + 1).unwrap();
    }
    let nu: Vec<(f64, f64)> =
        v.nu.iter().enumerate().map(|(b, &y)| ((b as f64 + 0.5) / v.nu.len() as f64, y)).collect();
    Ok(Artifacts {
        files: vec![("moments.csv".into(), mc.into_bytes()), ("nu.csv".into(), v.to_csv().into_bytes())],
        plot: Some(Plot {
            title: "recovered value distribution".into(),
            x_label: "xi".into(),
            y_label: "nu".into(),
            log_y: false,
            series: vec![Series { name: "nu".into(), points: nu }],
        }),
        summary: json!({"moments": m, "slack": v.slack, "residual": v.residual}),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_default_matches_polar_form() {
        let c = super::super::config::parse_c64(REFERENCE_COEFFS.split(',').nth(3).unwrap()).unwrap();
        assert!((c - C64::from_polar(0.03, 2.5)).norm() < 1e-16);
    }

    #[test]
    fn every_schema_resolves_with_defaults() {
        for k in std::iter::once(Kind::Sample).chain(Kind::EXPERIMENTS) {
            let p = resolve(k, &Config::default(), Some(3)).unwrap();
            assert_eq!(p.u64("seed").unwrap(), 3);
            assert_eq!(Kind::from_name(k.name()).unwrap(), k);
        }
    }

    #[test]
    fn small_runs() {
        let cfg = |t: &str| Config::parse(t).unwrap();
        let p = resolve(Kind::Valuedist, &Config::default(), None).unwrap();
        let a = run_kind(Kind::Valuedist, &p).unwrap();
        assert_eq!(a.files[1].0, "nu.csv");
        let p = resolve(Kind::Reconstruct, &Config::default(), None).unwrap();
        let a = run_kind(Kind::Reconstruct, &p).unwrap();
        assert!(a.summary["max_error"].as_f64().unwrap() < 1e-10);
        let p = resolve(Kind::Variance, &cfg("reps = 200\nn = 1, 2\n"), None).unwrap();
        let a = run_kind(Kind::Variance, &p).unwrap();
        assert_eq!(String::from_utf8(a.files[0].1.clone()).unwrap().lines().count(), 3);
        let p = resolve(Kind::Negassoc, &cfg("instances = 5\nmc_instances = 1\nmc_reps = 1000\n"), None).unwrap();
        assert!(run_kind(Kind::Negassoc, &p).is_ok());
    }

    #[test]
    fn ramp_symbol_is_the_ramp() {
        let p = resolve(Kind::Valuedist, &Config::default(), None).unwrap();
        let s = symbol_from(&p).unwrap();
        for x in [-3.0, -1.0, 0.0, 2.0] {
            assert!((s.eval(x) - ramp(x)).abs() < 1e-3);
        }
    }
}
