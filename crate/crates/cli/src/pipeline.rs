//! Runs one scenario and writes its artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use qsdyn_core::dynamics::{
    convergence_experiment, ConvergenceReport, DistanceCheck, Expectation, ExperimentSpec, OmegaWindow, TestFunctionDict, Window,
};
use qsdyn_core::goodfn::{chart_with_density, default_eps_grid, fit_good, interval, verify_good, GoodCandidate, GoodConstants};
use qsdyn_core::groups::catalogue;
use qsdyn_core::linearise::{
    build_bundle, build_neighborhoods, dichotomy_check, focusing_class_test, lattice_probes, sphere_grid, stability_check, Dichotomy,
    FocusingClass, NeighborhoodParams, Representation, StabilityMode,
};
use qsdyn_core::{GroupElement, GroupTag};

use crate::config::{LineariseSpec, Outcome, Pipeline, RepSpec, ScenarioConfig, WindowShape};
use crate::element::Num;
use crate::{CliError, ConfigError, RunOptions};

/// Plot-ready series carried in the JSON artifact.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    /// `(i, translator parameter, check, distance)`.
    pub distance: Vec<(usize, f64, String, f64)>,
    /// `(threshold, largest mass with systole below it)`.
    pub systole: Vec<(f64, f64)>,
}

/// Everything written for one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub pipeline: String,
    pub seed: u64,
    pub expected: String,
    pub observed: String,
    /// `PASS` when the observed outcome is the expected one.
    pub verdict: String,
    pub summary: String,
    pub plot: PlotData,
    pub details: serde_json::Value,
    #[serde(skip)]
    pub csv: String,
}

impl ScenarioResult {
    pub fn matched(&self) -> bool {
        self.verdict == "PASS"
    }
}

fn core(name: &str) -> impl Fn(qsdyn_core::Error) -> CliError + '_ {
    move |err| CliError::Core { scenario: name.to_string(), err }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn dict_named(name: &str) -> TestFunctionDict {
    match name {
        "factor1" => TestFunctionDict::marginal(0, 2),
        "factor2" => TestFunctionDict::marginal(1, 2),
        "joint" => TestFunctionDict::joint(),
        _ => TestFunctionDict::standard(),
    }
}

fn build_omega(cfg: &ScenarioConfig) -> qsdyn_core::Result<OmegaWindow> {
    let w = cfg.window.as_ref().expect("validated");
    let h = catalogue(&w.h)?;
    match &w.shape {
        WindowShape::Ball(r) => OmegaWindow::ball(h, *r),
        WindowShape::Box { lo, hi } => {
            let far = lo.iter().zip(hi).map(|(a, b)| a.abs().max(b.abs()).powi(2)).sum::<f64>().sqrt();
            let chart = chart_with_density(&h, far)?;
            OmegaWindow::new(h, chart, Window::Box { lo: lo.clone(), hi: hi.clone() })
        }
        WindowShape::Points { .. } => unreachable!("rejected by validation"),
    }
}

fn scaled(n: usize, scale: f64) -> usize {
    ((n as f64 * scale).round() as usize).max(1)
}

fn simulate(cfg: &ScenarioConfig, seed: u64, opts: &RunOptions) -> Result<ScenarioResult, CliError> {
    let err = core(&cfg.name);
    let sim = cfg.simulate.as_ref().expect("validated");
    let omega = build_omega(cfg).map_err(&err)?;
    let places = cfg.places();
    let translators: Vec<(f64, GroupElement)> = cfg
        .translator_elements()
        .map_err(CliError::Io)?
        .into_iter()
        .map(|(t, g)| (t.to_f64(), g))
        .collect();
    let expectation = match &cfg.expect {
        Outcome::Limit { l, g_inf } => Expectation::Limit {
            l: catalogue(l).map_err(&err)?,
            g_inf: g_inf.build(cfg.group, &places, None).map_err(CliError::Io)?,
            n_inf: GroupElement::identity(cfg.group, &places),
        },
        Outcome::Escape { y_caps, max_mass, min_param } => {
            Expectation::Escape { y_caps: y_caps.clone(), max_mass: *max_mass, min_param: *min_param }
        }
        _ => unreachable!("rejected by validation"),
    };
    let spec = ExperimentSpec {
        name: cfg.name.clone(),
        omega,
        translators,
        expectation,
        samples: scaled(sim.samples.n, opts.samples_scale),
        reference_samples: scaled(sim.samples.reference, opts.samples_scale),
        seed,
        checks: sim
            .checks
            .iter()
            .map(|c| DistanceCheck { dict: dict_named(&c.dict), tolerance: c.tolerance, every_step: c.every_step, monotone: c.monotone })
            .collect(),
        systole_thresholds: sim.thresholds.clone(),
        strong_check: sim.strong,
    };
    let report = convergence_experiment(&spec).map_err(&err)?;
    Ok(simulate_result(cfg, seed, &report))
}

fn simulate_result(cfg: &ScenarioConfig, seed: u64, r: &ConvergenceReport) -> ScenarioResult {
    let mut csv = String::from("scenario,i,translator_param,test_fn,empirical,reference,mc_err,distance\n");
    for row in &r.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            row.scenario, row.i, row.translator_param, row.test_fn, row.empirical, row.reference, row.mc_err, row.distance
        );
    }
    let mut plot = PlotData::default();
    for s in &r.steps {
        for (k, c) in r.checks.iter().enumerate() {
            plot.distance.push((s.i, s.param, c.dict.clone(), s.distances[k].distance));
        }
    }
    plot.systole = r.tightness.thresholds.iter().copied().zip(r.tightness.sup_mass.iter().copied()).collect();
    let (observed, summary) = match &cfg.expect {
        Outcome::Escape { .. } => {
            let mass = r.steps.last().map_or(0.0, |s| s.compact_mass.iter().map(|m| m.1).fold(0.0, f64::max));
            let what = if r.pass { "escape confirmed" } else { "escape not confirmed" };
            (if r.pass { "escape" } else { "no_escape" }, format!("{what}, compact mass {mass:.3}"))
        }
        _ => {
            // The check closest to (or furthest past) its tolerance.
            let worst = r
                .checks
                .iter()
                .max_by(|a, b| {
                    let ra = a.distances.last().unwrap_or(&0.0) / a.tolerance;
                    let rb = b.distances.last().unwrap_or(&0.0) / b.tolerance;
                    ra.total_cmp(&rb)
                })
                .expect("validated nonempty");
            let d = *worst.distances.last().unwrap_or(&0.0);
            let cmp = if d < worst.tolerance { "<" } else { ">=" };
            let mut s = format!("final distance {d:.3} {cmp} {}", worst.tolerance);
            if let Some(c) = r.checks.iter().find(|c| c.monotone == Some(false)) {
                let _ = write!(s, ", {} not monotone", c.dict);
            }
            if let Some(c) = r.checks.iter().find(|c| !c.pass && c.monotone != Some(false)) {
                if c.dict != worst.dict {
                    let _ = write!(s, ", {} failed", c.dict);
                }
            }
            (if r.pass { "limit" } else { "no_limit" }, s)
        }
    };
    let matched = observed == cfg.expect.key();
    let details = json!({
        "checks": r.checks,
        "escape": r.escape,
        "steps": r.steps,
        "tightness": r.tightness,
        "strong": r.strong,
    });
    finish(cfg, seed, observed.to_string(), matched, summary, plot, details, csv)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    cfg: &ScenarioConfig,
    seed: u64,
    observed: String,
    matched: bool,
    summary: String,
    plot: PlotData,
    details: serde_json::Value,
    csv: String,
) -> ScenarioResult {
    let v = verdict(matched);
    ScenarioResult {
        scenario: cfg.name.clone(),
        pipeline: cfg.pipeline.as_str().to_string(),
        seed,
        expected: cfg.expect.key().to_string(),
        observed,
        verdict: v.to_string(),
        summary: format!("{}: {v} ({summary})", cfg.name),
        plot,
        details,
        csv,
    }
}

fn stability(cfg: &ScenarioConfig, seed: u64) -> Result<ScenarioResult, CliError> {
    let err = core(&cfg.name);
    let s = cfg.stability.as_ref().expect("validated");
    let y: Vec<GroupElement> = cfg.translator_elements().map_err(CliError::Io)?.into_iter().map(|p| p.1).collect();
    let omega = cfg.window_points().map_err(CliError::Io)?;
    let (rep, dim) = match s.representation {
        RepSpec::Standard => (Representation::Standard, cfg.group.matrix_size()),
        RepSpec::Adjoint => (Representation::Adjoint(cfg.group), adjoint_dim(cfg.group)),
    };
    let (mode, probes) = if s.arithmetic {
        (StabilityMode::Arithmetic, lattice_probes(dim, s.probes as i64))
    } else {
        (StabilityMode::Analytic, sphere_grid(dim, s.probes))
    };
    let r = stability_check(rep, &y, &omega, mode, &probes, s.threshold).map_err(&err)?;
    let observed = if r.pass { "stable" } else { "unstable" };
    let mut matched = observed == cfg.expect.key();
    let v: Vec<String> = r.worst.v.iter().map(|x| format!("{:.3}", x + 0.0)).collect();
    let mut summary = format!(
        "{observed}, constant {:.3e} {} threshold {}, witness [{}]",
        r.constant,
        if r.pass { "<=" } else { ">" },
        s.threshold,
        v.join(", ")
    );
    if let Outcome::Unstable { witness: Some(w) } = &cfg.expect {
        if !parallel(w, &r.worst.v) {
            matched = false;
            summary.push_str(", witness differs from the expected one");
        }
    }
    let mut csv = String::from("scenario,omega_index,witness_norm\n");
    for (k, n) in r.worst.norms.iter().enumerate() {
        let _ = writeln!(csv, "{},{k},{n}", cfg.name);
    }
    Ok(finish(cfg, seed, observed.into(), matched, summary, PlotData::default(), json!(r), csv))
}

fn adjoint_dim(tag: GroupTag) -> usize {
    match tag {
        GroupTag::SL2 => 3,
        GroupTag::SL2xSL2 => 6,
        GroupTag::SL3 => 8,
    }
}

/// Same line through the origin, up to `1e-9`.
fn parallel(a: &[f64], b: &[f64]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    na > 0.0 && nb > 0.0 && (dot.abs() / (na * nb) - 1.0).abs() < 1e-9
}

fn goodfn(cfg: &ScenarioConfig, seed: u64) -> Result<ScenarioResult, CliError> {
    let err = core(&cfg.name);
    let g = cfg.goodfn.as_ref().expect("validated");
    let coeffs = cfg.goodfn_coeffs().expect("validated");
    let f = GoodCandidate::polynomial(&cfg.name, interval(g.domain.0, g.domain.1).map_err(&err)?, coeffs).map_err(&err)?;
    let grid = default_eps_grid(g.per_decade);
    let consts = GoodConstants::new(g.c, g.alpha).map_err(&err)?;
    let v = verify_good(&f, consts, &grid, g.points).map_err(&err)?;
    let fitted = if g.fit {
        match fit_good(&f, &grid) {
            Ok(k) => Some(Ok(k)),
            Err(qsdyn_core::Error::DegenerateFit(m)) => Some(Err(m)),
            Err(e) => return Err(err(e)),
        }
    } else {
        None
    };
    let observed = if v.pass { "good" } else { "not_good" };
    let mut matched = observed == cfg.expect.key();
    let mut summary = format!("{} for (C, alpha) = ({}, {})", observed.replace('_', " "), g.c, g.alpha);
    match &fitted {
        Some(Ok(k)) => {
            let _ = write!(summary, ", fitted alpha {:.3}", k.alpha);
        }
        Some(Err(_)) => summary.push_str(", fit degenerate"),
        None => {}
    }
    if let Outcome::Good { alpha: Some((a, tol)) } = &cfg.expect {
        let ok = matches!(&fitted, Some(Ok(k)) if (k.alpha - a).abs() <= *tol);
        if !ok {
            matched = false;
            let _ = write!(summary, ", fitted alpha outside {a} +- {tol}");
        }
    }
    let mut csv = String::from("scenario,ball,eps,ratio,error,bound\n");
    for row in &v.rows {
        for (k, e) in grid.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{e},{},{},{}", cfg.name, row.label, row.ratios[k], row.errors[k], g.c * e.powf(g.alpha));
        }
    }
    let details = json!({
        "pass": v.pass,
        "worst": v.worst,
        "max_estimator_error": v.max_estimator_error,
        "fit": fitted,
    });
    Ok(finish(cfg, seed, observed.into(), matched, summary, PlotData::default(), details, csv))
}

fn linearise(cfg: &ScenarioConfig, seed: u64) -> Result<ScenarioResult, CliError> {
    let err = core(&cfg.name);
    let seq = cfg.translator_elements().map_err(CliError::Io)?;
    match cfg.linearise.as_ref().expect("validated") {
        LineariseSpec::Focusing { factor } => {
            let h = catalogue(&cfg.window.as_ref().expect("validated").h).map_err(&err)?;
            let g: Vec<GroupElement> = seq.iter().map(|p| p.1.clone()).collect();
            let r = focusing_class_test(&h, &g, *factor).map_err(&err)?;
            let observed = match r.class {
                FocusingClass::O1Z => "o1z",
                FocusingClass::NotO1Z => "not_o1z",
            };
            let mut matched = observed == cfg.expect.key();
            let mut summary = format!("{:?}", r.class);
            if let Some(e) = r.growth_exponent {
                let _ = write!(summary, ", growth exponent {e:.3}");
            }
            if let Outcome::NotO1Z { exponent: Some((a, tol)) } = &cfg.expect {
                if !r.growth_exponent.is_some_and(|e| (e - a).abs() <= tol * a.abs()) {
                    matched = false;
                    let _ = write!(summary, ", exponent outside {a} +- {}%", tol * 100.0);
                }
            }
            let mut csv = String::from("scenario,i,translator_param,curve\n");
            for (k, c) in r.curve.iter().enumerate() {
                let _ = writeln!(csv, "{},{},{},{c}", cfg.name, k, num_text(&seq[k].0));
            }
            Ok(finish(cfg, seed, observed.into(), matched, summary, PlotData::default(), json!(r), csv))
        }
        LineariseSpec::Dichotomy(d) => {
            let l = catalogue(&d.l).map_err(&err)?;
            let bundle = build_bundle(&l, cfg.group).map_err(&err)?;
            let p = NeighborhoodParams {
                d0_radius: d.d0_radius,
                eps: d.eps,
                c: d.c,
                alpha: d.alpha,
                c_d: d.c_d,
                c_m: d.c_m,
                n_x: d.n_x,
                lambda_b: d.lambda_b,
            };
            let triple = build_neighborhoods(&p, &bundle.lambda_map(), bundle.a_l()).map_err(&err)?;
            let omega: Vec<(GroupElement, f64)> = cfg.window_points().map_err(CliError::Io)?.into_iter().map(|g| (g, 1.0)).collect();
            let mut csv = String::from("scenario,i,translator_param,alternative,detail\n");
            let mut outcomes = vec![];
            for (k, (t, g)) in seq.iter().enumerate() {
                let r = dichotomy_check(&bundle, g, &omega, &triple, d.eps, d.height, d.budget).map_err(&err)?;
                let (name, detail) = match &r {
                    Dichotomy::Alternative1 { gamma } => ("alternative1", format!("gamma {gamma:?}").replace(',', "")),
                    Dichotomy::Alternative2 { fraction } => ("alternative2", format!("fraction {fraction}")),
                    Dichotomy::Inconclusive { reason } => ("inconclusive", reason.replace(',', ";")),
                };
                let _ = writeln!(csv, "{},{k},{},{name},{detail}", cfg.name, num_text(t));
                outcomes.push((name, r));
            }
            let first = outcomes[0].0;
            let observed = if outcomes.iter().all(|o| o.0 == first) { first } else { "mixed" };
            let matched = observed == cfg.expect.key();
            let summary = format!("{observed} for {} translators, M = {}", outcomes.len(), triple.m_good);
            let details = json!({
                "m_good": triple.m_good,
                "r": triple.r,
                "b": triple.b,
                "results": outcomes.iter().map(|o| &o.1).collect::<Vec<_>>(),
            });
            Ok(finish(cfg, seed, observed.into(), matched, summary, PlotData::default(), details, csv))
        }
    }
}

fn num_text(n: &Num) -> String {
    n.to_string().replace(',', "")
}

/// Runs a parsed scenario without touching the file system.
pub fn run_config(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ScenarioResult, CliError> {
    let seed = opts.seed.unwrap_or(cfg.seed);
    match cfg.pipeline {
        Pipeline::Simulate => simulate(cfg, seed, opts),
        Pipeline::Stability => stability(cfg, seed),
        Pipeline::Goodfn => goodfn(cfg, seed),
        Pipeline::Linearise => linearise(cfg, seed),
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `<name>.csv`, `<name>.json` and `<name>.summary.txt`.
pub fn write_artifacts(result: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let base = dir.join(&result.scenario);
    let files = [
        (base.with_extension("csv"), result.csv.clone()),
        (base.with_extension("json"), serde_json::to_string_pretty(result).map_err(|e| CliError::Io(e.to_string()))? + "\n"),
        (dir.join(format!("{}.summary.txt", result.scenario)), result.summary.clone() + "\n"),
    ];
    let mut out = vec![];
    for (path, text) in files {
        std::fs::write(&path, text).map_err(io(&path))?;
        out.push(path);
    }
    Ok(out)
}

/// Loads, runs and writes every config in order. When `only` is given, each
/// config must declare that pipeline.
pub fn run_paths(paths: &[PathBuf], only: Option<Pipeline>, opts: &RunOptions) -> Result<Vec<ScenarioResult>, CliError> {
    let mut out = vec![];
    for path in paths {
        let name = path.display().to_string();
        let cfg = ScenarioConfig::load(path).map_err(|err| CliError::Config { path: name.clone(), err })?;
        if let Some(p) = only {
            if cfg.pipeline != p {
                let err = ConfigError {
                    line: None,
                    field: "scenario.pipeline".into(),
                    message: format!("`{}` config passed to the `{}` subcommand", cfg.pipeline.as_str(), p.as_str()),
                };
                return Err(CliError::Config { path: name, err });
            }
        }
        let result = run_config(&cfg, opts)?;
        write_artifacts(&result, &opts.out_dir)?;
        log::info!("{}", result.summary);
        out.push(result);
    }
    Ok(out)
}
