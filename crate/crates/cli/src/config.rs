//! Typed scenario configuration.

use std::path::Path;

use num_rational::BigRational;
use qsdyn_core::groups::catalogue;
use qsdyn_core::linearise::DEFAULT_ORBIT_BUDGET;
use qsdyn_core::{GroupElement, GroupTag, Place};

use crate::element::{fmt_nums, fmt_real, fmt_reals, parse_nums, parse_real, parse_reals, ElemTemplate, Grid, Num};
use crate::ini::{IniDoc, Reader};
use crate::ConfigError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pipeline {
    Simulate,
    Stability,
    Goodfn,
    Linearise,
}

impl Pipeline {
    pub fn as_str(self) -> &'static str {
        match self {
            Pipeline::Simulate => "simulate",
            Pipeline::Stability => "stability",
            Pipeline::Goodfn => "goodfn",
            Pipeline::Linearise => "linearise",
        }
    }

    fn parse(s: &str) -> Result<Self, String> {
        Ok(match s {
            "simulate" => Pipeline::Simulate,
            "stability" => Pipeline::Stability,
            "goodfn" => Pipeline::Goodfn,
            "linearise" => Pipeline::Linearise,
            _ => return Err(format!("unknown pipeline `{s}`")),
        })
    }
}

fn parse_tag(s: &str) -> Result<GroupTag, String> {
    Ok(match s {
        "SL2" => GroupTag::SL2,
        "SL2xSL2" => GroupTag::SL2xSL2,
        "SL3" => GroupTag::SL3,
        _ => return Err(format!("unknown group `{s}`")),
    })
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn parse_id(s: &str) -> Result<String, String> {
    catalogue(s).map(|_| s.to_string()).map_err(|_| format!("unknown subgroup id `{s}`"))
}

fn positive(x: f64) -> Result<f64, String> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be positive, got {x}"))
    }
}

fn parse_pos(s: &str) -> Result<f64, String> {
    parse_real(s).and_then(positive)
}

#[derive(Clone, Debug, PartialEq)]
pub enum WindowShape {
    /// Chart ball; the whole group for compact `p`-adic and trivial `H`.
    Ball(f64),
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Equally weighted points `family(t)` of `H`.
    Points { family: ElemTemplate, params: Grid },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowSpec {
    pub h: String,
    pub shape: WindowShape,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslatorSpec {
    pub family: ElemTemplate,
    pub params: Grid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpec {
    pub n: usize,
    pub reference: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckSpec {
    /// `standard`, `factor1`, `factor2` or `joint`.
    pub dict: String,
    pub tolerance: f64,
    pub every_step: bool,
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateSpec {
    pub samples: SampleSpec,
    pub thresholds: Vec<f64>,
    pub strong: bool,
    pub checks: Vec<CheckSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepSpec {
    Standard,
    Adjoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilitySpec {
    pub representation: RepSpec,
    pub arithmetic: bool,
    pub threshold: f64,
    /// Sphere-grid size (analytic) or lattice-probe bound (arithmetic).
    pub probes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodfnSpec {
    pub coeffs: Vec<Num>,
    pub domain: (f64, f64),
    pub c: f64,
    pub alpha: f64,
    pub fit: bool,
    pub per_decade: usize,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomySpec {
    pub l: String,
    pub d0_radius: f64,
    pub eps: f64,
    pub c: f64,
    pub alpha: f64,
    pub c_d: f64,
    pub c_m: f64,
    pub n_x: f64,
    pub lambda_b: f64,
    pub height: u64,
    pub budget: u128,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LineariseSpec {
    Focusing { factor: f64 },
    Dichotomy(DichotomySpec),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Limit { l: String, g_inf: ElemTemplate },
    Escape { y_caps: Vec<f64>, max_mass: f64, min_param: f64 },
    Stable,
    Unstable { witness: Option<Vec<f64>> },
    Good { alpha: Option<(f64, f64)> },
    NotGood,
    O1Z,
    NotO1Z { exponent: Option<(f64, f64)> },
    Alternative1,
    Alternative2,
}

impl Outcome {
    pub fn key(&self) -> &'static str {
        match self {
            Outcome::Limit { .. } => "limit",
            Outcome::Escape { .. } => "escape",
            Outcome::Stable => "stable",
            Outcome::Unstable { .. } => "unstable",
            Outcome::Good { .. } => "good",
            Outcome::NotGood => "not_good",
            Outcome::O1Z => "o1z",
            Outcome::NotO1Z { .. } => "not_o1z",
            Outcome::Alternative1 => "alternative1",
            Outcome::Alternative2 => "alternative2",
        }
    }

    fn fits(&self, p: Pipeline, lin: Option<&LineariseSpec>) -> bool {
        match self {
            Outcome::Limit { .. } | Outcome::Escape { .. } => p == Pipeline::Simulate,
            Outcome::Stable | Outcome::Unstable { .. } => p == Pipeline::Stability,
            Outcome::Good { .. } | Outcome::NotGood => p == Pipeline::Goodfn,
            Outcome::O1Z | Outcome::NotO1Z { .. } => matches!(lin, Some(LineariseSpec::Focusing { .. })),
            Outcome::Alternative1 | Outcome::Alternative2 => matches!(lin, Some(LineariseSpec::Dichotomy(_))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub pipeline: Pipeline,
    pub group: GroupTag,
    pub seed: u64,
    pub window: Option<WindowSpec>,
    pub translators: Option<TranslatorSpec>,
    pub simulate: Option<SimulateSpec>,
    pub stability: Option<StabilitySpec>,
    pub goodfn: Option<GoodfnSpec>,
    pub linearise: Option<LineariseSpec>,
    pub expect: Outcome,
}

const SECTIONS: [&str; 8] = ["scenario", "window", "translators", "simulate", "stability", "goodfn", "linearise", "expect"];

fn need<'a>(doc: &'a IniDoc, name: &str, why: &str) -> Result<Reader<'a>, ConfigError> {
    doc.section(name)
        .map(Reader::new)
        .ok_or_else(|| ConfigError { line: None, field: name.to_string(), message: format!("missing section ({why})") })
}

fn read_window(doc: &IniDoc) -> Result<Option<WindowSpec>, ConfigError> {
    let Some(sec) = doc.section("window") else { return Ok(None) };
    let mut r = Reader::new(sec);
    let h = r.parse_req("h", parse_id)?;
    let radius = r.parse("radius", parse_pos)?;
    let lo = r.parse("lo", parse_reals)?;
    let hi = r.parse("hi", parse_reals)?;
    let family = r.parse("family", |s| s.parse::<ElemTemplate>())?;
    let params = r.parse("params", |s| s.parse::<Grid>())?;
    let shape = match (radius, lo, hi, family, params) {
        (Some(r), None, None, None, None) => WindowShape::Ball(r),
        (None, Some(lo), Some(hi), None, None) => WindowShape::Box { lo, hi },
        (None, None, None, Some(family), Some(params)) => WindowShape::Points { family, params },
        _ => {
            return Err(ConfigError::at(sec.line, "window", "give exactly one of `radius`, `lo`+`hi` or `family`+`params`"));
        }
    };
    r.finish()?;
    Ok(Some(WindowSpec { h, shape }))
}

fn read_simulate(doc: &IniDoc) -> Result<SimulateSpec, ConfigError> {
    let mut r = need(doc, "simulate", "simulate pipelines need sample counts")?;
    let count = |s: &str| -> Result<usize, String> {
        let n: usize = parse_int(s)?;
        if n == 0 {
            return Err("samples must be >= 1".into());
        }
        Ok(n)
    };
    let n = r.parse_req("samples", count)?;
    let reference = r.parse("reference_samples", count)?.unwrap_or(n);
    let thresholds = r.parse("thresholds", parse_reals)?.unwrap_or_else(|| vec![0.3, 0.5, 1.0]);
    if thresholds.iter().any(|t| !(*t > 0.0)) {
        return Err(ConfigError::at(r.line(), r.field("thresholds"), "thresholds must be positive"));
    }
    let strong = r.parse("strong", parse_bool)?.unwrap_or(true);
    r.finish()?;
    let mut checks = vec![];
    for sec in &doc.sections {
        let Some(dict) = sec.name.strip_prefix("check.") else { continue };
        if !["standard", "factor1", "factor2", "joint"].contains(&dict) {
            return Err(ConfigError::at(sec.line, &sec.name, format!("unknown test-function dictionary `{dict}`")));
        }
        let mut c = Reader::new(sec);
        let tolerance = c.parse_req("tolerance", parse_pos)?;
        let every_step = c.parse("every_step", parse_bool)?.unwrap_or(false);
        let monotone = c.parse("monotone", parse_bool)?.unwrap_or(false);
        c.finish()?;
        checks.push(CheckSpec { dict: dict.to_string(), tolerance, every_step, monotone });
    }
    Ok(SimulateSpec { samples: SampleSpec { n, reference }, thresholds, strong, checks })
}

fn read_stability(doc: &IniDoc) -> Result<StabilitySpec, ConfigError> {
    let mut r = need(doc, "stability", "stability pipelines need a threshold")?;
    let representation = r
        .parse("representation", |s| match s {
            "standard" => Ok(RepSpec::Standard),
            "adjoint" => Ok(RepSpec::Adjoint),
            _ => Err(format!("unknown representation `{s}`")),
        })?
        .unwrap_or(RepSpec::Standard);
    let arithmetic = r
        .parse("mode", |s| match s {
            "analytic" => Ok(false),
            "arithmetic" => Ok(true),
            _ => Err(format!("unknown stability mode `{s}`")),
        })?
        .unwrap_or(false);
    let threshold = r.parse_req("threshold", parse_pos)?;
    let probes = r.parse("probes", parse_int::<usize>)?.unwrap_or(if arithmetic { 4 } else { 64 });
    if probes == 0 {
        return Err(ConfigError::at(r.line(), r.field("probes"), "probes must be >= 1"));
    }
    r.finish()?;
    Ok(StabilitySpec { representation, arithmetic, threshold, probes })
}

fn read_goodfn(doc: &IniDoc) -> Result<GoodfnSpec, ConfigError> {
    let mut r = need(doc, "goodfn", "goodfn pipelines need a candidate")?;
    let coeffs = r.parse_req("coeffs", parse_nums)?;
    if coeffs.is_empty() {
        return Err(ConfigError::at(r.line(), r.field("coeffs"), "need at least one coefficient"));
    }
    let domain = r.parse_req("domain", |s| match parse_reals(s)?.as_slice() {
        [a, b] if a < b => Ok((*a, *b)),
        _ => Err("domain is `lo, hi` with lo < hi".into()),
    })?;
    let c = r.parse_req("c", parse_pos)?;
    let alpha = r.parse_req("alpha", |s| parse_real(s).and_then(|a| if a > 0.0 && a <= 1.0 { Ok(a) } else { Err("alpha must lie in (0, 1]".into()) }))?;
    let fit = r.parse("fit", parse_bool)?.unwrap_or(false);
    let per_decade = r.parse("per_decade", parse_int::<usize>)?.unwrap_or(4).max(1);
    let points = r.parse("points", parse_int::<usize>)?.unwrap_or(20_001).max(2);
    r.finish()?;
    Ok(GoodfnSpec { coeffs, domain, c, alpha, fit, per_decade, points })
}

fn read_linearise(doc: &IniDoc) -> Result<LineariseSpec, ConfigError> {
    let mut r = need(doc, "linearise", "linearise pipelines name an operation")?;
    let op = r.require("op")?;
    let spec = match op.0 {
        "focusing" => LineariseSpec::Focusing {
            factor: r.parse("factor", parse_pos)?.unwrap_or(qsdyn_core::linearise::DEFAULT_FOCUS_FACTOR),
        },
        "dichotomy" => {
            let l = r.parse_req("l", parse_id)?;
            let mut v = [0.0; 8];
            for (k, key) in ["d0_radius", "eps", "c", "alpha", "c_d", "c_m", "n_x", "lambda_b"].iter().enumerate() {
                v[k] = r.parse_req(key, parse_pos)?;
            }
            let [d0_radius, eps, c, alpha, c_d, c_m, n_x, lambda_b] = v;
            let d = DichotomySpec {
                l,
                d0_radius,
                eps,
                c,
                alpha,
                c_d,
                c_m,
                n_x,
                lambda_b,
                height: r.parse("height", parse_int::<u64>)?.unwrap_or(5000),
                budget: r.parse("budget", parse_int::<u128>)?.unwrap_or(DEFAULT_ORBIT_BUDGET),
            };
            LineariseSpec::Dichotomy(d)
        }
        other => return Err(ConfigError::at(op.1, "linearise.op", format!("unknown operation `{other}`"))),
    };
    r.finish()?;
    Ok(spec)
}

fn value_with_tol(r: &mut Reader<'_>, k: &str, t: &str, default: f64) -> Result<Option<(f64, f64)>, ConfigError> {
    Ok(match r.parse(k, parse_real)? {
        Some(v) => Some((v, r.parse(t, parse_pos)?.unwrap_or(default))),
        None => None,
    })
}

fn read_expect(doc: &IniDoc) -> Result<Outcome, ConfigError> {
    let mut r = need(doc, "expect", "every scenario declares its expected outcome")?;
    let (key, line) = r.require("outcome")?;
    let out = match key {
        "limit" => Outcome::Limit {
            l: r.parse_req("l", parse_id)?,
            g_inf: r.parse("g_inf", |s| s.parse::<ElemTemplate>())?.unwrap_or(ElemTemplate::Identity),
        },
        "escape" => Outcome::Escape {
            y_caps: r.parse_req("y_caps", parse_reals)?,
            max_mass: r.parse_req("max_mass", parse_pos)?,
            min_param: r.parse_req("min_param", parse_real)?,
        },
        "stable" => Outcome::Stable,
        "unstable" => Outcome::Unstable { witness: r.parse("witness", parse_reals)? },
        "good" => Outcome::Good { alpha: value_with_tol(&mut r, "alpha", "alpha_tol", 0.05)? },
        "not_good" => Outcome::NotGood,
        "o1z" => Outcome::O1Z,
        "not_o1z" => Outcome::NotO1Z { exponent: value_with_tol(&mut r, "exponent", "exponent_tol", 0.1)? },
        "alternative1" => Outcome::Alternative1,
        "alternative2" => Outcome::Alternative2,
        other => return Err(ConfigError::at(line, "expect.outcome", format!("unknown outcome `{other}`"))),
    };
    r.finish()?;
    Ok(out)
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let doc = IniDoc::parse(text)?;
        for s in &doc.sections {
            if !SECTIONS.contains(&s.name.as_str()) && !s.name.starts_with("check.") {
                return Err(ConfigError::at(s.line, &s.name, "unknown section"));
            }
        }
        let mut r = need(&doc, "scenario", "name and pipeline")?;
        let name = r.parse_req("name", |s| {
            if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                Ok(s.to_string())
            } else {
                Err(format!("`{s}` is not a valid scenario name"))
            }
        })?;
        let pipeline = r.parse_req("pipeline", Pipeline::parse)?;
        let group = r.parse_req("group", parse_tag)?;
        let seed = r.parse("seed", parse_int::<u64>)?.unwrap_or(1);
        r.finish()?;

        let window = read_window(&doc)?;
        let translators = match doc.section("translators") {
            None => None,
            Some(sec) => {
                let mut r = Reader::new(sec);
                let family = r.parse_req("family", |s| s.parse::<ElemTemplate>())?;
                let params = r.parse_req("params", |s| s.parse::<Grid>())?;
                r.finish()?;
                Some(TranslatorSpec { family, params })
            }
        };
        let simulate = doc.section("simulate").map(|_| read_simulate(&doc)).transpose()?;
        let stability = doc.section("stability").map(|_| read_stability(&doc)).transpose()?;
        let goodfn = doc.section("goodfn").map(|_| read_goodfn(&doc)).transpose()?;
        let linearise = doc.section("linearise").map(|_| read_linearise(&doc)).transpose()?;
        let expect = read_expect(&doc)?;

        let cfg = ScenarioConfig { name, pipeline, group, seed, window, translators, simulate, stability, goodfn, linearise, expect };
        cfg.validate(&doc)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { line: None, field: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    /// Places of the scenario's elements: those of `H` when a window names one.
    pub fn places(&self) -> Vec<Place> {
        self.window
            .as_ref()
            .and_then(|w| catalogue(&w.h).ok())
            .map(|h| h.places)
            .unwrap_or_else(|| vec![Place::Real])
    }

    pub fn translator_elements(&self) -> Result<Vec<(Num, GroupElement)>, String> {
        let t = self.translators.as_ref().ok_or("missing [translators]")?;
        let places = self.places();
        t.params.values().into_iter().map(|v| t.family.build(self.group, &places, Some(&v)).map(|g| (v, g))).collect()
    }

    pub fn window_points(&self) -> Result<Vec<GroupElement>, String> {
        match self.window.as_ref().map(|w| &w.shape) {
            Some(WindowShape::Points { family, params }) => {
                let places = self.places();
                params.values().iter().map(|v| family.build(self.group, &places, Some(v))).collect()
            }
            _ => Err("this pipeline needs a point window (`family` + `params`)".into()),
        }
    }

    fn validate(&self, doc: &IniDoc) -> Result<(), ConfigError> {
        let line_of = |sec: &str, key: &str| {
            doc.section(sec).map(|s| s.entries.iter().find(|e| e.key == key).map_or(s.line, |e| e.line))
        };
        let bad = |sec: &str, key: &str, msg: String| ConfigError {
            line: line_of(sec, key),
            field: if key.is_empty() { sec.to_string() } else { format!("{sec}.{key}") },
            message: msg,
        };
        let section = |name: &str| ConfigError { line: None, field: name.to_string(), message: format!("{} pipelines need this section", self.pipeline.as_str()) };
        let present = [
            ("simulate", self.simulate.is_some(), Pipeline::Simulate),
            ("stability", self.stability.is_some(), Pipeline::Stability),
            ("goodfn", self.goodfn.is_some(), Pipeline::Goodfn),
            ("linearise", self.linearise.is_some(), Pipeline::Linearise),
        ];
        for (name, there, p) in present {
            if there && p != self.pipeline {
                return Err(bad(name, "", format!("section does not belong to a {} pipeline", self.pipeline.as_str())));
            }
            if !there && p == self.pipeline {
                return Err(section(name));
            }
        }
        if !self.expect.fits(self.pipeline, self.linearise.as_ref()) {
            return Err(bad("expect", "outcome", format!("`{}` is not an outcome of this pipeline", self.expect.key())));
        }
        if self.pipeline != Pipeline::Goodfn {
            let w = self.window.as_ref().ok_or_else(|| section("window"))?;
            let h = catalogue(&w.h).map_err(|e| bad("window", "h", e.to_string()))?;
            if h.tag != self.group {
                return Err(bad("window", "h", format!("`{}` lives in {}, not {}", w.h, h.tag, self.group)));
            }
            if self.translators.is_none() {
                return Err(section("translators"));
            }
            self.translator_elements().map_err(|m| bad("translators", "family", m))?;
            if let WindowShape::Points { .. } = w.shape {
                self.window_points().map_err(|m| bad("window", "family", m))?;
            }
        }
        if let Some(sim) = &self.simulate {
            if matches!(self.window.as_ref().map(|w| &w.shape), Some(WindowShape::Points { .. })) {
                return Err(bad("window", "family", "simulations sample a chart window (`radius` or `lo`+`hi`)".into()));
            }
            if let Outcome::Limit { l, g_inf } = &self.expect {
                if sim.checks.is_empty() {
                    return Err(section("check.<dict>"));
                }
                let lt = catalogue(l).map_err(|e| bad("expect", "l", e.to_string()))?;
                if lt.tag != self.group {
                    return Err(bad("expect", "l", format!("`{l}` lives in {}, not {}", lt.tag, self.group)));
                }
                g_inf.build(self.group, &self.places(), None).map_err(|m| bad("expect", "g_inf", m))?;
            }
        }
        if let Some(LineariseSpec::Dichotomy(d)) = &self.linearise {
            if !(d.eps <= 1.0 && d.alpha <= 1.0) {
                return Err(bad("linearise", "eps", "eps and alpha must lie in (0, 1]".into()));
            }
            if catalogue(&d.l).map(|l| l.tag) != Ok(self.group) {
                return Err(bad("linearise", "l", format!("`{}` does not live in {}", d.l, self.group)));
            }
        }
        Ok(())
    }

    pub fn to_ini(&self) -> IniDoc {
        let mut doc = IniDoc::default();
        doc.push(
            "scenario",
            vec![
                ("name", self.name.clone()),
                ("pipeline", self.pipeline.as_str().to_string()),
                ("group", self.group.to_string()),
                ("seed", self.seed.to_string()),
            ],
        );
        if let Some(w) = &self.window {
            let mut e = vec![("h", w.h.clone())];
            match &w.shape {
                WindowShape::Ball(r) => e.push(("radius", fmt_real(*r))),
                WindowShape::Box { lo, hi } => {
                    e.push(("lo", fmt_reals(lo)));
                    e.push(("hi", fmt_reals(hi)));
                }
                WindowShape::Points { family, params } => {
                    e.push(("family", family.to_string()));
                    e.push(("params", params.to_string()));
                }
            }
            doc.push("window", e);
        }
        if let Some(t) = &self.translators {
            doc.push("translators", vec![("family", t.family.to_string()), ("params", t.params.to_string())]);
        }
        if let Some(s) = &self.simulate {
            doc.push(
                "simulate",
                vec![
                    ("samples", s.samples.n.to_string()),
                    ("reference_samples", s.samples.reference.to_string()),
                    ("thresholds", fmt_reals(&s.thresholds)),
                    ("strong", s.strong.to_string()),
                ],
            );
            for c in &s.checks {
                doc.push(
                    &format!("check.{}", c.dict),
                    vec![
                        ("tolerance", fmt_real(c.tolerance)),
                        ("every_step", c.every_step.to_string()),
                        ("monotone", c.monotone.to_string()),
                    ],
                );
            }
        }
        if let Some(s) = &self.stability {
            let rep = match s.representation {
                RepSpec::Standard => "standard",
                RepSpec::Adjoint => "adjoint",
            };
            doc.push(
                "stability",
                vec![
                    ("representation", rep.to_string()),
                    ("mode", if s.arithmetic { "arithmetic" } else { "analytic" }.to_string()),
                    ("threshold", fmt_real(s.threshold)),
                    ("probes", s.probes.to_string()),
                ],
            );
        }
        if let Some(g) = &self.goodfn {
            doc.push(
                "goodfn",
                vec![
                    ("coeffs", fmt_nums(&g.coeffs)),
                    ("domain", fmt_reals(&[g.domain.0, g.domain.1])),
                    ("c", fmt_real(g.c)),
                    ("alpha", fmt_real(g.alpha)),
                    ("fit", g.fit.to_string()),
                    ("per_decade", g.per_decade.to_string()),
                    ("points", g.points.to_string()),
                ],
            );
        }
        match &self.linearise {
            Some(LineariseSpec::Focusing { factor }) => {
                doc.push("linearise", vec![("op", "focusing".into()), ("factor", fmt_real(*factor))]);
            }
            Some(LineariseSpec::Dichotomy(d)) => doc.push(
                "linearise",
                vec![
                    ("op", "dichotomy".into()),
                    ("l", d.l.clone()),
                    ("d0_radius", fmt_real(d.d0_radius)),
                    ("eps", fmt_real(d.eps)),
                    ("c", fmt_real(d.c)),
                    ("alpha", fmt_real(d.alpha)),
                    ("c_d", fmt_real(d.c_d)),
                    ("c_m", fmt_real(d.c_m)),
                    ("n_x", fmt_real(d.n_x)),
                    ("lambda_b", fmt_real(d.lambda_b)),
                    ("height", d.height.to_string()),
                    ("budget", d.budget.to_string()),
                ],
            ),
            None => {}
        }
        let mut e = vec![("outcome", self.expect.key().to_string())];
        match &self.expect {
            Outcome::Limit { l, g_inf } => {
                e.push(("l", l.clone()));
                e.push(("g_inf", g_inf.to_string()));
            }
            Outcome::Escape { y_caps, max_mass, min_param } => {
                e.push(("y_caps", fmt_reals(y_caps)));
                e.push(("max_mass", fmt_real(*max_mass)));
                e.push(("min_param", fmt_real(*min_param)));
            }
            Outcome::Unstable { witness: Some(w) } => e.push(("witness", fmt_reals(w))),
            Outcome::Good { alpha: Some((a, t)) } => {
                e.push(("alpha", fmt_real(*a)));
                e.push(("alpha_tol", fmt_real(*t)));
            }
            Outcome::NotO1Z { exponent: Some((a, t)) } => {
                e.push(("exponent", fmt_real(*a)));
                e.push(("exponent_tol", fmt_real(*t)));
            }
            _ => {}
        }
        doc.push("expect", e);
        doc
    }

    pub fn to_text(&self) -> String {
        self.to_ini().render()
    }

    pub fn goodfn_coeffs(&self) -> Option<Vec<BigRational>> {
        self.goodfn.as_ref().map(|g| {
            g.coeffs
                .iter()
                .map(|c| match c {
                    Num::Exact(q) => q.clone(),
                    Num::Real(x) => BigRational::from_float(*x).unwrap_or_default(),
                })
                .collect()
        })
    }
}
