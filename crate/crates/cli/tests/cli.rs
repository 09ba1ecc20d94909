use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;

use qsdyn_cli::{emit_report, CliError, ScenarioConfig};

fn scenarios() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ini"))
        .collect();
    v.sort();
    v
}

fn scenario(name: &str) -> PathBuf {
    scenarios().into_iter().find(|p| p.file_stem().unwrap() == name).unwrap()
}

fn qsdyn(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsdyn"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const GOODFN: &str = "[scenario]
name = tiny
pipeline = goodfn
group = SL2

[goodfn]
coeffs = 0, 1
domain = -1, 1
c = 1
alpha = 1
points = 2001

[expect]
outcome = good
";

#[test]
fn bundled_configs_round_trip() {
    for path in scenarios() {
        let a = ScenarioConfig::load(&path).unwrap();
        let text = a.to_text();
        let b = ScenarioConfig::parse(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", path.display()));
        assert_eq!(a, b, "{}", path.display());
        assert_eq!(text, b.to_text());
    }
}

#[test]
fn unknown_subgroup_names_the_field() {
    let text = std::fs::read_to_string(scenario("s1_expanding_circles")).unwrap().replace("sl2R.rotation", "sl2R.nope");
    let err = ScenarioConfig::parse(&text).unwrap_err();
    assert_eq!(err.field, "window.h");
    let line = text.lines().position(|l| l.contains("sl2R.nope")).unwrap() + 1;
    assert_eq!(err.line, Some(line));
    assert!(err.to_string().contains("sl2R.nope"), "{err}");
}

#[test]
fn zero_samples_is_rejected() {
    let text = std::fs::read_to_string(scenario("s2_escape")).unwrap().replace("samples = 50000", "samples = 0");
    let err = ScenarioConfig::parse(&text).unwrap_err();
    assert!(err.to_string().contains("samples must be >= 1"), "{err}");
    assert_eq!(err.field, "simulate.samples");
}

#[test]
fn unknown_keys_and_sections_are_rejected() {
    let err = ScenarioConfig::parse(&GOODFN.replace("alpha = 1\n", "alpha = 1\nbeta = 2\n")).unwrap_err();
    assert_eq!(err.field, "goodfn.beta");
    assert_eq!(err.line, Some(11));
    assert!(err.to_string().contains("unknown key"));
    let err = ScenarioConfig::parse(&format!("{GOODFN}\n[extra]\nx = 1\n")).unwrap_err();
    assert_eq!(err.field, "extra");
    assert!(ScenarioConfig::parse(&GOODFN.replace("coeffs = 0, 1", "coeffs = 0, 1/0")).is_err());
    assert!(ScenarioConfig::parse(&GOODFN.replace("c = 1", "c = -1")).is_err());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.ini");
    std::fs::write(&cfg, GOODFN).unwrap();
    let out = dir.path().join("out");
    let ok = qsdyn(&["goodfn", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("tiny: PASS"));
    for ext in ["csv", "json", "summary.txt"] {
        assert!(out.join(format!("tiny.{ext}")).exists(), "{ext}");
    }
    let rep = qsdyn(&["report"], &out);
    assert_eq!(code(&rep), 0);
    assert!(String::from_utf8_lossy(&rep.stdout).contains("1/1 scenarios match"));

    std::fs::write(&cfg, GOODFN.replace("outcome = good", "outcome = not_good")).unwrap();
    assert_eq!(code(&qsdyn(&["goodfn", cfg.to_str().unwrap()], &out)), 1);
    assert_eq!(code(&qsdyn(&["report"], &out)), 1);

    std::fs::write(&cfg, GOODFN.replace("c = 1", "c = one")).unwrap();
    let bad = qsdyn(&["goodfn", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("goodfn.c"));
    // Pipeline and subcommand disagree.
    std::fs::write(&cfg, GOODFN).unwrap();
    assert_eq!(code(&qsdyn(&["simulate", cfg.to_str().unwrap()], &out)), 2);
    assert_eq!(code(&qsdyn(&["goodfn", "/nonexistent.ini"], &out)), 2);

    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(code(&qsdyn(&["report"], &empty)), 2);
    assert!(matches!(emit_report(&empty), Err(CliError::MissingArtifact(_))));
}

#[test]
fn worker_count_does_not_change_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<PathBuf> = ["1", "3"]
        .iter()
        .map(|w| {
            let out = dir.path().join(format!("w{w}"));
            let s2 = scenario("s2_escape");
            let st = scenario("stability_torus");
            let o = qsdyn(&["--workers", w, "--samples-scale", "0.05", "simulate", s2.to_str().unwrap()], &out);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            assert_eq!(code(&qsdyn(&["--workers", w, "stability", st.to_str().unwrap()], &out)), 0);
            out
        })
        .collect();
    for f in ["s2.csv", "s2.json", "stability_torus.csv", "stability_torus.json"] {
        let a = std::fs::read(runs[0].join(f)).unwrap();
        let b = std::fs::read(runs[1].join(f)).unwrap();
        assert!(a == b, "{f} differs between worker counts");
    }
}

#[test]
fn report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.ini");
    std::fs::write(&cfg, GOODFN).unwrap();
    assert_eq!(code(&qsdyn(&["goodfn", cfg.to_str().unwrap()], dir.path())), 0);
    let a = emit_report(dir.path()).unwrap();
    let b = emit_report(dir.path()).unwrap();
    assert_eq!(a, b);
    assert_eq!(std::fs::read_to_string(dir.path().join("report.summary.txt")).unwrap(), a.summary);
}

fn rational() -> impl Strategy<Value = String> {
    (-50i64..50, 1i64..12).prop_map(|(n, d)| if d == 1 { n.to_string() } else { format!("{n}/{d}") })
}

fn simulate_text() -> impl Strategy<Value = String> {
    (
        prop::sample::select(vec!["sl2R.rotation", "sl2R.torus", "sl2R.unipotent"]),
        0.01f64..3.0,
        prop::collection::vec(0.0f64..5.0, 1..6),
        1usize..500_000,
        prop::collection::vec(0.01f64..2.0, 1..4),
        0.001f64..0.5,
        any::<bool>(),
        any::<u64>(),
    )
        .prop_map(|(h, r, params, n, thresholds, tol, mono, seed)| {
            let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
            format!(
                "[scenario]\nname = gen\npipeline = simulate\ngroup = SL2\nseed = {seed}\n\n\
                 [window]\nh = {h}\nradius = {r:?}\n\n[translators]\nfamily = diag(t)\nparams = {}\n\n\
                 [simulate]\nsamples = {n}\nthresholds = {}\n\n[check.standard]\ntolerance = {tol:?}\nmonotone = {mono}\n\n\
                 [expect]\noutcome = limit\nl = sl2R.full\n",
                list(&params),
                list(&thresholds)
            )
        })
}

fn goodfn_text() -> impl Strategy<Value = String> {
    (prop::collection::vec(rational(), 1..6), -3.0f64..0.0, 0.1f64..3.0, rational(), 0.01f64..1.0, any::<bool>()).prop_map(
        |(coeffs, lo, width, c, alpha, fit)| {
            let c = c.trim_start_matches('-');
            let c = if c == "0" { "1" } else { c };
            format!(
                "[scenario]\nname = gen\npipeline = goodfn\ngroup = SL2\n\n[goodfn]\ncoeffs = {}\ndomain = {lo:?}, {:?}\nc = {c}\nalpha = {alpha:?}\nfit = {fit}\n\n[expect]\noutcome = good\n",
                coeffs.join(", "),
                lo + width
            )
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_configs_round_trip(text in prop_oneof![simulate_text(), goodfn_text()]) {
        let a = ScenarioConfig::parse(&text).unwrap();
        let b = ScenarioConfig::parse(&a.to_text()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.to_text(), b.to_text());
    }
}
