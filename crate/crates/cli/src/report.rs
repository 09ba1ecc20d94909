//! Cross-scenario summary and plot tables from written artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::pipeline::ScenarioResult;
use crate::CliError;

pub const SUMMARY_FILE: &str = "report.summary.txt";
pub const DISTANCE_FILE: &str = "report.distance.tsv";
pub const SYSTOLE_FILE: &str = "report.systole.tsv";

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub summary: String,
    pub distance: String,
    pub systole: String,
    pub all_pass: bool,
}

/// Scenario JSON artifacts in `dir`, sorted by file name.
fn artifacts(dir: &Path) -> Result<Vec<(PathBuf, ScenarioResult)>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|_| CliError::MissingArtifact(dir.display().to_string()))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = vec![];
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        // Unrelated JSON files are skipped.
        if let Ok(r) = serde_json::from_str::<ScenarioResult>(&text) {
            out.push((p, r));
        }
    }
    if out.is_empty() {
        return Err(CliError::MissingArtifact(dir.display().to_string()));
    }
    Ok(out)
}

/// Builds the report from the artifacts in `dir` and writes its three files
/// next to them.
pub fn emit_report(dir: &Path) -> Result<Report, CliError> {
    let results = artifacts(dir)?;
    let mut summary = String::new();
    let mut distance = String::from("scenario\ti\tparam\tcheck\tdistance\n");
    let mut systole = String::from("scenario\tthreshold\tsup_mass\n");
    for (_, r) in &results {
        let _ = writeln!(summary, "{}", r.summary);
        for (i, t, c, d) in &r.plot.distance {
            let _ = writeln!(distance, "{}\t{i}\t{t}\t{c}\t{d}", r.scenario);
        }
        for (t, m) in &r.plot.systole {
            let _ = writeln!(systole, "{}\t{t}\t{m}", r.scenario);
        }
    }
    let passed = results.iter().filter(|r| r.1.matched()).count();
    let _ = writeln!(summary, "{passed}/{} scenarios match their expected outcome", results.len());
    for (name, text) in [(SUMMARY_FILE, &summary), (DISTANCE_FILE, &distance), (SYSTOLE_FILE, &systole)] {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(Report { all_pass: passed == results.len(), summary, distance, systole })
}
