use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;

/// One acceptance check: a measured number, the rule it was held to and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    /// The rule in words, e.g. "slope = -0.5 ± 0.1".
    pub rule: String,
    pub measured: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// r² of the fit behind `measured`, when there is one.
    pub r2: Option<f64>,
    pub pass: bool,
}

impl Rule {
    fn new(name: &str, rule: String, measured: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let pass = measured.is_finite() && lower.is_none_or(|l| measured >= l) && upper.is_none_or(|u| measured <= u);
        Self { name: name.to_string(), rule, measured, lower, upper, r2: None, pass }
    }

    /// |measured − target| ≤ tol.
    pub fn within(name: &str, measured: f64, target: f64, tol: f64) -> Self {
        Self::new(name, format!("{target} ± {tol}"), measured, Some(target - tol), Some(target + tol))
    }

    pub fn at_most(name: &str, measured: f64, max: f64) -> Self {
        Self::new(name, format!("≤ {max}"), measured, None, Some(max))
    }

    pub fn at_least(name: &str, measured: f64, min: f64) -> Self {
        Self::new(name, format!("≥ {min}"), measured, Some(min), None)
    }

    pub fn between(name: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Self::new(name, format!("∈ [{lo}, {hi}]"), measured, Some(lo), Some(hi))
    }

    pub fn with_r2(mut self, r2: f64) -> Self {
        self.r2 = Some(r2);
        self
    }

    pub fn line(&self) -> String {
        let r2 = self.r2.map(|r| format!(" (r² = {r:.4})")).unwrap_or_default();
        format!(
            "[{}] {}: measured {:.6e}, rule {}{}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.rule,
            r2
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub rules: Vec<Rule>,
    /// Further measured values that are reported but not checked.
    pub values: BTreeMap<String, f64>,
    /// Names of the CSV tables written next to the report.
    pub tables: Vec<String>,
    pub wall_clock_seconds: f64,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("experiment: {}\n", self.experiment);
        for r in &self.rules {
            let _ = writeln!(s, "{}", r.line());
        }
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k} = {v:.6e}");
        }
        let _ = writeln!(s, "wall clock: {:.1} s", self.wall_clock_seconds);
        let _ = writeln!(s, "overall: {}", if self.passed { "PASS" } else { "FAIL" });
        s
    }
}

/// A named file produced by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Report plus the CSV tables behind it.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub artifacts: Vec<Artifact>,
}

/// Writes `contents` to a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `out-dir/<experiment>/<timestamp>/{report.json, *.csv, summary.txt}`
/// and returns the run directory.
pub fn write_outputs(out_dir: &Path, output: &ExperimentOutput) -> Result<PathBuf> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
    let base = out_dir.join(&output.report.experiment);
    fs::create_dir_all(&base)?;
    let mut dir = base.join(&stamp);
    let mut k = 1;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{k}"));
        k += 1;
    }
    fs::create_dir_all(&dir)?;
    for a in &output.artifacts {
        write_atomic(&dir.join(&a.name), a.contents.as_bytes())?;
    }
    write_atomic(&dir.join("report.json"), serde_json::to_string_pretty(&output.report)?.as_bytes())?;
    write_atomic(&dir.join("summary.txt"), output.report.summary().as_bytes())?;
    Ok(dir)
}
