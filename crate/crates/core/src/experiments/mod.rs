//! Reproducible verification scenarios and their reports.

mod scenarios;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::blaschke::Placement;
use crate::error::{Error, Result};
use crate::measure::max_depth_cap;
use crate::report::write_atomic;

pub use scenarios::{run_inclusions, run_lemma3, run_prop2, run_theorem1, run_theorem2};

/// Printed in every report: finite numerics gather evidence only.
pub const EVIDENCE_NOTE: &str =
    "evidence-level: checks are made at finite depth and cannot certify the infinite-depth property";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Theorem1,
    Theorem2,
    Inclusions,
    Lemma3,
    Prop2,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::Theorem1, Scenario::Theorem2, Scenario::Inclusions, Scenario::Lemma3, Scenario::Prop2];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Theorem1 => "theorem1",
            Scenario::Theorem2 => "theorem2",
            Scenario::Inclusions => "inclusions",
            Scenario::Lemma3 => "lemma3",
            Scenario::Prop2 => "prop2",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario `{s}`")))
    }
}

fn default_p() -> f64 {
    2.0
}

/// Inputs of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub placement: Placement,
    /// Deepest grid layer any step may use; defaults to the environment cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<u32>,
    /// Number of refinement steps per norm estimate, overriding the scenario default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinements: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            p: default_p(),
            seed: 0,
            placement: Placement::Radial,
            max_depth: None,
            refinements: None,
            output: None,
            csv_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p <= 16.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (1, 16], got {}", self.p)));
        }
        if let Some(r) = self.refinements {
            if !(1..=8).contains(&r) {
                return Err(Error::InvalidParameter(format!("refinements must lie in 1..=8, got {r}")));
            }
        }
        if let Some(d) = self.max_depth {
            if !(1..=60).contains(&d) {
                return Err(Error::InvalidParameter(format!("max_depth must lie in 1..=60, got {d}")));
            }
        }
        Ok(())
    }

    pub fn depth_cap(&self) -> u32 {
        self.max_depth.unwrap_or_else(max_depth_cap)
    }

    pub fn steps_or(&self, default: usize) -> usize {
        self.refinements.unwrap_or(default)
    }
}

/// A predicate over recorded numbers; [`Check::holds`] re-evaluates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predicate {
    AtLeast { value: f64, threshold: f64 },
    AtMost { value: f64, threshold: f64 },
    RatioAtLeast { numerator: f64, denominator: f64, factor: f64 },
    /// `(max - min) / max <= tolerance`.
    RelativeSpread { values: Vec<f64>, tolerance: f64 },
    /// `|value - reference| <= tolerance·|reference|`.
    RelativeError { value: f64, reference: f64, tolerance: f64 },
    StrictlyIncreasing { values: Vec<f64> },
    StrictlyDecreasing { values: Vec<f64> },
    AllAtLeast { values: Vec<f64>, threshold: f64 },
    AllAbove { values: Vec<f64>, threshold: f64 },
    VerdictIn { observed: String, allowed: Vec<String> },
    /// No `finite` verdict is followed by a `diverging` one.
    ChainConsistent { verdicts: Vec<String> },
}

impl Predicate {
    pub fn holds(&self) -> bool {
        match self {
            Predicate::AtLeast { value, threshold } => value >= threshold,
            Predicate::AtMost { value, threshold } => value <= threshold,
            Predicate::RatioAtLeast { numerator, denominator, factor } => {
                *denominator > 0.0 && numerator / denominator >= *factor
            }
            Predicate::RelativeSpread { values, tolerance } => {
                let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                !values.is_empty() && (hi == lo || (hi > 0.0 && (hi - lo) / hi <= *tolerance))
            }
            Predicate::RelativeError { value, reference, tolerance } => {
                (value - reference).abs() <= tolerance * reference.abs()
            }
            Predicate::StrictlyIncreasing { values } => values.windows(2).all(|w| w[1] > w[0]),
            Predicate::StrictlyDecreasing { values } => values.windows(2).all(|w| w[1] < w[0]),
            Predicate::AllAtLeast { values, threshold } => values.iter().all(|v| v >= threshold),
            Predicate::AllAbove { values, threshold } => values.iter().all(|v| v > threshold),
            Predicate::VerdictIn { observed, allowed } => allowed.contains(observed),
            Predicate::ChainConsistent { verdicts } => verdicts
                .iter()
                .enumerate()
                .all(|(i, v)| v != "finite" || verdicts[i + 1..].iter().all(|w| w != "diverging")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub predicate: Predicate,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, predicate: Predicate) -> Self {
        let passed = predicate.holds();
        Self { name: name.into(), predicate, passed }
    }
}

/// A labelled block of recorded numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub label: String,
    pub data: Value,
}

/// A `lambda,value` curve written next to the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    #[serde(skip)]
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    pub evidence: String,
    pub config: ExperimentConfig,
    /// Thresholds and calibration constants the checks use.
    pub parameters: Value,
    pub measurements: Vec<Measurement>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub curves: Vec<Curve>,
}

impl Report {
    pub fn new(config: &ExperimentConfig, parameters: Value) -> Self {
        Self {
            scenario: config.scenario,
            evidence: EVIDENCE_NOTE.to_string(),
            config: config.clone(),
            parameters,
            measurements: Vec::new(),
            checks: Vec::new(),
            passed: true,
            curves: Vec::new(),
        }
    }

    pub fn record(&mut self, label: impl Into<String>, data: impl Serialize) -> Result<()> {
        let data = serde_json::to_value(data).map_err(|e| Error::Format(e.to_string()))?;
        self.measurements.push(Measurement { label: label.into(), data });
        Ok(())
    }

    pub fn check(&mut self, name: impl Into<String>, predicate: Predicate) {
        let check = Check::new(name, predicate);
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn curve(&mut self, name: impl Into<String>, csv: String) {
        self.curves.push(Curve { name: name.into(), csv });
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn measurement(&self, label: &str) -> Option<&Value> {
        self.measurements.iter().find(|m| m.label == label).map(|m| &m.data)
    }

    /// Recomputes every predicate from the recorded numbers.
    pub fn reevaluate(&self) -> bool {
        self.checks.iter().all(|c| c.predicate.holds())
    }

    /// Stored flags agree with the recomputed predicates.
    pub fn is_consistent(&self) -> bool {
        self.checks.iter().all(|c| c.passed == c.predicate.holds()) && self.passed == self.reevaluate()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    /// Writes the report and its curves; curves go to `csv_dir`, or next to the
    /// report when no directory is given.
    pub fn write(&self, path: &Path, csv_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
        write_atomic(path, self.to_json()?.as_bytes())?;
        let dir = csv_dir
            .map(Path::to_path_buf)
            .or_else(|| path.parent().map(Path::to_path_buf))
            .unwrap_or_default();
        let mut written = vec![path.to_path_buf()];
        for c in &self.curves {
            let file = dir.join(format!("{}_{}.csv", self.scenario, c.name));
            write_atomic(&file, c.csv.as_bytes())?;
            written.push(file);
        }
        Ok(written)
    }
}

/// Runs the configured scenario.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    match config.scenario {
        Scenario::Theorem1 => run_theorem1(config),
        Scenario::Theorem2 => run_theorem2(config),
        Scenario::Inclusions => run_inclusions(config),
        Scenario::Lemma3 => run_lemma3(config),
        Scenario::Prop2 => run_prop2(config),
    }
}
