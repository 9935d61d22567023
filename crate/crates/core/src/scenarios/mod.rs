//! Named experiments with expected results, and the sweep engine.
//!
//! A [`Scenario`] binds a model variant, a parameter record, integrator
//! settings, scenario-specific knobs and a list of [`Check`]s. Running it
//! produces a [`Report`] holding a data table, summary metrics and the
//! outcome of every check.

mod catalog;
mod overrides;
mod sweep;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::model::{ModelVariant, PhysicalParams};

pub use catalog::catalog;
pub use overrides::{Override, ResolvedOverride};
pub use sweep::{parse_range, run_sweep, SweepRow, SweepSpec};

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A number printed with the reference results.
    Published,
    /// Follows from published numbers by arithmetic or an independent run.
    Derived,
    /// Closed-form or trivially exact.
    Analytic,
}

/// How a measured metric is compared against its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|measured - target| <= tolerance`
    Approx,
    /// `measured <= target + tolerance`
    AtMost,
    /// `measured >= target - tolerance`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub metric: String,
    pub comparison: Comparison,
    pub target: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub note: String,
}

impl Check {
    pub fn approx(metric: &str, target: f64, tolerance: f64, provenance: Provenance, note: &str) -> Self {
        Self::new(metric, Comparison::Approx, target, tolerance, provenance, note)
    }

    pub fn at_most(metric: &str, target: f64, provenance: Provenance, note: &str) -> Self {
        Self::new(metric, Comparison::AtMost, target, 0.0, provenance, note)
    }

    pub fn at_least(metric: &str, target: f64, provenance: Provenance, note: &str) -> Self {
        Self::new(metric, Comparison::AtLeast, target, 0.0, provenance, note)
    }

    fn new(metric: &str, comparison: Comparison, target: f64, tolerance: f64, provenance: Provenance, note: &str) -> Self {
        Self { metric: metric.into(), comparison, target, tolerance, provenance, note: note.into() }
    }

    pub fn passes(&self, measured: f64) -> bool {
        match self.comparison {
            Comparison::Approx => (measured - self.target).abs() <= self.tolerance,
            Comparison::AtMost => measured <= self.target + self.tolerance,
            Comparison::AtLeast => measured >= self.target - self.tolerance,
        }
    }

    /// Human-readable requirement, e.g. `0.9977 ± 0.005` or `<= 2.5e-4`.
    pub fn requirement(&self) -> String {
        let slack = if self.tolerance > 0.0 { format!(" (slack {})", fmt_num(self.tolerance)) } else { String::new() };
        match self.comparison {
            Comparison::Approx => format!("{} ± {}", fmt_num(self.target), fmt_num(self.tolerance)),
            Comparison::AtMost => format!("<= {}{slack}", fmt_num(self.target)),
            Comparison::AtLeast => format!(">= {}{slack}", fmt_num(self.target)),
        }
    }
}

fn fmt_num(x: f64) -> String {
    format!("{}", crate::scenarios::sig(x, 6))
}

/// `x` rounded to `digits` significant digits, as an `f64`.
pub(crate) fn sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    #[serde(flatten)]
    pub check: Check,
    pub measured: Option<f64>,
    pub passed: bool,
}

/// Column-oriented numeric table; the body of a scenario's CSV output.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Build from equal-length named columns.
    pub fn from_columns(cols: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n = cols.first().map_or(0, |c| c.1.len());
        if let Some((name, _)) = cols.iter().find(|c| c.1.len() != n) {
            return Err(Error::InvalidGrid(format!("column '{name}' has a different length")));
        }
        let mut t = Table::new(cols.iter().map(|c| c.0.clone()));
        for i in 0..n {
            t.push(cols.iter().map(|c| c.1[i]).collect());
        }
        Ok(t)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Fully resolved inputs of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Setup {
    pub params: PhysicalParams,
    pub knobs: BTreeMap<String, f64>,
    pub integrator: IntegratorConfig,
}

impl Setup {
    pub fn knob(&self, name: &str) -> Result<f64> {
        self.knobs.get(name).copied().ok_or_else(|| Error::Config(format!("knob `{name}` is not defined")))
    }

    pub(crate) fn count(&self, name: &str) -> Result<usize> {
        let v = self.knob(name)?;
        if !(v >= 1.0 && v.fract() == 0.0) {
            return Err(Error::Config(format!("knob `{name}` must be a positive integer, got {v}")));
        }
        Ok(v as usize)
    }
}

/// Data and summary numbers produced by a scenario runner.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub metrics: BTreeMap<String, f64>,
}

impl Outcome {
    pub(crate) fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }
}

pub(crate) type Runner = fn(&Setup) -> Result<Outcome>;

/// One catalog entry.
#[derive(Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    /// Figure or table the scenario reproduces.
    pub reference: &'static str,
    pub variant: ModelVariant,
    pub params: PhysicalParams,
    /// Scenario-specific numeric settings (sample counts, scan ranges,
    /// alternative parameter values).
    pub knobs: Vec<(&'static str, f64, &'static str)>,
    pub integrator: IntegratorConfig,
    pub checks: Vec<Check>,
    /// Metric reported by sweeps unless another is requested.
    pub default_metric: &'static str,
    pub(crate) runner: Runner,
    /// Cheap single-point evaluation used by sweeps; falls back to `runner`.
    pub(crate) point: Option<Runner>,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario").field("name", &self.name).field("variant", &self.variant).finish()
    }
}

impl Scenario {
    pub fn setup(&self) -> Setup {
        Setup {
            params: self.params.clone(),
            knobs: self.knobs.iter().map(|(k, v, _)| (k.to_string(), *v)).collect(),
            integrator: self.integrator.clone(),
        }
    }

    /// Apply overrides, returning the resolved setup, the adjusted checks and
    /// a record of every conversion made.
    pub fn resolve(&self, overrides: &[Override]) -> Result<(Setup, Vec<Check>, Vec<ResolvedOverride>)> {
        let mut setup = self.setup();
        let mut checks = self.checks.clone();
        let mut log = Vec::with_capacity(overrides.len());
        for o in overrides {
            log.push(overrides::apply(o, &mut setup, &mut checks)?);
        }
        setup.params.validate()?;
        setup.integrator.validate()?;
        Ok((setup, checks, log))
    }
}

/// One line of [`list_scenarios`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub reference: &'static str,
    pub description: &'static str,
    pub provenance: Vec<Provenance>,
}

pub fn list_scenarios() -> Vec<CatalogEntry> {
    catalog()
        .into_iter()
        .map(|s| {
            let mut provenance: Vec<Provenance> = Vec::new();
            for c in &s.checks {
                if !provenance.contains(&c.provenance) {
                    provenance.push(c.provenance);
                }
            }
            CatalogEntry { name: s.name, reference: s.reference, description: s.description, provenance }
        })
        .collect()
}

pub fn find_scenario(name: &str) -> Result<Scenario> {
    catalog().into_iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

/// Result of running a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub reference: String,
    pub variant: ModelVariant,
    pub setup: Setup,
    pub overrides: Vec<ResolvedOverride>,
    #[serde(skip)]
    pub table: Table,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<CheckOutcome>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }
}

pub fn run_scenario(name: &str, overrides: &[Override]) -> Result<Report> {
    let scenario = find_scenario(name)?;
    let (setup, checks, log) = scenario.resolve(overrides)?;
    let outcome = (scenario.runner)(&setup).map_err(|e| e.context(format!("scenario {name}")))?;
    let checks = checks
        .into_iter()
        .map(|check| {
            let measured = outcome.metrics.get(&check.metric).copied();
            let passed = measured.is_some_and(|m| check.passes(m));
            CheckOutcome { check, measured, passed }
        })
        .collect();
    Ok(Report {
        scenario: scenario.name.into(),
        reference: scenario.reference.into(),
        variant: scenario.variant,
        setup,
        overrides: log,
        table: outcome.table,
        metrics: outcome.metrics,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_thirteen_unique_entries() {
        let names: Vec<&str> = list_scenarios().iter().map(|e| e.name).collect();
        let expected = [
            "fig2_srp",
            "fig2_vdw",
            "fig3a_srp_deviation",
            "fig3b_antiblockade_deviation",
            "fig4_defect",
            "fig5_double_excitation",
            "table1_decay",
            "fig6_optimal_omega",
            "fig8_ground_blockade",
            "fig9_dissipative",
            "fig11_full_steady",
            "fig13_recycling",
            "appA_engineered_decay",
        ];
        assert_eq!(names, expected);
    }

    #[test]
    fn every_entry_cites_and_tags() {
        for s in catalog() {
            assert!(!s.reference.is_empty(), "{}", s.name);
            assert!(!s.checks.is_empty(), "{}", s.name);
            assert!(s.setup().params.validate().is_ok(), "{}", s.name);
            assert!(s.integrator.validate().is_ok(), "{}", s.name);
        }
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(matches!(find_scenario("nosuch"), Err(Error::UnknownScenario(_))));
        assert!(matches!(run_scenario("nosuch", &[]), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn comparisons() {
        let c = Check::approx("x", 1.0, 0.1, Provenance::Analytic, "");
        assert!(c.passes(1.05) && !c.passes(1.2));
        assert!(Check::at_most("x", 1.0, Provenance::Analytic, "").passes(1.0));
        assert!(!Check::at_least("x", 1.0, Provenance::Analytic, "").passes(0.99));
    }

    #[test]
    fn significant_digits() {
        assert_eq!(sig(0.123456789123, 9), 0.123456789);
        assert_eq!(sig(-98765.4321, 3), -98800.0);
        assert_eq!(sig(0.0, 9), 0.0);
    }
}
