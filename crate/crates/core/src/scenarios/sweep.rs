use rayon::prelude::*;
use serde::Serialize;

use super::{find_scenario, Override};
use crate::error::{Error, Result};

/// A one-parameter scan of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: String,
    /// Override key the values are written to, e.g. `deltaJ_MHz` or
    /// `params.Omega_MHz`.
    pub param: String,
    pub values: Vec<f64>,
    /// Metric reported per row; the scenario default when `None`.
    pub metric: Option<String>,
    /// Overrides applied before the swept one.
    pub base: Vec<Override>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub metric: Option<f64>,
    /// `ok`, or the error that stopped this row.
    pub status: String,
}

/// Evaluate `spec` row by row with at most `jobs` rows in flight. Rows come
/// back in input order; a failing row records its error and the sweep goes
/// on. Bad specs (unknown scenario, key or metric) are rejected up front.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    let scenario = find_scenario(&spec.scenario)?;
    if let Some(v) = spec.values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Config(format!("sweep value {v} is not finite")));
    }
    let metric = spec.metric.clone().unwrap_or_else(|| scenario.default_metric.to_string());
    // Validate the key and base overrides once, with a representative value.
    let mut probe = spec.base.clone();
    probe.push(Override::new(spec.param.clone(), spec.values.first().copied().unwrap_or(0.0)));
    scenario.resolve(&probe)?;
    let runner = scenario.point.unwrap_or(scenario.runner);
    if scenario.point.is_some() && !point_metrics(scenario.name).contains(&metric.as_str()) {
        return Err(Error::Config(format!("metric `{metric}` is not reported by {} sweeps", scenario.name)));
    }
    let row = |&value: &f64| -> SweepRow {
        let mut ov = spec.base.clone();
        ov.push(Override::new(spec.param.clone(), value));
        let result = scenario.resolve(&ov).and_then(|(setup, _, _)| runner(&setup));
        match result {
            Ok(out) => match out.metrics.get(&metric) {
                Some(&m) => SweepRow { value, metric: Some(m), status: "ok".into() },
                None => SweepRow { value, metric: None, status: format!("metric `{metric}` not reported") },
            },
            Err(e) => SweepRow { value, metric: None, status: e.to_string() },
        }
    };
    let jobs = jobs.max(1);
    if jobs == 1 {
        return Ok(spec.values.iter().map(row).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| spec.values.par_iter().map(row).collect()))
}

/// Metrics produced by the single-point evaluators.
fn point_metrics(scenario: &str) -> &'static [&'static str] {
    match scenario {
        "fig3a_srp_deviation" | "fig3b_antiblockade_deviation" | "fig6_optimal_omega" => &["gate_fidelity", "t_g_us"],
        _ => &[],
    }
}

/// `start:stop:step` inclusive of `stop` up to rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("expected start:stop:step, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| super::sig(start + i as f64 * step, 12)).collect())
}
