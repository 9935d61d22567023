//! Command-line front end: `run`, `check`, `sweep` and `list`.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 failed checks.

mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{OutputConfig, RunConfig};
pub use output::{fmt_value, plot_script, summary_json, sweep_csv, table_csv};

use crate::error::{Error, Result};
use crate::scenarios::{self, find_scenario, list_scenarios, parse_range, run_scenario, Override, Report, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CHECKS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "srpsim", version, about = "Selective Rydberg pumping simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its data table and summary.
    Run {
        /// Scenario name; may come from the config file instead.
        scenario: Option<String>,
        #[command(flatten)]
        common: Common,
        /// Also write a plotting script next to the CSV.
        #[arg(long)]
        plot: bool,
    },
    /// Run scenarios and compare their metrics against expected values.
    Check {
        /// Scenario names, or `all` (the default).
        scenarios: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Scan one setting of a scenario.
    Sweep {
        scenario: Option<String>,
        /// Override key to scan, e.g. `deltaJ_MHz` or `params.Omega_MHz`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, conflicts_with = "range", required_unless_present = "range", allow_hyphen_values = true)]
        values: Option<String>,
        /// Inclusive `start:stop:step`.
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
        /// Metric recorded per row; the scenario default otherwise.
        #[arg(long)]
        metric: Option<String>,
        /// Rows evaluated concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        common: Common,
    },
    /// List the scenario catalog.
    List,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file with [scenario], [params], [knobs], [integrator]
    /// and [output] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `key=value` override, applied after the config file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Deterministic execution. This is the only mode; the flag is accepted
    /// for explicitness.
    #[arg(long)]
    pub seedless: bool,
}

/// Everything a command needs after merging the config file and flags.
struct Resolved {
    scenario: Option<String>,
    overrides: Vec<Override>,
    output: OutputConfig,
}

impl Common {
    fn resolve(&self, scenario: Option<&str>) -> Result<Resolved> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut overrides = file.overrides;
        for s in &self.set {
            overrides.push(Override::parse(s)?);
        }
        let mut output = file.output;
        if let Some(dir) = &self.out {
            output.dir = Some(dir.clone());
        }
        Ok(Resolved { scenario: scenario.map(str::to_string).or(file.scenario), overrides, output })
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

fn out_dir(output: &OutputConfig) -> PathBuf {
    output.dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

/// Parse `args` (including the program name) and execute. Returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::List => {
            for e in list_scenarios() {
                println!("{:<30} {:<12} {}", e.name, e.reference, e.description);
            }
            Ok(EXIT_OK)
        }
        Command::Run { scenario, common, plot } => cmd_run(scenario.as_deref(), common, *plot),
        Command::Check { scenarios, common } => cmd_check(scenarios, common),
        Command::Sweep { scenario, param, values, range, metric, jobs, common } => {
            let values = match (values, range) {
                (Some(v), _) => parse_values(v)?,
                (None, Some(r)) => parse_range(r)?,
                (None, None) => return Err(Error::Config("--values or --range is required".into())),
            };
            cmd_sweep(scenario.as_deref(), param, values, metric.clone(), *jobs, common)
        }
    }
}

fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Config(format!("`{v}` is not a number"))))
        .collect()
}

fn write_report(report: &Report, output: &OutputConfig, plot: bool) -> Result<()> {
    let dir = out_dir(output);
    let name = &report.scenario;
    if output.csv {
        let p = output::write(&dir, &format!("{name}.csv"), &table_csv(&report.table))?;
        println!("wrote {}", p.display());
    }
    if output.summary {
        let text = serde_json::to_string_pretty(&summary_json(report))
            .map_err(|e| Error::Config(format!("cannot encode summary: {e}")))?;
        let p = output::write(&dir, &format!("{name}.summary.json"), &(text + "\n"))?;
        println!("wrote {}", p.display());
    }
    if plot || output.plot {
        let p = output::write(&dir, &format!("{name}.plot.py"), &plot_script(&format!("{name}.csv"), name))?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn require_scenario(r: &Resolved) -> Result<String> {
    r.scenario.clone().ok_or_else(|| Error::Config("no scenario given (argument or [scenario] name)".into()))
}

fn cmd_run(scenario: Option<&str>, common: &Common, plot: bool) -> Result<i32> {
    let r = common.resolve(scenario)?;
    let name = require_scenario(&r)?;
    let report = run_scenario(&name, &r.overrides)?;
    for line in output::check_lines(&report) {
        println!("{line}");
    }
    write_report(&report, &r.output, plot)?;
    Ok(EXIT_OK)
}

fn cmd_check(selection: &[String], common: &Common) -> Result<i32> {
    let r = common.resolve(None)?;
    let names: Vec<String> = if selection.is_empty() || selection.iter().any(|s| s == "all") {
        match &r.scenario {
            Some(s) if selection.is_empty() => vec![s.clone()],
            _ => scenarios::catalog().iter().map(|s| s.name.to_string()).collect(),
        }
    } else {
        selection.to_vec()
    };
    // Reject unknown names before spending time on the others.
    for n in &names {
        find_scenario(n)?;
    }
    let mut failures = Vec::new();
    let mut error_code = None;
    for n in &names {
        match run_scenario(n, &r.overrides) {
            Ok(report) => {
                for line in output::check_lines(&report) {
                    println!("{line}");
                }
                failures.extend(output::check_lines(&report).into_iter().filter(|l| l.starts_with("FAIL")));
                if common.out.is_some() || r.output.dir.is_some() {
                    write_report(&report, &r.output, false)?;
                }
            }
            Err(e) => {
                println!("ERROR {n}: {e}");
                error_code.get_or_insert(exit_code(&e));
            }
        }
    }
    if let Some(code) = error_code {
        return Ok(code);
    }
    if failures.is_empty() {
        println!("all checks passed");
        Ok(EXIT_OK)
    } else {
        println!("{} check(s) failed:", failures.len());
        for f in &failures {
            println!("  {f}");
        }
        Ok(EXIT_CHECKS)
    }
}

fn cmd_sweep(
    scenario: Option<&str>,
    param: &str,
    values: Vec<f64>,
    metric: Option<String>,
    jobs: usize,
    common: &Common,
) -> Result<i32> {
    let r = common.resolve(scenario)?;
    let name = require_scenario(&r)?;
    let spec = SweepSpec { scenario: name.clone(), param: param.to_string(), values, metric, base: r.overrides };
    let rows = scenarios::run_sweep(&spec, jobs)?;
    let metric = spec.metric.clone().unwrap_or_else(|| find_scenario(&name).map(|s| s.default_metric.to_string()).unwrap_or_default());
    let file = format!("{name}.sweep_{}.csv", sanitize(param));
    let p = output::write(&out_dir(&r.output), &file, &sweep_csv(&spec, &metric, &rows))?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    println!("{} rows, {failed} failed; wrote {}", rows.len(), p.display());
    Ok(EXIT_OK)
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' }).collect()
}
