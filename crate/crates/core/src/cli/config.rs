use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scenarios::Override;

/// Contents of a run configuration file.
///
/// Line-based `key = value` under `[scenario]`, `[params]`, `[knobs]`,
/// `[integrator]` and `[output]` headers; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub overrides: Vec<Override>,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub csv: bool,
    pub summary: bool,
    pub plot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, csv: true, summary: true, plot: false }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| Error::Config(format!("line {}: {msg}", n + 1));
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| at(format!("bad section header `{line}`")))?.trim();
                if !matches!(name, "scenario" | "params" | "knobs" | "integrator" | "output") {
                    return Err(at(format!("unknown section `[{name}]`")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| at(format!("expected key = value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim().trim_matches('"'));
            if key.is_empty() || value.is_empty() {
                return Err(at(format!("expected key = value, got `{line}`")));
            }
            match section.as_deref() {
                None => return Err(at("entry before any section header".into())),
                Some("scenario") => match key {
                    "name" => cfg.scenario = Some(value.to_string()),
                    _ => return Err(at(format!("unknown scenario setting `{key}`"))),
                },
                Some("output") => {
                    let flag = || parse_bool(value).ok_or_else(|| at(format!("`{key}` expects true or false")));
                    match key {
                        "dir" => cfg.output.dir = Some(PathBuf::from(value)),
                        "csv" => cfg.output.csv = flag()?,
                        "summary" => cfg.output.summary = flag()?,
                        "plot" => cfg.output.plot = flag()?,
                        _ => return Err(at(format!("unknown output setting `{key}`"))),
                    }
                }
                Some(s) => cfg.overrides.push(Override::new(format!("{s}.{key}"), value)),
            }
        }
        Ok(cfg)
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_sections() {
        let cfg = RunConfig::parse(
            "# demo\n[scenario]\nname = fig9_dissipative\n\n[params]\ngamma_flat = 0.01  # plain rate\nOmega_MHz = 0.02\n\
             [knobs]\nsamples = 10\n[integrator]\nmethod = rk4\n[output]\ndir = \"res\"\nplot = true\ncsv = no\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario.as_deref(), Some("fig9_dissipative"));
        let keys: Vec<&str> = cfg.overrides.iter().map(|o| o.key.as_str()).collect();
        assert_eq!(keys, ["params.gamma_flat", "params.Omega_MHz", "knobs.samples", "integrator.method"]);
        assert_eq!(cfg.output.dir.as_deref(), Some(Path::new("res")));
        assert!(cfg.output.plot && !cfg.output.csv && cfg.output.summary);
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["x = 1", "[nosuch]\n", "[params]\nnovalue", "[output]\nplot = maybe", "[scenario]\nfoo = 1", "[params\n"] {
            assert!(RunConfig::parse(bad).is_err(), "{bad:?}");
        }
    }
}
