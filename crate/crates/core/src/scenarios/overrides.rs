use serde::Serialize;

use super::{Check, Setup};
use crate::dynamics::{Method, Strategy};
use crate::error::{Error, Result};
use crate::model::{mhz, PhysicalParams, UnitKind};

/// A `key = value` override as written by the user.
///
/// Keys:
/// - `params.<Key>`: a parameter in internal units (rad/µs, 1/µs, µm, ms).
/// - `params.<Key>_MHz`: an angular parameter quoted as X/2π in MHz.
/// - `params.<Key>_rate_MHz`: a rate quoted in MHz without 2π (1/µs).
/// - `knobs.<name>` or a bare knob name: a scenario setting.
/// - `integrator.<field>`: method, strategy, step, rtol, atol,
///   period_divisor, drift_tol, positivity_every, positivity_tol, min_step.
/// - `checks.<metric>.tolerance` or `checks.<metric>.target`.
///
/// A bare key that is not a knob is tried as a parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Override {
    pub key: String,
    pub value: String,
}

impl Override {
    pub fn new(key: impl Into<String>, value: impl ToString) -> Self {
        Self { key: key.into(), value: value.to_string() }
    }

    /// Parse `key=value`.
    pub fn parse(s: &str) -> Result<Self> {
        let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("expected key=value, got `{s}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::Config(format!("expected key=value, got `{s}`")));
        }
        Ok(Self::new(k, v))
    }
}

/// What an override did: the raw input and the value actually stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedOverride {
    pub key: String,
    pub raw: String,
    pub target: String,
    pub value: Option<f64>,
    pub unit: String,
}

fn number(o: &Override) -> Result<f64> {
    let v: f64 = o.value.parse().map_err(|_| Error::Config(format!("`{}`: `{}` is not a number", o.key, o.value)))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("`{}` must be finite", o.key)));
    }
    Ok(v)
}

fn done(o: &Override, target: String, value: Option<f64>, unit: &str) -> Result<ResolvedOverride> {
    Ok(ResolvedOverride { key: o.key.clone(), raw: o.value.clone(), target, value, unit: unit.into() })
}

pub(super) fn apply(o: &Override, setup: &mut Setup, checks: &mut [Check]) -> Result<ResolvedOverride> {
    let key = o.key.as_str();
    if let Some(rest) = key.strip_prefix("params.") {
        return param(o, rest, setup);
    }
    if let Some(rest) = key.strip_prefix("knobs.") {
        return knob(o, rest, setup);
    }
    if let Some(rest) = key.strip_prefix("integrator.") {
        return integrator(o, rest, setup);
    }
    if let Some(rest) = key.strip_prefix("checks.") {
        return check(o, rest, checks);
    }
    if setup.knobs.contains_key(key) {
        return knob(o, key, setup);
    }
    param(o, key, setup).map_err(|_| Error::Config(format!("unknown key `{key}`")))
}

fn param(o: &Override, key: &str, setup: &mut Setup) -> Result<ResolvedOverride> {
    let unknown = || Error::Config(format!("unknown parameter `{key}`"));
    let v = number(o)?;
    let (name, value) = if let Some(base) = key.strip_suffix("_rate_MHz") {
        match PhysicalParams::unit_kind(base).map_err(|_| unknown())? {
            UnitKind::Rate => (base, v),
            _ => return Err(Error::Config(format!("`{key}`: `{base}` is not a rate; use `{base}_MHz`"))),
        }
    } else if let Some(base) = key.strip_suffix("_MHz") {
        match PhysicalParams::unit_kind(base).map_err(|_| unknown())? {
            UnitKind::Angular => (base, mhz(v)),
            _ => return Err(Error::Config(format!("`{key}`: `{base}` is not an angular frequency"))),
        }
    } else {
        PhysicalParams::unit_kind(key).map_err(|_| unknown())?;
        (key, v)
    };
    setup.params.set(name, value)?;
    let unit = PhysicalParams::unit_kind(name)?.unit();
    done(o, format!("params.{name}"), Some(value), unit)
}

fn knob(o: &Override, key: &str, setup: &mut Setup) -> Result<ResolvedOverride> {
    let v = number(o)?;
    match setup.knobs.get_mut(key) {
        Some(slot) => *slot = v,
        None => return Err(Error::Config(format!("unknown knob `{key}`"))),
    }
    done(o, format!("knobs.{key}"), Some(v), "")
}

fn integrator(o: &Override, field: &str, setup: &mut Setup) -> Result<ResolvedOverride> {
    let cfg = &mut setup.integrator;
    let target = format!("integrator.{field}");
    match field {
        "method" => {
            cfg.method = match o.value.as_str() {
                "rk4" => Method::Rk4,
                "dp45" | "adaptive" => Method::Dp45,
                other => return Err(Error::Config(format!("unknown method `{other}`"))),
            };
            return done(o, target, None, "");
        }
        "strategy" => {
            cfg.strategy = match o.value.as_str() {
                "auto" => Strategy::Auto,
                "direct" => Strategy::Direct,
                "stroboscopic" => Strategy::Stroboscopic,
                other => return Err(Error::Config(format!("unknown strategy `{other}`"))),
            };
            return done(o, target, None, "");
        }
        _ => {}
    }
    let v = number(o)?;
    let unit = match field {
        "step" => {
            cfg.step = Some(v);
            "us"
        }
        "rtol" => {
            cfg.rtol = v;
            ""
        }
        "atol" => {
            cfg.atol = v;
            ""
        }
        "period_divisor" => {
            cfg.period_divisor = v;
            ""
        }
        "drift_tol" => {
            cfg.drift_tol = v;
            ""
        }
        "positivity_every" => {
            if !(v >= 1.0 && v.fract() == 0.0) {
                return Err(Error::Config("positivity_every must be a positive integer".into()));
            }
            cfg.positivity_every = Some(v as usize);
            ""
        }
        "positivity_tol" => {
            cfg.positivity_tol = v;
            ""
        }
        "min_step" => {
            cfg.min_step = v;
            "us"
        }
        _ => return Err(Error::Config(format!("unknown integrator setting `{field}`"))),
    };
    done(o, target, Some(v), unit)
}

fn check(o: &Override, rest: &str, checks: &mut [Check]) -> Result<ResolvedOverride> {
    let (metric, field) =
        rest.rsplit_once('.').ok_or_else(|| Error::Config(format!("expected checks.<metric>.<field>, got `{}`", o.key)))?;
    let v = number(o)?;
    let mut hit = false;
    for c in checks.iter_mut().filter(|c| c.metric == metric) {
        match field {
            "tolerance" => c.tolerance = v,
            "target" => c.target = v,
            _ => return Err(Error::Config(format!("unknown check field `{field}`"))),
        }
        hit = true;
    }
    if !hit {
        return Err(Error::Config(format!("no check on metric `{metric}`")));
    }
    done(o, o.key.clone(), Some(v), "")
}
