use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Classical fixed-step fourth-order Runge–Kutta.
    Rk4,
    /// Dormand–Prince embedded 4(5) pair with step control.
    Dp45,
}

/// How a fixed-step run is carried out when the generator is periodic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Pick the cheaper of the two by flop count.
    Auto,
    /// Step every RK4 step on the state itself.
    Direct,
    /// Build the RK4 map over one drive period once and apply its powers.
    Stroboscopic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step in µs; derived from the drive scale when `None`.
    pub step: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    /// `h ≤ 2π / (ω_max · k)`.
    pub period_divisor: f64,
    pub strategy: Strategy,
    /// Allowed drift of the norm (or trace) from its initial value.
    pub drift_tol: f64,
    /// Check the minimum eigenvalue of ρ every this many samples.
    pub positivity_every: Option<usize>,
    pub positivity_tol: f64,
    /// Smallest step the adaptive controller may take before giving up.
    pub min_step: f64,
    /// Keep the full state at every grid time.
    pub record_states: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            step: None,
            rtol: 1e-8,
            atol: 1e-10,
            period_divisor: 20.0,
            strategy: Strategy::Auto,
            drift_tol: 1e-8,
            positivity_every: None,
            positivity_tol: 1e-7,
            min_step: 1e-12,
            record_states: false,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4() -> Self {
        Self::default()
    }

    pub fn adaptive() -> Self {
        Self { method: Method::Dp45, ..Self::default() }
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.step = Some(h);
        self
    }

    pub fn with_divisor(mut self, k: f64) -> Self {
        self.period_divisor = k;
        self
    }

    pub fn with_strategy(mut self, s: Strategy) -> Self {
        self.strategy = s;
        self
    }

    pub fn with_positivity(mut self, every: usize) -> Self {
        self.positivity_every = Some(every);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |param: &str, reason: &str| {
            Err(Error::InvalidParameter { param: param.into(), reason: reason.into() })
        };
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return bad("step", "must be > 0");
            }
        }
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return bad("tolerance", "rtol and atol must be > 0");
        }
        if !(self.period_divisor > 0.0) {
            return bad("period_divisor", "must be > 0");
        }
        if !(self.drift_tol > 0.0) || !(self.positivity_tol > 0.0) {
            return bad("drift_tol", "must be > 0");
        }
        if self.positivity_every == Some(0) {
            return bad("positivity_every", "must be >= 1");
        }
        if !(self.min_step > 0.0) {
            return bad("min_step", "must be > 0");
        }
        Ok(())
    }

    /// Fixed step for a span given the fastest angular scale in the problem:
    /// `min(2π/(ω_max·k), span/1000)` unless pinned.
    pub fn fixed_step(&self, omega_max: f64, span: f64) -> f64 {
        if let Some(h) = self.step {
            return h;
        }
        let mut h = if span > 0.0 { span / 1000.0 } else { f64::INFINITY };
        if omega_max > 0.0 {
            h = h.min(TAU / (omega_max * self.period_divisor));
        }
        if !h.is_finite() {
            h = 1.0;
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_rule() {
        let c = IntegratorConfig::default();
        assert!((c.fixed_step(TAU, 1e6) - 0.05).abs() < 1e-15);
        assert!((c.fixed_step(TAU, 10.0) - 0.01).abs() < 1e-15);
        assert_eq!(c.fixed_step(0.0, 0.0), 1.0);
        assert_eq!(c.clone().with_step(0.3).fixed_step(1e9, 1.0), 0.3);
        assert!((c.with_divisor(40.0).fixed_step(TAU, 1e6) - 0.025).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        assert!(IntegratorConfig::default().with_step(0.0).validate().is_err());
        let mut c = IntegratorConfig::adaptive();
        c.rtol = 0.0;
        assert!(c.validate().is_err());
        assert!(IntegratorConfig::default().with_positivity(0).validate().is_err());
    }
}
