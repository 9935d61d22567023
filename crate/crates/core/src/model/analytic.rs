//! Closed-form helper quantities.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use super::params::PhysicalParams;
use crate::error::{Error, Result};

/// Share of the short-lived state's decay into |0> and |1>.
pub const SHORT_BRANCHING: (f64, f64) = (0.6, 0.4);

/// Effective |r> → |0>, |1> rates `(0.6, 0.4) · 4Ω_p²/Γ` after adiabatic
/// elimination of the short-lived state.
pub fn engineered_rates(omega_p: f64, gamma: f64) -> Result<(f64, f64)> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidParameter { param: "Gamma".into(), reason: "must be > 0".into() });
    }
    let total = 4.0 * omega_p * omega_p / gamma;
    Ok((SHORT_BRANCHING.0 * total, SHORT_BRANCHING.1 * total))
}

/// `J = C3 / R³`
pub fn dipole_coupling_from_distance(c3: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter { param: "R".into(), reason: "distance must be > 0".into() });
    }
    Ok(c3 / r.powi(3))
}

/// Inverse of [`dipole_coupling_from_distance`].
pub fn distance_from_coupling(c3: f64, j: f64) -> Result<f64> {
    if !(j > 0.0) || !(c3 > 0.0) {
        return Err(Error::InvalidParameter { param: "J".into(), reason: "C3 and J must be > 0".into() });
    }
    Ok((c3 / j).cbrt())
}

/// Shift of the upper dressed pair level caused by a Förster defect δ:
/// the exact `|√2J - (δ + √(8J² + δ²))/2|` and the small-δ/J expansion
/// `δ/2 + √2 δ²/(16 J)`.
pub fn foster_deviation(j: f64, delta: f64) -> Result<(f64, f64)> {
    if j == 0.0 {
        return Err(Error::InvalidParameter { param: "J".into(), reason: "must be nonzero".into() });
    }
    if delta < 0.0 {
        return Err(Error::InvalidParameter { param: "delta_defect".into(), reason: "must be >= 0".into() });
    }
    let exact = (SQRT_2 * j - (delta + (8.0 * j * j + delta * delta).sqrt()) / 2.0).abs();
    let approx = delta / 2.0 + SQRT_2 * delta * delta / (16.0 * j);
    Ok((exact, approx))
}

/// How well a parameter set satisfies Δ = √2J ≫ Ω_s ≫ Ω.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrpConditionReport {
    /// Δ - √2 J in rad/µs.
    pub resonance_residual: f64,
    /// Δ / Ω_s
    pub detuning_ratio: f64,
    /// Ω_s / Ω
    pub dressing_ratio: f64,
    pub warnings: Vec<String>,
}

impl SrpConditionReport {
    pub fn ok(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Minimum accepted ratio for each "≫" in the hierarchy.
pub const HIERARCHY_RATIO: f64 = 10.0;

pub fn srp_condition_report(p: &PhysicalParams) -> SrpConditionReport {
    let delta = p.delta.unwrap_or(0.0);
    let j = p.j.unwrap_or(0.0);
    let omega = p.omega.unwrap_or(0.0);
    let omega_s = p.omega_s.or(p.omega_blue).or(p.omega_red).unwrap_or(0.0);
    let residual = delta - SQRT_2 * j;
    let ratio = |a: f64, b: f64| if b == 0.0 { f64::INFINITY } else { a.abs() / b.abs() };
    let detuning_ratio = ratio(delta, omega_s);
    let dressing_ratio = ratio(omega_s, omega);
    let mut warnings = Vec::new();
    let scale = delta.abs().max(SQRT_2 * j.abs());
    if residual.abs() > 1e-6 * scale.max(f64::MIN_POSITIVE) {
        warnings.push(format!("detuning misses the dressed pair resonance by {residual:.4} rad/us"));
    }
    if detuning_ratio < HIERARCHY_RATIO {
        warnings.push(format!("Delta/Omega_s = {detuning_ratio:.3} < {HIERARCHY_RATIO}"));
    }
    if dressing_ratio < HIERARCHY_RATIO {
        warnings.push(format!("Omega_s/Omega = {dressing_ratio:.3} < {HIERARCHY_RATIO}"));
    }
    SrpConditionReport { resonance_residual: residual, detuning_ratio, dressing_ratio, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::{mhz, C3_MEASURED};
    use std::f64::consts::TAU;

    #[test]
    fn engineered_total_matches_quoted_rate() {
        let (g0, g1) = engineered_rates(1.354, 1.0 / 0.02569).unwrap();
        let total = g0 + g1;
        assert!((total - 0.1884).abs() < 5e-4, "{total}");
        assert!((total - mhz(0.03)).abs() / mhz(0.03) < 2e-3);
        assert_eq!(engineered_rates(0.0, 38.93).unwrap(), (0.0, 0.0));
        let (d0, d1) = engineered_rates(2.0 * 1.354, 1.0 / 0.02569).unwrap();
        assert!((d0 / g0 - 4.0).abs() < 1e-12 && (d1 / g1 - 4.0).abs() < 1e-12);
        assert!(engineered_rates(1.0, 0.0).is_err());
    }

    #[test]
    fn coupling_vs_distance() {
        let j = dipole_coupling_from_distance(C3_MEASURED, 2.5).unwrap();
        assert!((j / TAU - 152.96).abs() < 0.005);
        let j = dipole_coupling_from_distance(C3_MEASURED, 10.0).unwrap();
        assert!((j / TAU - 2.39).abs() < 1e-12);
        let r = distance_from_coupling(C3_MEASURED, mhz(50.0)).unwrap();
        assert!((r - 3.6297).abs() < 1e-3, "{r}");
        // quoted distances bracket ΔJ = +1.7 and -2.25 MHz
        let hi = dipole_coupling_from_distance(C3_MEASURED, 3.589).unwrap() / TAU - 50.0;
        let lo = dipole_coupling_from_distance(C3_MEASURED, 3.685).unwrap() / TAU - 50.0;
        assert!((hi - 1.7).abs() < 0.02 && (lo + 2.25).abs() < 0.02, "{hi} {lo}");
        assert!(dipole_coupling_from_distance(C3_MEASURED, 0.0).is_err());
    }

    #[test]
    fn foster_deviation_values() {
        assert_eq!(foster_deviation(1.0, 0.0).unwrap(), (0.0, 0.0));
        let (e, a) = foster_deviation(mhz(50.0), mhz(8.5)).unwrap();
        assert!((e / TAU - 4.3776).abs() < 5e-4, "{}", e / TAU);
        assert!((a / TAU - 4.378).abs() < 5e-4, "{}", a / TAU);
        assert!((e - a).abs() / e < 1e-3);
        assert!(foster_deviation(0.0, 1.0).is_err());
    }

    #[test]
    fn foster_expansion_converges() {
        let delta = 1.0;
        let gaps: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|r| {
                let (e, a) = foster_deviation(r * delta, delta).unwrap();
                (e - a).abs()
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
    }

    #[test]
    fn condition_report_cases() {
        let j = mhz(50.0);
        let mut p = PhysicalParams::new()
            .with("Omega", mhz(0.02))
            .with("Omega_s", mhz(1.0))
            .with("J", j)
            .with("Delta", SQRT_2 * j);
        let r = srp_condition_report(&p);
        assert!(r.ok(), "{:?}", r.warnings);
        assert!(r.resonance_residual.abs() < 1e-12);
        assert!((r.detuning_ratio - 70.71).abs() < 0.01);
        assert!((r.dressing_ratio - 50.0).abs() < 1e-9);

        p.set("Delta", 0.0).unwrap();
        let r = srp_condition_report(&p);
        assert!((r.resonance_residual + SQRT_2 * j).abs() < 1e-9);
        assert!(!r.ok());

        let p = PhysicalParams::new()
            .with("Omega", mhz(1.0))
            .with("Omega_s", mhz(1.0))
            .with("J", j)
            .with("Delta", SQRT_2 * j);
        let r = srp_condition_report(&p);
        assert!((r.dressing_ratio - 1.0).abs() < 1e-12);
        assert!(!r.ok());
    }
}
