use std::f64::consts::TAU;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// How a parameter value is expressed, used for unit conversion at the
/// configuration boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    /// Rabi frequency, detuning or coupling in rad/µs. Quoted as X/2π in MHz.
    Angular,
    /// Decay rate in 1/µs, quoted without a 2π factor.
    Rate,
    /// Distance in µm.
    Length,
    /// Lifetime in ms.
    LifetimeMs,
    /// Dimensionless fraction in [0, 1].
    Fraction,
    /// Dipole coefficient in rad·µm³/µs.
    DipoleCoefficient,
}

impl UnitKind {
    pub fn unit(self) -> &'static str {
        match self {
            UnitKind::Angular => "rad/us",
            UnitKind::Rate => "1/us",
            UnitKind::Length => "um",
            UnitKind::LifetimeMs => "ms",
            UnitKind::Fraction => "1",
            UnitKind::DipoleCoefficient => "rad um^3/us",
        }
    }
}

macro_rules! params {
    ($( $field:ident : $key:literal, $kind:ident, $doc:literal; )*) => {
        /// Every scalar model parameter in one record. Unset values are
        /// `None`; builders report which parameter a variant is missing.
        #[derive(Debug, Clone, Default, PartialEq, Serialize)]
        pub struct PhysicalParams {
            $( #[doc = $doc] #[serde(rename = $key, skip_serializing_if = "Option::is_none")] pub $field: Option<f64>, )*
        }

        impl PhysicalParams {
            /// `(key, unit kind)` for every parameter, in declaration order.
            pub const KEYS: &'static [(&'static str, UnitKind)] = &[ $( ($key, UnitKind::$kind), )* ];

            pub fn get(&self, key: &str) -> Result<Option<f64>> {
                match key {
                    $( $key => Ok(self.$field), )*
                    _ => Err(unknown_key(key)),
                }
            }

            pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
                match key {
                    $( $key => { self.$field = Some(value); Ok(()) } )*
                    _ => Err(unknown_key(key)),
                }
            }

            pub fn clear(&mut self, key: &str) -> Result<()> {
                match key {
                    $( $key => { self.$field = None; Ok(()) } )*
                    _ => Err(unknown_key(key)),
                }
            }
        }
    };
}

params! {
    omega: "Omega", Angular, "Resonant |1> <-> |r> drive.";
    omega_blue: "Omega_B", Angular, "Blue-detuned |0> <-> |r> drive; falls back to `Omega_s`.";
    omega_red: "Omega_R", Angular, "Red-detuned |0> <-> |r> drive; falls back to `Omega_s`.";
    omega_s: "Omega_s", Angular, "Common strength of the detuned |0> <-> |r> drives.";
    omega_w: "Omega_w", Angular, "Weak ground-state |0> <-> |1> coupling.";
    omega_p: "Omega_p", Rate, "Drive from |r> to the short-lived state (engineered decay).";
    omega_pump: "Omega_b", Rate, "Recycling pump from the leakage level.";
    delta: "Delta", Angular, "Detuning of the |0> <-> |r> drives.";
    j: "J", Angular, "Resonant dipole-dipole exchange strength.";
    delta_defect: "delta_defect", Angular, "Förster defect of the exchanged pair states.";
    u_vdw: "U_vdw", Angular, "Van der Waals shift of |rr>.";
    c3: "C3", DipoleCoefficient, "Dipole coefficient, J = C3 / R^3.";
    distance: "R", Length, "Interatomic distance.";
    gamma_short: "Gamma", Rate, "Decay rate of the short-lived state.";
    tau_r: "tau_r", LifetimeMs, "Lifetime of |r>.";
    tau_p1: "tau_p1", LifetimeMs, "Lifetime of |p'>.";
    tau_p2: "tau_p2", LifetimeMs, "Lifetime of |p''>.";
    lambda: "lambda", Fraction, "Fraction of |r> decay that returns to the computational basis.";
    gamma_split: "gamma_split", Fraction, "Share of the returning |r> decay that goes to |0>.";
    gamma_flat: "gamma_flat", Rate, "Total |r> decay rate of the effective dissipative model, split evenly.";
    branch0: "branch0", Fraction, "Fraction of each natural Rydberg decay going to |0>.";
    branch1: "branch1", Fraction, "Fraction of each natural Rydberg decay going to |1>; defaults to 1 - branch0.";
    stark_single: "stark_single", Angular, "Antiblockade model: per-atom light-shift compensation.";
    stark_pair: "stark_pair", Angular, "Antiblockade model: extra static shift on |11>.";
}

fn unknown_key(key: &str) -> Error {
    Error::InvalidParameter { param: key.to_string(), reason: "unknown parameter".into() }
}

/// `2π · mhz`, converting a frequency quoted as X/2π in MHz to rad/µs.
pub fn mhz(mhz: f64) -> f64 {
    TAU * mhz
}

/// Measured dipole coefficient, C3/2π = 2.39 GHz µm³, in rad·µm³/µs.
pub const C3_MEASURED: f64 = TAU * 2390.0;
/// Lifetimes of |r>, |p'>, |p''> in ms.
pub const TAU_R_MS: f64 = 0.2;
pub const TAU_P1_MS: f64 = 0.48;
pub const TAU_P2_MS: f64 = 0.13;
/// Lifetime of the short-lived 5P state in µs (25.69 ns).
pub const SHORT_LIFETIME_US: f64 = 0.02569;

impl PhysicalParams {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style setter that panics on an unknown key; for literals.
    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.set(key, value).expect("known parameter key");
        self
    }

    pub fn unit_kind(key: &str) -> Result<UnitKind> {
        Self::KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, u)| *u)
            .ok_or_else(|| unknown_key(key))
    }

    /// Fetch a parameter that `context` needs.
    pub fn require(&self, key: &str, context: &str) -> Result<f64> {
        self.get(key)?.ok_or_else(|| Error::MissingParameter {
            param: key.to_string(),
            context: context.to_string(),
        })
    }

    pub fn blue(&self, context: &str) -> Result<f64> {
        self.omega_blue.or(self.omega_s).ok_or_else(|| Error::MissingParameter {
            param: "Omega_B (or Omega_s)".into(),
            context: context.into(),
        })
    }

    pub fn red(&self, context: &str) -> Result<f64> {
        self.omega_red.or(self.omega_s).ok_or_else(|| Error::MissingParameter {
            param: "Omega_R (or Omega_s)".into(),
            context: context.into(),
        })
    }

    /// Natural decay rate 1/τ in 1/µs for a lifetime given in ms.
    pub fn rate_from_lifetime_ms(tau_ms: f64) -> f64 {
        1.0 / (tau_ms * 1e3)
    }

    /// `1/τ_r`; the lifetime defaults to the measured value.
    pub fn gamma_r(&self) -> f64 {
        Self::rate_from_lifetime_ms(self.tau_r.unwrap_or(TAU_R_MS))
    }

    /// Lifetimes of (r, p', p'') in ms with measured defaults.
    pub fn lifetimes_ms(&self) -> [f64; 3] {
        [
            self.tau_r.unwrap_or(TAU_R_MS),
            self.tau_p1.unwrap_or(TAU_P1_MS),
            self.tau_p2.unwrap_or(TAU_P2_MS),
        ]
    }

    /// `(branch0, branch1)` with `branch1` defaulting to `1 - branch0`.
    pub fn branching(&self, context: &str) -> Result<(f64, f64)> {
        let b0 = self.require("branch0", context)?;
        let b1 = self.branch1.unwrap_or(1.0 - b0);
        Ok((b0, b1))
    }

    /// Check the record's invariants: nonnegative rates and Rabi magnitudes,
    /// fractions in [0, 1], positive distance and lifetimes.
    pub fn validate(&self) -> Result<()> {
        for &(key, kind) in Self::KEYS {
            let Some(v) = self.get(key)? else { continue };
            if !v.is_finite() {
                return Err(invalid(key, "must be finite"));
            }
            let nonneg = matches!(
                key,
                "Omega" | "Omega_B" | "Omega_R" | "Omega_s" | "Omega_w" | "Omega_p" | "Omega_b"
                    | "Gamma" | "gamma_flat" | "C3"
            );
            if nonneg && v < 0.0 {
                return Err(invalid(key, "must be >= 0"));
            }
            match kind {
                UnitKind::Fraction if !(0.0..=1.0).contains(&v) => {
                    return Err(invalid(key, "must lie in [0, 1]"))
                }
                UnitKind::Length | UnitKind::LifetimeMs if v <= 0.0 => {
                    return Err(invalid(key, "must be > 0"))
                }
                _ => {}
            }
        }
        if let (Some(b0), Some(b1)) = (self.branch0, self.branch1) {
            if b0 + b1 > 1.0 + 1e-12 {
                return Err(invalid("branch1", "branch0 + branch1 exceeds 1"));
            }
        }
        Ok(())
    }

    /// Resolved `(key, value, unit)` rows for every set parameter.
    pub fn resolved(&self) -> Vec<(&'static str, f64, UnitKind)> {
        Self::KEYS
            .iter()
            .filter_map(|&(k, u)| self.get(k).ok().flatten().map(|v| (k, v, u)))
            .collect()
    }
}

fn invalid(key: &str, reason: &str) -> Error {
    Error::InvalidParameter { param: key.to_string(), reason: reason.to_string() }
}

impl fmt::Display for PhysicalParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.resolved().iter().map(|(k, v, u)| format!("{k}={v} {}", u.unit())).collect();
        f.write_str(&parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn get_set_roundtrip_and_unknown() {
        let mut p = PhysicalParams::new();
        p.set("Omega_s", 1.5).unwrap();
        assert_eq!(p.get("Omega_s").unwrap(), Some(1.5));
        assert_eq!(p.blue("test").unwrap(), 1.5);
        assert!(p.set("bogus", 1.0).is_err());
        assert!(matches!(p.require("J", "here"), Err(Error::MissingParameter { .. })));
    }

    #[test]
    fn validation_rules() {
        assert!(PhysicalParams::new().with("lambda", 1.2).validate().is_err());
        assert!(PhysicalParams::new().with("R", 0.0).validate().is_err());
        assert!(PhysicalParams::new().with("Omega", -1.0).validate().is_err());
        assert!(PhysicalParams::new().with("branch0", 0.7).with("branch1", 0.6).validate().is_err());
        assert!(PhysicalParams::new().with("Delta", -3.0).with("lambda", 0.5).validate().is_ok());
    }

    #[test]
    fn lifetimes_to_rates() {
        assert!((PhysicalParams::rate_from_lifetime_ms(TAU_R_MS) - 0.005).abs() < 1e-15);
    }
}
