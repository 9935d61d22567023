use super::analytic::engineered_rates;
use super::params::PhysicalParams;
use super::variant::ModelVariant;
use crate::error::{Error, Result};
use crate::quantum::{transition_operator, Level, Level::*, Operator};

/// A Lindblad jump operator with its rate; contributes
/// `rate · (c ρ c† - ½{c†c, ρ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayChannel {
    pub label: String,
    pub jump: Operator,
    pub rate: f64,
}

impl DecayChannel {
    pub fn new(label: impl Into<String>, jump: Operator, rate: f64) -> Result<Self> {
        let label = label.into();
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter {
                param: format!("rate of {label}"),
                reason: format!("must be finite and >= 0, got {rate}"),
            });
        }
        Ok(Self { label, jump, rate })
    }
}

/// Fractions of the short-lived state's decay into |0>, |1>, |α>, used for the
/// recycling pump out of |α>.
pub const PUMP_BRANCHING: [(Level, f64); 3] = [(G0, 1.0 / 2.0), (G1, 1.0 / 3.0), (Alpha, 1.0 / 6.0)];

/// Decay channels for a dissipative `variant`.
///
/// - `FullSrp`/`FullWithDefect`: natural |r> decay per atom, a fraction
///   `lambda` back into {|0>, |1>} (split by `gamma_split`) and the rest into
///   the leakage level |α>.
/// - `EffectiveDissipative`: |r> → |0>, |1> at `gamma_flat/2` each.
/// - `FullDissipative`: engineered |r> decay (0.6, 0.4)·4Ω_p²/Γ when `Omega_p`
///   is set, plus natural decay of r, p', p'' split by `branch0`/`branch1`
///   with the remainder into |α>.
/// - `RecyclingFull`: as `FullDissipative` plus the pump out of |α> at
///   (1/2, 1/3, 1/6)·4Ω_b²/Γ into (|0>, |1>, |α>).
/// - `EngineeredDecaySingleAtom`: |a> → |0>, |1> at 3Γ/5, 2Γ/5.
pub fn build_decay_channels(variant: ModelVariant, p: &PhysicalParams) -> Result<Vec<DecayChannel>> {
    p.validate()?;
    let space = variant.space()?;
    let ctx = variant.name();
    let mut out = Vec::new();
    let mut push = |site: usize, from: Level, to: Level, rate: f64| -> Result<()> {
        let label = format!("atom{} {}->{}", site + 1, from, to);
        out.push(DecayChannel::new(label, transition_operator(&space, site, from, to)?, rate)?);
        Ok(())
    };
    match variant {
        ModelVariant::FullSrp | ModelVariant::FullWithDefect => {
            let gamma_r = p.gamma_r();
            let lambda = p.require("lambda", ctx)?;
            let split = p.gamma_split.unwrap_or(0.5);
            for site in 0..2 {
                push(site, R, G0, split * lambda * gamma_r)?;
                push(site, R, G1, (1.0 - split) * lambda * gamma_r)?;
                push(site, R, Alpha, (1.0 - lambda) * gamma_r)?;
            }
        }
        ModelVariant::EffectiveDissipative => {
            let gamma = p.require("gamma_flat", ctx)?;
            for site in 0..2 {
                push(site, R, G0, gamma / 2.0)?;
                push(site, R, G1, gamma / 2.0)?;
            }
        }
        ModelVariant::FullDissipative | ModelVariant::RecyclingFull => {
            let engineered = match p.omega_p {
                Some(omega_p) => Some(engineered_rates(omega_p, p.require("Gamma", ctx)?)?),
                None => None,
            };
            let (b0, b1) = p.branching(ctx)?;
            if b0 + b1 > 1.0 + 1e-12 {
                return Err(Error::InvalidParameter {
                    param: "branch0 + branch1".into(),
                    reason: format!("branching fractions sum to {} > 1", b0 + b1),
                });
            }
            let [tau_r, tau_p1, tau_p2] = p.lifetimes_ms();
            let lifetimes = [(R, tau_r), (P1, tau_p1), (P2, tau_p2)];
            for site in 0..2 {
                if let Some((g0, g1)) = engineered {
                    push(site, R, G0, g0)?;
                    push(site, R, G1, g1)?;
                }
                for (m, tau) in lifetimes {
                    let gamma = PhysicalParams::rate_from_lifetime_ms(tau);
                    push(site, m, G0, b0 * gamma)?;
                    push(site, m, G1, b1 * gamma)?;
                    push(site, m, Alpha, (1.0 - b0 - b1).max(0.0) * gamma)?;
                }
            }
            if variant == ModelVariant::RecyclingFull {
                let omega_b = p.require("Omega_b", ctx)?;
                let gamma = p.require("Gamma", ctx)?;
                if gamma <= 0.0 {
                    return Err(Error::InvalidParameter { param: "Gamma".into(), reason: "must be > 0".into() });
                }
                let total = 4.0 * omega_b * omega_b / gamma;
                for site in 0..2 {
                    for (to, frac) in PUMP_BRANCHING {
                        push(site, Alpha, to, frac * total)?;
                    }
                }
            }
        }
        ModelVariant::EngineeredDecaySingleAtom => {
            let gamma = p.require("Gamma", ctx)?;
            push(0, AShort, G0, 0.6 * gamma)?;
            push(0, AShort, G1, 0.4 * gamma)?;
        }
        other => {
            return Err(Error::VariantMismatch { variant: other.to_string(), what: "decay channels".into() })
        }
    }
    out.retain(|c| c.rate > 0.0);
    Ok(out)
}
