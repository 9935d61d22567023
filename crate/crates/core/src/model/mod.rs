//! Model builders: Hamiltonians, decay channels, dressed states and analytic
//! helper quantities, all driven by a [`PhysicalParams`] record.

mod analytic;
mod builders;
mod decay;
mod dressed;
mod hamiltonian;
mod params;
mod variant;

pub use analytic::{
    dipole_coupling_from_distance, distance_from_coupling, engineered_rates, foster_deviation,
    srp_condition_report, SrpConditionReport, HIERARCHY_RATIO, SHORT_BRANCHING,
};
pub use builders::{build_hamiltonian, exchange_operator};
pub use decay::{build_decay_channels, DecayChannel, PUMP_BRANCHING};
pub use dressed::{dressed_basis, DressedBasis, DressedState};
pub use hamiltonian::{DriveCoefficient, DriveTerm, HamiltonianSpec};
pub use params::{
    mhz, PhysicalParams, UnitKind, C3_MEASURED, SHORT_LIFETIME_US, TAU_P1_MS, TAU_P2_MS, TAU_R_MS,
};
pub use variant::ModelVariant;

/// Superset of parameters accepted by every variant.
#[cfg(test)]
pub(crate) fn test_params(_variant: ModelVariant) -> PhysicalParams {
    let j = mhz(50.0);
    PhysicalParams::new()
        .with("Omega", mhz(0.02))
        .with("Omega_s", mhz(1.0))
        .with("J", j)
        .with("Delta", std::f64::consts::SQRT_2 * j)
        .with("delta_defect", mhz(8.5))
        .with("U_vdw", mhz(50.0))
        .with("Omega_w", mhz(0.005))
        .with("Omega_p", 1.354)
        .with("Omega_b", 1.0)
        .with("Gamma", 1.0 / SHORT_LIFETIME_US)
        .with("tau_r", TAU_R_MS)
        .with("tau_p1", TAU_P1_MS)
        .with("tau_p2", TAU_P2_MS)
        .with("lambda", 0.5)
        .with("gamma_split", 0.5)
        .with("gamma_flat", 0.1)
        .with("branch0", 0.3)
        .with("branch1", 0.3)
}
