//! Schrödinger and Lindblad propagation, gate unitaries and process maps.

mod config;
mod dense;
mod evolve;
mod flow;
mod kernel;

pub use config::{IntegratorConfig, Method, Strategy};
pub use evolve::{
    compute_gate_unitary, compute_process_choi, computational_indices, drive_scale, evolve_lindblad,
    evolve_schrodinger, propagate_density, unitary_choi, Probe, ProbeMode, Trajectory,
};
pub use flow::RunStats;
pub use kernel::{lindblad_rhs, GeneratorKernel, Superoperator};
