//! Simulator for selective Rydberg pumping in two-atom neutral-atom systems.
//!
//! The crate is layered bottom-up:
//!
//! - [`quantum`]: operators and states on one- or two-atom product spaces.
//! - [`model`]: Hamiltonians, decay channels and analytic helper quantities
//!   built from a [`model::PhysicalParams`] record.
//! - [`dynamics`]: Schrödinger and Lindblad propagation, gate unitaries and
//!   Choi matrices.
//! - [`observables`]: populations, fidelities and rate fits.
//! - [`scenarios`]: the named experiment catalog and the sweep engine.
//! - [`cli`]: command-line front end.
//!
//! Units are microseconds and rad/µs throughout.

// Negated comparisons are the NaN-rejecting form used for input validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod observables;
pub mod quantum;
pub mod scenarios;

pub use error::{Error, Result};
