//! Seeded Monte Carlo simulation of sequential transverse spin measurements
//! on two-mode spin condensates.
//!
//! The relative phase `λ` between the two modes is carried as a discretized
//! density on the circle ([`phase_dist`]). Each transverse measurement at
//! axis angle `φ` samples `η = ±1` from the current density and multiplies
//! it by `[1 + η cos(λ − φ)] / 2`. On top of that sit:
//!
//! - [`states`]: double Fock, phase and GHZ initial states,
//! - [`engine`]: trajectories, joint-probability oracles and an exact
//!   finite-N quantum oracle,
//! - [`ledger`]: angular momentum handed to each apparatus (ħ = 1),
//! - [`protocols`]: Alice/Bob estimation strategies,
//! - [`harness`]: declarative configs, seeded ensembles and exports,
//! - [`cli`]: the `spinphase` command-line front end.

pub mod angle;
pub mod cli;
pub mod engine;
pub mod error;
pub mod harness;
pub mod ledger;
pub mod phase_dist;
pub mod protocols;
pub mod states;

pub use engine::{MeasurementRecord, MeasurementSpec, Outcome, Party, Session, TrajectoryResult};
pub use error::{Error, Result};
pub use phase_dist::{CircularStats, PhaseDistribution, PhaseGrid};
pub use states::{BudgetGuard, InitialState};
