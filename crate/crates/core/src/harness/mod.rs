//! Declarative experiment configs, seeded ensembles and file exports.
//!
//! Config files are TOML mirroring [`ExperimentConfig`]:
//!
//! ```toml
//! ensemble_size = 1000
//! seed = 7
//! grid = 4096          # phase grid size K
//! budget_ratio = 0.1   # double Fock runs may use at most N/10 measurements
//!
//! [state]
//! kind = "double_fock" # or "phase_state" (lambda0, n_total) or "ghz" (n_total)
//! n_alpha = 100000
//! n_beta = 100000
//!
//! [plan]
//! protocol = "two_stage" # angles | random_angles | two_stage | adaptive | paradox | ghz
//! p1 = 300
//! p2 = 300
//! bob = true
//! confirmation = 100
//! ```
//!
//! Trajectory `i` draws from its own ChaCha8 stream seeded by
//! [`derive_seed`]`(seed, i)`, so results do not depend on execution order
//! or thread count.

mod config;
mod ensemble;
pub mod export;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, Format, OutputSpec, PlanSpec, StateKind, StateSpec};
pub use ensemble::{
    derive_seed, execute_trajectory, run_ensemble, run_ensemble_with, trajectory_rng, Aggregates,
    CircularSummary, Execution, PartyRow, RunSummary, ScalarStats, TrajectoryOutcome,
    TrajectoryRow,
};

/// Version of every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that relocates relative output paths.
pub const OUT_DIR_ENV: &str = "SPINPHASE_OUT_DIR";

/// Resolves an output path against `dir` (if any) or [`OUT_DIR_ENV`].
/// Absolute paths are left alone.
pub fn resolve_output(path: &Path, dir: Option<&Path>) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match env_dir.as_deref().or(dir) {
        Some(base) => base.join(path),
        None => path.to_path_buf(),
    }
}
