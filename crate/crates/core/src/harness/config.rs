use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{MeasurementSpec, Party};
use crate::error::{Error, Result};
use crate::phase_dist::PhaseGrid;
use crate::states::{InitialState, DEFAULT_BUDGET_RATIO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    DoubleFock,
    PhaseState,
    Ghz,
}

/// Flat `state.*` table of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_alpha: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_beta: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_total: Option<u64>,
}

fn required<T: Copy>(value: Option<T>, field: &str) -> Result<T> {
    value.ok_or_else(|| Error::config(field, "required for this state kind"))
}

impl StateSpec {
    pub fn double_fock(n_alpha: u64, n_beta: u64) -> Self {
        Self {
            kind: StateKind::DoubleFock,
            n_alpha: Some(n_alpha),
            n_beta: Some(n_beta),
            lambda0: None,
            n_total: None,
        }
    }

    pub fn phase_state(lambda0: f64, n_total: u64) -> Self {
        Self {
            kind: StateKind::PhaseState,
            n_alpha: None,
            n_beta: None,
            lambda0: Some(lambda0),
            n_total: Some(n_total),
        }
    }

    pub fn ghz(n_total: u64) -> Self {
        Self {
            kind: StateKind::Ghz,
            n_alpha: None,
            n_beta: None,
            lambda0: None,
            n_total: Some(n_total),
        }
    }

    pub fn build(&self) -> Result<InitialState> {
        match self.kind {
            StateKind::DoubleFock => InitialState::double_fock(
                required(self.n_alpha, "state.n_alpha")?,
                required(self.n_beta, "state.n_beta")?,
            ),
            StateKind::PhaseState => InitialState::phase_state(
                required(self.lambda0, "state.lambda0")?,
                required(self.n_total, "state.n_total")?,
            ),
            StateKind::Ghz => InitialState::ghz(required(self.n_total, "state.n_total")?),
        }
    }
}

/// What each trajectory does, selected by `plan.protocol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanSpec {
    /// Explicit list of measurements.
    Angles { measurements: Vec<MeasurementSpec> },
    /// `count` measurements along axes drawn uniformly from the trajectory's
    /// random stream.
    RandomAngles { party: Party, count: usize },
    /// Alice runs a two-stage estimate; optionally Bob repeats it on the same
    /// system and then confirms along his estimate.
    TwoStage {
        p1: usize,
        p2: usize,
        #[serde(default)]
        theta: f64,
        #[serde(default)]
        bob: bool,
        #[serde(default)]
        confirmation: usize,
    },
    /// Alice's two-stage estimate followed by refinement rounds
    /// perpendicular to her running estimate.
    Adaptive {
        p1: usize,
        p2: usize,
        #[serde(default)]
        theta: f64,
        rounds: usize,
        batch: usize,
    },
    /// Alice's two-stage estimate, then Bob measures `bob_aligned` spins
    /// along the posterior mean direction.
    Paradox {
        alice_p1: usize,
        alice_p2: usize,
        #[serde(default)]
        theta: f64,
        bob_aligned: usize,
    },
    /// z-axis measurements on a GHZ state.
    Ghz { count: usize },
}

impl PlanSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PlanSpec::Angles { .. } => "angles",
            PlanSpec::RandomAngles { .. } => "random_angles",
            PlanSpec::TwoStage { .. } => "two_stage",
            PlanSpec::Adaptive { .. } => "adaptive",
            PlanSpec::Paradox { .. } => "paradox",
            PlanSpec::Ghz { .. } => "ghz",
        }
    }

    /// Number of measurements one trajectory performs.
    pub fn measurement_count(&self) -> usize {
        match self {
            PlanSpec::Angles { measurements } => measurements.len(),
            PlanSpec::RandomAngles { count, .. } | PlanSpec::Ghz { count } => *count,
            PlanSpec::TwoStage {
                p1,
                p2,
                bob,
                confirmation,
                ..
            } => (p1 + p2) * if *bob { 2 } else { 1 } + confirmation,
            PlanSpec::Adaptive {
                p1,
                p2,
                rounds,
                batch,
                ..
            } => p1 + p2 + rounds * batch,
            PlanSpec::Paradox {
                alice_p1,
                alice_p2,
                bob_aligned,
                ..
            } => alice_p1 + alice_p2 + bob_aligned,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_ensemble_size() -> usize {
    1
}

fn default_grid() -> usize {
    PhaseGrid::DEFAULT_SIZE
}

fn default_budget_ratio() -> f64 {
    DEFAULT_BUDGET_RATIO
}

/// Declarative description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_ensemble_size")]
    pub ensemble_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_budget_ratio")]
    pub budget_ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    pub state: StateSpec,
    pub plan: PlanSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn new(state: StateSpec, plan: PlanSpec) -> Self {
        Self {
            ensemble_size: 1,
            seed: 0,
            grid: PhaseGrid::DEFAULT_SIZE,
            budget_ratio: DEFAULT_BUDGET_RATIO,
            snapshot_every: None,
            state,
            plan,
            output: OutputSpec::default(),
        }
    }

    /// Alice's two series of 300 at `0` and `π/2` on a double Fock state.
    pub fn alice_two_stage() -> Self {
        Self::new(
            StateSpec::double_fock(100_000, 100_000),
            PlanSpec::TwoStage {
                p1: 300,
                p2: 300,
                theta: 0.0,
                bob: false,
                confirmation: 0,
            },
        )
    }

    /// Alice then Bob, each with 300 + 300, and Bob's 100-shot confirmation.
    pub fn alice_then_bob() -> Self {
        Self::new(
            StateSpec::double_fock(100_000, 100_000),
            PlanSpec::TwoStage {
                p1: 300,
                p2: 300,
                theta: 0.0,
                bob: true,
                confirmation: 100,
            },
        )
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn initial_state(&self) -> Result<InitialState> {
        self.state.build()
    }

    pub fn phase_grid(&self) -> Result<PhaseGrid> {
        PhaseGrid::new(self.grid)
    }

    /// Field-level checks beyond what parsing enforces.
    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size == 0 {
            return Err(Error::config("ensemble_size", "must be at least 1"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::config("seed", "must fit in 63 bits"));
        }
        self.phase_grid()?;
        if !(self.budget_ratio > 0.0 && self.budget_ratio <= 1.0) {
            return Err(Error::config("budget_ratio", "must lie in (0, 1]"));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::config("snapshot_every", "must be at least 1"));
        }
        let state = self.initial_state()?;
        let is_ghz = matches!(state, InitialState::Ghz { .. });
        match &self.plan {
            PlanSpec::Ghz { .. } if !is_ghz => {
                return Err(Error::config(
                    "plan.protocol",
                    "`ghz` requires state.kind = ghz",
                ))
            }
            PlanSpec::Ghz { .. } => {}
            other if is_ghz => {
                return Err(Error::config(
                    "plan.protocol",
                    format!(
                        "`{}` is not available for a GHZ state; use `ghz`",
                        other.name()
                    ),
                ))
            }
            PlanSpec::Angles { measurements } => {
                if measurements.iter().any(|m| !m.phi.is_finite()) {
                    return Err(Error::config("plan.measurements", "angles must be finite"));
                }
            }
            PlanSpec::TwoStage { p1, p2, theta, .. } | PlanSpec::Adaptive { p1, p2, theta, .. } => {
                if *p1 == 0 || *p2 == 0 {
                    return Err(Error::config(
                        "plan.p1/p2",
                        "series lengths must be at least 1",
                    ));
                }
                if !theta.is_finite() {
                    return Err(Error::config("plan.theta", "must be finite"));
                }
                if let PlanSpec::Adaptive { rounds, batch, .. } = &self.plan {
                    if *rounds == 0 || *batch == 0 {
                        return Err(Error::config("plan.rounds/batch", "must be at least 1"));
                    }
                }
            }
            PlanSpec::Paradox {
                alice_p1,
                alice_p2,
                theta,
                ..
            } => {
                if *alice_p1 == 0 || *alice_p2 == 0 {
                    return Err(Error::config(
                        "plan.alice_p1/alice_p2",
                        "must be at least 1",
                    ));
                }
                if !theta.is_finite() {
                    return Err(Error::config("plan.theta", "must be finite"));
                }
            }
            PlanSpec::RandomAngles { .. } => {}
        }
        crate::states::BudgetGuard::for_state(&state, self.budget_ratio)?
            .check(self.plan.measurement_count())
            .map_err(|e| Error::config("plan", e.to_string()))?;
        Ok(())
    }
}
