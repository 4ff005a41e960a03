//! Sequential measurement trajectories and probability oracles.
//!
//! A [`Session`] owns one trajectory: the running phase distribution, the
//! measurement budget, both apparatus ledgers and the random stream. Each
//! measurement samples an outcome from the current distribution, books the
//! recoil, then conditions the distribution on the outcome.

mod fewbody;
mod oracle;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angle;
use crate::error::{Error, Result};
use crate::ledger::ApparatusLedger;
use crate::phase_dist::{PhaseDistribution, PhaseGrid};
use crate::states::{BudgetGuard, InitialState, DEFAULT_BUDGET_RATIO};

pub use crate::phase_dist::Outcome;
pub use fewbody::{
    fewbody_enumerate, fewbody_joint_probability, FewBodyState, FEWBODY_MAX_PARTICLES,
};
pub use oracle::{
    chain_log_probability, chain_probability, enumerate_outcomes, format_sequence,
    joint_probability, ENUMERATION_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn as_str(self) -> &'static str {
        match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alice" | "a" => Ok(Party::Alice),
            "bob" | "b" => Ok(Party::Bob),
            other => Err(Error::config("party", format!("unknown party `{other}`"))),
        }
    }
}

/// Who measures and along which transverse axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSpec {
    pub party: Party,
    pub phi: f64,
}

impl MeasurementSpec {
    /// `phi` is reduced to `[0, 2π)`.
    pub fn new(party: Party, phi: f64) -> Self {
        Self {
            party,
            phi: angle::reduce(phi),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub spec: MeasurementSpec,
    #[serde(rename = "eta")]
    pub outcome: Outcome,
    /// Position in the global order across both parties.
    pub index: usize,
}

impl MeasurementRecord {
    pub fn new(index: usize, party: Party, phi: f64, outcome: Outcome) -> Self {
        Self {
            spec: MeasurementSpec::new(party, phi),
            outcome,
            index,
        }
    }

    /// Record list in plan order for oracle evaluation.
    pub fn sequence(specs: &[MeasurementSpec], outcomes: &[Outcome]) -> Vec<Self> {
        specs
            .iter()
            .zip(outcomes)
            .enumerate()
            .map(|(index, (spec, outcome))| Self {
                spec: *spec,
                outcome: *outcome,
                index,
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    pub records: Vec<MeasurementRecord>,
    pub final_distribution: PhaseDistribution,
    /// `(measurements so far, distribution)` every `snapshot_every` steps.
    pub snapshots: Vec<(usize, PhaseDistribution)>,
    pub alice_ledger: ApparatusLedger,
    pub bob_ledger: ApparatusLedger,
}

impl TrajectoryResult {
    pub fn ledger(&self, party: Party) -> &ApparatusLedger {
        match party {
            Party::Alice => &self.alice_ledger,
            Party::Bob => &self.bob_ledger,
        }
    }

    /// Reapplies every record to `prior`.
    pub fn replay(&self, prior: &PhaseDistribution) -> Result<PhaseDistribution> {
        self.records
            .iter()
            .try_fold(prior.clone(), |d, r| d.update(r.spec.phi, r.outcome))
    }
}

/// One trajectory in progress.
pub struct Session<R> {
    dist: PhaseDistribution,
    budget: BudgetGuard,
    records: Vec<MeasurementRecord>,
    ledgers: [ApparatusLedger; 2],
    snapshot_every: Option<usize>,
    snapshots: Vec<(usize, PhaseDistribution)>,
    rng: R,
}

impl<R: Rng> Session<R> {
    pub fn new(
        state: &InitialState,
        grid: &PhaseGrid,
        budget: BudgetGuard,
        rng: R,
    ) -> Result<Self> {
        Ok(Self {
            dist: state.prior_distribution(grid)?,
            budget,
            records: Vec::new(),
            ledgers: [
                ApparatusLedger::new(Party::Alice),
                ApparatusLedger::new(Party::Bob),
            ],
            snapshot_every: None,
            snapshots: Vec::new(),
            rng,
        })
    }

    /// Session with the default budget ratio.
    pub fn for_state(state: &InitialState, grid: &PhaseGrid, rng: R) -> Result<Self> {
        let budget = BudgetGuard::for_state(state, DEFAULT_BUDGET_RATIO)?;
        Self::new(state, grid, budget, rng)
    }

    /// Keeps a copy of the distribution after every `stride` measurements.
    pub fn with_snapshots(mut self, stride: Option<usize>) -> Self {
        self.snapshot_every = stride.filter(|s| *s > 0);
        self
    }

    pub fn measure(&mut self, spec: MeasurementSpec) -> Result<MeasurementRecord> {
        let spec = MeasurementSpec::new(spec.party, spec.phi);
        self.budget.consume(1)?;
        let outcome = self.dist.sample_outcome(spec.phi, &mut self.rng);
        let index = self.records.len();
        self.ledgers[spec.party.slot()].record(&self.dist, index, spec.phi, outcome);
        self.dist = self.dist.update(spec.phi, outcome)?;
        let record = MeasurementRecord {
            spec,
            outcome,
            index,
        };
        self.records.push(record);
        if let Some(stride) = self.snapshot_every {
            if self.records.len().is_multiple_of(stride) {
                self.snapshots.push((self.records.len(), self.dist.clone()));
            }
        }
        Ok(record)
    }

    pub fn distribution(&self) -> &PhaseDistribution {
        &self.dist
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn ledger(&self, party: Party) -> &ApparatusLedger {
        &self.ledgers[party.slot()]
    }

    pub fn budget(&self) -> &BudgetGuard {
        &self.budget
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }

    pub fn finish(self) -> TrajectoryResult {
        let [alice_ledger, bob_ledger] = self.ledgers;
        TrajectoryResult {
            records: self.records,
            final_distribution: self.dist,
            snapshots: self.snapshots,
            alice_ledger,
            bob_ledger,
        }
    }
}

/// Runs an explicit measurement plan from the prior of `state`.
///
/// The whole plan is checked against the budget before any random draw.
pub fn run_trajectory<R: Rng>(
    state: &InitialState,
    plan: &[MeasurementSpec],
    grid: &PhaseGrid,
    rng: R,
    snapshot_every: Option<usize>,
) -> Result<TrajectoryResult> {
    let mut session = Session::for_state(state, grid, rng)?.with_snapshots(snapshot_every);
    session.budget().check(plan.len())?;
    for spec in plan {
        session.measure(*spec)?;
    }
    Ok(session.finish())
}
