use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PlanSpec};
use super::SCHEMA_VERSION;
use crate::angle;
use crate::engine::{MeasurementSpec, Party, Session, TrajectoryResult};
use crate::error::Result;
use crate::ledger::region_polarization;
use crate::phase_dist::{CircularStats, Outcome};
use crate::protocols::{self, SeriesResult, SignedEstimate};
use crate::states::{ghz_trajectory, BudgetGuard};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index`: `splitmix64(master ⊕ splitmix64(index))`.
/// Any trajectory can be rerun alone from `(master, index)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn trajectory_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

/// Everything one trajectory produced.
#[derive(Clone, Debug)]
pub struct TrajectoryOutcome {
    pub index: usize,
    pub seed: u64,
    /// `None` for GHZ runs.
    pub trajectory: Option<TrajectoryResult>,
    pub ghz_outcomes: Option<Vec<Outcome>>,
    pub alice_estimate: Option<SignedEstimate>,
    pub bob_estimate: Option<SignedEstimate>,
    pub confirmation: Option<SeriesResult>,
    /// Axis of Bob's aligned measurements in the paradox plan.
    pub aligned_axis: Option<f64>,
}

/// Runs trajectory `index` of `cfg`.
pub fn execute_trajectory(cfg: &ExperimentConfig, index: usize) -> Result<TrajectoryOutcome> {
    let state = cfg.initial_state()?;
    let seed = derive_seed(cfg.seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TrajectoryOutcome {
        index,
        seed,
        trajectory: None,
        ghz_outcomes: None,
        alice_estimate: None,
        bob_estimate: None,
        confirmation: None,
        aligned_axis: None,
    };
    if let PlanSpec::Ghz { count } = cfg.plan {
        out.ghz_outcomes = Some(ghz_trajectory(&state, count, &mut rng)?);
        return Ok(out);
    }

    let budget = BudgetGuard::for_state(&state, cfg.budget_ratio)?;
    let mut session =
        Session::new(&state, &cfg.phase_grid()?, budget, rng)?.with_snapshots(cfg.snapshot_every);
    session.budget().check(cfg.plan.measurement_count())?;
    match &cfg.plan {
        PlanSpec::Angles { measurements } => {
            for m in measurements {
                session.measure(*m)?;
            }
        }
        PlanSpec::RandomAngles { party, count } => {
            for _ in 0..*count {
                let phi = session.rng_mut().gen::<f64>() * std::f64::consts::TAU;
                session.measure(MeasurementSpec::new(*party, phi))?;
            }
        }
        PlanSpec::TwoStage {
            p1,
            p2,
            theta,
            bob,
            confirmation,
        } => {
            let alice =
                protocols::two_stage_estimate(&mut session, Party::Alice, *p1, *p2, *theta)?;
            let mut target = alice.estimate;
            out.alice_estimate = Some(alice);
            if *bob {
                let b = protocols::two_stage_estimate(&mut session, Party::Bob, *p1, *p2, *theta)?;
                target = b.estimate;
                out.bob_estimate = Some(b);
            }
            if *confirmation > 0 {
                let party = if *bob { Party::Bob } else { Party::Alice };
                out.confirmation = Some(protocols::confirmation_run(
                    &mut session,
                    party,
                    target,
                    *confirmation,
                )?);
            }
        }
        PlanSpec::Adaptive {
            p1,
            p2,
            theta,
            rounds,
            batch,
        } => {
            let first =
                protocols::two_stage_estimate(&mut session, Party::Alice, *p1, *p2, *theta)?;
            let refined = protocols::adaptive_refinement(
                &mut session,
                Party::Alice,
                first.estimate,
                *rounds,
                *batch,
            )?;
            out.alice_estimate = Some(refined);
        }
        PlanSpec::Paradox {
            alice_p1,
            alice_p2,
            theta,
            bob_aligned,
        } => {
            let alice = protocols::two_stage_estimate(
                &mut session,
                Party::Alice,
                *alice_p1,
                *alice_p2,
                *theta,
            )?;
            out.alice_estimate = Some(alice);
            let axis = protocols::posterior_estimate(session.distribution())?;
            out.aligned_axis = Some(axis);
            protocols::run_series(&mut session, Party::Bob, axis, *bob_aligned)?;
        }
        PlanSpec::Ghz { .. } => unreachable!("handled above"),
    }
    out.trajectory = Some(session.finish());
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartyRow {
    pub measurements: usize,
    pub n_plus: usize,
    pub ledger: [f64; 2],
    pub ledger_magnitude: f64,
    pub region: [f64; 2],
    pub region_magnitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_series: Option<SeriesResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_series: Option<SeriesResult>,
}

/// Per-trajectory summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub index: usize,
    pub seed: u64,
    pub measurements: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice: Option<PartyRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob: Option<PartyRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_stats: Option<CircularStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirmation: Option<SeriesResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ghz_first: Option<Outcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ghz_all_equal: Option<bool>,
}

fn party_row(
    result: &TrajectoryResult,
    party: Party,
    estimate: Option<&SignedEstimate>,
) -> Option<PartyRow> {
    let ledger = result.ledger(party);
    if ledger.is_empty() {
        return None;
    }
    let region = region_polarization(party, &result.records);
    Some(PartyRow {
        measurements: ledger.len(),
        n_plus: ledger
            .entries()
            .iter()
            .filter(|e| e.outcome == Outcome::Plus)
            .count(),
        ledger: ledger.cumulative(),
        ledger_magnitude: ledger.magnitude(),
        region: region.vector,
        region_magnitude: region.magnitude(),
        estimate: estimate.map(|e| e.estimate),
        first_series: estimate.map(|e| e.magnitude_series),
        second_series: estimate.map(|e| e.sign_series),
    })
}

impl From<&TrajectoryOutcome> for TrajectoryRow {
    fn from(o: &TrajectoryOutcome) -> Self {
        let mut row = TrajectoryRow {
            index: o.index,
            seed: o.seed,
            measurements: 0,
            alice: None,
            bob: None,
            final_stats: None,
            agreement_distance: None,
            confirmation: o.confirmation,
            ghz_first: None,
            ghz_all_equal: None,
        };
        if let Some(ghz) = &o.ghz_outcomes {
            row.measurements = ghz.len();
            row.ghz_first = ghz.first().copied();
            row.ghz_all_equal = Some(ghz.windows(2).all(|w| w[0] == w[1]));
        }
        if let Some(t) = &o.trajectory {
            row.measurements = t.records.len();
            row.alice = party_row(t, Party::Alice, o.alice_estimate.as_ref());
            row.bob = party_row(t, Party::Bob, o.bob_estimate.as_ref());
            row.final_stats = Some(t.final_distribution.circular_stats());
        }
        if let (Some(a), Some(b)) = (&o.alice_estimate, &o.bob_estimate) {
            row.agreement_distance = Some(angle::distance(a.estimate, b.estimate));
        }
        row
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub rms: f64,
    pub min: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl ScalarStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let rms = (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self {
            count: values.len(),
            mean,
            std,
            rms,
            min: sorted[0],
            q05: quantile(&sorted, 0.05),
            median: quantile(&sorted, 0.5),
            q95: quantile(&sorted, 0.95),
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircularSummary {
    pub count: usize,
    #[serde(flatten)]
    pub stats: CircularStats,
}

impl CircularSummary {
    pub fn from_angles(angles: &[f64]) -> Option<Self> {
        if angles.is_empty() {
            return None;
        }
        let n = angles.len() as f64;
        let c = angles.iter().map(|a| a.cos()).sum::<f64>() / n;
        let s = angles.iter().map(|a| a.sin()).sum::<f64>() / n;
        Some(Self {
            count: angles.len(),
            stats: CircularStats::from_moment(c, s),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub scalars: BTreeMap<String, ScalarStats>,
    pub circular: BTreeMap<String, CircularSummary>,
}

impl Aggregates {
    /// Folds rows in index order.
    pub fn from_rows(rows: &[TrajectoryRow]) -> Self {
        let mut scalars: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut angles: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        fn push(map: &mut BTreeMap<String, Vec<f64>>, key: String, v: f64) {
            map.entry(key).or_default().push(v);
        }
        for row in rows {
            push(&mut scalars, "measurements".into(), row.measurements as f64);
            for (name, party) in [("alice", &row.alice), ("bob", &row.bob)] {
                let Some(p) = party else { continue };
                push(&mut scalars, format!("{name}.n_plus"), p.n_plus as f64);
                push(
                    &mut scalars,
                    format!("{name}.ledger_magnitude"),
                    p.ledger_magnitude,
                );
                push(
                    &mut scalars,
                    format!("{name}.region_magnitude"),
                    p.region_magnitude,
                );
                if let Some(s) = p.first_series {
                    push(
                        &mut scalars,
                        format!("{name}.first_series.n_plus"),
                        s.n_plus as f64,
                    );
                }
                if let Some(e) = p.estimate {
                    push(&mut angles, format!("{name}.estimate"), e);
                }
            }
            if let Some(f) = row.final_stats {
                push(&mut scalars, "final.concentration".into(), f.concentration);
                if let Some(d) = f.mean_direction {
                    push(&mut angles, "final.mean_direction".into(), d);
                }
            }
            if let Some(d) = row.agreement_distance {
                push(&mut scalars, "agreement.distance".into(), d);
            }
            if let Some(c) = row.confirmation {
                push(
                    &mut scalars,
                    "confirmation.fraction_plus".into(),
                    c.fraction_plus(),
                );
            }
            if let Some(first) = row.ghz_first {
                push(
                    &mut scalars,
                    "ghz.first_plus".into(),
                    f64::from(first == Outcome::Plus),
                );
            }
            if let Some(eq) = row.ghz_all_equal {
                push(&mut scalars, "ghz.all_equal".into(), f64::from(eq));
            }
        }
        Self {
            scalars: scalars
                .into_iter()
                .filter_map(|(k, v)| ScalarStats::from_values(&v).map(|s| (k, s)))
                .collect(),
            circular: angles
                .into_iter()
                .filter_map(|(k, v)| CircularSummary::from_angles(&v).map(|s| (k, s)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub generator: String,
    pub config: ExperimentConfig,
    pub rows: Vec<TrajectoryRow>,
    pub aggregates: Aggregates,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<RunSummary> {
    run_ensemble_with(cfg, Execution::Parallel)
}

pub fn run_ensemble_with(cfg: &ExperimentConfig, execution: Execution) -> Result<RunSummary> {
    cfg.validate()?;
    let row = |i: usize| execute_trajectory(cfg, i).map(|o| TrajectoryRow::from(&o));
    let rows = match execution {
        Execution::Serial => (0..cfg.ensemble_size)
            .map(row)
            .collect::<Result<Vec<_>>>()?,
        Execution::Parallel => (0..cfg.ensemble_size)
            .into_par_iter()
            .map(row)
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(RunSummary {
        schema_version: SCHEMA_VERSION,
        generator: concat!("spinphase ", env!("CARGO_PKG_VERSION")).to_string(),
        config: cfg.clone(),
        aggregates: Aggregates::from_rows(&rows),
        rows,
    })
}
