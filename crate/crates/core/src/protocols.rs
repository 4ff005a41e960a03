//! Measurement strategies and phase estimators for Alice and Bob.
//!
//! A series of `n` measurements at a fixed axis `φ` yields `n₊` up results;
//! since `P(+) = cos²((λ−φ)/2)`, the angle `2 arccos √(n₊/n)` estimates
//! `|λ − φ|` but not its sign. Two series on perpendicular axes resolve the
//! sign: each gives two candidates `φ ± m`, and the closest cross pair wins.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angle;
use crate::engine::{MeasurementSpec, Party, Session};
use crate::error::{Error, Result};
use crate::phase_dist::{Outcome, PhaseDistribution};

/// Concentration below which a posterior has no usable mean direction.
pub const MIN_ESTIMATE_CONCENTRATION: f64 = 1e-6;

const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub phi: f64,
    pub n_plus: usize,
    pub n_total: usize,
}

impl SeriesResult {
    pub fn new(phi: f64, n_plus: usize, n_total: usize) -> Result<Self> {
        if n_plus > n_total {
            return Err(Error::config(
                "n_plus",
                format!("{n_plus} up results out of {n_total} measurements"),
            ));
        }
        Ok(Self {
            phi,
            n_plus,
            n_total,
        })
    }

    pub fn n_minus(&self) -> usize {
        self.n_total - self.n_plus
    }

    pub fn fraction_plus(&self) -> f64 {
        self.n_plus as f64 / self.n_total as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedEstimate {
    /// Estimated phase in `(−π, π]`.
    pub estimate: f64,
    pub magnitude_estimate: f64,
    pub magnitude_series: SeriesResult,
    pub sign_series: SeriesResult,
    pub candidates: Vec<f64>,
}

/// `2 arccos √(n₊/n) ∈ [0, π]`, an estimate of `|λ − φ|`.
pub fn magnitude_estimate(series: &SeriesResult) -> Result<f64> {
    if series.n_total == 0 {
        return Err(Error::EmptySeries);
    }
    Ok(2.0 * series.fraction_plus().sqrt().min(1.0).acos())
}

/// Resolves the sign ambiguity between two series on different axes.
///
/// Candidates are `φ₁ ± m₁` and `φ₂ ± m₂`. The cross pair at minimum
/// circular distance is kept and its circular midpoint returned. When two
/// pairings are equally close but disagree, the midpoint in `(−π, 0]` wins.
pub fn combine_series(first: &SeriesResult, second: &SeriesResult) -> Result<SignedEstimate> {
    let m1 = magnitude_estimate(first)?;
    let m2 = magnitude_estimate(second)?;
    let c1 = [angle::wrap(first.phi + m1), angle::wrap(first.phi - m1)];
    let c2 = [angle::wrap(second.phi + m2), angle::wrap(second.phi - m2)];

    let pairs: Vec<(f64, f64)> = c1
        .iter()
        .flat_map(|a| {
            c2.iter()
                .map(move |b| (angle::distance(*a, *b), angle::midpoint(*a, *b)))
        })
        .collect();
    let best = pairs.iter().map(|(d, _)| *d).fold(f64::INFINITY, f64::min);
    let tied: Vec<f64> = pairs
        .iter()
        .filter(|(d, _)| *d <= best + TIE_TOLERANCE)
        .map(|(_, mid)| *mid)
        .collect();
    let estimate = tied
        .iter()
        .copied()
        .find(|mid| *mid <= 0.0)
        .unwrap_or(tied[0]);

    Ok(SignedEstimate {
        estimate,
        magnitude_estimate: m1,
        magnitude_series: *first,
        sign_series: *second,
        candidates: c1.into_iter().chain(c2).collect(),
    })
}

/// `count` measurements by `party` along `phi`.
pub fn run_series<R: Rng>(
    session: &mut Session<R>,
    party: Party,
    phi: f64,
    count: usize,
) -> Result<SeriesResult> {
    session.budget().check(count)?;
    let mut n_plus = 0;
    for _ in 0..count {
        if session.measure(MeasurementSpec::new(party, phi))?.outcome == Outcome::Plus {
            n_plus += 1;
        }
    }
    Ok(SeriesResult {
        phi: angle::reduce(phi),
        n_plus,
        n_total: count,
    })
}

/// `p1` measurements along `theta`, then `p2` along `theta + π/2`, combined
/// with [`combine_series`].
pub fn two_stage_estimate<R: Rng>(
    session: &mut Session<R>,
    party: Party,
    p1: usize,
    p2: usize,
    theta: f64,
) -> Result<SignedEstimate> {
    session.budget().check(p1 + p2)?;
    let first = run_series(session, party, theta, p1)?;
    let second = run_series(session, party, theta + FRAC_PI_2, p2)?;
    combine_series(&first, &second)
}

/// `p` measurements along the estimated direction.
pub fn confirmation_run<R: Rng>(
    session: &mut Session<R>,
    party: Party,
    estimate: f64,
    p: usize,
) -> Result<SeriesResult> {
    run_series(session, party, estimate, p)
}

/// Circular mean of a distribution, in `(−π, π]`.
pub fn posterior_estimate(d: &PhaseDistribution) -> Result<f64> {
    let stats = d.circular_stats();
    match stats.mean_direction {
        Some(mean) if stats.concentration >= MIN_ESTIMATE_CONCENTRATION => Ok(mean),
        _ => Err(Error::UndefinedDirection(stats.concentration)),
    }
}

/// Posterior after the given series counts. Updates commute, so only the
/// counts matter, not the order of outcomes within or across series.
pub fn posterior_from_series(
    prior: &PhaseDistribution,
    series: &[SeriesResult],
) -> Result<PhaseDistribution> {
    let mut d = prior.clone();
    for s in series {
        for _ in 0..s.n_plus {
            d = d.update(s.phi, Outcome::Plus)?;
        }
        for _ in 0..s.n_minus() {
            d = d.update(s.phi, Outcome::Minus)?;
        }
    }
    Ok(d)
}

/// Repeatedly measures `batch` spins perpendicular to the current estimate
/// and shifts it by `arcsin(2 n₊/batch − 1)`, the signed offset implied by
/// `P(+) = (1 + sin(λ − λ̂))/2` on that axis.
pub fn adaptive_refinement<R: Rng>(
    session: &mut Session<R>,
    party: Party,
    initial: f64,
    rounds: usize,
    batch: usize,
) -> Result<SignedEstimate> {
    if rounds == 0 {
        return Err(Error::config(
            "rounds",
            "at least one refinement round is required",
        ));
    }
    if batch == 0 {
        return Err(Error::EmptySeries);
    }
    session.budget().check(rounds * batch)?;
    let mut estimate = angle::wrap(initial);
    let mut candidates = Vec::with_capacity(rounds);
    let mut first = None;
    let mut last = None;
    let mut correction = 0.0;
    for _ in 0..rounds {
        let series = run_series(session, party, estimate + FRAC_PI_2, batch)?;
        correction = (2.0 * series.fraction_plus() - 1.0).clamp(-1.0, 1.0).asin();
        estimate = angle::wrap(estimate + correction);
        candidates.push(estimate);
        first.get_or_insert(series);
        last = Some(series);
    }
    Ok(SignedEstimate {
        estimate,
        magnitude_estimate: correction.abs(),
        magnitude_series: first.expect("rounds ≥ 1"),
        sign_series: last.expect("rounds ≥ 1"),
        candidates,
    })
}
