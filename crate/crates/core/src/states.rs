//! Initial states of the measured spin system and the measurement budget.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_dist::{Outcome, PhaseDistribution, PhaseGrid};

/// Default cap on measurements as a fraction of the particle number.
pub const DEFAULT_BUDGET_RATIO: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    /// `N_α` particles in mode `+` and `N_β` in mode `−`.
    DoubleFock { n_alpha: u64, n_beta: u64 },
    /// All particles share one transverse spin state at azimuth `lambda0`.
    PhaseState { lambda0: f64, n_total: u64 },
    /// Superposition of all particles in `+` and all particles in `−`.
    Ghz { n_total: u64 },
}

fn positive(field: &str, n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::config(field, "particle count must be at least 1"))
    } else {
        Ok(())
    }
}

impl InitialState {
    pub fn double_fock(n_alpha: u64, n_beta: u64) -> Result<Self> {
        positive("state.n_alpha", n_alpha)?;
        positive("state.n_beta", n_beta)?;
        Ok(Self::DoubleFock { n_alpha, n_beta })
    }

    pub fn phase_state(lambda0: f64, n_total: u64) -> Result<Self> {
        positive("state.n_total", n_total)?;
        if !lambda0.is_finite() {
            return Err(Error::config("state.lambda0", "must be finite"));
        }
        Ok(Self::PhaseState { lambda0, n_total })
    }

    pub fn ghz(n_total: u64) -> Result<Self> {
        positive("state.n_total", n_total)?;
        Ok(Self::Ghz { n_total })
    }

    pub fn particle_count(&self) -> u64 {
        match *self {
            Self::DoubleFock { n_alpha, n_beta } => n_alpha + n_beta,
            Self::PhaseState { n_total, .. } | Self::Ghz { n_total } => n_total,
        }
    }

    /// Set for double Fock states with unequal populations. The flat prior
    /// is still used, but the recoil bookkeeping assumes `N_α = N_β`.
    pub fn population_warning(&self) -> bool {
        matches!(*self, Self::DoubleFock { n_alpha, n_beta } if n_alpha != n_beta)
    }

    /// Distribution of the relative phase before any measurement.
    pub fn prior_distribution(&self, grid: &PhaseGrid) -> Result<PhaseDistribution> {
        match *self {
            Self::DoubleFock { .. } => Ok(PhaseDistribution::uniform_on(grid)),
            Self::PhaseState { lambda0, .. } => Ok(PhaseDistribution::delta(grid, lambda0)),
            Self::Ghz { .. } => Err(Error::Unsupported(
                "a GHZ state has no relative-phase distribution; use ghz_trajectory".into(),
            )),
        }
    }
}

/// Counts measurements against a fixed budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetGuard {
    p_max: usize,
    consumed: usize,
}

impl BudgetGuard {
    pub fn new(p_max: usize) -> Self {
        Self { p_max, consumed: 0 }
    }

    /// Budget for a state: `⌊ratio · N⌋` for double Fock states (so that
    /// `P ≪ N`), `N` otherwise since phase-state and GHZ measurements are
    /// exact for any `P ≤ N`.
    pub fn for_state(state: &InitialState, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::config("budget_ratio", "must lie in (0, 1]"));
        }
        let n = state.particle_count();
        let p_max = match state {
            InitialState::DoubleFock { .. } => (n as f64 * ratio).floor() as usize,
            _ => n as usize,
        };
        Ok(Self::new(p_max))
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn remaining(&self) -> usize {
        self.p_max - self.consumed
    }

    /// Fails without consuming anything if fewer than `count` remain.
    pub fn check(&self, count: usize) -> Result<()> {
        if count > self.remaining() {
            Err(Error::Budget {
                requested: count,
                available: self.remaining(),
            })
        } else {
            Ok(())
        }
    }

    pub fn consume(&mut self, count: usize) -> Result<()> {
        self.check(count)?;
        self.consumed += count;
        Ok(())
    }
}

/// `p` successive z-axis outcomes on a GHZ state: the first is a fair coin
/// (one uniform draw), the rest repeat it.
pub fn ghz_trajectory<R: Rng + ?Sized>(
    state: &InitialState,
    p: usize,
    rng: &mut R,
) -> Result<Vec<Outcome>> {
    let InitialState::Ghz { n_total } = *state else {
        return Err(Error::Unsupported(
            "ghz_trajectory requires a GHZ state".into(),
        ));
    };
    BudgetGuard::new(n_total as usize).check(p)?;
    if p == 0 {
        return Ok(Vec::new());
    }
    let first = if rng.gen::<f64>() < 0.5 {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    Ok(vec![first; p])
}

/// Probability of a z-axis outcome sequence on a GHZ state.
pub fn ghz_sequence_probability(outcomes: &[Outcome]) -> f64 {
    match outcomes.split_first() {
        None => 1.0,
        Some((first, rest)) if rest.iter().all(|o| o == first) => 0.5,
        Some(_) => 0.0,
    }
}
