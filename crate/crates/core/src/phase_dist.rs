//! Discretized probability densities over the relative phase `λ ∈ [0, 2π)`.
//!
//! A [`PhaseDistribution`] is either a density sampled on a uniform
//! [`PhaseGrid`] or an exact point mass. Integrals use the periodic
//! trapezoidal rule `(2π/K) Σ f(λ_k)`, which is exact for trigonometric
//! polynomials of degree below `K`. A posterior after `m` measurements is a
//! trigonometric polynomial of degree `m`, so quadrature is exact for the
//! first `K − 1` updates.
//!
//! Densities are normalized after every update and cache their first
//! trigonometric moment, which makes [`PhaseDistribution::prob_plus`] O(1).

use std::f64::consts::TAU;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angle;
use crate::error::{Error, Result};

/// Concentrations below this report an undefined mean direction.
pub const UNDEFINED_DIRECTION_THRESHOLD: f64 = 1e-9;

/// Result of one transverse spin measurement, `η = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        match o {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Outcome {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(format!("outcome must be +1 or -1, got {other}")),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", i8::from(*self))
    }
}

struct GridTables {
    size: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

/// `K` uniformly spaced nodes `2πk/K` on `[0, 2π)`; `K ≥ 16` and even.
#[derive(Clone)]
pub struct PhaseGrid {
    tables: Arc<GridTables>,
}

impl PhaseGrid {
    pub const DEFAULT_SIZE: usize = 4096;
    pub const MIN_SIZE: usize = 16;

    pub fn new(size: usize) -> Result<Self> {
        if size < Self::MIN_SIZE || !size.is_multiple_of(2) {
            return Err(Error::config(
                "grid",
                format!(
                    "grid size must be even and at least {}, got {size}",
                    Self::MIN_SIZE
                ),
            ));
        }
        let nodes = (0..size).map(|k| TAU * k as f64 / size as f64);
        let (cos, sin) = nodes.map(|l| (l.cos(), l.sin())).unzip();
        Ok(Self {
            tables: Arc::new(GridTables { size, cos, sin }),
        })
    }

    /// Smallest valid grid whose quadrature is exact for trigonometric
    /// polynomials of the given degree.
    pub fn exact_for(degree: usize) -> Self {
        let size = ((degree + 2) & !1).max(Self::MIN_SIZE);
        Self::new(size).expect("size is even and above the minimum")
    }

    pub fn size(&self) -> usize {
        self.tables.size
    }

    pub fn node(&self, k: usize) -> f64 {
        TAU * k as f64 / self.size() as f64
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.size() as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.size()).map(move |k| self.node(k))
    }

    /// Periodic trapezoidal rule over one period.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.size());
        self.spacing() * values.iter().sum::<f64>()
    }

    fn cos_table(&self) -> &[f64] {
        &self.tables.cos
    }

    fn sin_table(&self) -> &[f64] {
        &self.tables.sin
    }
}

impl PartialEq for PhaseGrid {
    fn eq(&self, other: &Self) -> bool {
        self.size() == other.size()
    }
}

impl fmt::Debug for PhaseGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseGrid")
            .field("size", &self.size())
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    /// Density values at the nodes (1/rad) with the cached first moment
    /// `(∫ g cos λ, ∫ g sin λ)`.
    Density {
        weights: Vec<f64>,
        moment: (f64, f64),
    },
    Delta {
        lambda0: f64,
    },
}

/// Mean direction and concentration of a distribution on the circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircularStats {
    /// `arg ∫ e^{iλ} g(λ) dλ` in `(−π, π]`; `None` when the concentration
    /// is below [`UNDEFINED_DIRECTION_THRESHOLD`].
    pub mean_direction: Option<f64>,
    pub concentration: f64,
}

impl CircularStats {
    pub fn from_moment(c: f64, s: f64) -> Self {
        let concentration = c.hypot(s).min(1.0);
        let mean_direction =
            (concentration >= UNDEFINED_DIRECTION_THRESHOLD).then(|| angle::wrap(s.atan2(c)));
        Self {
            mean_direction,
            concentration,
        }
    }
}

/// Probability density over the relative phase. Immutable: updates return a
/// new value.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseDistribution {
    grid: PhaseGrid,
    repr: Repr,
}

fn likelihood(cos_diff: f64, outcome: Outcome) -> f64 {
    0.5 * (1.0 + outcome.sign() * cos_diff)
}

impl PhaseDistribution {
    /// Flat density `1/(2π)`.
    pub fn uniform(size: usize) -> Result<Self> {
        Ok(Self::uniform_on(&PhaseGrid::new(size)?))
    }

    pub fn uniform_on(grid: &PhaseGrid) -> Self {
        Self {
            grid: grid.clone(),
            repr: Repr::Density {
                weights: vec![1.0 / TAU; grid.size()],
                moment: (0.0, 0.0),
            },
        }
    }

    /// Exact point mass at `lambda0` (reduced to `[0, 2π)`).
    pub fn delta(grid: &PhaseGrid, lambda0: f64) -> Self {
        Self {
            grid: grid.clone(),
            repr: Repr::Delta {
                lambda0: angle::reduce(lambda0),
            },
        }
    }

    /// Builds a density from arbitrary non-negative node values, normalizing
    /// them.
    pub fn from_weights(grid: &PhaseGrid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.size() {
            return Err(Error::config(
                "weights",
                format!("expected {} values, got {}", grid.size(), weights.len()),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::config(
                "weights",
                "values must be finite and non-negative",
            ));
        }
        Self::normalized(grid, weights)
    }

    fn normalized(grid: &PhaseGrid, mut weights: Vec<f64>) -> Result<Self> {
        let mut total = 0.0;
        let mut c = 0.0;
        let mut s = 0.0;
        for ((w, ck), sk) in weights.iter().zip(grid.cos_table()).zip(grid.sin_table()) {
            total += w;
            c += w * ck;
            s += w * sk;
        }
        let mass = grid.spacing() * total;
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::DegenerateUpdate);
        }
        let scale = 1.0 / mass;
        weights.iter_mut().for_each(|w| *w *= scale);
        Ok(Self {
            grid: grid.clone(),
            repr: Repr::Density {
                weights,
                moment: (c / total, s / total),
            },
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// Node densities, or `None` for a point mass.
    pub fn weights(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Density { weights, .. } => Some(weights),
            Repr::Delta { .. } => None,
        }
    }

    pub fn delta_angle(&self) -> Option<f64> {
        match self.repr {
            Repr::Delta { lambda0 } => Some(lambda0),
            Repr::Density { .. } => None,
        }
    }

    pub fn is_delta(&self) -> bool {
        self.delta_angle().is_some()
    }

    /// `∫ g(λ) dλ`; 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        match &self.repr {
            Repr::Density { weights, .. } => self.grid.integrate(weights),
            Repr::Delta { .. } => 1.0,
        }
    }

    /// First trigonometric moment `(∫ g cos λ, ∫ g sin λ)`.
    pub fn first_moment(&self) -> (f64, f64) {
        match self.repr {
            Repr::Density { moment, .. } => moment,
            Repr::Delta { lambda0 } => (lambda0.cos(), lambda0.sin()),
        }
    }

    /// `∫ g(λ) cos(λ − φ) dλ`.
    pub fn mean_cos(&self, phi: f64) -> f64 {
        match self.repr {
            Repr::Density { moment: (c, s), .. } => c * phi.cos() + s * phi.sin(),
            Repr::Delta { lambda0 } => (lambda0 - angle::reduce(phi)).cos(),
        }
    }

    /// Probability of `+1` along axis `phi`.
    pub fn prob_plus(&self, phi: f64) -> f64 {
        match self.repr {
            Repr::Density { .. } => (0.5 * (1.0 + self.mean_cos(phi))).clamp(0.0, 1.0),
            Repr::Delta { lambda0 } => (0.5 * (lambda0 - angle::reduce(phi))).cos().powi(2),
        }
    }

    /// `1 − prob_plus(phi)`.
    pub fn prob_minus(&self, phi: f64) -> f64 {
        1.0 - self.prob_plus(phi)
    }

    /// Probability of `outcome` along `phi`. Equal to [`Self::prob_plus`] or
    /// [`Self::prob_minus`] up to rounding; for point masses the `−1` branch
    /// is evaluated as `sin²((λ₀ − φ)/2)` to keep relative accuracy when it
    /// is tiny.
    pub fn prob(&self, phi: f64, outcome: Outcome) -> f64 {
        match (outcome, &self.repr) {
            (Outcome::Plus, _) => self.prob_plus(phi),
            (Outcome::Minus, &Repr::Delta { lambda0 }) => {
                (0.5 * (lambda0 - angle::reduce(phi))).sin().powi(2)
            }
            (Outcome::Minus, Repr::Density { .. }) => self.prob_minus(phi),
        }
    }

    /// Posterior after observing `outcome` along `phi`.
    pub fn update(&self, phi: f64, outcome: Outcome) -> Result<Self> {
        let phi = angle::reduce(phi);
        match &self.repr {
            Repr::Delta { lambda0 } => {
                if likelihood((lambda0 - phi).cos(), outcome) == 0.0 {
                    return Err(Error::ImpossibleOutcome {
                        lambda0: *lambda0,
                        phi,
                        eta: outcome.into(),
                    });
                }
                Ok(self.clone())
            }
            Repr::Density { weights, .. } => {
                let (cp, sp) = (phi.cos(), phi.sin());
                let grid = &self.grid;
                let next = weights
                    .iter()
                    .zip(grid.cos_table())
                    .zip(grid.sin_table())
                    .map(|((w, ck), sk)| w * likelihood(ck * cp + sk * sp, outcome))
                    .collect();
                Self::normalized(grid, next)
            }
        }
    }

    /// Draws `η` along `phi`; consumes exactly one uniform variate.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, phi: f64, rng: &mut R) -> Outcome {
        let u: f64 = rng.gen();
        if u < self.prob_plus(phi) {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn circular_stats(&self) -> CircularStats {
        let (c, s) = self.first_moment();
        CircularStats::from_moment(c, s)
    }

    /// Writes `lambda,density` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let weights = self.weights().ok_or_else(|| {
            Error::Unsupported("a point distribution has no density to export".into())
        })?;
        writeln!(out, "lambda,density")?;
        for (k, w) in weights.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.grid.node(k), w)?;
        }
        Ok(())
    }
}
