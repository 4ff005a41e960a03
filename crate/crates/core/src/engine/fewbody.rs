//! Exact finite-N probabilities for sequential destructive spin detection.
//!
//! The two-mode state is a vector of amplitudes over occupations
//! `(n₁, n₂)` with fixed total, indexed by `n₁`. Detecting one particle
//! with outcome `η` along `φ` applies
//! `a_{η,φ} = (e^{−iφ/2} a₁ + η e^{iφ/2} a₂)/√2`. Since
//! `Σ_η a†_{η,φ} a_{η,φ} = N̂`, dividing by `√n` at each step keeps the
//! outcome probabilities normalized; the squared norm after the last step
//! is the sequence probability. This is a validation tool for the classical
//! phase picture, which it approaches as `N → ∞` at fixed `P`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase_dist::Outcome;

use super::{MeasurementRecord, MeasurementSpec};

pub const FEWBODY_MAX_PARTICLES: u64 = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct FewBodyState {
    /// Amplitude of `|n₁, particles − n₁⟩` at index `n₁`.
    amplitudes: Vec<Complex64>,
}

impl FewBodyState {
    pub fn double_fock(n_alpha: u64, n_beta: u64) -> Self {
        let n = (n_alpha + n_beta) as usize;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n + 1];
        amplitudes[n_alpha as usize] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn particles(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Applies `a_{η,φ}/√n`; the squared norm drops by the conditional
    /// probability of `η`.
    pub fn detect(&self, phi: f64, outcome: Outcome) -> Result<Self> {
        let n = self.particles();
        if n == 0 {
            return Err(Error::Budget {
                requested: 1,
                available: 0,
            });
        }
        let half = Complex64::from_polar(1.0, -0.5 * phi);
        let first = half / (2.0 * n as f64).sqrt();
        let second = half.conj() * outcome.sign() / (2.0 * n as f64).sqrt();
        // new |m, n−1−m⟩ collects a₁ from |m+1, n−1−m⟩ and a₂ from |m, n−m⟩
        let amplitudes = (0..n)
            .map(|m| {
                let from_a1 = self.amplitudes[m + 1] * ((m + 1) as f64).sqrt();
                let from_a2 = self.amplitudes[m] * ((n - m) as f64).sqrt();
                first * from_a1 + second * from_a2
            })
            .collect();
        Ok(Self { amplitudes })
    }
}

fn check_sizes(n_alpha: u64, n_beta: u64, p: usize) -> Result<()> {
    let n = n_alpha + n_beta;
    if n == 0 || n > FEWBODY_MAX_PARTICLES {
        return Err(Error::config(
            "n_alpha + n_beta",
            format!("must lie in 1..={FEWBODY_MAX_PARTICLES}, got {n}"),
        ));
    }
    if p as u64 > n {
        return Err(Error::Budget {
            requested: p,
            available: n as usize,
        });
    }
    Ok(())
}

/// Exact probability of a record sequence for a double Fock state of
/// `n_alpha + n_beta` particles.
pub fn fewbody_joint_probability(
    n_alpha: u64,
    n_beta: u64,
    records: &[MeasurementRecord],
) -> Result<f64> {
    check_sizes(n_alpha, n_beta, records.len())?;
    let state = records
        .iter()
        .try_fold(FewBodyState::double_fock(n_alpha, n_beta), |s, r| {
            s.detect(r.spec.phi, r.outcome)
        })?;
    Ok(state.norm_sqr())
}

/// All `2^P` sequences with their exact probabilities, `+` before `−`.
/// Shares prefixes, so the cost is `O(2^P · N)`.
pub fn fewbody_enumerate(
    n_alpha: u64,
    n_beta: u64,
    specs: &[MeasurementSpec],
) -> Result<Vec<(Vec<Outcome>, f64)>> {
    check_sizes(n_alpha, n_beta, specs.len())?;
    if specs.len() > super::ENUMERATION_CAP {
        return Err(Error::TooManyMeasurements {
            len: specs.len(),
            cap: super::ENUMERATION_CAP,
        });
    }
    let mut out = Vec::with_capacity(1 << specs.len());
    let mut prefix = Vec::with_capacity(specs.len());
    descend(
        &FewBodyState::double_fock(n_alpha, n_beta),
        specs,
        &mut prefix,
        &mut out,
    )?;
    Ok(out)
}

fn descend(
    state: &FewBodyState,
    specs: &[MeasurementSpec],
    prefix: &mut Vec<Outcome>,
    out: &mut Vec<(Vec<Outcome>, f64)>,
) -> Result<()> {
    let Some((spec, rest)) = specs.split_first() else {
        out.push((prefix.clone(), state.norm_sqr()));
        return Ok(());
    };
    for outcome in [Outcome::Plus, Outcome::Minus] {
        let next = state.detect(spec.phi, outcome)?;
        prefix.push(outcome);
        descend(&next, rest, prefix, out)?;
        prefix.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{joint_probability, Party};
    use crate::states::InitialState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn specs(phis: &[f64]) -> Vec<MeasurementSpec> {
        phis.iter()
            .map(|p| MeasurementSpec::new(Party::Alice, *p))
            .collect()
    }

    #[test]
    fn two_bosons_bunch() {
        // a₊² |1,1⟩ ∝ |0,0⟩ and a₊a₋ |1,1⟩ = 0
        let table = fewbody_enumerate(1, 1, &specs(&[0.0, 0.0])).unwrap();
        let expected = [0.5, 0.0, 0.0, 0.5];
        for ((_, p), q) in table.iter().zip(expected) {
            assert!((p - q).abs() < 1e-12, "{p} vs {q}");
        }
    }

    #[test]
    fn single_detection_weights_populations() {
        for (a, b) in [(500, 500), (3, 1), (1, 4)] {
            let r = [MeasurementRecord::new(0, Party::Alice, 0.9, Outcome::Plus)];
            let p = fewbody_joint_probability(a, b, &r).unwrap();
            assert!((p - 0.5).abs() < 1e-12, "({a},{b}) gave {p}");
        }
    }

    #[test]
    fn exhaustive_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=12u64 {
            for n_alpha in 0..=n {
                let p = (n as usize).min(6);
                let phis: Vec<f64> = (0..p).map(|_| rng.gen::<f64>() * TAU).collect();
                let n_beta = n - n_alpha;
                if n_alpha + n_beta == 0 {
                    continue;
                }
                let total: f64 = fewbody_enumerate(n_alpha, n_beta, &specs(&phis))
                    .unwrap()
                    .iter()
                    .map(|(_, p)| p)
                    .sum();
                assert!(
                    (total - 1.0).abs() < 1e-9,
                    "N={n} n_alpha={n_alpha}: {total}"
                );
            }
        }
    }

    #[test]
    fn enumeration_matches_pointwise_evaluation() {
        let s = specs(&[0.2, 1.7, 3.1]);
        for (seq, p) in fewbody_enumerate(4, 3, &s).unwrap() {
            let r = MeasurementRecord::sequence(&s, &seq);
            assert!((fewbody_joint_probability(4, 3, &r).unwrap() - p).abs() < 1e-15);
        }
    }

    #[test]
    fn too_many_measurements() {
        let r: Vec<_> = (0..3)
            .map(|i| MeasurementRecord::new(i, Party::Alice, 0.0, Outcome::Plus))
            .collect();
        assert!(matches!(
            fewbody_joint_probability(1, 1, &r),
            Err(Error::Budget { .. })
        ));
        assert!(fewbody_joint_probability(60_000, 60_000, &r).is_err());
    }

    #[test]
    fn approaches_classical_phase_at_large_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phis: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * TAU).collect();
        let s = specs(&phis);
        let classical = InitialState::double_fock(1, 1).unwrap();
        let deviation = |n: u64| {
            fewbody_enumerate(n / 2, n / 2, &s)
                .unwrap()
                .iter()
                .map(|(seq, p)| {
                    let q = joint_probability(&classical, &MeasurementRecord::sequence(&s, seq))
                        .unwrap();
                    (p - q).abs() / q
                })
                .fold(0.0, f64::max)
        };
        let devs: Vec<f64> = [20, 200, 2000].into_iter().map(deviation).collect();
        assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
        assert!(devs[2] <= 0.01, "{devs:?}");
    }
}
