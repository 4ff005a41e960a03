//! Angular momentum handed to each measurement apparatus, in units of ħ.
//!
//! Before a measurement along `φ` the expected spin projection is
//! `⟨s_φ⟩ = ½ ∫ g(λ) cos(λ − φ) dλ` under the current phase distribution.
//! The outcome leaves the measured spin at `η/2`, so the apparatus takes
//! `recoil = −(η/2 − ⟨s_φ⟩)` along `u_φ = (cos φ, sin φ)`. For a phase state
//! this is the fixed-`λ₀` expectation; for a double Fock state it is
//! conditional on the measurement history, which reduces to the phase-state
//! value once the posterior is sharp.
//!
//! Ledgers only track transverse (x, y) components.

use serde::{Deserialize, Serialize};

use crate::engine::{MeasurementRecord, Party};
use crate::phase_dist::{Outcome, PhaseDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub index: usize,
    pub phi: f64,
    #[serde(rename = "eta")]
    pub outcome: Outcome,
    pub pre_expectation: f64,
    pub recoil: f64,
}

impl LedgerEntry {
    pub fn new(index: usize, phi: f64, outcome: Outcome, pre_expectation: f64) -> Self {
        Self {
            index,
            phi,
            outcome,
            pre_expectation,
            recoil: pre_expectation - 0.5 * outcome.sign(),
        }
    }

    /// Recoil as a transverse vector.
    pub fn vector(&self) -> [f64; 2] {
        [self.recoil * self.phi.cos(), self.recoil * self.phi.sin()]
    }
}

/// Expected spin projection along `phi` before measuring.
pub fn pre_expectation(d: &PhaseDistribution, phi: f64) -> f64 {
    0.5 * d.mean_cos(phi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApparatusLedger {
    party: Party,
    entries: Vec<LedgerEntry>,
    cumulative: [f64; 2],
}

impl ApparatusLedger {
    pub fn new(party: Party) -> Self {
        Self {
            party,
            entries: Vec::new(),
            cumulative: [0.0; 2],
        }
    }

    pub fn party(&self) -> Party {
        self.party
    }

    /// Books one measurement. `d_before` is the distribution immediately
    /// before it.
    pub fn record(
        &mut self,
        d_before: &PhaseDistribution,
        index: usize,
        phi: f64,
        outcome: Outcome,
    ) -> &LedgerEntry {
        let entry = LedgerEntry::new(index, phi, outcome, pre_expectation(d_before, phi));
        let [x, y] = entry.vector();
        self.cumulative[0] += x;
        self.cumulative[1] += y;
        self.entries.push(entry);
        self.entries.last().expect("just pushed")
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cumulative(&self) -> [f64; 2] {
        self.cumulative
    }

    pub fn magnitude(&self) -> f64 {
        self.cumulative[0].hypot(self.cumulative[1])
    }

    /// Cumulative vector over the first `count` entries.
    pub fn prefix_cumulative(&self, count: usize) -> [f64; 2] {
        self.entries[..count.min(self.entries.len())]
            .iter()
            .fold([0.0; 2], |[x, y], e| {
                let [dx, dy] = e.vector();
                [x + dx, y + dy]
            })
    }

    pub fn summary(&self) -> LedgerSummary {
        LedgerSummary {
            party: self.party,
            measurements: self.len(),
            cumulative: self.cumulative,
            magnitude: self.magnitude(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub party: Party,
    pub measurements: usize,
    pub cumulative: [f64; 2],
    pub magnitude: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoilStats {
    pub mean: f64,
    pub delta: f64,
}

/// Mean and rms spread of the total recoil over `p` identical measurements
/// on a phase state: `(0, ½ √P |sin(λ₀ − φ)|)`.
pub fn expected_recoil_stats(lambda0: f64, phi: f64, p: usize) -> RecoilStats {
    RecoilStats {
        mean: 0.0,
        delta: 0.5 * (p as f64).sqrt() * (lambda0 - phi).sin().abs(),
    }
}

/// Total measured spin `Σ (η/2) u_φ` in one party's region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionPolarization {
    pub party: Party,
    pub count: usize,
    pub vector: [f64; 2],
}

impl RegionPolarization {
    pub fn magnitude(&self) -> f64 {
        self.vector[0].hypot(self.vector[1])
    }

    /// Magnitude relative to full alignment, `|v| / (P/2)`.
    pub fn alignment(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.magnitude() / (0.5 * self.count as f64)
        }
    }
}

pub fn region_polarization(party: Party, records: &[MeasurementRecord]) -> RegionPolarization {
    records.iter().filter(|r| r.spec.party == party).fold(
        RegionPolarization {
            party,
            count: 0,
            vector: [0.0; 2],
        },
        |mut acc, r| {
            let half = 0.5 * r.outcome.sign();
            acc.count += 1;
            acc.vector[0] += half * r.spec.phi.cos();
            acc.vector[1] += half * r.spec.phi.sin();
            acc
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::MeasurementSpec;
    use crate::phase_dist::PhaseGrid;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn rec(index: usize, phi: f64, outcome: Outcome) -> MeasurementRecord {
        MeasurementRecord {
            spec: MeasurementSpec::new(Party::Bob, phi),
            outcome,
            index,
        }
    }

    #[test]
    fn aligned_phase_state_has_no_recoil() {
        let grid = PhaseGrid::new(16).unwrap();
        let d = PhaseDistribution::delta(&grid, 0.4);
        let mut ledger = ApparatusLedger::new(Party::Alice);
        let e = *ledger.record(&d, 0, 0.4, Outcome::Plus);
        assert_eq!(e.pre_expectation, 0.5);
        assert_eq!(e.recoil, 0.0);
        assert_eq!(ledger.magnitude(), 0.0);
    }

    #[test]
    fn flat_prior_recoil_is_half() {
        let d = PhaseDistribution::uniform(16).unwrap();
        let mut ledger = ApparatusLedger::new(Party::Alice);
        let e = *ledger.record(&d, 0, 1.0, Outcome::Plus);
        assert_eq!(e.pre_expectation, 0.0);
        assert_eq!(e.recoil, -0.5);
        assert!((ledger.magnitude() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cumulative_matches_entries() {
        let mut d = PhaseDistribution::uniform(64).unwrap();
        let mut ledger = ApparatusLedger::new(Party::Bob);
        for i in 0..30 {
            let phi = 0.37 * i as f64;
            let o = if i % 3 == 0 {
                Outcome::Minus
            } else {
                Outcome::Plus
            };
            let e = *ledger.record(&d, i, phi, o);
            assert!(e.recoil.abs() <= 1.0 + e.pre_expectation.abs());
            d = d.update(phi, o).unwrap();
        }
        let [x, y] = ledger.prefix_cumulative(ledger.len());
        let [cx, cy] = ledger.cumulative();
        assert!((x - cx).abs() < 1e-12 && (y - cy).abs() < 1e-12);
    }

    #[test]
    fn expected_recoil_spread() {
        assert!((expected_recoil_stats(FRAC_PI_2, 0.0, 100).delta - 5.0).abs() < 1e-12);
        assert_eq!(expected_recoil_stats(0.3, 0.3, 1000).delta, 0.0);
        assert!((expected_recoil_stats(FRAC_PI_6, 0.0, 400).delta - 5.0).abs() < 1e-12);
        assert_eq!(expected_recoil_stats(1.0, 0.0, 7).mean, 0.0);
    }

    #[test]
    fn region_polarization_sums_outcomes() {
        let records: Vec<_> = (0..100).map(|i| rec(i, 0.0, Outcome::Plus)).collect();
        let pol = region_polarization(Party::Bob, &records);
        assert_eq!(pol.vector, [50.0, 0.0]);
        assert_eq!(pol.alignment(), 1.0);
        assert_eq!(region_polarization(Party::Alice, &records).count, 0);

        let mixed: Vec<_> = (0..10)
            .map(|i| {
                rec(
                    i,
                    1.1,
                    if i % 2 == 0 {
                        Outcome::Plus
                    } else {
                        Outcome::Minus
                    },
                )
            })
            .collect();
        assert!(region_polarization(Party::Bob, &mixed).magnitude() < 1e-15);
    }
}
