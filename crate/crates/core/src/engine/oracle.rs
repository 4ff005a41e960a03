//! Exact joint probabilities of outcome sequences.
//!
//! [`joint_probability`] integrates the product of `cos²((λ−φ)/2)` and
//! `sin²((λ−φ)/2)` factors over a flat `λ` directly. [`chain_probability`]
//! instead multiplies one-step predictive probabilities along the running
//! posterior. Both use the smallest grid that integrates a degree-`P`
//! trigonometric polynomial exactly, so they agree to rounding.

use crate::error::{Error, Result};
use crate::phase_dist::{Outcome, PhaseDistribution, PhaseGrid};
use crate::states::InitialState;

use super::{MeasurementRecord, MeasurementSpec};

/// Longest plan [`enumerate_outcomes`] accepts.
pub const ENUMERATION_CAP: usize = 20;

fn factor(lambda: f64, record: &MeasurementRecord) -> f64 {
    let half = 0.5 * (lambda - record.spec.phi);
    match record.outcome {
        Outcome::Plus => half.cos().powi(2),
        Outcome::Minus => half.sin().powi(2),
    }
}

fn product_at(lambda: f64, records: &[MeasurementRecord]) -> f64 {
    records.iter().map(|r| factor(lambda, r)).product()
}

fn ghz_unsupported() -> Error {
    Error::Unsupported("GHZ sequences only exist along z; use ghz_sequence_probability".into())
}

/// Probability of the whole record list.
pub fn joint_probability(state: &InitialState, records: &[MeasurementRecord]) -> Result<f64> {
    match *state {
        InitialState::DoubleFock { .. } => {
            let grid = PhaseGrid::exact_for(records.len());
            let values: Vec<f64> = grid.nodes().map(|l| product_at(l, records)).collect();
            Ok((grid.integrate(&values) / std::f64::consts::TAU).clamp(0.0, 1.0))
        }
        InitialState::PhaseState { lambda0, .. } => Ok(product_at(lambda0, records)),
        InitialState::Ghz { .. } => Err(ghz_unsupported()),
    }
}

fn chain_steps(state: &InitialState, records: &[MeasurementRecord]) -> Result<Vec<f64>> {
    if matches!(state, InitialState::Ghz { .. }) {
        return Err(ghz_unsupported());
    }
    let grid = PhaseGrid::exact_for(records.len());
    let mut dist: PhaseDistribution = state.prior_distribution(&grid)?;
    let mut steps = Vec::with_capacity(records.len());
    for r in records {
        let p = dist.prob(r.spec.phi, r.outcome);
        steps.push(p);
        if p == 0.0 {
            break;
        }
        dist = dist.update(r.spec.phi, r.outcome)?;
    }
    Ok(steps)
}

/// Product of one-step predictive probabilities along the posterior.
pub fn chain_probability(state: &InitialState, records: &[MeasurementRecord]) -> Result<f64> {
    Ok(chain_steps(state, records)?.into_iter().product())
}

/// Natural log of [`chain_probability`], usable for long sequences.
pub fn chain_log_probability(state: &InitialState, records: &[MeasurementRecord]) -> Result<f64> {
    Ok(chain_steps(state, records)?.into_iter().map(f64::ln).sum())
}

/// Every `±` sequence for `specs` with its joint probability, in
/// lexicographic order with `+` before `−`.
pub fn enumerate_outcomes(
    state: &InitialState,
    specs: &[MeasurementSpec],
) -> Result<Vec<(Vec<Outcome>, f64)>> {
    if specs.len() > ENUMERATION_CAP {
        return Err(Error::TooManyMeasurements {
            len: specs.len(),
            cap: ENUMERATION_CAP,
        });
    }
    let p = specs.len();
    (0..1usize << p)
        .map(|mask| {
            let outcomes: Vec<Outcome> = (0..p)
                .map(|i| {
                    if mask >> (p - 1 - i) & 1 == 0 {
                        Outcome::Plus
                    } else {
                        Outcome::Minus
                    }
                })
                .collect();
            let records = MeasurementRecord::sequence(specs, &outcomes);
            joint_probability(state, &records).map(|prob| (outcomes, prob))
        })
        .collect()
}

/// `+`/`-` string for an outcome sequence.
pub fn format_sequence(outcomes: &[Outcome]) -> String {
    outcomes.iter().map(|o| o.symbol()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Party;
    use proptest::prelude::*;
    use std::f64::consts::TAU;
    use Outcome::{Minus, Plus};

    fn df() -> InitialState {
        InitialState::double_fock(1000, 1000).unwrap()
    }

    fn recs(items: &[(f64, Outcome)]) -> Vec<MeasurementRecord> {
        items
            .iter()
            .enumerate()
            .map(|(i, (phi, o))| MeasurementRecord::new(i, Party::Alice, *phi, *o))
            .collect()
    }

    #[test]
    fn closed_form_pairs() {
        // ∫cos⁴(λ/2) dλ/2π = 3/8, ∫cos²(λ/2)sin²(λ/2) dλ/2π = 1/8
        let pp = joint_probability(&df(), &recs(&[(0.0, Plus), (0.0, Plus)])).unwrap();
        let pm = joint_probability(&df(), &recs(&[(0.0, Plus), (0.0, Minus)])).unwrap();
        assert!((pp - 0.375).abs() < 1e-12);
        assert!((pm - 0.125).abs() < 1e-12);
        let chain = chain_probability(&df(), &recs(&[(0.0, Plus), (0.0, Plus)])).unwrap();
        assert!((chain - 0.375).abs() < 1e-12);
        assert_eq!(
            chain_probability(&df(), &recs(&[(1.3, Minus)])).unwrap(),
            0.5
        );
    }

    #[test]
    fn phase_state_factorizes() {
        let s = InitialState::phase_state(0.7, 100).unwrap();
        let aligned = recs(&[(0.7, Plus); 5]);
        assert_eq!(joint_probability(&s, &aligned).unwrap(), 1.0);
        let r = recs(&[(0.0, Plus), (2.0, Minus), (4.0, Plus)]);
        let expected =
            (0.35f64).cos().powi(2) * (-0.65f64).sin().powi(2) * (-1.65f64).cos().powi(2);
        let joint = joint_probability(&s, &r).unwrap();
        assert!((joint - expected).abs() < 1e-15);
        assert!((chain_probability(&s, &r).unwrap() - expected).abs() < 1e-15);
        let impossible = recs(&[(0.7, Minus), (0.0, Plus)]);
        assert_eq!(chain_probability(&s, &impossible).unwrap(), 0.0);
    }

    #[test]
    fn ghz_is_unsupported() {
        let s = InitialState::ghz(4).unwrap();
        assert!(matches!(
            joint_probability(&s, &[]),
            Err(Error::Unsupported(_))
        ));
        assert!(chain_probability(&s, &[]).is_err());
    }

    #[test]
    fn enumeration_of_two_aligned_measurements() {
        let specs = [MeasurementSpec::new(Party::Alice, 0.0); 2];
        let table = enumerate_outcomes(&df(), &specs).unwrap();
        let expected = [("++", 0.375), ("+-", 0.125), ("-+", 0.125), ("--", 0.375)];
        assert_eq!(table.len(), 4);
        for ((seq, p), (label, q)) in table.iter().zip(expected) {
            assert_eq!(format_sequence(seq), label);
            assert!((p - q).abs() < 1e-12);
        }
        let single = enumerate_outcomes(&df(), &[MeasurementSpec::new(Party::Bob, 2.2)]).unwrap();
        assert!(single.iter().all(|(_, p)| (p - 0.5).abs() < 1e-15));
    }

    #[test]
    fn enumeration_cap() {
        let specs = vec![MeasurementSpec::new(Party::Alice, 0.0); ENUMERATION_CAP + 1];
        assert!(matches!(
            enumerate_outcomes(&df(), &specs),
            Err(Error::TooManyMeasurements { len: 21, cap: 20 })
        ));
    }

    #[test]
    fn joint_is_order_symmetric() {
        let r = recs(&[(0.3, Plus), (1.9, Minus), (4.4, Plus), (5.0, Plus)]);
        let mut rev = r.clone();
        rev.reverse();
        let a = joint_probability(&df(), &r).unwrap();
        let b = joint_probability(&df(), &rev).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    fn outcome() -> impl Strategy<Value = Outcome> {
        prop_oneof![Just(Plus), Just(Minus)]
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn chain_matches_joint(items in prop::collection::vec((0.0..TAU, outcome()), 1..=10),
                               lambda0 in 0.0..TAU) {
            let r = recs(&items);
            for s in [df(), InitialState::phase_state(lambda0, 100).unwrap()] {
                let joint = joint_probability(&s, &r).unwrap();
                let chain = chain_probability(&s, &r).unwrap();
                prop_assert!((joint - chain).abs() <= 1e-10 * joint.max(1e-300), "{} vs {}", joint, chain);
            }
        }

        #[test]
        fn enumeration_sums_to_one(phis in prop::collection::vec(0.0..TAU, 1..=8), lambda0 in 0.0..TAU) {
            let specs: Vec<_> = phis.iter().map(|p| MeasurementSpec::new(Party::Alice, *p)).collect();
            for s in [df(), InitialState::phase_state(lambda0, 100).unwrap()] {
                let total: f64 = enumerate_outcomes(&s, &specs).unwrap().iter().map(|(_, p)| p).sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }
}
