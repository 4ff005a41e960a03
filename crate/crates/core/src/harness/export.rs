//! CSV and JSON writers for trajectories, ledgers, oracles and ensembles.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ensemble::{TrajectoryOutcome, TrajectoryRow};
use super::SCHEMA_VERSION;
use crate::engine::{format_sequence, MeasurementRecord, Party};
use crate::error::Result;
use crate::ledger::{region_polarization, ApparatusLedger, LedgerSummary, RegionPolarization};
use crate::phase_dist::{CircularStats, Outcome};
use crate::protocols::{SeriesResult, SignedEstimate};

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_records_csv<W: Write>(records: &[MeasurementRecord], mut out: W) -> Result<()> {
    writeln!(out, "index,party,phi,eta")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{}",
            r.index,
            r.spec.party,
            r.spec.phi,
            i8::from(r.outcome)
        )?;
    }
    Ok(())
}

pub fn write_ledger_csv<W: Write>(ledger: &ApparatusLedger, mut out: W) -> Result<()> {
    writeln!(out, "index,phi,eta,pre_expectation,recoil")?;
    for e in ledger.entries() {
        writeln!(
            out,
            "{},{},{},{},{}",
            e.index,
            e.phi,
            i8::from(e.outcome),
            e.pre_expectation,
            e.recoil
        )?;
    }
    Ok(())
}

pub fn write_sequences_csv<W: Write>(table: &[(Vec<Outcome>, f64)], mut out: W) -> Result<()> {
    writeln!(out, "sequence,probability")?;
    for (seq, p) in table {
        writeln!(out, "{},{}", format_sequence(seq), p)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SequenceRow {
    sequence: String,
    probability: f64,
}

pub fn write_sequences_json<W: Write>(table: &[(Vec<Outcome>, f64)], out: W) -> Result<()> {
    let rows: Vec<_> = table
        .iter()
        .map(|(s, p)| SequenceRow {
            sequence: format_sequence(s),
            probability: *p,
        })
        .collect();
    write_json(&rows, out)
}

pub fn write_rows_csv<W: Write>(rows: &[TrajectoryRow], mut out: W) -> Result<()> {
    let mut header = vec!["index", "seed", "measurements"];
    let party_cols = [
        "measurements",
        "n_plus",
        "ledger_x",
        "ledger_y",
        "ledger_magnitude",
        "region_x",
        "region_y",
        "region_magnitude",
        "estimate",
    ];
    let party_header: Vec<String> = ["alice", "bob"]
        .iter()
        .flat_map(|p| party_cols.iter().map(move |c| format!("{p}_{c}")))
        .collect();
    header.extend(party_header.iter().map(String::as_str));
    header.extend([
        "final_mean_direction",
        "final_concentration",
        "agreement_distance",
        "confirmation_n_plus",
        "confirmation_n_total",
        "ghz_first",
        "ghz_all_equal",
    ]);
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        let mut cells = vec![
            r.index.to_string(),
            r.seed.to_string(),
            r.measurements.to_string(),
        ];
        for p in [&r.alice, &r.bob] {
            match p {
                Some(p) => cells.extend([
                    p.measurements.to_string(),
                    p.n_plus.to_string(),
                    p.ledger[0].to_string(),
                    p.ledger[1].to_string(),
                    p.ledger_magnitude.to_string(),
                    p.region[0].to_string(),
                    p.region[1].to_string(),
                    p.region_magnitude.to_string(),
                    opt(p.estimate),
                ]),
                None => cells.extend(std::iter::repeat_n(String::new(), party_cols.len())),
            }
        }
        cells.extend([
            opt(r.final_stats.and_then(|f| f.mean_direction)),
            opt(r.final_stats.map(|f| f.concentration)),
            opt(r.agreement_distance),
            opt(r.confirmation.map(|c| c.n_plus)),
            opt(r.confirmation.map(|c| c.n_total)),
            opt(r.ghz_first.map(i8::from)),
            opt(r.ghz_all_equal),
        ]);
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Ledger totals and region polarizations per party.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub schema_version: u32,
    pub ledgers: Vec<LedgerSummary>,
    pub regions: Vec<RegionPolarization>,
}

/// Full single-trajectory report for `run --format json`.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryReport<'a> {
    pub schema_version: u32,
    pub index: usize,
    pub seed: u64,
    pub records: &'a [MeasurementRecord],
    pub ledger: LedgerReport,
    pub final_stats: CircularStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alice_estimate: Option<&'a SignedEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bob_estimate: Option<&'a SignedEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confirmation: Option<SeriesResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aligned_axis: Option<f64>,
}

impl LedgerReport {
    pub fn new(records: &[MeasurementRecord], ledgers: [&ApparatusLedger; 2]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            ledgers: ledgers.iter().map(|l| l.summary()).collect(),
            regions: [Party::Alice, Party::Bob]
                .into_iter()
                .map(|p| region_polarization(p, records))
                .collect(),
        }
    }
}

impl<'a> TrajectoryReport<'a> {
    /// `None` for GHZ outcomes, which have no trajectory.
    pub fn new(o: &'a TrajectoryOutcome) -> Option<Self> {
        let t = o.trajectory.as_ref()?;
        Some(Self {
            schema_version: SCHEMA_VERSION,
            index: o.index,
            seed: o.seed,
            records: &t.records,
            ledger: LedgerReport::new(&t.records, [&t.alice_ledger, &t.bob_ledger]),
            final_stats: t.final_distribution.circular_stats(),
            alice_estimate: o.alice_estimate.as_ref(),
            bob_estimate: o.bob_estimate.as_ref(),
            confirmation: o.confirmation,
            aligned_axis: o.aligned_axis,
        })
    }
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
