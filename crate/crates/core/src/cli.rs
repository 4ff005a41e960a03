//! Command-line front end.
//!
//! Exit codes: `0` success, `1` invalid input (including usage errors),
//! `2` runtime failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::engine::{enumerate_outcomes, fewbody_enumerate, MeasurementSpec, Party};
use crate::error::{Error, Result};
use crate::harness::export::{
    write_json, write_ledger_csv, write_records_csv, write_rows_csv, write_sequences_csv,
    write_sequences_json, TrajectoryReport,
};
use crate::harness::{
    execute_trajectory, resolve_output, run_ensemble_with, Execution, ExperimentConfig, Format,
    PlanSpec, StateSpec, SCHEMA_VERSION,
};
use crate::phase_dist::{Outcome, PhaseDistribution};
use crate::protocols::{posterior_from_series, SeriesResult};
use crate::states::InitialState;

#[derive(Debug, Parser)]
#[command(
    name = "spinphase",
    version,
    about = "Sequential spin measurements on two-mode condensates"
)]
struct Cli {
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Phase grid size K (overrides the config).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Output file; stdout when absent. Relative paths honour SPINPHASE_OUT_DIR.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PartyArg {
    Alice,
    Bob,
}

impl From<PartyArg> for Party {
    fn from(p: PartyArg) -> Self {
        match p {
            PartyArg::Alice => Party::Alice,
            PartyArg::Bob => Party::Bob,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StateArg {
    DoubleFock,
    PhaseState,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// TOML experiment config; defaults to Alice's 300 + 300 two-stage run.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trajectory and write its records or report.
    Run {
        #[command(flatten)]
        config: ConfigArg,
        /// Trajectory index within the ensemble.
        #[arg(long, default_value_t = 0)]
        trajectory: usize,
        #[arg(long)]
        snapshot_every: Option<usize>,
        /// Directory receiving one density CSV per snapshot.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        /// Write this party's ledger instead of the records (CSV only).
        #[arg(long, value_enum)]
        ledger: Option<PartyArg>,
    },
    /// Run a seeded ensemble and write rows and aggregates.
    Ensemble {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        ensemble_size: Option<usize>,
        /// Run trajectories on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Exact probability oracles.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// z-axis measurements on a GHZ state.
    Ghz {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: usize,
    },
    /// Write the final phase density of one trajectory as `lambda,density`.
    ExportDist {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 0)]
        trajectory: usize,
        /// Skip sampling and condition the prior on observed counts,
        /// `PHI:N_PLUS:N_TOTAL`; repeatable.
        #[arg(long, value_parser = parse_series, allow_hyphen_values = true)]
        series: Vec<SeriesResult>,
    },
}

fn parse_series(text: &str) -> std::result::Result<SeriesResult, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [phi, n_plus, n_total] = parts.as_slice() else {
        return Err("expected PHI:N_PLUS:N_TOTAL".into());
    };
    let phi: f64 = phi.parse().map_err(|e| format!("phi: {e}"))?;
    let n_plus: usize = n_plus.parse().map_err(|e| format!("n_plus: {e}"))?;
    let n_total: usize = n_total.parse().map_err(|e| format!("n_total: {e}"))?;
    SeriesResult::new(phi, n_plus, n_total).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Probabilities of all outcome sequences for the given axes.
    Enumerate {
        /// Comma-separated measurement angles.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        phi: Vec<f64>,
        #[arg(long, value_enum, default_value = "double-fock")]
        state: StateArg,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda0: f64,
        /// Total particle number of a phase state.
        #[arg(long, default_value_t = 200_000)]
        n_total: u64,
    },
    /// Exact finite-N probabilities for a double Fock state.
    Fewbody {
        #[arg(long)]
        n_alpha: u64,
        #[arg(long)]
        n_beta: u64,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        phi: Vec<f64>,
    },
}

#[derive(Serialize)]
struct GhzReport<'a> {
    schema_version: u32,
    seed: u64,
    n: u64,
    outcomes: &'a [Outcome],
    all_equal: bool,
}

#[derive(Serialize)]
struct DensityReport {
    schema_version: u32,
    lambda: Vec<f64>,
    density: Vec<f64>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

struct Sink {
    out: Option<PathBuf>,
    format: Format,
}

impl Sink {
    fn emit(
        &self,
        dir: Option<&Path>,
        body: impl FnOnce(&mut dyn Write) -> Result<()>,
    ) -> Result<()> {
        match &self.out {
            Some(path) => {
                let path = resolve_output(path, dir);
                create_parent(&path)?;
                let mut w = BufWriter::new(File::create(&path)?);
                body(&mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                body(&mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => Ok(std::fs::create_dir_all(p)?),
        _ => Ok(()),
    }
}

fn load_config(arg: &ConfigArg, cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &arg.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::alice_two_stage(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(grid) = cli.grid {
        cfg.grid = grid;
    }
    if let Some(format) = cli.format {
        cfg.output.format = format.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn check_index(cfg: &ExperimentConfig, index: usize) -> Result<()> {
    if index >= cfg.ensemble_size {
        return Err(Error::Config {
            field: "trajectory".into(),
            message: format!(
                "index {index} is outside the ensemble of {}",
                cfg.ensemble_size
            ),
        });
    }
    Ok(())
}

fn specs(phi: &[f64]) -> Vec<MeasurementSpec> {
    phi.iter()
        .map(|&p| MeasurementSpec::new(Party::Alice, p))
        .collect()
}

fn dispatch(cli: Cli) -> Result<()> {
    let fixed_format = |default: Format| cli.format.map(Format::from).unwrap_or(default);
    match &cli.command {
        Command::Run {
            config,
            trajectory,
            snapshot_every,
            snapshots,
            ledger,
        } => {
            let mut cfg = load_config(config, &cli)?;
            if snapshot_every.is_some() {
                cfg.snapshot_every = *snapshot_every;
                cfg.validate()?;
            }
            check_index(&cfg, *trajectory)?;
            let sink = Sink {
                out: cli.out.clone(),
                format: cfg.output.format,
            };
            let outcome = execute_trajectory(&cfg, *trajectory)?;
            let dir = cfg.output.dir.as_deref();
            let Some(result) = &outcome.trajectory else {
                let outcomes = outcome.ghz_outcomes.as_deref().unwrap_or_default();
                return write_ghz(
                    &sink,
                    dir,
                    cfg.seed,
                    cfg.state.n_total.unwrap_or(0),
                    outcomes,
                );
            };
            if let Some(snap_dir) = snapshots {
                let snap_dir = resolve_output(snap_dir, dir);
                std::fs::create_dir_all(&snap_dir)?;
                for (count, dist) in &result.snapshots {
                    let file = File::create(snap_dir.join(format!("snapshot_{count:06}.csv")))?;
                    let mut w = BufWriter::new(file);
                    dist.write_csv(&mut w)?;
                    w.flush()?;
                }
            }
            sink.emit(dir, |w| match (sink.format, ledger) {
                (Format::Csv, Some(party)) => write_ledger_csv(result.ledger((*party).into()), w),
                (Format::Csv, None) => write_records_csv(&result.records, w),
                (Format::Json, _) => {
                    let report = TrajectoryReport::new(&outcome).expect("trajectory present");
                    write_json(&report, w)
                }
            })
        }
        Command::Ensemble {
            config,
            ensemble_size,
            serial,
        } => {
            let mut cfg = load_config(config, &cli)?;
            if let Some(m) = ensemble_size {
                cfg.ensemble_size = *m;
                cfg.validate()?;
            }
            let execution = if *serial {
                Execution::Serial
            } else {
                Execution::Parallel
            };
            let summary = run_ensemble_with(&cfg, execution)?;
            let sink = Sink {
                out: cli.out.clone(),
                format: cfg.output.format,
            };
            sink.emit(cfg.output.dir.as_deref(), |w| match sink.format {
                Format::Csv => write_rows_csv(&summary.rows, w),
                Format::Json => write_json(&summary, w),
            })
        }
        Command::Oracle(OracleCommand::Enumerate {
            phi,
            state,
            lambda0,
            n_total,
        }) => {
            let initial = match state {
                StateArg::DoubleFock => {
                    InitialState::double_fock(n_total.div_ceil(2), n_total / 2)?
                }
                StateArg::PhaseState => InitialState::phase_state(*lambda0, *n_total)?,
            };
            let table = enumerate_outcomes(&initial, &specs(phi))?;
            write_table(&cli, fixed_format(Format::Csv), &table)
        }
        Command::Oracle(OracleCommand::Fewbody {
            n_alpha,
            n_beta,
            phi,
        }) => {
            let table = fewbody_enumerate(*n_alpha, *n_beta, &specs(phi))?;
            write_table(&cli, fixed_format(Format::Csv), &table)
        }
        Command::Ghz { n, p } => {
            let mut cfg = ExperimentConfig::new(StateSpec::ghz(*n), PlanSpec::Ghz { count: *p });
            cfg.seed = cli.seed.unwrap_or(0);
            cfg.validate()?;
            let outcome = execute_trajectory(&cfg, 0)?;
            let sink = Sink {
                out: cli.out.clone(),
                format: fixed_format(Format::Csv),
            };
            let outcomes = outcome.ghz_outcomes.as_deref().unwrap_or_default();
            write_ghz(&sink, None, cfg.seed, *n, outcomes)
        }
        Command::ExportDist {
            config,
            trajectory,
            series,
        } => {
            let cfg = load_config(config, &cli)?;
            let dist = if series.is_empty() {
                check_index(&cfg, *trajectory)?;
                match execute_trajectory(&cfg, *trajectory)?.trajectory {
                    Some(t) => t.final_distribution,
                    None => {
                        return Err(Error::Unsupported("GHZ runs have no phase density".into()))
                    }
                }
            } else {
                let prior = cfg
                    .initial_state()?
                    .prior_distribution(&cfg.phase_grid()?)?;
                posterior_from_series(&prior, series)?
            };
            let sink = Sink {
                out: cli.out.clone(),
                format: fixed_format(Format::Csv),
            };
            sink.emit(cfg.output.dir.as_deref(), |w| match sink.format {
                Format::Csv => dist.write_csv(w),
                Format::Json => write_json(&density_report(&dist)?, w),
            })
        }
    }
}

fn density_report(dist: &PhaseDistribution) -> Result<DensityReport> {
    let weights = dist
        .weights()
        .ok_or_else(|| Error::Unsupported("a point mass has no density".into()))?;
    Ok(DensityReport {
        schema_version: SCHEMA_VERSION,
        lambda: dist.grid().nodes().collect(),
        density: weights.to_vec(),
    })
}

fn write_table(cli: &Cli, format: Format, table: &[(Vec<Outcome>, f64)]) -> Result<()> {
    let sink = Sink {
        out: cli.out.clone(),
        format,
    };
    sink.emit(None, |w| match sink.format {
        Format::Csv => write_sequences_csv(table, w),
        Format::Json => write_sequences_json(table, w),
    })
}

fn write_ghz(
    sink: &Sink,
    dir: Option<&Path>,
    seed: u64,
    n: u64,
    outcomes: &[Outcome],
) -> Result<()> {
    let all_equal = outcomes.windows(2).all(|w| w[0] == w[1]);
    sink.emit(dir, |w| match sink.format {
        Format::Csv => {
            writeln!(w, "index,eta")?;
            for (i, o) in outcomes.iter().enumerate() {
                writeln!(w, "{i},{}", i8::from(*o))?;
            }
            Ok(())
        }
        Format::Json => write_json(
            &GhzReport {
                schema_version: SCHEMA_VERSION,
                seed,
                n,
                outcomes,
                all_equal,
            },
            w,
        ),
    })
}
