//! Command implementations behind the `specklenoise` binary.

pub mod config;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use clap::{Parser, Subcommand};
use serde::Serialize;
use specklenoise::photon::{sample_transmitted_counts, summarize_counts, CountSummary};
use specklenoise::rng::{domain as stream, stream_rng};
use specklenoise::validation::{run_validation, ValidationConfig};
use specklenoise::{
    classical_noise_correlation, expansion_terms, shot_noise_correlation, ChannelTransmission,
    CorrelationCurve, CurveTable, DiffusionGeometry, NormalizedOffset, QuantumState,
};

pub use config::{Figure, Flags, Format, RunConfig, StateArg};

#[derive(Debug, Parser)]
#[command(name = "specklenoise", version, about = "Noise frequency correlations of multiply scattered light")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Tabulate the analytic correlation curves
    Curves,
    /// Run the Monte Carlo validation campaign and write a JSON report
    Validate,
    /// Draw photon counts of a state after loss and summarize them
    SampleStats,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    Io(anyhow::Error),
    Config(anyhow::Error),
    Domain(anyhow::Error),
    /// The validation report was written but at least one check failed.
    Suite(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Domain(_) => 3,
            Failure::Suite(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(e) => write!(f, "i/o error: {e:#}"),
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::Domain(e) => write!(f, "{e:#}"),
            Failure::Suite(s) => write!(f, "validation failed: {s}"),
        }
    }
}

impl From<specklenoise::Error> for Failure {
    fn from(e: specklenoise::Error) -> Self {
        match e {
            specklenoise::Error::Parse { .. } => Failure::Config(e.into()),
            _ => Failure::Domain(e.into()),
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn config_error(msg: impl fmt::Display) -> Failure {
    Failure::Config(anyhow!("{msg}"))
}

/// Merges defaults, the optional config file and flags.
pub fn resolve_config(flags: &Flags) -> Outcome<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Io(anyhow!("reading {}: {e}", path.display())))?;
            RunConfig::from_toml(&text)
                .map_err(|e| config_error(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    cfg.apply(flags);
    if cfg.fano.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(config_error("Fano factors must be finite and non-negative"));
    }
    Ok(cfg)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Failure::Io(anyhow!("writing {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Io(anyhow!("writing stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

fn column_tag(v: f64) -> String {
    format!("{v}")
}

/// Builds the curve table for the configured figure.
pub fn curve_table(cfg: &RunConfig) -> Outcome<CurveTable> {
    let grid = cfg.grid();
    match cfg.figure {
        Figure::Fig1 => {
            let xs = grid.offsets_with_origin().map_err(config_error)?;
            let sn = CorrelationCurve::tabulate("c_sn", &xs, |x| {
                Ok(shot_noise_correlation(NormalizedOffset::new(x)?))
            })?;
            let cn = CorrelationCurve::tabulate("c_cn", &xs, |x| {
                Ok(classical_noise_correlation(NormalizedOffset::new(x)?))
            })?;
            Ok(CurveTable::from_curves(&[sn, cn])?)
        }
        Figure::Fig2 => {
            if grid.min <= 0.0 {
                return Err(config_error("the second-order term diverges at x = 0; use --grid-min > 0"));
            }
            if cfg.fano.is_empty() || cfg.l_over_ell.is_empty() {
                return Err(config_error("--fano and --l-over-ell need at least one value"));
            }
            let xs = grid.offsets().map_err(config_error)?;
            let mut curves = Vec::new();
            for &fano in &cfg.fano {
                for &ratio in &cfg.l_over_ell {
                    let geom = DiffusionGeometry::from_ratio(ratio)?;
                    let label = format!("c2_f{}_r{}", column_tag(fano), column_tag(ratio));
                    // mean transmission 1 gives C_II / T directly
                    curves.push(CorrelationCurve::tabulate(label, &xs, |x| {
                        Ok(expansion_terms(NormalizedOffset::new(x)?, fano, 1.0, &geom)?.second_order)
                    })?);
                }
            }
            Ok(CurveTable::from_curves(&curves)?)
        }
    }
}

pub fn cmd_curves(cfg: &RunConfig) -> Outcome {
    let table = curve_table(cfg)?;
    let bytes = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv_string().into_bytes(),
        Format::Json => to_json(&table),
    };
    write_output(cfg.out.as_deref(), &bytes)
}

fn require_seed(cfg: &RunConfig) -> Outcome<u64> {
    cfg.seed
        .ok_or_else(|| config_error("this command is stochastic and needs --seed"))
}

fn thread_pool(workers: usize) -> Outcome<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Io(anyhow!("starting worker pool: {e}")))
}

pub fn validation_config(cfg: &RunConfig) -> Outcome<ValidationConfig> {
    let seed = require_seed(cfg)?;
    let grid = cfg.grid().offsets_with_origin().map_err(config_error)?;
    let mut v = ValidationConfig::new(grid, seed);
    v.mean_t = cfg.mean_t;
    v.realizations = cfg.realizations;
    v.shots = cfg.shots;
    v.counting_realizations = cfg.counting_realizations;
    v.sampler_shots = cfg.sampler_shots;
    v.bootstrap_resamples = cfg.bootstrap;
    Ok(v)
}

pub fn cmd_validate(cfg: &RunConfig) -> Outcome {
    if cfg.format == Some(Format::Csv) {
        return Err(config_error("validation reports are JSON only"));
    }
    let vcfg = validation_config(cfg)?;
    let report = thread_pool(cfg.workers)?.install(|| run_validation(&vcfg))?;
    write_output(cfg.out.as_deref(), &to_json(&report))?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Suite(format!(
            "{} of {} checks outside their bounds (rayleigh passed: {})",
            report.failed_checks,
            report.checks.len(),
            report.rayleigh.passed
        )))
    }
}

fn input_state(cfg: &RunConfig) -> Outcome<QuantumState> {
    Ok(match cfg.state {
        StateArg::Fock => {
            if cfg.photons < 0.0 || cfg.photons.fract() != 0.0 || !cfg.photons.is_finite() {
                return Err(config_error("a Fock state needs a non-negative integer --photons"));
            }
            QuantumState::fock(cfg.photons as u64)
        }
        StateArg::Coherent => QuantumState::coherent(cfg.photons)?,
        StateArg::Thermal => QuantumState::thermal(cfg.photons)?,
        StateArg::Custom => QuantumState::custom(cfg.photons, cfg.state_fano)?,
    })
}

#[derive(Debug, Serialize)]
struct SampleReport<'a> {
    state: QuantumState,
    transmission: f64,
    expected_fano: f64,
    summary: CountSummary,
    counts: &'a [u64],
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

pub fn cmd_sample_stats(cfg: &RunConfig) -> Outcome {
    let seed = require_seed(cfg)?;
    let state = input_state(cfg)?;
    let trans = ChannelTransmission::new(cfg.transmission)?;
    let mut rng = stream_rng(seed, stream::SAMPLER, 0);
    let counts = sample_transmitted_counts(&state, trans, cfg.shots, &mut rng)?;
    let summary = summarize_counts(&counts)?;
    let expected_fano = 1.0 + (state.fano() - 1.0) * trans.value();
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => {
            let report = SampleReport {
                state,
                transmission: trans.value(),
                expected_fano,
                summary,
                counts: &counts,
            };
            write_output(cfg.out.as_deref(), &to_json(&report))
        }
        Format::Csv => {
            let mut data = String::from("shot,count\n");
            for (i, c) in counts.iter().enumerate() {
                data.push_str(&format!("{i},{c}\n"));
            }
            let z = (summary.fano - expected_fano) / summary.fano_stderr;
            let sum = format!(
                "shots,mean,variance,fano,fano_stderr,expected_fano,z\n{},{},{},{},{},{},{}\n",
                summary.shots, summary.mean, summary.variance, summary.fano, summary.fano_stderr, expected_fano, z
            );
            write_output(cfg.out.as_deref(), data.as_bytes())?;
            match &cfg.out {
                Some(path) => write_output(Some(&summary_path(path)), sum.as_bytes()),
                None => {
                    eprint!("{sum}");
                    Ok(())
                }
            }
        }
    }
}

/// Entry point used by `main`; returns the process exit status.
pub fn run(cli: &Cli) -> Outcome {
    let cfg = resolve_config(&cli.flags)?;
    if cli.flags.show_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    match cli.command {
        Command::Curves => cmd_curves(&cfg),
        Command::Validate => cmd_validate(&cfg),
        Command::SampleStats => cmd_sample_stats(&cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2_column_names() {
        let cfg = RunConfig {
            figure: Figure::Fig2,
            grid_points: 3,
            fano: vec![0.0, 1.5],
            l_over_ell: vec![3.0],
            ..RunConfig::default()
        };
        let t = curve_table(&cfg).unwrap();
        assert_eq!(t.columns, ["x", "c2_f0_r3", "c2_f1.5_r3"]);
        assert_eq!(t.rows.len(), 3);
    }

    #[test]
    fn fig2_rejects_zero_grid_min() {
        let cfg = RunConfig {
            figure: Figure::Fig2,
            grid_min: 0.0,
            grid_scale: config::Scale::Lin,
            ..RunConfig::default()
        };
        assert_eq!(curve_table(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn summary_file_name() {
        assert_eq!(summary_path(Path::new("/tmp/a/counts.csv")), PathBuf::from("/tmp/a/counts.summary.csv"));
    }
}
