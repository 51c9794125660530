//! Command-line interface.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use peres_core::analysis::analyze_log;
use peres_core::budget::{default_phi_grid, full_budget, residual_light_sweep};
use peres_core::fitting::{fit_contrast, fit_thermalization};
use peres_core::forward::{simulate_measurement, LogMetadata, MeasurementLog};
use peres_core::reconstruct::correct_phase_point;
use peres_core::stats::{filter_malfunctions, DEFAULT_MAD_THRESHOLD};
use peres_core::InterferenceTerms;

use crate::config::{read_config, ReferenceChoice};
use crate::error::{BenchError, Result};
use crate::log_csv::{read_log, write_log};
use crate::parallel::{phase_fluctuations, power_fluctuations, threads_from_env};
use crate::report::{self, AnalysisReport, FitReport, FluctuationReport, Format};

#[derive(Debug, Parser)]
#[command(name = "peres-bench", version, about = "Simulate and analyse three-path interference measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Power,
    Phase,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a measurement and write its log.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed from the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Print the effective configuration to stdout.
        #[arg(long)]
        echo_config: bool,
    },
    /// Per-cycle and aggregate analysis of a log.
    Analyze {
        #[arg(long)]
        log: PathBuf,
        /// Also write the JSON report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        filter_malfunctions: bool,
        #[arg(long, default_value_t = DEFAULT_MAD_THRESHOLD)]
        threshold: f64,
    },
    /// Nearest physical phase point for measured interference terms.
    Reconstruct {
        /// `alpha,beta,gamma`
        #[arg(long, allow_hyphen_values = true, conflicts_with = "log", required_unless_present = "log")]
        terms: Option<String>,
        /// Use the mean terms of this log.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Error budget for a log at the phase point reconstructed from it.
    Budget {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        reference: Option<ReferenceArg>,
    },
    /// Residual-light ΔF as a function of the shutter phase.
    SweepResidual {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit housing temperature and α against cycle index.
    FitContrast {
        /// CSV with columns `cycle,housing_temp_c,alpha`.
        #[arg(long)]
        data: PathBuf,
        /// Temperature step in °C; fitted from the temperatures when absent.
        #[arg(long)]
        delta_t: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Monte Carlo of power and phase fluctuations.
    McFluct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        kind: Kind,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReferenceArg {
    #[value(name = "23c")]
    Housing23c,
    #[value(name = "30c")]
    Housing30c,
}

impl From<ReferenceArg> for ReferenceChoice {
    fn from(r: ReferenceArg) -> Self {
        match r {
            ReferenceArg::Housing23c => Self::Housing23c,
            ReferenceArg::Housing30c => Self::Housing30c,
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on runtime errors, 2 on usage errors.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match run(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if matches!(e, BenchError::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| BenchError::io(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| BenchError::io("<stdout>", e)),
    }
}

fn no_csv(command: &str) -> BenchError {
    BenchError::Usage(format!("{command} has no CSV output"))
}

pub fn run(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate {
            config,
            out,
            seed,
            echo_config,
        } => {
            let mut cfg = read_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let mut log = simulate_measurement(
                &cfg.source_spec(),
                &cfg.phases,
                &cfg.imperfections(),
                &cfg.protocol,
                cfg.seed,
            )?;
            log.metadata = LogMetadata {
                seed: Some(cfg.seed),
                snapshot: Some(cfg.snapshot()),
            };
            write_log(&log, &out)?;
            if echo_config {
                emit(&(cfg.to_json()? + "\n"), None, stdout)?;
            }
            Ok(())
        }
        Command::Analyze {
            log,
            report: report_path,
            format,
            filter_malfunctions: filter,
            threshold,
        } => {
            let log = read_log(&log)?;
            let (log, dropped) = maybe_filter(log, filter, threshold)?;
            let r = AnalysisReport::new(&analyze_log(&log)?, dropped);
            if let Some(path) = report_path {
                emit(&report::to_json(&r)?, Some(&path), stdout)?;
            }
            let text = match format {
                Format::Text => r.text(),
                Format::Json => report::to_json(&r)?,
                Format::Csv => r.csv()?,
            };
            emit(&text, None, stdout)
        }
        Command::Reconstruct { terms, log, format } => {
            let terms = match (terms, log) {
                (Some(t), _) => parse_terms(&t)?,
                (None, Some(path)) => analyze_log(&read_log(&path)?)?.mean_terms,
                (None, None) => return Err(BenchError::Usage("either --terms or --log is required".into())),
            };
            let c = correct_phase_point(terms)?;
            let text = match format {
                Format::Text => report::corrected_text(&c),
                Format::Json => report::to_json(&c)?,
                Format::Csv => return Err(no_csv("reconstruct")),
            };
            emit(&text, None, stdout)
        }
        Command::Budget {
            log,
            config,
            seed,
            format,
            out,
            reference,
        } => {
            let cfg = read_config(&config)?;
            let log = read_log(&log)?;
            let a = &cfg.analysis;
            let (log, _) = maybe_filter(log, a.filter_malfunctions, a.malfunction_threshold)?;
            let corrected = correct_phase_point(analyze_log(&log)?.mean_terms)?;
            let mut inputs = cfg.budget_inputs();
            if let Some(seed) = seed {
                inputs.seed = seed;
            }
            if let Some(r) = reference {
                inputs.reference = Some(ReferenceChoice::from(r).dataset());
            }
            let r = full_budget(&log, &inputs, &corrected)?;
            let text = match format {
                Format::Text => report::budget_text(&r),
                Format::Json => report::to_json(&r)?,
                Format::Csv => report::budget_csv(&r)?,
            };
            emit(&text, out.as_deref(), stdout)
        }
        Command::SweepResidual { config, points, out } => {
            let cfg = read_config(&config)?;
            let n = points.unwrap_or(cfg.analysis.sweep_points);
            if n < 3 {
                return Err(BenchError::Usage(format!("--points must be ≥ 3, got {n}")));
            }
            let curve = residual_light_sweep(
                &cfg.phases,
                &cfg.source_spec(),
                cfg.residual.tau,
                &default_phi_grid(n),
            )?;
            emit(&report::sweep_csv(&curve)?, out.as_deref(), stdout)
        }
        Command::FitContrast { data, delta_t, format } => {
            let (temps, alphas) = read_contrast_data(&data)?;
            let thermalization = fit_thermalization(&temps).ok();
            let delta_t = match (delta_t, &thermalization) {
                (Some(d), _) => d,
                (None, Some(t)) => t.delta_t,
                (None, None) => {
                    return Err(BenchError::Usage(
                        "temperature fit failed; pass --delta-t".into(),
                    ))
                }
            };
            let r = FitReport {
                thermalization,
                contrast: fit_contrast(&alphas, delta_t)?,
            };
            let text = match format {
                Format::Text => r.text(),
                Format::Json => report::to_json(&r)?,
                Format::Csv => return Err(no_csv("fit-contrast")),
            };
            emit(&text, None, stdout)
        }
        Command::McFluct {
            config,
            kind,
            samples,
            seed,
            format,
        } => {
            let cfg = read_config(&config)?;
            let threads = threads_from_env()?;
            let n = samples.unwrap_or(cfg.analysis.mc_samples);
            let seed = seed.unwrap_or(cfg.seed);
            let source = cfg.source_spec();
            let fl = cfg.fluctuations;
            // same seeds as the budget
            let power = matches!(kind, Kind::Power | Kind::Both)
                .then(|| power_fluctuations(&cfg.phases, &source, fl.sigma_pin_rel, n, seed, threads))
                .transpose()?;
            let phase = matches!(kind, Kind::Phase | Kind::Both)
                .then(|| {
                    phase_fluctuations(&cfg.phases, &source, fl.sigma_phase, n, seed.wrapping_add(1), threads)
                })
                .transpose()?;
            let r = FluctuationReport { power, phase };
            let text = match format {
                Format::Text => r.text(),
                Format::Json => report::to_json(&r)?,
                Format::Csv => return Err(no_csv("mc-fluct")),
            };
            emit(&text, None, stdout)
        }
    }
}

fn parse_terms(text: &str) -> Result<InterferenceTerms> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| BenchError::Usage(format!("--terms {text:?}: {e}")))?;
    match values[..] {
        [a, b, g] => Ok(InterferenceTerms::new(a, b, g)),
        _ => Err(BenchError::Usage(format!(
            "--terms needs 3 comma-separated values, got {}",
            values.len()
        ))),
    }
}

fn maybe_filter(
    log: MeasurementLog,
    filter: bool,
    threshold: f64,
) -> Result<(MeasurementLog, Option<peres_core::stats::MalfunctionReport>)> {
    if !filter {
        return Ok((log, None));
    }
    let (kept, dropped) = filter_malfunctions(&log, threshold)?;
    Ok((kept, Some(dropped)))
}

/// Reads `cycle,housing_temp_c,alpha` rows, sorted by cycle.
pub fn read_contrast_data(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| BenchError::Log {
            line: 1,
            message: format!("missing column {name:?}"),
        })
    };
    let (ci, ti, ai) = (col("cycle")?, col("housing_temp_c")?, col("alpha")?);
    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let get = |i: usize| -> Result<f64> {
            let raw = row.get(i).unwrap_or_default().trim();
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| BenchError::Log {
                    line,
                    message: format!("column {}: invalid value {raw:?}", header[i]),
                })
        };
        rows.push((get(ci)?, get(ti)?, get(ai)?));
    }
    if rows.is_empty() {
        return Err(BenchError::EmptyLog);
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(rows.iter().map(|r| (r.1, r.2)).unzip())
}
