//! CSV serialization of measurement logs.
//!
//! ```text
//! # seed: 42
//! # snapshot: {"source":{…},…}
//! cycle,config,mean_power_w,std_power_w,n_samples,housing_temp_c,input_power_w,timestamp_s
//! 0,BC,4.5117412087419391e-7,…
//! ```
//!
//! Leading `#` lines carry optional metadata; other comment lines are
//! ignored. Floats are written with 17 significant digits, so a write/read
//! round trip is lossless.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use peres_core::forward::{
    LogMetadata, MeasurementLog, MeasurementRecord, ShutterConfig, SimulationSnapshot,
};

use crate::error::{BenchError, Result};

pub const HEADER: [&str; 8] = [
    "cycle",
    "config",
    "mean_power_w",
    "std_power_w",
    "n_samples",
    "housing_temp_c",
    "input_power_w",
    "timestamp_s",
];

const SEED_KEY: &str = "seed";
const SNAPSHOT_KEY: &str = "snapshot";

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `log` including its metadata.
pub fn write_log_to<W: Write>(log: &MeasurementLog, mut out: W) -> Result<()> {
    let io = |e| BenchError::io("<log>", e);
    if let Some(seed) = log.metadata.seed {
        writeln!(out, "# {SEED_KEY}: {seed}").map_err(io)?;
    }
    if let Some(snapshot) = &log.metadata.snapshot {
        writeln!(out, "# {SNAPSHOT_KEY}: {}", serde_json::to_string(snapshot)?).map_err(io)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in &log.records {
        w.write_record([
            r.cycle_index.to_string(),
            r.config.label().to_string(),
            float(r.mean_power),
            float(r.std_power),
            r.n_samples.to_string(),
            float(r.housing_temp),
            float(r.input_power),
            float(r.timestamp),
        ])?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn write_log(log: &MeasurementLog, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_log_to(log, &mut buf)?;
    fs::write(path, buf).map_err(|e| BenchError::io(path, e))
}

fn parse_metadata(text: &str) -> Result<LogMetadata> {
    let mut meta = LogMetadata::default();
    for (i, line) in text.lines().enumerate() {
        let Some(comment) = line.strip_prefix('#') else {
            break;
        };
        let line_no = i as u64 + 1;
        let Some((key, value)) = comment.trim().split_once(':') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            SEED_KEY => {
                meta.seed = Some(value.parse().map_err(|e| BenchError::Log {
                    line: line_no,
                    message: format!("invalid seed {value:?}: {e}"),
                })?);
            }
            SNAPSHOT_KEY => {
                let snap: SimulationSnapshot =
                    serde_json::from_str(value).map_err(|e| BenchError::Log {
                        line: line_no,
                        message: format!("invalid snapshot: {e}"),
                    })?;
                meta.snapshot = Some(snap);
            }
            _ => {}
        }
    }
    Ok(meta)
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, col: usize, line: u64) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = row.get(col).unwrap_or_default();
    raw.trim().parse().map_err(|e| BenchError::Log {
        line,
        message: format!("column {}: cannot parse {raw:?}: {e}", HEADER[col]),
    })
}

fn finite(row: &csv::StringRecord, col: usize, line: u64) -> Result<f64> {
    let v: f64 = field(row, col, line)?;
    if !v.is_finite() {
        return Err(BenchError::Log {
            line,
            message: format!("column {}: value {v} is not finite", HEADER[col]),
        });
    }
    Ok(v)
}

/// Parses a log; rows must match the header exactly and `(cycle, config)`
/// pairs must be unique.
pub fn read_log_from(text: &str) -> Result<MeasurementLog> {
    let metadata = parse_metadata(text)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(e.into()),
    };
    if header.is_empty() || header.iter().all(|h| h.trim().is_empty()) {
        return Err(BenchError::EmptyLog);
    }
    let header_line = text.lines().take_while(|l| l.starts_with('#')).count() as u64 + 1;
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != HEADER {
        let missing: Vec<&str> = HEADER.iter().copied().filter(|h| !found.contains(h)).collect();
        let message = if missing.is_empty() {
            format!("header must be {:?}, got {found:?}", HEADER.join(","))
        } else {
            format!("missing columns {missing:?}")
        };
        return Err(BenchError::Log {
            line: header_line,
            message,
        });
    }
    let mut records = Vec::new();
    let mut seen: HashMap<(usize, ShutterConfig), u64> = HashMap::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != HEADER.len() {
            return Err(BenchError::Log {
                line,
                message: format!("expected {} fields, got {}", HEADER.len(), row.len()),
            });
        }
        let cycle: usize = field(&row, 0, line)?;
        let label = row.get(1).unwrap_or_default().trim();
        let config = ShutterConfig::from_label(label).ok_or_else(|| BenchError::Log {
            line,
            message: format!("unknown shutter configuration {label:?}"),
        })?;
        if let Some(first) = seen.insert((cycle, config), line) {
            return Err(BenchError::Log {
                line,
                message: format!(
                    "duplicate record for cycle {cycle}, configuration {label} (first on line {first})"
                ),
            });
        }
        records.push(MeasurementRecord {
            cycle_index: cycle,
            config,
            mean_power: finite(&row, 2, line)?,
            std_power: finite(&row, 3, line)?,
            n_samples: field(&row, 4, line)?,
            housing_temp: finite(&row, 5, line)?,
            input_power: finite(&row, 6, line)?,
            timestamp: finite(&row, 7, line)?,
        });
    }
    if records.is_empty() {
        return Err(BenchError::EmptyLog);
    }
    Ok(MeasurementLog { records, metadata })
}

pub fn read_log(path: &Path) -> Result<MeasurementLog> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    read_log_from(&text)
}
