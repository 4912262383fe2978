//! File writers. Floats are written as `{:.16e}` so output is byte-stable.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::config::{ExperimentConfig, HeatmapScale};
use crate::error::Result;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header and one row per `(label, values)` pair.
pub fn write_table<'a, I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = (String, &'a [f64])>,
{
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for (label, values) in rows {
        w.write_all(label.as_bytes())?;
        for v in values {
            w.write_all(b",")?;
            w.write_all(fmt_f64(*v).as_bytes())?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn site_header(first: &str, n_sites: usize) -> Vec<String> {
    std::iter::once(first.to_string())
        .chain((0..n_sites).map(|j| format!("site_{j}")))
        .collect()
}

#[derive(Serialize)]
struct RunRecord<'a> {
    library_version: &'a str,
    master_seed: u64,
    config: &'a ExperimentConfig,
}

pub fn write_run_json(path: &Path, cfg: &ExperimentConfig) -> Result<()> {
    let record = RunRecord {
        library_version: env!("CARGO_PKG_VERSION"),
        master_seed: cfg.master_seed,
        config: cfg,
    };
    let mut text = serde_json::to_string_pretty(&record).expect("config serializes to JSON");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Smallest intensity resolved on the log scale, relative to the maximum.
pub const LOG_FLOOR: f64 = 1e-6;

/// Maps intensities to 8-bit grey levels, normalized to the maximum.
pub fn grey_levels(rows: &[Vec<f64>], scale: HeatmapScale) -> Vec<u8> {
    let max = rows
        .iter()
        .flatten()
        .copied()
        .fold(0.0_f64, f64::max);
    rows.iter()
        .flatten()
        .map(|&p| {
            if max <= 0.0 {
                return 0;
            }
            let r = p / max;
            let level = match scale {
                HeatmapScale::Linear => r,
                HeatmapScale::Log => {
                    if r <= LOG_FLOOR {
                        0.0
                    } else {
                        r.ln() / -LOG_FLOOR.ln() + 1.0
                    }
                }
            };
            (255.0 * level.clamp(0.0, 1.0)).round() as u8
        })
        .collect()
}

/// Binary greymap (P5), one image row per input row.
pub fn write_pgm(path: &Path, rows: &[Vec<f64>], scale: HeatmapScale) -> Result<()> {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let scale_note = match scale {
        HeatmapScale::Linear => "linear".to_string(),
        HeatmapScale::Log => format!("log floor={LOG_FLOOR:e}"),
    };
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(
        w,
        "P5\n# intensity normalized to max, scale={scale_note}\n{width} {height}\n255\n"
    )?;
    w.write_all(&grey_levels(rows, scale))?;
    w.flush()?;
    Ok(())
}
