//! Flat-file formats for dimension profiles.
//!
//! CSV schema: header `t,estimate,se,ci_low,ci_high`, one row per grid
//! point. Numbers are written with 17 significant digits so a reparse is
//! value-exact.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::{DimensionProfile, ProfileMeta};
use crate::uncertainty::{DimensionEstimateAtScale, ErrorFormula};

pub const CSV_HEADER: &str = "t,estimate,se,ci_low,ci_high";

pub fn write_profile_csv(profile: &DimensionProfile, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", CSV_HEADER)?;
    for r in &profile.records {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t, r.estimate, r.se, r.ci_low, r.ci_high
        )?;
    }
    Ok(())
}

/// Parse a profile CSV back into a [`DimensionProfile`].
///
/// The CSV does not carry subset metadata; `meta` is reconstructed with
/// unknown `n`/`k` (zero) and `z` recovered from the band width where
/// possible.
pub fn read_profile_csv(path: &Path) -> Result<DimensionProfile> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut records: Vec<DimensionEstimateAtScale> = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !saw_header {
            saw_header = true;
            if trimmed == CSV_HEADER {
                continue;
            }
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected header {:?}", CSV_HEADER),
            });
        }
        let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if cells.len() != 5 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 5 columns, found {}", cells.len()),
            });
        }
        let vals: std::result::Result<Vec<f64>, _> =
            cells.iter().map(|c| c.parse::<f64>()).collect();
        let vals = vals.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let (t, estimate, se, ci_low, ci_high) = (vals[0], vals[1], vals[2], vals[3], vals[4]);
        let z = if se > 0.0 { (ci_high - ci_low) / (2.0 * se) } else { 1.96 };
        records.push(DimensionEstimateAtScale {
            t,
            estimate,
            variance: se * se, // per-row variance is not stored; se is
            se,
            ci_low,
            ci_high,
            z,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} contains no profile rows",
            path.display()
        )));
    }
    let z = records.first().map(|r| r.z).unwrap_or(1.96);
    Ok(DimensionProfile {
        grid_values: records.iter().map(|r| r.t).collect(),
        records,
        meta: ProfileMeta {
            n: 0,
            k: 0,
            seed: None,
            formula: ErrorFormula::SingleCov,
            z,
            clamped_variances: 0,
        },
    })
}
