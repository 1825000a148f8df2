//! File output: trajectory CSV and phase-space grids. Floats are serialized
//! with 17 significant digits so re-parsing reproduces the exact f64 bits,
//! which is what makes repeated runs byte-comparable and files round-trip.

use std::io::Write;
use std::path::Path;

use crate::config::GridSpec;
use crate::error::CliError;

pub const TRAJECTORY_HEADER: &str =
    "step,tau,trace,leakage,dist_to_target,fidelity_to_target,var_x_min,var_x_max";

/// 17 significant digits: enough to round-trip any finite f64 exactly.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_sig17(x: Option<f64>) -> String {
    x.map(sig17).unwrap_or_default()
}

/// One CSV row of a recorded trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub tau: f64,
    pub trace: f64,
    pub leakage: f64,
    pub dist_to_target: Option<f64>,
    pub fidelity_to_target: Option<f64>,
    pub var_x_min: f64,
    pub var_x_max: f64,
}

pub fn write_trajectory_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<(), CliError> {
    let mut text = String::with_capacity(rows.len() * 160 + TRAJECTORY_HEADER.len() + 1);
    text.push_str(TRAJECTORY_HEADER);
    text.push('\n');
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.step,
            sig17(row.tau),
            sig17(row.trace),
            sig17(row.leakage),
            opt_sig17(row.dist_to_target),
            opt_sig17(row.fidelity_to_target),
            sig17(row.var_x_min),
            sig17(row.var_x_max),
        ));
    }
    write_atomic(path, &text)
}

/// Reads a trajectory CSV back; the inverse of [`write_trajectory_csv`].
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRow>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRAJECTORY_HEADER => {}
        other => {
            return Err(CliError::validation(format!(
                "{}: expected header \"{TRAJECTORY_HEADER}\", got {:?}",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    let field = |part: &str, what: &str| -> Result<f64, CliError> {
        part.parse().map_err(|_| {
            CliError::validation(format!("{}: bad {what} field \"{part}\"", path.display()))
        })
    };
    let opt_field = |part: &str, what: &str| -> Result<Option<f64>, CliError> {
        if part.is_empty() {
            Ok(None)
        } else {
            field(part, what).map(Some)
        }
    };
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 8 {
            return Err(CliError::validation(format!(
                "{}: expected 8 fields per row, got {}",
                path.display(),
                parts.len()
            )));
        }
        rows.push(TrajectoryRow {
            step: parts[0].parse().map_err(|_| {
                CliError::validation(format!("{}: bad step field \"{}\"", path.display(), parts[0]))
            })?,
            tau: field(parts[1], "tau")?,
            trace: field(parts[2], "trace")?,
            leakage: field(parts[3], "leakage")?,
            dist_to_target: opt_field(parts[4], "dist_to_target")?,
            fidelity_to_target: opt_field(parts[5], "fidelity_to_target")?,
            var_x_min: field(parts[6], "var_x_min")?,
            var_x_max: field(parts[7], "var_x_max")?,
        });
    }
    Ok(rows)
}

/// Writes a phase-space grid: a header line `x_min x_max nx p_min p_max np`,
/// then one whitespace-separated row per x value (row-major).
pub fn write_wigner_grid(path: &Path, grid: &GridSpec, values: &[Vec<f64>]) -> Result<(), CliError> {
    let mut text = String::new();
    text.push_str(&format!(
        "{} {} {} {} {} {}\n",
        sig17(grid.x_min),
        sig17(grid.x_max),
        grid.nx,
        sig17(grid.p_min),
        sig17(grid.p_max),
        grid.np,
    ));
    for row in values {
        let cells: Vec<String> = row.iter().map(|v| sig17(*v)).collect();
        text.push_str(&cells.join(" "));
        text.push('\n');
    }
    write_atomic(path, &text)
}

/// Reads a phase-space grid back; the inverse of [`write_wigner_grid`].
pub fn read_wigner_grid(path: &Path) -> Result<(GridSpec, Vec<Vec<f64>>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::validation(format!("{}: empty grid file", path.display())))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 6 {
        return Err(CliError::validation(format!(
            "{}: expected header \"x_min x_max nx p_min p_max np\"",
            path.display()
        )));
    }
    let num = |part: &str| -> Result<f64, CliError> {
        part.parse()
            .map_err(|_| CliError::validation(format!("{}: bad header field \"{part}\"", path.display())))
    };
    let count = |part: &str| -> Result<usize, CliError> {
        part.parse()
            .map_err(|_| CliError::validation(format!("{}: bad header field \"{part}\"", path.display())))
    };
    let grid = GridSpec {
        x_min: num(parts[0])?,
        x_max: num(parts[1])?,
        nx: count(parts[2])?,
        p_min: num(parts[3])?,
        p_max: num(parts[4])?,
        np: count(parts[5])?,
    };
    let mut values = Vec::with_capacity(grid.nx);
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, CliError> = line
            .split_whitespace()
            .map(|part| {
                part.parse().map_err(|_| {
                    CliError::validation(format!("{}: bad grid value \"{part}\"", path.display()))
                })
            })
            .collect();
        let row = row?;
        if row.len() != grid.np {
            return Err(CliError::validation(format!(
                "{}: expected {} values per row, got {}",
                path.display(),
                grid.np,
                row.len()
            )));
        }
        values.push(row);
    }
    if values.len() != grid.nx {
        return Err(CliError::validation(format!(
            "{}: expected {} rows, got {}",
            path.display(),
            grid.nx,
            values.len()
        )));
    }
    Ok((grid, values))
}

/// Writes through a temp file in the same directory so a crash cannot leave a
/// half-written output behind.
fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| CliError::io(format!("cannot write {}: not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    let write = (|| -> std::io::Result<()> {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    write.map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}
