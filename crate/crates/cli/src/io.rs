//! CSV series/frame formats and the optional legacy-VTK polyline writer.
//!
//! All floating-point output uses 17 significant digits, so files round-trip
//! to the exact same bits.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use aniflow_core::diagnostics::TimeSeriesRecord;
use aniflow_core::mesh::{NodalField, PeriodicGrid};

use crate::CliError;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err<T>(r: std::io::Result<T>, what: &Path) -> Result<T, CliError> {
    r.map_err(|e| CliError::Io(format!("{}: {e}", what.display())))
}

/// Write the per-step monitor series:
/// `step,t,E_phi,E_Phi,ratio,K_inf,newton_iters,residual`.
pub fn write_series(path: &Path, series: &[TimeSeriesRecord]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            io_err(fs::create_dir_all(dir), dir)?;
        }
    }
    let mut w = BufWriter::new(io_err(File::create(path), path)?);
    io_err(
        writeln!(w, "step,t,E_phi,E_Phi,ratio,K_inf,newton_iters,residual"),
        path,
    )?;
    for r in series {
        io_err(
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.step,
                fmt(r.t),
                fmt(r.e_phi),
                fmt(r.e_big_phi),
                fmt(r.ratio),
                fmt(r.k_inf),
                r.newton_iters,
                fmt(r.residual)
            ),
            path,
        )?;
    }
    io_err(w.flush(), path)
}

pub fn frame_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("frame_{step:08}.csv"))
}

/// Frame CSV: header `rho,x1,..,xd`, then `J + 1` rows with node 0 repeated
/// at `rho = 1` so closed curves plot closed.
pub fn write_frame(dir: &Path, step: usize, x: &NodalField) -> Result<(), CliError> {
    io_err(fs::create_dir_all(dir), dir)?;
    let path = frame_path(dir, step);
    let mut w = BufWriter::new(io_err(File::create(&path), &path)?);
    let d = x.dim();
    let jn = x.grid().node_count();
    let mut header = String::from("rho");
    for i in 1..=d {
        header.push_str(&format!(",x{i}"));
    }
    io_err(writeln!(w, "{header}"), &path)?;
    for j in 0..=jn {
        let node = x.node(j % jn);
        let rho = if j == jn { 1.0 } else { x.grid().node(j) };
        let mut line = fmt(rho);
        for v in node {
            line.push(',');
            line.push_str(&fmt(*v));
        }
        io_err(writeln!(w, "{line}"), &path)?;
    }
    io_err(w.flush(), &path)
}

/// Read a frame CSV back into a nodal field (the last, repeated row is
/// dropped).
pub fn read_frame(path: &Path) -> Result<NodalField, CliError> {
    let f = io_err(File::open(path), path)?;
    let mut lines = BufReader::new(f).lines();
    let header = match lines.next() {
        Some(h) => io_err(h, path)?,
        None => return Err(CliError::Config(format!("{}: empty frame file", path.display()))),
    };
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.first() != Some(&"rho") || cols.len() < 3 {
        return Err(CliError::Config(format!(
            "{}: expected header rho,x1,..,xd",
            path.display()
        )));
    }
    let d = cols.len() - 1;
    let mut values: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for line in lines {
        let line = io_err(line, path)?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != d + 1 {
            return Err(CliError::Config(format!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                rows + 1,
                fields.len(),
                d + 1
            )));
        }
        for v in &fields[1..] {
            values.push(v.parse::<f64>().map_err(|e| {
                CliError::Config(format!("{}: bad number {v:?}: {e}", path.display()))
            })?);
        }
        rows += 1;
    }
    if rows < 4 {
        return Err(CliError::Config(format!(
            "{}: need at least 4 rows (J >= 3 plus the closing row)",
            path.display()
        )));
    }
    let jn = rows - 1;
    values.truncate(jn * d); // drop the closing row
    let grid = PeriodicGrid::new(jn)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    NodalField::from_values(grid, d, values)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Legacy-VTK polyline for 3d viewers.
pub fn write_frame_vtk(dir: &Path, step: usize, x: &NodalField) -> Result<(), CliError> {
    io_err(fs::create_dir_all(dir), dir)?;
    let path = dir.join(format!("frame_{step:08}.vtk"));
    let mut w = BufWriter::new(io_err(File::create(&path), &path)?);
    let jn = x.grid().node_count();
    io_err(writeln!(w, "# vtk DataFile Version 3.0"), &path)?;
    io_err(writeln!(w, "aniflow frame step {step}"), &path)?;
    io_err(writeln!(w, "ASCII"), &path)?;
    io_err(writeln!(w, "DATASET POLYDATA"), &path)?;
    io_err(writeln!(w, "POINTS {} double", jn + 1), &path)?;
    for j in 0..=jn {
        let node = x.node(j % jn);
        let z = if x.dim() > 2 { node[2] } else { 0.0 };
        io_err(writeln!(w, "{} {} {}", fmt(node[0]), fmt(node[1]), fmt(z)), &path)?;
    }
    io_err(writeln!(w, "LINES 1 {}", jn + 2), &path)?;
    let mut line = format!("{}", jn + 1);
    for j in 0..=jn {
        line.push_str(&format!(" {j}"));
    }
    io_err(writeln!(w, "{line}"), &path)?;
    io_err(w.flush(), &path)
}

/// Convergence table as CSV: `J,l2_err,l2_eoc,h1_err,h1_eoc` with empty EOC
/// cells on the first row.
pub fn write_convergence_csv(
    path: &Path,
    rows: &[aniflow_core::diagnostics::ConvergenceRow],
) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            io_err(fs::create_dir_all(dir), dir)?;
        }
    }
    let mut w = BufWriter::new(io_err(File::create(path), path)?);
    io_err(writeln!(w, "J,l2_err,l2_eoc,h1_err,h1_eoc"), path)?;
    for r in rows {
        let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
        io_err(
            writeln!(
                w,
                "{},{},{},{},{}",
                r.elements,
                fmt(r.l2_err),
                opt(r.l2_eoc),
                fmt(r.h1_err),
                opt(r.h1_eoc)
            ),
            path,
        )?;
    }
    io_err(w.flush(), path)
}

/// Aligned plain-text table mirroring the published layout.
pub fn format_convergence_table(rows: &[aniflow_core::diagnostics::ConvergenceRow]) -> String {
    let mut out = String::from("    J        L2 error   EOC      H1 error   EOC\n");
    for r in rows {
        let opt = |v: Option<f64>| v.map_or(String::from("  ---"), |e| format!("{e:5.2}"));
        out.push_str(&format!(
            "{:5}   {:.4e}   {}    {:.4e}   {}\n",
            r.elements,
            r.l2_err,
            opt(r.l2_eoc),
            r.h1_err,
            opt(r.h1_eoc)
        ));
    }
    out
}
