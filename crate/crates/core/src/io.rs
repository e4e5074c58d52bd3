//! CSV, OBJ and gnuplot table writers. Every file is written to a
//! temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::Result;
use crate::grid::{Component, Reality, SurfaceGrid};
use crate::report::ResidualReport;

pub const SURFACE_SCHEMA: &str = "wicksurf-surface/1";
pub const REPORT_SCHEMA: &str = "wicksurf-report/1";

pub const REPORT_HEADER: [&str; 9] = [
    "check",
    "max_abs",
    "mean_abs",
    "rms",
    "max_rel",
    "max_scaled",
    "node_count",
    "dropped",
    "worst_node",
];

/// Write `bytes` to `path` atomically, creating parent directories.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// CSV text with a `# schema` comment line, a header and `rows`.
pub fn csv_bytes<R, S>(schema: &str, header: &[&str], rows: R) -> Result<Vec<u8>>
where
    R: IntoIterator<Item = Vec<S>>,
    S: AsRef<[u8]>,
{
    let mut out = format!("# schema {schema}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header).map_err(std::io::Error::from)?;
        for row in rows {
            w.write_record(&row).map_err(std::io::Error::from)?;
        }
        w.flush()?;
    }
    Ok(out)
}

pub fn write_csv<R, S>(path: &Path, schema: &str, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = Vec<S>>,
    S: AsRef<[u8]>,
{
    atomic_write(path, &csv_bytes(schema, header, rows)?)
}

/// One row per node: indices, parameter coordinates, and the real and
/// imaginary part of each component.
pub fn surface_csv(s: &SurfaceGrid) -> Result<Vec<u8>> {
    let mut header = vec!["i", "j", "r1", "r2"];
    for c in Component::ALL {
        header.extend(match c {
            Component::X => ["x_re", "x_im"],
            Component::T => ["t_re", "t_im"],
            Component::Phi => ["phi_re", "phi_im"],
        });
    }
    let grid = s.grid();
    let rows = ndarray::indices(grid.shape()).into_iter().map(|(i, j)| {
        let r = grid.node(i, j);
        let mut row = vec![i.to_string(), j.to_string(), r.re.to_string(), r.im.to_string()];
        for z in s.point(i, j) {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        row
    });
    csv_bytes(SURFACE_SCHEMA, &header, rows)
}

pub fn write_surface_csv(s: &SurfaceGrid, path: &Path) -> Result<()> {
    atomic_write(path, &surface_csv(s)?)
}

/// Real embedding used for meshes and tables: `(x, t, phi)` for real
/// grids, `(Re x, |Im t|, Re phi)` for Wick-rotated ones.
pub fn display_vertex(s: &SurfaceGrid, i: usize, j: usize) -> [f64; 3] {
    let [x, t, phi] = s.point(i, j);
    match s.reality() {
        Reality::Real => [x.re, t.re, phi.re],
        Reality::WickRotated => [x.re, t.im.abs(), phi.re],
    }
}

/// Wavefront OBJ: vertices in row-major grid order, two triangles per
/// grid cell, 1-based indices.
pub fn obj_text(s: &SurfaceGrid) -> String {
    let (n1, n2) = s.grid().shape();
    let mut out = String::new();
    let _ = writeln!(out, "# wicksurf mesh {n1}x{n2}");
    for i in 0..n1 {
        for j in 0..n2 {
            let [a, b, c] = display_vertex(s, i, j);
            let _ = writeln!(out, "v {a} {b} {c}");
        }
    }
    let id = |i: usize, j: usize| i * n2 + j + 1;
    for i in 0..n1.saturating_sub(1) {
        for j in 0..n2.saturating_sub(1) {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let _ = writeln!(out, "f {a} {b} {c}");
            let _ = writeln!(out, "f {a} {c} {d}");
        }
    }
    out
}

pub fn write_obj(s: &SurfaceGrid, path: &Path) -> Result<()> {
    atomic_write(path, obj_text(s).as_bytes())
}

/// Whitespace-separated `r1 r2 x t phi` with a blank line between grid
/// rows, as read by gnuplot's `splot`.
pub fn table_text(s: &SurfaceGrid) -> String {
    let grid = s.grid();
    let (n1, n2) = grid.shape();
    let mut out = String::from("# r1 r2 x t phi\n");
    for i in 0..n1 {
        for j in 0..n2 {
            let r = grid.node(i, j);
            let [a, b, c] = display_vertex(s, i, j);
            let _ = writeln!(out, "{} {} {a} {b} {c}", r.re, r.im);
        }
        out.push('\n');
    }
    out
}

pub fn write_table(s: &SurfaceGrid, path: &Path) -> Result<()> {
    atomic_write(path, table_text(s).as_bytes())
}

/// Row matching [`REPORT_HEADER`].
pub fn report_row(check: &str, r: &ResidualReport) -> Vec<String> {
    vec![
        check.to_string(),
        format!("{:e}", r.max_abs),
        format!("{:e}", r.mean_abs),
        format!("{:e}", r.rms),
        format!("{:e}", r.max_rel),
        format!("{:e}", r.max_scaled),
        r.node_count.to_string(),
        r.dropped.to_string(),
        format!("{}:{}", r.worst_node.0, r.worst_node.1),
    ]
}

pub fn write_reports(path: &Path, reports: &[(&str, ResidualReport)]) -> Result<()> {
    write_csv(
        path,
        REPORT_SCHEMA,
        &REPORT_HEADER,
        reports.iter().map(|(name, r)| report_row(name, r)),
    )
}
