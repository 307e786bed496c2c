//! CSV persistence for diagnostics rows, trajectory samples and iterates.
//!
//! Floats are written with 17 significant digits, which round-trips `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use moaccel::diagnostics::{DiagnosticsRow, DiagnosticsSink};
use moaccel::mavd::TrajectorySample;
use moaccel::{linalg, Row64};

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn diagnostics_header(m: usize, refs: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["k", "t_k", "step_norm_sq", "zeta", "merit", "crit_residual", "sum_partial"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((1..=m).map(|i| format!("f_{i}")));
    cols.extend((1..=m).map(|i| format!("W_{i}")));
    cols.extend((0..refs).map(|j| format!("sigma_ref{j}")));
    cols.extend((0..refs).map(|j| format!("E_ref{j}")));
    cols
}

pub fn trajectory_header(n: usize, m: usize, refs: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((0..n).map(|i| format!("x_{i}")));
    cols.push("v_norm".into());
    cols.push("accel_norm".into());
    cols.extend((1..=m).map(|i| format!("W_{i}")));
    cols.push("merit".into());
    cols.extend((0..refs).map(|j| format!("E_ref{j}")));
    cols
}

fn write_line<W: Write>(out: &mut W, fields: impl Iterator<Item = String>) -> std::io::Result<()> {
    let line = fields.collect::<Vec<_>>().join(",");
    writeln!(out, "{line}")
}

fn diagnostics_fields(row: &Row64) -> impl Iterator<Item = String> + '_ {
    std::iter::once(row.k.to_string())
        .chain(
            [
                row.t_k,
                row.step_norm_sq,
                row.zeta,
                row.merit_surrogate,
                row.criticality_residual,
                row.summability_partial,
            ]
            .into_iter()
            .map(fmt17),
        )
        .chain(row.f_values.iter().copied().map(fmt17))
        .chain(row.w.iter().copied().map(fmt17))
        .chain(row.sigma_per_ref.iter().copied().map(fmt17))
        .chain(row.e_per_ref.iter().copied().map(fmt17))
}

/// Streams diagnostics rows into a CSV file.
pub struct DiagnosticsCsv<W: Write> {
    out: W,
    rows: usize,
}

impl DiagnosticsCsv<BufWriter<File>> {
    pub fn create(path: &Path, m: usize, refs: usize) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Self::new(BufWriter::new(file), m, refs).with_context(|| format!("writing {}", path.display()))
    }
}

impl<W: Write> DiagnosticsCsv<W> {
    pub fn new(mut out: W, m: usize, refs: usize) -> std::io::Result<Self> {
        write_line(&mut out, diagnostics_header(m, refs).into_iter())?;
        Ok(Self { out, rows: 0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

impl<W: Write> DiagnosticsSink<f64> for DiagnosticsCsv<W> {
    fn push(&mut self, row: &DiagnosticsRow<f64>) -> moaccel::Result<()> {
        write_line(&mut self.out, diagnostics_fields(row))?;
        self.rows += 1;
        Ok(())
    }
}

/// One line of the trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub v_norm: f64,
    pub accel_norm: f64,
    pub w: Vec<f64>,
    pub merit: f64,
    pub e_per_ref: Vec<f64>,
}

impl From<&TrajectorySample<f64>> for TrajectoryRow {
    fn from(s: &TrajectorySample<f64>) -> Self {
        Self {
            t: s.t,
            x: s.x.clone(),
            v_norm: linalg::norm(&s.v),
            accel_norm: linalg::norm(&s.acceleration),
            w: s.w.clone(),
            merit: s.merit,
            e_per_ref: s.e_per_ref.clone(),
        }
    }
}

pub struct TrajectoryCsv<W: Write> {
    out: W,
}

impl TrajectoryCsv<BufWriter<File>> {
    pub fn create(path: &Path, n: usize, m: usize, refs: usize) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        write_line(&mut out, trajectory_header(n, m, refs).into_iter())
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(Self { out })
    }
}

impl<W: Write> TrajectoryCsv<W> {
    pub fn push(&mut self, row: &TrajectoryRow) -> std::io::Result<()> {
        let fields = std::iter::once(row.t)
            .chain(row.x.iter().copied())
            .chain([row.v_norm, row.accel_norm])
            .chain(row.w.iter().copied())
            .chain(std::iter::once(row.merit))
            .chain(row.e_per_ref.iter().copied())
            .map(fmt17);
        write_line(&mut self.out, fields)
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

/// Writes `k, x_0..x_{n-1}` for each stored iterate, starting at `k = 1`.
pub fn write_iterates(path: &Path, iterates: &[Vec<f64>]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    let n = iterates.first().map(Vec::len).unwrap_or(0);
    let header = std::iter::once("k".to_string()).chain((0..n).map(|i| format!("x_{i}")));
    write_line(&mut out, header)?;
    for (idx, x) in iterates.iter().enumerate() {
        write_line(&mut out, std::iter::once((idx + 1).to_string()).chain(x.iter().copied().map(fmt17)))?;
    }
    out.flush().with_context(|| format!("writing {}", path.display()))
}

struct CsvTable {
    header: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table(path: &Path) -> Result<CsvTable> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>(),
        None => bail!("{}: empty file, header row is missing", path.display()),
    };
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if fields.len() != header.len() {
            let missing = header.get(fields.len()).cloned().unwrap_or_else(|| "<extra>".into());
            bail!(
                "{} line {}: {} fields for {} columns (column `{missing}`)",
                path.display(),
                idx + 1,
                fields.len(),
                header.len()
            );
        }
        rows.push((idx + 1, fields));
    }
    Ok(CsvTable { header, rows })
}

fn count_prefixed(header: &[String], prefix: &str, start: usize) -> usize {
    (start..)
        .take_while(|i| header.iter().any(|h| *h == format!("{prefix}{i}")))
        .count()
}

fn check_header(path: &Path, found: &[String], expected: &[String]) -> Result<()> {
    for (i, want) in expected.iter().enumerate() {
        match found.get(i) {
            Some(got) if got == want => {}
            Some(got) => bail!("{}: expected column `{want}` at position {i}, found `{got}`", path.display()),
            None => bail!("{}: missing column `{want}`", path.display()),
        }
    }
    if found.len() != expected.len() {
        bail!("{}: unexpected column `{}`", path.display(), found[expected.len()]);
    }
    Ok(())
}

fn parse_field(path: &Path, line: usize, column: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| anyhow!("{} line {line}: column `{column}` holds `{value}`, not a number", path.display()))
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<Row64>> {
    let table = read_table(path)?;
    let m = count_prefixed(&table.header, "f_", 1);
    let refs = count_prefixed(&table.header, "sigma_ref", 0);
    let header = diagnostics_header(m, refs);
    check_header(path, &table.header, &header)?;
    table
        .rows
        .iter()
        .map(|(line, fields)| {
            let num = |i: usize| parse_field(path, *line, &header[i], &fields[i]);
            let k = fields[0]
                .parse::<usize>()
                .map_err(|_| anyhow!("{} line {line}: column `k` holds `{}`", path.display(), fields[0]))?;
            let span = |start: usize, len: usize| (start..start + len).map(num).collect::<Result<Vec<f64>>>();
            Ok(DiagnosticsRow {
                k,
                t_k: num(1)?,
                step_norm_sq: num(2)?,
                zeta: num(3)?,
                merit_surrogate: num(4)?,
                criticality_residual: num(5)?,
                summability_partial: num(6)?,
                f_values: span(7, m)?,
                w: span(7 + m, m)?,
                sigma_per_ref: span(7 + 2 * m, refs)?,
                e_per_ref: span(7 + 2 * m + refs, refs)?,
            })
        })
        .collect()
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let table = read_table(path)?;
    let n = count_prefixed(&table.header, "x_", 0);
    let m = count_prefixed(&table.header, "W_", 1);
    let refs = count_prefixed(&table.header, "E_ref", 0);
    let header = trajectory_header(n, m, refs);
    check_header(path, &table.header, &header)?;
    table
        .rows
        .iter()
        .map(|(line, fields)| {
            let num = |i: usize| parse_field(path, *line, &header[i], &fields[i]);
            let span = |start: usize, len: usize| (start..start + len).map(num).collect::<Result<Vec<f64>>>();
            Ok(TrajectoryRow {
                t: num(0)?,
                x: span(1, n)?,
                v_norm: num(1 + n)?,
                accel_norm: num(2 + n)?,
                w: span(3 + n, m)?,
                merit: num(3 + n + m)?,
                e_per_ref: span(4 + n + m, refs)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize) -> Row64 {
        DiagnosticsRow {
            k,
            t_k: 1.0 + k as f64 / 3.0,
            f_values: vec![0.1, 1.0 / 7.0],
            step_norm_sq: 1e-300,
            w: vec![0.2, 2.0 / 7.0],
            sigma_per_ref: vec![-0.5],
            e_per_ref: vec![std::f64::consts::PI],
            zeta: 0.25,
            merit_surrogate: -0.5,
            criticality_residual: 0.0,
            summability_partial: 1.0 / 3.0,
        }
    }

    #[test]
    fn diagnostics_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let mut sink = DiagnosticsCsv::create(&path, 2, 1).unwrap();
        for k in 1..=3 {
            sink.push(&row(k)).unwrap();
        }
        sink.finish().unwrap();
        let back = read_diagnostics(&path).unwrap();
        assert_eq!(back, vec![row(1), row(2), row(3)]);
    }

    #[test]
    fn corrupt_cell_names_the_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let mut sink = DiagnosticsCsv::create(&path, 2, 1).unwrap();
        sink.push(&row(1)).unwrap();
        sink.finish().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let mut fields: Vec<&str> = lines[1].split(',').collect();
        fields[9] = "oops";
        lines[1] = fields.join(",");
        std::fs::write(&path, lines.join("\n")).unwrap();
        let err = read_diagnostics(&path).unwrap_err().to_string();
        assert!(err.contains("`W_1`"), "{err}");
    }

    #[test]
    fn header_names() {
        let h = diagnostics_header(2, 2);
        assert_eq!(
            h.join(","),
            "k,t_k,step_norm_sq,zeta,merit,crit_residual,sum_partial,f_1,f_2,W_1,W_2,sigma_ref0,sigma_ref1,E_ref0,E_ref1"
        );
        assert_eq!(trajectory_header(2, 2, 1).join(","), "t,x_0,x_1,v_norm,accel_norm,W_1,W_2,merit,E_ref0");
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
    }
}
