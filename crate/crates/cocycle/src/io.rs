//! Plain-text readers and writers for matrices and densities.
//!
//! Two small formats live here, both line-oriented, both designed so a file
//! written by this module reads back bit-for-bit:
//!
//! **Matrix table** (`.matrices`) — a list of square column-stochastic
//! matrices, one per label:
//!
//! ```text
//! dim,2
//! label,0
//! 0.5,0.3
//! 0.5,0.7
//! label,1
//! 0.9,0.2
//! 0.1,0.8
//! ```
//!
//! Rows are written top to bottom, so the line after `label,k` holds row 0 of
//! generator `k`. `#` starts a comment and blank lines are skipped. Labels
//! must appear as `0, 1, 2, …` in order.
//!
//! **Density line** (`density,<d>` header plus one comma-joined row of cell
//! masses) — used for seed families and report snapshots.
//!
//! Numbers are written with `f64`'s `Display`, which is the shortest string
//! that round-trips, so rewriting a file is byte-stable. On input every
//! numeric field also accepts a fraction `a/b`, which is convenient for exact
//! thirds and sevenths in hand-written files.

use crate::density::Density;
use crate::error::{Error, Result};
use crate::markov::MarkovMatrix;
use nalgebra::DMatrix;

/// Parses a numeric field: a plain decimal (`0.25`, `1e-3`) or a fraction
/// `a/b` of two decimals. Returns `None` for empty fields, malformed input,
/// zero denominators, and non-finite results.
pub(crate) fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let value = if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().ok()?;
        let den: f64 = den.trim().parse().ok()?;
        if den == 0.0 {
            return None;
        }
        num / den
    } else {
        s.parse().ok()?
    };
    value.is_finite().then_some(value)
}

/// Formats a float with the shortest representation that parses back to the
/// same bits. Centralised so every writer in the crate agrees.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn file_err(line: usize, msg: impl Into<String>) -> Error {
    Error::FileFormat {
        line,
        msg: msg.into(),
    }
}

/// Lines of `text` with 1-based numbers, comments stripped, blanks dropped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        (!stripped.is_empty()).then_some((idx + 1, stripped))
    })
}

fn parse_row(line: usize, text: &str, dim: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != dim {
        return Err(file_err(
            line,
            format!("expected {dim} comma-separated entries, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|f| parse_number(f).ok_or_else(|| file_err(line, format!("bad number `{}`", f.trim()))))
        .collect()
}

/// Reads a matrix table: a `dim,<d>` header followed by `label,<k>` blocks
/// each holding `d` rows of `d` entries. Every matrix is validated as
/// column-stochastic by [`MarkovMatrix::new`].
pub fn read_matrix_table(text: &str) -> Result<Vec<MarkovMatrix>> {
    let mut lines = content_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| file_err(1, "empty matrix table; expected a `dim,<d>` header"))?;
    let dim = match header.split_once(',') {
        Some(("dim", d)) => d
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| file_err(line, format!("bad dimension `{}`", d.trim())))?,
        _ => return Err(file_err(line, format!("expected `dim,<d>` header, found `{header}`"))),
    };

    let mut matrices = Vec::new();
    loop {
        let Some((line, text)) = lines.next() else { break };
        let expected = matrices.len();
        match text.split_once(',') {
            Some(("label", k)) if k.trim() == expected.to_string() => {}
            Some(("label", k)) => {
                return Err(file_err(
                    line,
                    format!("labels must be consecutive from 0; expected `label,{expected}`, found `label,{}`", k.trim()),
                ));
            }
            _ => {
                return Err(file_err(line, format!("expected `label,{expected}`, found `{text}`")));
            }
        }
        let mut rows = Vec::with_capacity(dim);
        for _ in 0..dim {
            let (line, text) = lines
                .next()
                .ok_or_else(|| file_err(line, format!("matrix for label {expected} is truncated")))?;
            rows.push(parse_row(line, text, dim)?);
        }
        let matrix = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
        matrices.push(
            MarkovMatrix::new(matrix)
                .map_err(|e| file_err(line, format!("matrix for label {expected}: {e}")))?,
        );
    }
    if matrices.is_empty() {
        return Err(file_err(line, "matrix table holds no `label` blocks"));
    }
    Ok(matrices)
}

/// Writes a matrix table in the format [`read_matrix_table`] accepts.
pub fn write_matrix_table(matrices: &[MarkovMatrix]) -> String {
    let mut out = String::new();
    if matrices.is_empty() {
        return out;
    }
    let dim = matrices[0].dim();
    out.push_str(&format!("dim,{dim}\n"));
    for (k, m) in matrices.iter().enumerate() {
        out.push_str(&format!("label,{k}\n"));
        for i in 0..dim {
            let row: Vec<String> = (0..dim).map(|j| fmt_f64(m.get(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

/// Reads a density line: `density,<d>` header plus one row of `d` masses.
/// Masses must be nonnegative and sum to 1 up to [`Density::new`]'s tolerance.
pub fn read_density_line(text: &str) -> Result<Density> {
    let mut lines = content_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| file_err(1, "empty density; expected a `density,<d>` header"))?;
    let dim = match header.split_once(',') {
        Some(("density", d)) => d
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| file_err(line, format!("bad dimension `{}`", d.trim())))?,
        _ => {
            return Err(file_err(
                line,
                format!("expected `density,<d>` header, found `{header}`"),
            ))
        }
    };
    let (line, text) = lines
        .next()
        .ok_or_else(|| file_err(line, "density header without a mass row"))?;
    let masses = parse_row(line, text, dim)?;
    if let Some((line, extra)) = lines.next() {
        return Err(file_err(line, format!("unexpected trailing content `{extra}`")));
    }
    Density::from_masses(&masses).map_err(|e| file_err(line, e.to_string()))
}

/// Writes a density in the format [`read_density_line`] accepts.
pub fn write_density_line(f: &Density) -> String {
    let row: Vec<String> = f.masses().iter().map(|&m| fmt_f64(m)).collect();
    format!("density,{}\n{}\n", f.dim(), row.join(","))
}

/// Writes a bare matrix as comma-joined rows (no header); report tables
/// prepend their own context lines.
pub fn write_matrix_rows(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_f64(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
