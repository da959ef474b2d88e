//! Plain-text matrix and decomposition files, and JSON bound reports.
//!
//! Matrix format: the first line holds `n`, then `n` lines of `n` numbers
//! separated by spaces. Values are written with 17 significant digits, which
//! round-trips every `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bounds::{BoundReport, Witness};
use crate::decompose::{Decomposition, Source};
use crate::error::{Error, Result};
use crate::linalg::GramMatrix;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| parse_err(line, format!("not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

/// Non-blank lines with their 1-based line numbers; `#` and `%` start comments.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split(['#', '%']).next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn parse_matrix(text: &str) -> Result<GramMatrix> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let n: usize = header.parse().map_err(|_| parse_err(hline, format!("expected dimension, found {header:?}")))?;
    if n == 0 {
        return Err(parse_err(hline, "dimension must be at least 1"));
    }
    let mut data = Vec::with_capacity(n * n);
    let mut last = hline;
    for row in 0..n {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(last + 1, format!("truncated: expected {n} rows, found {row}")))?;
        last = ln;
        let before = data.len();
        for tok in l.split_whitespace() {
            data.push(parse_f64(tok, ln)?);
        }
        let got = data.len() - before;
        if got != n {
            return Err(parse_err(ln, format!("expected {n} values, found {got}")));
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, format!("unexpected content after {n} rows")));
    }
    GramMatrix::from_row_major(n, data)
}

pub fn format_matrix(a: &GramMatrix) -> String {
    let n = a.n();
    let mut s = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = a.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<GramMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn save_matrix(path: impl AsRef<Path>, a: &GramMatrix) -> Result<()> {
    fs::write(path, format_matrix(a))?;
    Ok(())
}

/// Header `n k total_cost source`, then one line `index cost x_1 .. x_n` per vector.
pub fn format_decomposition(dec: &Decomposition) -> String {
    let mut s = format!("{} {} {:.16e} {}\n", dec.n, dec.len(), dec.total_cost, dec.source);
    for (k, (x, cost)) in dec.vectors.iter().zip(&dec.costs).enumerate() {
        let _ = write!(s, "{k} {cost:.16e}");
        for v in x {
            let _ = write!(s, " {v:.16e}");
        }
        s.push('\n');
    }
    s
}

pub fn parse_decomposition(text: &str) -> Result<Decomposition> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 {
        return Err(parse_err(hline, "header must be: n k total_cost source"));
    }
    let n: usize = h[0].parse().map_err(|_| parse_err(hline, "bad n"))?;
    let k: usize = h[1].parse().map_err(|_| parse_err(hline, "bad k"))?;
    let total = parse_f64(h[2], hline)?;
    let source: Source = h[3].parse().map_err(|e: Error| parse_err(hline, e.to_string()))?;
    if n == 0 {
        return Err(parse_err(hline, "dimension must be at least 1"));
    }
    let mut vectors = Vec::with_capacity(k);
    let mut last = hline;
    for idx in 0..k {
        let (ln, l) =
            lines.next().ok_or_else(|| parse_err(last + 1, format!("truncated: expected {k} vectors, found {idx}")))?;
        last = ln;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != n + 2 {
            return Err(parse_err(ln, format!("expected index, cost and {n} values")));
        }
        if toks[0].parse::<usize>().ok() != Some(idx) {
            return Err(parse_err(ln, format!("expected index {idx}")));
        }
        parse_f64(toks[1], ln)?;
        vectors.push(toks[2..].iter().map(|t| parse_f64(t, ln)).collect::<Result<Vec<_>>>()?);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "unexpected content after the last vector"));
    }
    let dec = Decomposition::from_vectors(n, vectors, source);
    if (dec.total_cost - total).abs() > 1e-12 * total.abs().max(1.0) {
        return Err(parse_err(hline, format!("total_cost {total} does not match vectors ({})", dec.total_cost)));
    }
    Ok(dec)
}

pub fn save_decomposition(path: impl AsRef<Path>, dec: &Decomposition) -> Result<()> {
    fs::write(path, format_decomposition(dec))?;
    Ok(())
}

pub fn load_decomposition(path: impl AsRef<Path>) -> Result<Decomposition> {
    parse_decomposition(&fs::read_to_string(path)?)
}

/// Witness as a matrix: matrices as-is, a vector `x` as `x x^T`.
pub fn witness_matrix(w: &Witness) -> GramMatrix {
    match w {
        Witness::Matrix(m) => m.clone(),
        Witness::Vector(x) => GramMatrix::outer(x),
    }
}

/// Writes `witness` next to `json_path` as `<stem>.witness<i>.txt` and records
/// the path in the report.
pub fn attach_witness_file(report: &mut BoundReport, json_path: &Path, index: usize) -> Result<()> {
    let Some(w) = &report.witness else { return Ok(()) };
    let stem = json_path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let side: PathBuf = json_path.with_file_name(format!("{stem}.witness{index}.txt"));
    save_matrix(&side, &witness_matrix(w))?;
    report.witness_path = Some(side.display().to_string());
    Ok(())
}

/// Saves reports as a JSON array, with witnesses in side files.
pub fn save_reports(path: impl AsRef<Path>, reports: &mut [BoundReport]) -> Result<()> {
    let path = path.as_ref();
    for (i, r) in reports.iter_mut().enumerate() {
        attach_witness_file(r, path, i)?;
    }
    fs::write(path, serde_json::to_string_pretty(reports)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{greedy_peel, PivotRule};

    #[test]
    fn identity_round_trip() {
        let a = GramMatrix::identity(5);
        assert_eq!(parse_matrix(&format_matrix(&a)).unwrap(), a);
    }

    #[test]
    fn awkward_values_round_trip() {
        let a = GramMatrix::from_rows(&[vec![0.1, 1.0 / 3.0], vec![1.0 / 3.0, -2.5e-300]]).unwrap();
        let b = parse_matrix(&format_matrix(&a)).unwrap();
        assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn scientific_notation() {
        let a = parse_matrix("2\n1e0 2.5E-1\n0.25 3\n").unwrap();
        assert_eq!(a.get(0, 1), 0.25);
    }

    #[test]
    fn comments_are_skipped() {
        let a = parse_matrix("% banner\n2 # size\n\n1 0\n# mid\n0 4 % last\n").unwrap();
        assert_eq!(a, GramMatrix::diagonal(&[1.0, 4.0]));
        match parse_matrix("# c\n2\n1 0\n0 y\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_matrix("3\n1 0 0\n0 1 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        match parse_matrix("2\n1 0\n0 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_matrix("2\n1 0 0\n0 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_matrix("0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_matrix("2\n1 5\n0 1\n"), Err(Error::NotSymmetric { .. })));
        assert!(matches!(parse_matrix("1\n1\n1\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn decomposition_round_trip() {
        let a = GramMatrix::all_ones(3).add_to_diagonal(1.0);
        let run = greedy_peel(&a, &PivotRule::FixedOrder(vec![2, 0, 1]), 3).unwrap();
        let text = format_decomposition(&run.decomposition);
        let back = parse_decomposition(&text).unwrap();
        assert_eq!(back.source, run.decomposition.source);
        assert_eq!(back.vectors, run.decomposition.vectors);
        assert!(parse_decomposition("3 2 1.0 eigen\n0 1 1 0 0\n").is_err());
    }
}
