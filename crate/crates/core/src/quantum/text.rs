// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Plain-text matrices: a line holding the dimension `d`, then `d` rows of `d`
//! whitespace-separated `re,im` pairs. Rectangular matrices use a
//! `rows cols` header. Blank lines and `#` comments are
//! ignored.

use std::fmt::Write;

use num_complex::Complex64;

use super::{Operator, OperatorKind, QuantumError};

fn parse_error(line: usize, reason: impl Into<String>) -> QuantumError {
    QuantumError::Parse { line, reason: reason.into() }
}

fn parse_entry(token: &str, line: usize) -> Result<Complex64, QuantumError> {
    let (re, im) =
        token.split_once(',').ok_or_else(|| parse_error(line, format!("expected `re,im`, found `{token}`")))?;
    let re: f64 = re.trim().parse().map_err(|_| parse_error(line, format!("bad real part `{re}`")))?;
    let im: f64 = im.trim().parse().map_err(|_| parse_error(line, format!("bad imaginary part `{im}`")))?;
    Ok(Complex64::new(re, im))
}

/// Parse a possibly rectangular matrix whose header is `d` (square) or
/// `rows cols`. Returns `(rows, cols, row-major entries)`.
pub fn parse_rect_matrix(text: &str) -> Result<(usize, usize, Vec<Complex64>), QuantumError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, header) = lines.next().ok_or_else(|| parse_error(1, "missing dimension line"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_error(line, format!("bad dimension `{t}`"))))
        .collect::<Result<_, _>>()?;
    let (rows, cols) = match dims[..] {
        [d] => (d, d),
        [r, c] => (r, c),
        _ => return Err(parse_error(line, "header must be `d` or `rows cols`")),
    };
    if rows == 0 || cols == 0 {
        return Err(parse_error(line, "dimensions must be ≥ 1"));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    let mut last = line;
    for r in 0..rows {
        let (line, row) = lines.next().ok_or_else(|| parse_error(last, format!("missing row {}", r + 1)))?;
        last = line;
        let before = entries.len();
        for token in row.split_whitespace() {
            entries.push(parse_entry(token, line)?);
        }
        if entries.len() - before != cols {
            return Err(parse_error(line, format!("expected {cols} entries, found {}", entries.len() - before)));
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_error(line, "trailing content after matrix"));
    }
    Ok((rows, cols, entries))
}

/// Parse a square matrix and verify it against `kind`.
pub fn parse_matrix(text: &str, kind: OperatorKind) -> Result<Operator, QuantumError> {
    let (rows, cols, entries) = parse_rect_matrix(text)?;
    if rows != cols {
        return Err(parse_error(1, format!("expected a square matrix, found {rows}×{cols}")));
    }
    Operator::new(rows, entries, kind)
}

/// Inverse of [`parse_matrix`] using shortest round-trip float formatting.
pub fn format_matrix(op: &Operator) -> String {
    let mut out = format!("{}\n", op.dim());
    for row in op.entries().chunks_exact(op.dim()) {
        let cells: Vec<String> = row.iter().map(|z| format!("{},{}", z.re, z.im)).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::cnot_matrix;

    #[test]
    fn parses_and_formats() {
        let text = "# CNOT\n4\n1,0 0,0 0,0 0,0\n0,0 1,0 0,0 0,0\n0,0 0,0 0,0 1,0\n0,0 0,0 1,0 0,0\n";
        let op = parse_matrix(text, OperatorKind::Unitary).unwrap();
        assert_eq!(op.entries(), cnot_matrix().entries());
        let again = parse_matrix(&format_matrix(&op), OperatorKind::Unitary).unwrap();
        assert_eq!(again, op);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_matrix("2\n1,0 0,0\n0,0 x\n", OperatorKind::General).unwrap_err();
        assert!(matches!(err, QuantumError::Parse { line: 3, .. }), "{err}");
        assert!(parse_matrix("2\n1,0 0,0\n", OperatorKind::General).is_err());
        assert!(parse_matrix("1\n1,0\n2,0\n", OperatorKind::General).is_err());
        let (r, c, e) = parse_rect_matrix("2 3\n1,0 0,0 0,0\n0,0 1,0 0,1\n").unwrap();
        assert_eq!((r, c, e.len()), (2, 3, 6));
        assert!(parse_matrix("2 3\n1,0 0,0 0,0\n0,0 1,0 0,1\n", OperatorKind::General).is_err());
        assert!(matches!(
            parse_matrix("2\n0,0 1,0\n0,0 0,0\n", OperatorKind::Hermitian),
            Err(QuantumError::NotHermitian { .. })
        ));
    }
}
