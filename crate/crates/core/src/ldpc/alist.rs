//! Reader and writer for the alist sparse-matrix format.
//!
//! Layout (all indices 1-based):
//!
//! ```text
//! N M
//! max_col_degree max_row_degree
//! col_degree[0] .. col_degree[N-1]
//! row_degree[0] .. row_degree[M-1]
//! N lines of check indices, one line per column
//! M lines of bit indices, one line per row
//! ```
//!
//! Index lines may be padded with zeros up to the maximum degree.

use super::{AlistErrorKind, LdpcError, ParityCheckMatrix};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-blank line as parsed integers, with its 1-based line number.
    fn next_numbers(&mut self) -> Result<(usize, Vec<usize>), LdpcError> {
        for (idx, line) in self.inner.by_ref() {
            self.last = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| LdpcError::Alist {
                        line: idx + 1,
                        kind: AlistErrorKind::InvalidNumber(tok.to_string()),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok((idx + 1, nums));
        }
        Err(err(self.last + 1, AlistErrorKind::UnexpectedEof))
    }
}

fn err(line: usize, kind: AlistErrorKind) -> LdpcError {
    LdpcError::Alist { line, kind }
}

fn read_indices(
    lines: &mut Lines<'_>,
    degree: usize,
    max_degree: usize,
    bound: usize,
) -> Result<(usize, Vec<usize>), LdpcError> {
    let (line, nums) = lines.next_numbers()?;
    let (entries, padding) = nums.split_at(nums.len().min(degree));
    if entries.len() != degree
        || padding.iter().any(|&v| v != 0)
        || nums.len() > max_degree.max(degree)
    {
        return Err(err(
            line,
            AlistErrorKind::DegreeMismatch(format!(
                "expected {degree} indices (optionally zero padded to {max_degree}), found {:?}",
                nums
            )),
        ));
    }
    let mut out = Vec::with_capacity(degree);
    for &index in entries {
        if index == 0 || index > bound {
            return Err(err(line, AlistErrorKind::IndexOutOfRange { index, bound }));
        }
        out.push(index - 1);
    }
    Ok((line, out))
}

pub(super) fn parse(text: &str) -> Result<ParityCheckMatrix, LdpcError> {
    let mut lines = Lines::new(text);

    let (line, dims) = lines.next_numbers()?;
    let [n_bits, n_checks] = dims[..] else {
        return Err(err(
            line,
            AlistErrorKind::MalformedHeader(format!("expected `N M`, found {dims:?}")),
        ));
    };
    if n_bits == 0 || n_checks == 0 {
        return Err(err(
            line,
            AlistErrorKind::MalformedHeader("dimensions must be positive".into()),
        ));
    }

    let (line, maxes) = lines.next_numbers()?;
    let [max_col, max_row] = maxes[..] else {
        return Err(err(
            line,
            AlistErrorKind::MalformedHeader(format!(
                "expected `max_col_degree max_row_degree`, found {maxes:?}"
            )),
        ));
    };

    let (line, col_degrees) = lines.next_numbers()?;
    check_degree_list(line, &col_degrees, n_bits, max_col, "column")?;
    let (line, row_degrees) = lines.next_numbers()?;
    check_degree_list(line, &row_degrees, n_checks, max_row, "row")?;

    let mut cols = Vec::with_capacity(n_bits);
    for &d in &col_degrees {
        let (line, mut col) = read_indices(&mut lines, d, max_col, n_checks)?;
        col.sort_unstable();
        if col.windows(2).any(|w| w[0] == w[1]) {
            return Err(err(
                line,
                AlistErrorKind::DegreeMismatch("duplicate check index in column".into()),
            ));
        }
        cols.push(col);
    }
    let mut rows = Vec::with_capacity(n_checks);
    let mut row_lines = Vec::with_capacity(n_checks);
    for &d in &row_degrees {
        let (line, row) = read_indices(&mut lines, d, max_row, n_bits)?;
        rows.push(row);
        row_lines.push(line);
    }

    let h = ParityCheckMatrix::from_rows(n_bits, rows).map_err(|e| {
        err(
            row_lines.first().copied().unwrap_or(0),
            AlistErrorKind::Inconsistent(e.to_string()),
        )
    })?;
    if let Some(j) = (0..n_bits).find(|&j| h.col(j) != cols[j].as_slice()) {
        return Err(err(
            row_lines[0],
            AlistErrorKind::Inconsistent(format!(
                "column {} lists checks {:?} but rows give {:?}",
                j + 1,
                cols[j].iter().map(|c| c + 1).collect::<Vec<_>>(),
                h.col(j).iter().map(|c| c + 1).collect::<Vec<_>>()
            )),
        ));
    }
    Ok(h)
}

fn check_degree_list(
    line: usize,
    degrees: &[usize],
    expected_len: usize,
    max_degree: usize,
    what: &str,
) -> Result<(), LdpcError> {
    if degrees.len() != expected_len {
        return Err(err(
            line,
            AlistErrorKind::DegreeMismatch(format!(
                "expected {expected_len} {what} degrees, found {}",
                degrees.len()
            )),
        ));
    }
    if let Some(&d) = degrees.iter().find(|&&d| d > max_degree) {
        return Err(err(
            line,
            AlistErrorKind::DegreeMismatch(format!(
                "{what} degree {d} exceeds declared maximum {max_degree}"
            )),
        ));
    }
    Ok(())
}

pub(super) fn write(h: &ParityCheckMatrix) -> String {
    use std::fmt::Write;

    let max_col = h.cols().iter().map(Vec::len).max().unwrap_or(0);
    let max_row = h.rows().iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    let join =
        |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "{} {}", h.n_bits(), h.n_checks());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(&mut h.cols().iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut h.rows().iter().map(Vec::len)));
    for col in h.cols() {
        let padded = col.iter().map(|c| c + 1).chain(std::iter::repeat(0));
        let _ = writeln!(out, "{}", join(&mut padded.take(max_col)));
    }
    for row in h.rows() {
        let padded = row.iter().map(|j| j + 1).chain(std::iter::repeat(0));
        let _ = writeln!(out, "{}", join(&mut padded.take(max_row)));
    }
    out
}
