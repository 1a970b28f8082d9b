//! Reader and writer for the alist sparse-matrix format.
//!
//! ```text
//! n r
//! max_col_degree max_row_degree
//! <n column degrees>
//! <r row degrees>
//! <n lines: 1-based row indices of each column, zero-padded>
//! <r lines: 1-based column indices of each row, zero-padded>
//! ```

use std::fmt::Write as _;

use super::{AlistError, ParityCheck};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-blank line as parsed integers, with its 1-based line number.
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>), AlistError> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| AlistError {
                        line: i + 1,
                        message: format!("`{t}` is not a non-negative integer"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok((i + 1, nums));
        }
        Err(AlistError {
            line: self.last + 1,
            message: format!("unexpected end of input, expected {what}"),
        })
    }

    fn expect_exact(&mut self, what: &str, count: usize) -> Result<(usize, Vec<usize>), AlistError> {
        let (line, nums) = self.next_numbers(what)?;
        if nums.len() != count {
            return Err(AlistError {
                line,
                message: format!("expected {count} values for {what}, found {}", nums.len()),
            });
        }
        Ok((line, nums))
    }
}

/// Reads the index list of one column/row: `degree` 1-based indices in
/// `1..=bound`, optionally followed by zero padding up to `max_degree`.
fn entry_list(
    line: usize,
    nums: &[usize],
    degree: usize,
    max_degree: usize,
    bound: usize,
) -> Result<Vec<usize>, AlistError> {
    if nums.len() < degree || nums.len() > max_degree.max(degree) {
        return Err(AlistError {
            line,
            message: format!(
                "expected {degree} indices (padded to at most {max_degree}), found {}",
                nums.len()
            ),
        });
    }
    let mut out = Vec::with_capacity(degree);
    for &x in &nums[..degree] {
        if x == 0 || x > bound {
            return Err(AlistError {
                line,
                message: format!("index {x} out of range 1..={bound}"),
            });
        }
        out.push(x - 1);
    }
    if nums[degree..].iter().any(|&x| x != 0) {
        return Err(AlistError {
            line,
            message: "non-zero value in padding".into(),
        });
    }
    Ok(out)
}

pub fn parse_alist(text: &str) -> Result<ParityCheck, AlistError> {
    let mut lines = Lines::new(text);
    let (_, dims) = lines.expect_exact("`n r` header", 2)?;
    let (n, r) = (dims[0], dims[1]);
    let (_, maxes) = lines.expect_exact("maximum degrees", 2)?;
    let (max_col, max_row) = (maxes[0], maxes[1]);
    let (cl, col_deg) = lines.expect_exact("column degrees", n)?;
    let (rl, row_deg) = lines.expect_exact("row degrees", r)?;
    if let Some(&d) = col_deg.iter().find(|&&d| d > max_col) {
        return Err(AlistError {
            line: cl,
            message: format!("column degree {d} exceeds declared maximum {max_col}"),
        });
    }
    if let Some(&d) = row_deg.iter().find(|&&d| d > max_row) {
        return Err(AlistError {
            line: rl,
            message: format!("row degree {d} exceeds declared maximum {max_row}"),
        });
    }
    let col_sum: usize = col_deg.iter().sum();
    let row_sum: usize = row_deg.iter().sum();
    if col_sum != row_sum {
        return Err(AlistError {
            line: rl,
            message: format!("column degrees sum to {col_sum} but row degrees to {row_sum}"),
        });
    }

    let mut col_lists = Vec::with_capacity(n);
    for (j, &d) in col_deg.iter().enumerate() {
        let (line, nums) = lines.next_numbers(&format!("entries of column {}", j + 1))?;
        col_lists.push((line, entry_list(line, &nums, d, max_col, r)?));
    }
    let mut rows = Vec::with_capacity(r);
    let mut row_lines = Vec::with_capacity(r);
    for (i, &d) in row_deg.iter().enumerate() {
        let (line, nums) = lines.next_numbers(&format!("entries of row {}", i + 1))?;
        rows.push(entry_list(line, &nums, d, max_row, n)?);
        row_lines.push(line);
    }

    let h = ParityCheck::from_rows(n, rows).map_err(|e| AlistError {
        line: row_lines.first().copied().unwrap_or(lines.last),
        message: e.to_string(),
    })?;
    for (j, (line, mut list)) in col_lists.into_iter().enumerate() {
        list.sort_unstable();
        if list != h.col(j) {
            return Err(AlistError {
                line,
                message: format!("column {} disagrees with the row lists", j + 1),
            });
        }
    }
    Ok(h)
}

pub fn emit_alist(h: &ParityCheck) -> String {
    let mut out = String::new();
    let max_col = h.max_col_degree();
    let max_row = h.max_row_degree();
    let join = |v: &mut dyn Iterator<Item = usize>| {
        v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(out, "{} {}", h.n(), h.r());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(&mut h.cols().iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut h.rows().iter().map(Vec::len)));
    for col in h.cols() {
        let padded = col.iter().map(|&i| i + 1).chain(std::iter::repeat(0)).take(max_col);
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    for row in h.rows() {
        let padded = row.iter().map(|&j| j + 1).chain(std::iter::repeat(0)).take(max_row);
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    out
}
