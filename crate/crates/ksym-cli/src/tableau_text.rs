//! Text format for coefficient tableaus.
//!
//! A file is a sequence of sections. A section starts with a header line
//! holding exactly one of `A`, `B`, `alpha`, `beta` (plus `A~`, `B~`,
//! `alpha~`, `beta~` for partitioned methods) and is followed by rows of
//! whitespace-separated numbers: square matrices for `A`/`B` (and tilde
//! forms), a single weight row for `alpha`/`beta` (and tilde forms). Blank
//! lines and lines starting with `#` are ignored. A method is partitioned
//! exactly when any tilde section appears — and then all four are required.
//!
//! Example (the one-stage implicit scheme):
//!
//! ```text
//! A
//! 0.5
//! B
//! 0.5
//! alpha
//! 1
//! beta
//! 1
//! ```

use std::collections::BTreeMap;
use std::fmt;

use ksym_core::tableau::{KprkTableau, KrkTableau};

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq)]
pub struct TextError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for TextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for TextError {}

fn err<T>(line: usize, col: usize, msg: String) -> Result<T, TextError> {
    Err(TextError { line, col, msg })
}

/// A parsed tableau of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedTableau {
    Krk(KrkTableau),
    Kprk(KprkTableau),
}

const SECTION_NAMES: [&str; 8] = ["A", "B", "alpha", "beta", "A~", "B~", "alpha~", "beta~"];

struct Section {
    header_line: usize,
    rows: Vec<Vec<f64>>,
    row_lines: Vec<usize>,
}

/// Parses the tableau text format; positions in errors are 1-based.
pub fn parse_tableau_text(text: &str) -> Result<ParsedTableau, TextError> {
    let mut sections: BTreeMap<&str, Section> = BTreeMap::new();
    let mut current: Option<&str> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if SECTION_NAMES.contains(&trimmed) {
            let name = SECTION_NAMES[SECTION_NAMES.iter().position(|n| *n == trimmed).unwrap()];
            if sections.contains_key(name) {
                return err(line_no, first_col(line), format!("duplicate section '{name}'"));
            }
            sections.insert(
                name,
                Section { header_line: line_no, rows: Vec::new(), row_lines: Vec::new() },
            );
            current = Some(name);
            continue;
        }
        let Some(name) = current else {
            return err(
                line_no,
                first_col(line),
                "expected a section header (A, B, alpha, beta, A~, B~, alpha~, beta~)".into(),
            );
        };
        let mut row = Vec::new();
        for (col, token) in tokens(line) {
            let v: f64 = match token.parse() {
                Ok(v) => v,
                Err(_) => return err(line_no, col, format!("invalid number: '{token}'")),
            };
            if !v.is_finite() {
                return err(line_no, col, format!("non-finite coefficient: '{token}'"));
            }
            row.push(v);
        }
        let sec = sections.get_mut(name).unwrap();
        sec.rows.push(row);
        sec.row_lines.push(line_no);
    }

    for name in ["A", "B", "alpha", "beta"] {
        if !sections.contains_key(name) {
            return err(last_line(text), 1, format!("missing required section '{name}'"));
        }
    }
    let tilde_present: Vec<&str> =
        ["A~", "B~", "alpha~", "beta~"].into_iter().filter(|n| sections.contains_key(*n)).collect();
    let partitioned = !tilde_present.is_empty();
    if partitioned && tilde_present.len() != 4 {
        let missing = ["A~", "B~", "alpha~", "beta~"]
            .into_iter()
            .find(|n| !sections.contains_key(*n))
            .unwrap();
        return err(
            last_line(text),
            1,
            format!("partitioned tableau requires all tilde sections; missing '{missing}'"),
        );
    }

    let s = sections["A"].rows.len();
    if s == 0 {
        return err(sections["A"].header_line, 1, "section 'A' has no rows".into());
    }

    let matrix = |sec: &Section, name: &str| -> Result<Vec<f64>, TextError> {
        if sec.rows.len() != s {
            return err(
                sec.header_line,
                1,
                format!("section '{name}' must have {s} rows, found {}", sec.rows.len()),
            );
        }
        let mut flat = Vec::with_capacity(s * s);
        for (r, row) in sec.rows.iter().enumerate() {
            if row.len() != s {
                return err(
                    sec.row_lines[r],
                    1,
                    format!("section '{name}' row must have {s} entries, found {}", row.len()),
                );
            }
            flat.extend_from_slice(row);
        }
        Ok(flat)
    };
    let weights = |sec: &Section, name: &str| -> Result<Vec<f64>, TextError> {
        if sec.rows.len() != 1 {
            return err(
                sec.header_line,
                1,
                format!("section '{name}' must have exactly one row, found {}", sec.rows.len()),
            );
        }
        if sec.rows[0].len() != s {
            return err(
                sec.row_lines[0],
                1,
                format!("section '{name}' must have {s} entries, found {}", sec.rows[0].len()),
            );
        }
        Ok(sec.rows[0].clone())
    };

    let a = matrix(&sections["A"], "A")?;
    let b = matrix(&sections["B"], "B")?;
    let alpha = weights(&sections["alpha"], "alpha")?;
    let beta = weights(&sections["beta"], "beta")?;

    if partitioned {
        let a_t = matrix(&sections["A~"], "A~")?;
        let b_t = matrix(&sections["B~"], "B~")?;
        let alpha_t = weights(&sections["alpha~"], "alpha~")?;
        let beta_t = weights(&sections["beta~"], "beta~")?;
        match KprkTableau::new(s, a, a_t, b, b_t, alpha, alpha_t, beta, beta_t) {
            Ok(t) => Ok(ParsedTableau::Kprk(t)),
            Err(e) => err(last_line(text), 1, e.to_string()),
        }
    } else {
        match KrkTableau::new(s, a, b, alpha, beta) {
            Ok(t) => Ok(ParsedTableau::Krk(t)),
            Err(e) => err(last_line(text), 1, e.to_string()),
        }
    }
}

/// 1-based column of the first non-whitespace character.
fn first_col(line: &str) -> usize {
    line.char_indices().find(|(_, c)| !c.is_whitespace()).map_or(1, |(i, _)| i + 1)
}

fn last_line(text: &str) -> usize {
    text.lines().count().max(1)
}

/// Whitespace tokenization with 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ksym_core::tableau::{scheme_1, scheme_4};

    #[test]
    fn parses_one_stage_scheme() {
        let text = "# comment\nA\n0.5\nB\n0.5\nalpha\n1\nbeta\n1\n";
        match parse_tableau_text(text).unwrap() {
            ParsedTableau::Krk(t) => assert_eq!(t, scheme_1()),
            _ => panic!("expected a non-partitioned tableau"),
        }
    }

    #[test]
    fn parses_partitioned_scheme() {
        let text = "A\n0 0\n0.5 0.5\nA~\n0.5 0\n0.5 0\nB\n0 0\n0.5 0.5\nB~\n0.5 0\n0.5 0\n\
                    alpha\n0.5 0.5\nalpha~\n0.5 0.5\nbeta\n0.5 0.5\nbeta~\n0.5 0.5\n";
        match parse_tableau_text(text).unwrap() {
            ParsedTableau::Kprk(t) => assert_eq!(t, scheme_4()),
            _ => panic!("expected a partitioned tableau"),
        }
    }

    #[test]
    fn reports_line_and_column() {
        let text = "A\n0.5\nB\n0.x5\nalpha\n1\nbeta\n1\n";
        let e = parse_tableau_text(text).unwrap_err();
        assert_eq!((e.line, e.col), (4, 1));
        assert!(e.msg.contains("0.x5"));

        let text = "A\n0.5 nope\nB\n0.5\nalpha\n1\nbeta\n1\n";
        let e = parse_tableau_text(text).unwrap_err();
        assert_eq!((e.line, e.col), (2, 5));
    }

    #[test]
    fn enforces_structure() {
        // missing beta
        let e = parse_tableau_text("A\n0.5\nB\n0.5\nalpha\n1\n").unwrap_err();
        assert!(e.msg.contains("missing required section 'beta'"));
        // partial tilde set
        let e = parse_tableau_text("A\n0.5\nB\n0.5\nalpha\n1\nbeta\n1\nA~\n0.5\n").unwrap_err();
        assert!(e.msg.contains("missing 'B~'"));
        // ragged matrix row
        let e = parse_tableau_text("A\n0.5 0.5\nB\n0.5\nalpha\n1\nbeta\n1\n").unwrap_err();
        assert_eq!(e.line, 2);
        // duplicate section
        let e = parse_tableau_text("A\n0.5\nA\n0.5\nB\n0.5\nalpha\n1\nbeta\n1\n").unwrap_err();
        assert!(e.msg.contains("duplicate"));
        // data before any header
        let e = parse_tableau_text("0.5\nA\n0.5\n").unwrap_err();
        assert_eq!(e.line, 1);
        // non-finite coefficient
        let e = parse_tableau_text("A\nNaN\nB\n0.5\nalpha\n1\nbeta\n1\n").unwrap_err();
        assert!(e.msg.contains("non-finite"));
    }
}
