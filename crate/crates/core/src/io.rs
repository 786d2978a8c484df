//! Text format for rational matrices.
//!
//! ```text
//! # comment
//! 2 3
//! 1 0 1/2
//! -3 4/7 0
//! ```
//!
//! The first data line is the header `m n`, followed by `m` lines of `n`
//! tokens each. Tokens are integers or `p/q`. Text after `#` and blank lines
//! are ignored. Several matrices may follow each other in one file.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational::{format_rational, parse_rational};

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

/// Data lines with their tokens, comments stripped.
fn data_lines(text: &str) -> Vec<(usize, Vec<Token<'_>>)> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push(Token {
                        text: &line[s..pos],
                        line: idx + 1,
                        column: line[..s].chars().count() + 1,
                    });
                }
            } else if start.is_none() {
                start = Some(pos);
            }
        }
        if !tokens.is_empty() {
            out.push((idx + 1, tokens));
        }
    }
    out
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_dim(tok: &Token<'_>) -> Result<usize> {
    tok.text
        .parse::<usize>()
        .ok()
        .filter(|&d| d > 0)
        .ok_or_else(|| parse_err(tok.line, tok.column, format!("expected a positive dimension, found {:?}", tok.text)))
}

fn parse_block<'a, I>(lines: &mut std::iter::Peekable<I>, last_line: usize) -> Result<QMatrix>
where
    I: Iterator<Item = (usize, Vec<Token<'a>>)>,
{
    let (line, header) = lines.next().expect("caller checked for a header");
    if header.len() != 2 {
        let col = header.get(2).map_or(header[0].column, |t| t.column);
        return Err(parse_err(line, col, format!("header needs 2 tokens \"m n\", found {}", header.len())));
    }
    let m = parse_dim(&header[0])?;
    let n = parse_dim(&header[1])?;
    let mut data = Vec::with_capacity(m * n);
    for r in 0..m {
        let Some((line, tokens)) = lines.next() else {
            return Err(parse_err(
                last_line + 1,
                1,
                format!("unexpected end of input: expected {m} rows, found {r}"),
            ));
        };
        if tokens.len() != n {
            let col = tokens.get(n).map_or_else(
                || tokens.last().map_or(1, |t| t.column + t.text.chars().count()),
                |t| t.column,
            );
            return Err(parse_err(line, col, format!("expected {n} tokens, found {}", tokens.len())));
        }
        for tok in &tokens {
            let x = parse_rational(tok.text)
                .map_err(|_| parse_err(tok.line, tok.column, format!("invalid rational {:?}", tok.text)))?;
            data.push(x);
        }
    }
    QMatrix::from_row_major(m, n, data)
}

/// Parses exactly one matrix.
pub fn parse_basis_file(text: &str) -> Result<QMatrix> {
    let mut blocks = parse_blocks(text)?;
    match blocks.len() {
        1 => Ok(blocks.pop().expect("one block")),
        0 => Err(parse_err(1, 1, "missing header \"m n\"")),
        _ => {
            // report the first line of the second block
            let lines = data_lines(text);
            let skip = 1 + blocks[0].rows();
            let (line, toks) = &lines[skip];
            Err(parse_err(*line, toks[0].column, "unexpected data after the matrix"))
        }
    }
}

/// Parses a sequence of matrices.
pub fn parse_blocks(text: &str) -> Result<Vec<QMatrix>> {
    let last_line = text.lines().count();
    let mut lines = data_lines(text).into_iter().peekable();
    let mut out = Vec::new();
    while lines.peek().is_some() {
        out.push(parse_block(&mut lines, last_line)?);
    }
    Ok(out)
}

/// Inverse of [`parse_basis_file`].
pub fn format_matrix(m: &QMatrix) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", m.rows(), m.cols());
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|c| format_rational(m.get(r, c))).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

pub fn format_blocks(ms: &[QMatrix]) -> String {
    ms.iter().map(format_matrix).collect()
}
