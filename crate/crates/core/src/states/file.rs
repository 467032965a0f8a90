//! Text state files.
//!
//! ```text
//! dims: 2 3 3
//! ket: |010> + |001> + |112> + |121>
//! ```
//!
//! or, for a bipartite density matrix,
//!
//! ```text
//! dims: 2 2
//! rho:
//! 0.5 0 0 0.5
//! 0 0 0 0
//! 0 0 0 0
//! 0.5 0 0 0.5
//! ```
//!
//! Complex entries are written `a`, `bi`, or `a+bi` / `a-bi`. Blank lines
//! and lines starting with `#` are ignored.

use num_complex::Complex64;

use super::{parse_ket, DensityMatrix, StateVector};
use crate::error::{Error, Result};
use crate::numerics::CMatrix;

#[derive(Debug, Clone)]
pub enum StateInput {
    Ket {
        dims: Vec<usize>,
        expression: String,
        state: StateVector,
    },
    Rho {
        dims: Vec<usize>,
        rho: DensityMatrix,
    },
}

impl StateInput {
    pub fn dims(&self) -> &[usize] {
        match self {
            StateInput::Ket { dims, .. } | StateInput::Rho { dims, .. } => dims,
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

/// Parses one complex literal: `1.5`, `-2e-3`, `0.5i`, `-i`, `1-2.5i`.
pub fn parse_complex(token: &str) -> Option<Complex64> {
    let t = token.trim();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    // Split at the last sign that is not a leading sign or an exponent sign.
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> Option<f64> {
        match s {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => s.parse().ok(),
        }
    };
    match split {
        Some(k) => Some(Complex64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn parse_state_file(text: &str) -> Result<StateInput> {
    let mut lines = text
        .split_inclusive('\n')
        .scan(0usize, |off, line| {
            let start = *off;
            *off += line.len();
            Some((start, line.trim_end_matches(['\n', '\r'])))
        })
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });

    let (off, first) = lines.next().ok_or_else(|| syntax(0, "empty state file"))?;
    let lead = first.len() - first.trim_start().len();
    let Some(rest) = first.trim_start().strip_prefix("dims:") else {
        return Err(syntax(off + lead, "expected 'dims:' header"));
    };
    let rest_off = off + lead + "dims:".len();
    let mut dims = Vec::new();
    for (pos, tok) in tokens(rest) {
        let d: usize = tok
            .parse()
            .map_err(|_| syntax(rest_off + pos, format!("invalid dimension '{tok}'")))?;
        if d == 0 {
            return Err(syntax(rest_off + pos, "dimension must be positive"));
        }
        dims.push(d);
    }
    if dims.is_empty() {
        return Err(syntax(rest_off, "no dimensions given"));
    }

    let (off, line) = lines
        .next()
        .ok_or_else(|| syntax(text.len(), "expected 'ket:' or 'rho:' line"))?;
    let lead = line.len() - line.trim_start().len();
    let body = line.trim_start();
    if let Some(expr) = body.strip_prefix("ket:") {
        let expr_off = off + lead + "ket:".len();
        if let Some((extra, _)) = lines.next() {
            return Err(syntax(extra, "unexpected content after ket line"));
        }
        let state = parse_ket(expr, &dims).map_err(|e| shift(e, expr_off))?;
        return Ok(StateInput::Ket {
            dims,
            expression: expr.trim().to_string(),
            state,
        });
    }
    if body.trim_end() != "rho:" {
        return Err(syntax(off + lead, "expected 'ket:' or 'rho:'"));
    }
    if dims.len() != 2 {
        return Err(syntax(off + lead, "rho input needs bipartite 'dims: n m'"));
    }
    let total: usize = dims.iter().product();
    let mut entries = Vec::with_capacity(total * total);
    let mut rows = 0;
    for (off, line) in lines {
        if rows == total {
            return Err(syntax(off, "too many matrix rows"));
        }
        let before = entries.len();
        for (pos, tok) in tokens(line) {
            let z = parse_complex(tok)
                .ok_or_else(|| syntax(off + pos, format!("invalid complex entry '{tok}'")))?;
            entries.push(z);
        }
        if entries.len() - before != total {
            return Err(syntax(
                off,
                format!("row has {} entries, expected {total}", entries.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != total {
        return Err(syntax(text.len(), format!("{rows} matrix rows, expected {total}")));
    }
    let rho = DensityMatrix::new(dims.clone(), CMatrix::from_vec(total, total, entries)?)?;
    Ok(StateInput::Rho { dims, rho })
}

fn tokens(s: &str) -> impl Iterator<Item = (usize, &str)> {
    s.split_whitespace()
        .map(move |t| (t.as_ptr() as usize - s.as_ptr() as usize, t))
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Syntax { offset, message } => Error::Syntax {
            offset: offset + by,
            message,
        },
        Error::LabelOutOfRange {
            label,
            subsystem,
            dim,
            offset,
        } => Error::LabelOutOfRange {
            label,
            subsystem,
            dim,
            offset: offset + by,
        },
        other => other,
    }
}
