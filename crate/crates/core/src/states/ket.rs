//! Parser for ket expressions such as `1/sqrt(2)*|00> - 1/sqrt(2)*|11>`.
//!
//! ```text
//! expr   := [sign] term (sign term)*
//! term   := [coeff ['*']] ket
//! coeff  := factor (('*' | '/') factor)*
//! factor := decimal ['i'] | 'sqrt(' decimal ['/' decimal] ')' | 'i'
//!         | '(' [sign] coeff (sign coeff)* ')'
//! ket    := '|' labels ('>' | '⟩')
//! labels := digit+              (one digit per subsystem, all dims <= 10)
//!         | digits (',' digits)*
//! ```
//!
//! Repeated kets accumulate. Offsets in errors are byte offsets into the
//! input text.

use num_complex::Complex64;

use super::StateVector;
use crate::error::{Error, Result};
use crate::numerics::ZERO;

#[derive(Debug, Clone, Copy)]
pub struct KetOptions {
    pub normalize: bool,
}

impl Default for KetOptions {
    fn default() -> Self {
        Self { normalize: true }
    }
}

/// Parses and normalizes.
pub fn parse_ket(text: &str, dims: &[usize]) -> Result<StateVector> {
    parse_ket_with(text, dims, KetOptions::default())
}

pub fn parse_ket_with(text: &str, dims: &[usize], opts: KetOptions) -> Result<StateVector> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidDimension(format!("dims {dims:?}")));
    }
    if text.trim().is_empty() {
        return Err(Error::EmptyState);
    }
    let mut p = Parser {
        src: text,
        pos: 0,
        dims,
    };
    let total: usize = dims.iter().product();
    let mut amps = vec![ZERO; total];
    p.skip_ws();
    let mut sign = p.sign().unwrap_or(1.0);
    loop {
        let (coeff, index) = p.term()?;
        amps[index] += coeff * sign;
        p.skip_ws();
        if p.at_end() {
            break;
        }
        sign = p.sign().ok_or_else(|| p.error("expected '+' or '-' between terms"))?;
    }
    if amps.iter().all(|a| *a == ZERO) {
        return Err(Error::EmptyState);
    }
    let s = StateVector::new(dims.to_vec(), amps)?;
    if opts.normalize {
        s.normalized()
    } else {
        Ok(s)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    dims: &'a [usize],
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn sign(&mut self) -> Option<f64> {
        self.skip_ws();
        match self.peek() {
            Some('+') => {
                self.bump();
                Some(1.0)
            }
            Some('-') => {
                self.bump();
                Some(-1.0)
            }
            _ => None,
        }
    }

    fn term(&mut self) -> Result<(Complex64, usize)> {
        self.skip_ws();
        let coeff = if self.peek() == Some('|') {
            Complex64::new(1.0, 0.0)
        } else {
            let c = self.coeff()?;
            self.eat('*');
            c
        };
        self.skip_ws();
        if self.peek() != Some('|') {
            return Err(self.error("expected a ket '|...>'"));
        }
        let index = self.ket()?;
        Ok((coeff, index))
    }

    fn coeff(&mut self) -> Result<Complex64> {
        let mut value = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    let save = self.pos;
                    self.bump();
                    self.skip_ws();
                    if self.peek() == Some('|') {
                        self.pos = save;
                        return Ok(value);
                    }
                    value *= self.factor()?;
                }
                Some('/') => {
                    self.bump();
                    let at = self.pos;
                    let d = self.factor()?;
                    if d == ZERO {
                        self.pos = at;
                        return Err(self.error("division by zero"));
                    }
                    value /= d;
                }
                _ => return Ok(value),
            }
        }
    }

    fn factor(&mut self) -> Result<Complex64> {
        self.skip_ws();
        if self.rest().starts_with("sqrt") {
            self.pos += 4;
            if !self.eat('(') {
                return Err(self.error("expected '(' after sqrt"));
            }
            self.skip_ws();
            let start = self.pos;
            let mut x = self.decimal()?;
            if self.eat('/') {
                self.skip_ws();
                let d = self.decimal()?;
                if d == 0.0 {
                    return Err(self.error("division by zero"));
                }
                x /= d;
            }
            if x < 0.0 {
                self.pos = start;
                return Err(self.error("sqrt of a negative number"));
            }
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(Complex64::new(x.sqrt(), 0.0));
        }
        if self.peek() == Some('i') {
            self.bump();
            return Ok(Complex64::new(0.0, 1.0));
        }
        if self.eat('(') {
            let mut sum = Complex64::new(self.sign().unwrap_or(1.0), 0.0) * self.coeff()?;
            while let Some(s) = self.sign() {
                sum += self.coeff()? * s;
            }
            self.skip_ws();
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(sum);
        }
        let x = self.decimal()?;
        if self.peek() == Some('i') {
            self.bump();
            return Ok(Complex64::new(0.0, x));
        }
        Ok(Complex64::new(x, 0.0))
    }

    fn decimal(&mut self) -> Result<f64> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        let digits = |e: &mut usize| {
            let s = *e;
            while *e < bytes.len() && bytes[*e].is_ascii_digit() {
                *e += 1;
            }
            *e > s
        };
        let int_part = digits(&mut end);
        let mut frac_part = false;
        if end < bytes.len() && bytes[end] == b'.' {
            end += 1;
            frac_part = digits(&mut end);
        }
        if !int_part && !frac_part {
            return Err(self.error("expected a number"));
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut e = end + 1;
            if e < bytes.len() && (bytes[e] == b'+' || bytes[e] == b'-') {
                e += 1;
            }
            if digits(&mut e) {
                end = e;
            }
        }
        let v: f64 = self.src[start..end]
            .parse()
            .map_err(|_| self.error("malformed number"))?;
        self.pos = end;
        Ok(v)
    }

    /// Parses `|labels>` and returns the flat basis index.
    fn ket(&mut self) -> Result<usize> {
        let open = self.pos;
        self.bump();
        let body_start = self.pos;
        let close = loop {
            match self.peek() {
                Some('>') | Some('⟩') => break self.pos,
                Some('|') => return Err(self.error("unexpected '|' inside ket")),
                Some(_) => {
                    self.bump();
                }
                None => {
                    self.pos = open;
                    return Err(self.error("unterminated ket"));
                }
            }
        };
        self.bump();
        let body = &self.src[body_start..close];
        let n = self.dims.len();

        let mut labels: Vec<(usize, usize)> = Vec::with_capacity(n);
        if body.contains(',') || n == 1 {
            let mut off = body_start;
            for part in body.split(',') {
                let lead = part.len() - part.trim_start().len();
                let t = part.trim();
                if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::Syntax {
                        offset: off + lead,
                        message: format!("invalid label '{t}'"),
                    });
                }
                let value = t.parse().map_err(|_| Error::Syntax {
                    offset: off + lead,
                    message: format!("label '{t}' too large"),
                })?;
                labels.push((value, off + lead));
                off += part.len() + 1;
            }
        } else {
            if self.dims.iter().any(|&d| d > 10) {
                return Err(Error::Syntax {
                    offset: body_start,
                    message: "comma-separated labels are required when a dimension exceeds 10".into(),
                });
            }
            for (i, ch) in body.char_indices() {
                let Some(v) = ch.to_digit(10) else {
                    return Err(Error::Syntax {
                        offset: body_start + i,
                        message: format!("invalid label character '{ch}'"),
                    });
                };
                labels.push((v as usize, body_start + i));
            }
        }
        if labels.len() != n {
            return Err(Error::Syntax {
                offset: open,
                message: format!("ket has {} labels, expected {n}", labels.len()),
            });
        }
        let mut index = 0;
        for (subsystem, (&(label, offset), &dim)) in labels.iter().zip(self.dims).enumerate() {
            if label >= dim {
                return Err(Error::LabelOutOfRange {
                    label,
                    subsystem,
                    dim,
                    offset,
                });
            }
            index = index * dim + label;
        }
        Ok(index)
    }
}
