use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// Constant value of the potential on `[r_lo, r_hi)`; `value` may be `+∞`
/// only for a hard core starting at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Piece {
    pub r_lo: f64,
    pub r_hi: f64,
    pub value: f64,
}

/// Long-range part `coeff · r^{-exponent}` for `r ≥ start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerTail {
    pub start: f64,
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerTail {
    pub fn value(&self, r: f64) -> f64 {
        self.coeff * r.powf(-self.exponent)
    }
}

/// Nonnegative radial two-body potential: ordered constant pieces plus an
/// optional power-law tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialPotential {
    pieces: Vec<Piece>,
    tail: Option<PowerTail>,
}

impl RadialPotential {
    pub fn new(mut pieces: Vec<Piece>, tail: Option<PowerTail>) -> Result<Self> {
        pieces.sort_by(|a, b| a.r_lo.total_cmp(&b.r_lo));
        for (i, p) in pieces.iter().enumerate() {
            if !(p.r_lo >= 0.0 && p.r_hi > p.r_lo && p.r_hi.is_finite()) {
                return Err(Error::InvalidParameters(format!(
                    "piece [{}, {}) is not a valid interval",
                    p.r_lo, p.r_hi
                )));
            }
            if p.value.is_nan() || p.value < 0.0 {
                return Err(Error::InvalidParameters(format!(
                    "piece [{}, {}) has negative value {}",
                    p.r_lo, p.r_hi, p.value
                )));
            }
            if p.value == f64::INFINITY && (i != 0 || p.r_lo != 0.0) {
                return Err(Error::InvalidParameters(
                    "infinite value only allowed on an initial segment [0, r_core)".into(),
                ));
            }
            if i > 0 && p.r_lo < pieces[i - 1].r_hi {
                return Err(Error::InvalidParameters(format!(
                    "pieces overlap at r = {}",
                    p.r_lo
                )));
            }
        }
        if let Some(t) = &tail {
            if !(t.start > 0.0 && t.coeff >= 0.0 && t.coeff.is_finite()) {
                return Err(Error::InvalidParameters("invalid tail parameters".into()));
            }
            if !(t.exponent > 2.0) {
                return Err(Error::Divergent(format!(
                    "tail r^-{} is not integrable against (ln r)² r dr; scattering length infinite",
                    t.exponent
                )));
            }
            if let Some(last) = pieces.last() {
                if t.start < last.r_hi {
                    return Err(Error::InvalidParameters(
                        "tail must start beyond the last piece".into(),
                    ));
                }
            }
        }
        Ok(Self { pieces, tail })
    }

    pub fn hard_disk(radius: f64) -> Result<Self> {
        Self::new(
            vec![Piece {
                r_lo: 0.0,
                r_hi: radius,
                value: f64::INFINITY,
            }],
            None,
        )
    }

    pub fn soft_disk(radius: f64, height: f64) -> Result<Self> {
        Self::new(
            vec![Piece {
                r_lo: 0.0,
                r_hi: radius,
                value: height,
            }],
            None,
        )
    }

    pub fn zero() -> Self {
        Self {
            pieces: Vec::new(),
            tail: None,
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn tail(&self) -> Option<&PowerTail> {
        self.tail.as_ref()
    }

    /// Radius of the hard core, `0` if there is none.
    pub fn core_radius(&self) -> f64 {
        match self.pieces.first() {
            Some(p) if p.value == f64::INFINITY => p.r_hi,
            _ => 0.0,
        }
    }

    /// Smallest radius beyond which `v ≡ 0`; infinite with a nonzero tail.
    pub fn range(&self) -> f64 {
        if matches!(self.tail, Some(t) if t.coeff > 0.0) {
            return f64::INFINITY;
        }
        self.pieces
            .iter()
            .filter(|p| p.value > 0.0)
            .map(|p| p.r_hi)
            .fold(0.0, f64::max)
    }

    /// Outer edge of the piecewise part (or the tail start), a length scale
    /// for the short-range structure.
    pub fn inner_scale(&self) -> f64 {
        let pieces = self.pieces.last().map_or(0.0, |p| p.r_hi);
        let tail = self.tail.map_or(0.0, |t| t.start);
        pieces.max(tail)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.value == 0.0)
            && self.tail.is_none_or(|t| t.coeff == 0.0)
    }

    pub fn value(&self, r: f64) -> f64 {
        for p in &self.pieces {
            if r >= p.r_lo && r < p.r_hi {
                return p.value;
            }
        }
        match &self.tail {
            Some(t) if r >= t.start => t.value(r),
            _ => 0.0,
        }
    }

    /// `λ⁻² v(r/λ)`, whose scattering length is `λ` times that of `v`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain("scaled", format!("lambda = {lambda} must be positive")));
        }
        let inv2 = 1.0 / (lambda * lambda);
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                r_lo: p.r_lo * lambda,
                r_hi: p.r_hi * lambda,
                value: p.value * inv2,
            })
            .collect();
        let tail = self.tail.map(|t| PowerTail {
            start: t.start * lambda,
            coeff: t.coeff * lambda.powf(t.exponent - 2.0),
            exponent: t.exponent,
        });
        Self::new(pieces, tail)
    }

    /// Parses the plain-text description:
    ///
    /// ```text
    /// # comment
    /// hardcore = 0.5
    /// piece = 0.5 1.0 4.0
    /// tail = 2.0 1.0 5.0     # start coeff exponent
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut tail = None;
        let mut lines_seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let (key, rest) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let fields: Vec<&str> = rest.split_whitespace().collect();
            let num = |s: &str, allow_inf: bool| -> Result<f64> {
                let v: f64 = match s {
                    "inf" | "+inf" if allow_inf => f64::INFINITY,
                    _ => s
                        .parse()
                        .map_err(|_| err(format!("`{s}` is not a number")))?,
                };
                if v.is_infinite() && !allow_inf {
                    return Err(err(format!("`{s}` must be finite")));
                }
                Ok(v)
            };
            match key {
                "hardcore" => {
                    if fields.len() != 1 {
                        return Err(err("hardcore takes one radius".into()));
                    }
                    pieces.push(Piece {
                        r_lo: 0.0,
                        r_hi: num(fields[0], false)?,
                        value: f64::INFINITY,
                    });
                }
                "piece" => {
                    if fields.len() != 3 {
                        return Err(err("piece takes `r_lo r_hi value`".into()));
                    }
                    let r_lo = num(fields[0], false)?;
                    let value = num(fields[2], true)?;
                    if value.is_infinite() && r_lo != 0.0 {
                        return Err(err("`inf` only allowed on a hard core starting at 0".into()));
                    }
                    pieces.push(Piece {
                        r_lo,
                        r_hi: num(fields[1], false)?,
                        value,
                    });
                }
                "tail" => {
                    if fields.len() != 3 {
                        return Err(err("tail takes `start coeff exponent`".into()));
                    }
                    if tail.is_some() {
                        return Err(err("duplicate tail".into()));
                    }
                    tail = Some(PowerTail {
                        start: num(fields[0], false)?,
                        coeff: num(fields[1], false)?,
                        exponent: num(fields[2], false)?,
                    });
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
            lines_seen.push(line_no);
        }
        Self::new(pieces, tail).map_err(|e| match e {
            Error::Parse { .. } => e,
            other => Error::Parse {
                line: lines_seen.last().copied().unwrap_or(0),
                msg: other.to_string(),
            },
        })
    }

    /// Inverse of [`parse`](Self::parse).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.pieces {
            if p.value.is_infinite() {
                let _ = writeln!(s, "hardcore = {:e}", p.r_hi);
            } else {
                let _ = writeln!(s, "piece = {:e} {:e} {:e}", p.r_lo, p.r_hi, p.value);
            }
        }
        if let Some(t) = &self.tail {
            let _ = writeln!(s, "tail = {:e} {:e} {:e}", t.start, t.coeff, t.exponent);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_hard_disk_with_shell() {
        let v = RadialPotential::parse("# demo\nhardcore = 1\npiece = 1 2 3.5\n").unwrap();
        assert_eq!(v.core_radius(), 1.0);
        assert_eq!(v.range(), 2.0);
        assert_eq!(v.value(1.5), 3.5);
        assert_eq!(v.value(2.5), 0.0);
        assert_eq!(RadialPotential::parse(&v.to_text()).unwrap(), v);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = RadialPotential::parse("hardcore = 1\nbogus = 3\n").unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 2,
                msg: "unknown key `bogus`".into()
            }
        );
        let e = RadialPotential::parse("\n\npiece = 1 2 inf\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let e = RadialPotential::parse("piece = 0 x 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn rejects_negative_and_slow_tails() {
        assert!(RadialPotential::soft_disk(1.0, -1.0).is_err());
        let slow = PowerTail {
            start: 1.0,
            coeff: 1.0,
            exponent: 2.0,
        };
        assert!(matches!(
            RadialPotential::new(vec![], Some(slow)),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn scaling_moves_support_and_height() {
        let v = RadialPotential::soft_disk(1.0, 4.0).unwrap().scaled(0.5).unwrap();
        assert_eq!(v.range(), 0.5);
        assert_eq!(v.value(0.25), 16.0);
    }
}
