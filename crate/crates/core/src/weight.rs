//! Radial weight functions `K(r)` for the weighted spatial-sign statistic.
//!
//! The three named weights recover the tests compared throughout this crate:
//!
//! | name | `K(r)` | test |
//! |------|--------|------|
//! | `Os` | `1/r`  | optimal sign test |
//! | `Ss` | `1`    | spatial sign test |
//! | `Cq` | `r`    | sum-of-inner-products mean test |
//!
//! Custom weights are any `Fn(f64) -> f64`; [`WeightFunction::parse`] accepts
//! the power-law grammar used by the command line (`r^-1`, `2*r^(1/2)`, ...).

use std::fmt;
use std::sync::Arc;

use crate::error::{HdSignError, Result};

#[derive(Clone)]
pub struct CustomWeight {
    name: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomWeight {
    pub fn new(name: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomWeight").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum WeightFunction {
    /// `K(r) = 1/r`
    Os,
    /// `K(r) = 1`
    Ss,
    /// `K(r) = r`
    Cq,
    Custom(CustomWeight),
}

impl WeightFunction {
    pub fn custom(name: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(CustomWeight::new(name, eval))
    }

    /// `K(r) = coefficient * r^exponent`.
    pub fn power_law(coefficient: f64, exponent: f64) -> Self {
        let name = if coefficient == 1.0 {
            format!("r^{exponent}")
        } else {
            format!("{coefficient}*r^{exponent}")
        };
        Self::custom(name, move |r| coefficient * r.powf(exponent))
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Self::Os => 1.0 / r,
            Self::Ss => 1.0,
            Self::Cq => r,
            Self::Custom(c) => (c.eval)(r),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Os => "OS",
            Self::Ss => "SS",
            Self::Cq => "CQ",
            Self::Custom(c) => c.name(),
        }
    }

    /// Parses a product of constants and powers of `r`, e.g. `3*r^-1`,
    /// `r^(1/2)`, `0.5*r*r^2`. Named weights `os`, `ss` and `cq` are accepted
    /// case-insensitively.
    pub fn parse(expr: &str) -> Result<Self> {
        let trimmed = expr.trim();
        match trimmed.to_ascii_lowercase().as_str() {
            "os" => return Ok(Self::Os),
            "ss" => return Ok(Self::Ss),
            "cq" => return Ok(Self::Cq),
            _ => {}
        }
        let fail = |reason: &str| HdSignError::WeightExpression {
            expr: expr.to_string(),
            reason: reason.to_string(),
        };
        if trimmed.is_empty() {
            return Err(fail("empty expression"));
        }
        let mut coefficient = 1.0;
        let mut exponent = 0.0;
        for factor in trimmed.split('*') {
            let factor: String = factor.chars().filter(|c| !c.is_whitespace()).collect();
            if factor.is_empty() {
                return Err(fail("empty factor"));
            }
            if factor == "r" {
                exponent += 1.0;
            } else if let Some(power) = factor.strip_prefix("r^") {
                exponent += parse_rational(power).ok_or_else(|| fail("bad exponent"))?;
            } else {
                coefficient *= parse_rational(&factor).ok_or_else(|| fail("bad constant"))?;
            }
        }
        if !coefficient.is_finite() || !exponent.is_finite() {
            return Err(fail("non-finite value"));
        }
        Ok(Self::power_law(coefficient, exponent))
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn parse_rational(text: &str) -> Option<f64> {
    let inner = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(text);
    match inner.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.parse().ok()?;
            let den: f64 = den.parse().ok()?;
            (den != 0.0).then_some(num / den)
        }
        None => inner.parse().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_weights() {
        assert_eq!(WeightFunction::Os.eval(4.0), 0.25);
        assert_eq!(WeightFunction::Ss.eval(4.0), 1.0);
        assert_eq!(WeightFunction::Cq.eval(4.0), 4.0);
    }

    #[test]
    fn parses_power_laws() {
        let cases = [
            ("r^-1", 2.0, 0.5),
            ("r^(1/2)", 9.0, 3.0),
            ("2*r^2", 3.0, 18.0),
            ("0.5 * r * r^2", 2.0, 4.0),
            ("3", 7.0, 3.0),
            ("r^-1/2", 4.0, 0.5),
        ];
        for (expr, r, expected) in cases {
            let k = WeightFunction::parse(expr).unwrap();
            assert!((k.eval(r) - expected).abs() < 1e-12, "{expr}");
        }
        assert!(matches!(WeightFunction::parse("OS").unwrap(), WeightFunction::Os));
    }

    #[test]
    fn rejects_unknown_syntax() {
        for bad in ["", "exp(r)", "r^", "r^(1/0)", "2**r", "x"] {
            assert!(WeightFunction::parse(bad).is_err(), "{bad}");
        }
    }
}
