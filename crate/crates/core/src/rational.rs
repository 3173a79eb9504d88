//! Exact rational arithmetic extended with a single point at infinity.
//!
//! All hypothesis checking runs on [`BigRational`] / [`ExtRational`] values so
//! that strict inequalities with margins as thin as 1/330 are decided exactly.
//! Floating point enters only when a value is rendered for a report.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

pub use num_rational::BigRational;

/// A nonnegative extended rational: either an exact finite value or `inf`.
///
/// The reciprocal convention is `1/inf = 0`, so harmonic averages over lists
/// containing infinite entries stay exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtRational {
    Finite(BigRational),
    Infinity,
}

impl ExtRational {
    pub fn from_int(v: i64) -> Self {
        ExtRational::Finite(rat_int(v))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&BigRational> {
        match self {
            ExtRational::Finite(v) => Some(v),
            ExtRational::Infinity => None,
        }
    }

    /// `1/self`, with `1/inf = 0`. Panics on division by an exact zero.
    pub fn recip_or_zero(&self) -> BigRational {
        match self {
            ExtRational::Finite(v) => {
                assert!(!v.is_zero(), "reciprocal of exact zero");
                v.recip()
            }
            ExtRational::Infinity => BigRational::zero(),
        }
    }

    /// Product with a finite positive rational; `inf * c = inf`.
    pub fn scale(&self, c: &BigRational) -> ExtRational {
        assert!(c.is_positive(), "scale factor must be positive");
        match self {
            ExtRational::Finite(v) => ExtRational::Finite(v * c),
            ExtRational::Infinity => ExtRational::Infinity,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRational::Finite(v) => rational_to_f64(v),
            ExtRational::Infinity => f64::INFINITY,
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Infinity, ExtRational::Infinity) => Ordering::Equal,
            (ExtRational::Infinity, ExtRational::Finite(_)) => Ordering::Greater,
            (ExtRational::Finite(_), ExtRational::Infinity) => Ordering::Less,
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.cmp(b),
        }
    }
}

impl From<BigRational> for ExtRational {
    fn from(v: BigRational) -> Self {
        ExtRational::Finite(v)
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(v) => write!(f, "{v}"),
            ExtRational::Infinity => write!(f, "inf"),
        }
    }
}

/// Parse failure for rational-valued text fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational: {}", self.0)
    }
}

impl std::error::Error for ParseRationalError {}

impl FromStr for ExtRational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(ExtRational::Infinity);
        }
        parse_rational(t).map(ExtRational::Finite)
    }
}

/// Parse `"num/den"` or `"num"` into an exact rational in lowest terms.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseRationalError> {
    let t = s.trim();
    BigRational::from_str(t).map_err(|_| ParseRationalError(t.to_string()))
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Decimal approximation of an exact rational, for display only.
pub fn rational_to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        // denominator or numerator overflow f64; fall back to a quotient of doubles
        let n = v.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = v.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Dual rendering of an exact value: `"num/den"` string plus a decimal
/// approximation. Every rational in a JSON report goes through this.
#[derive(Debug, Clone, Serialize)]
pub struct RationalJson {
    pub frac: String,
    pub dec: f64,
}

impl From<&BigRational> for RationalJson {
    fn from(v: &BigRational) -> Self {
        RationalJson {
            frac: v.to_string(),
            dec: rational_to_f64(v),
        }
    }
}

impl From<&ExtRational> for RationalJson {
    fn from(v: &ExtRational) -> Self {
        RationalJson {
            frac: v.to_string(),
            dec: v.to_f64(),
        }
    }
}

pub fn one() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("6/5").unwrap(), rat(6, 5));
        assert_eq!(parse_rational(" 4 ").unwrap(), rat_int(4));
        assert_eq!(parse_rational("-3/9").unwrap(), rat(-1, 3));
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("a/b").is_err());
    }

    #[test]
    fn infinity_parses_and_orders_on_top() {
        let inf = ExtRational::from_str("inf").unwrap();
        assert_eq!(inf, ExtRational::Infinity);
        assert_eq!(ExtRational::from_str("∞").unwrap(), ExtRational::Infinity);
        assert!(inf > ExtRational::Finite(rat_int(1_000_000)));
        assert_eq!(inf.recip_or_zero(), BigRational::zero());
    }

    #[test]
    fn lowest_terms_is_automatic() {
        let v = rat(44, 84);
        assert_eq!(v, rat(11, 21));
        assert_eq!(v.to_string(), "11/21");
    }

    #[test]
    fn dual_rendering() {
        let j = RationalJson::from(&rat(33, 7));
        assert_eq!(j.frac, "33/7");
        assert!((j.dec - 33.0 / 7.0).abs() < 1e-15);
        let j = RationalJson::from(&ExtRational::Infinity);
        assert_eq!(j.frac, "inf");
        assert!(j.dec.is_infinite());
    }
}
