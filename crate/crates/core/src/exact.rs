//! Exact rational helpers: exponents `p`, positive reals with a rationality
//! flag, and the integer sign tests used to decide index-set membership.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("cannot parse `{0}` as a rational of the form num/den")]
    BadRational(String),
    #[error("decimal `{0}` is not accepted where an exact rational is required")]
    DecimalNotExact(String),
    #[error("exponent must satisfy p >= 1, got {0}")]
    ExponentBelowOne(String),
    #[error("value must be positive, got {0}")]
    NotPositive(String),
    #[error("non-finite value")]
    NotFinite,
    #[error("irrational value needs at least {needed} significant digits, got {got}")]
    InsufficientPrecision { needed: usize, got: usize },
}

/// Parse `num/den`, or a bare integer, into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational, ExactError> {
    let t = s.trim();
    let bad = || ExactError::BadRational(s.to_string());
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    if n.contains('.') || d.contains('.') || n.contains('e') || n.contains('E') {
        return Err(ExactError::DecimalNotExact(s.to_string()));
    }
    let num = BigInt::from_str(n).map_err(|_| bad())?;
    let den = BigInt::from_str(d).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Parse a plain decimal such as `1.4142` or `-3e-2` exactly.
pub fn parse_decimal(s: &str) -> Result<(BigRational, usize), ExactError> {
    let t = s.trim();
    let bad = || ExactError::BadRational(s.to_string());
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let significant = digits.trim_start_matches('0').len();
    let mut num =
        BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok((value, significant))
}

/// Exact conversion of a finite double to a rational.
pub fn rational_from_f64(x: f64) -> Result<BigRational, ExactError> {
    BigRational::from_float(x).ok_or(ExactError::NotFinite)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a ratio of scaled parts for very long fractions.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// The Lebesgue exponent `p >= 1`, held exactly.
///
/// Doubles are converted without rounding, so `2 + 2^-8` is `513/256`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent {
    value: BigRational,
    fast: Option<(i128, i128)>,
}

impl Exponent {
    pub fn new(value: BigRational) -> Result<Self, ExactError> {
        if value < BigRational::one() {
            return Err(ExactError::ExponentBelowOne(format_rational(&value)));
        }
        let fast = match (value.numer().to_i64(), value.denom().to_i64()) {
            (Some(n), Some(d)) => Some((n as i128, d as i128)),
            _ => None,
        };
        Ok(Self { value, fast })
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self, ExactError> {
        if den == 0 {
            return Err(ExactError::BadRational(format!("{num}/{den}")));
        }
        Self::new(BigRational::new(num.into(), den.into()))
    }

    pub fn integer(p: i64) -> Result<Self, ExactError> {
        Self::from_ratio(p, 1)
    }

    pub fn from_f64(p: f64) -> Result<Self, ExactError> {
        Self::new(rational_from_f64(p)?)
    }

    /// Strict parser: `num/den` or an integer; decimals are rejected.
    pub fn parse_exact(s: &str) -> Result<Self, ExactError> {
        Self::new(parse_rational(s)?)
    }

    /// Lenient parser used by numerical commands: also accepts decimals.
    pub fn parse_lenient(s: &str) -> Result<Self, ExactError> {
        match parse_rational(s) {
            Ok(r) => Self::new(r),
            Err(ExactError::DecimalNotExact(_)) => Self::new(parse_decimal(s)?.0),
            Err(e) => Err(e),
        }
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.value)
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }

    /// Sign of `m * p + c` for integers `m`, `c`.
    pub fn sign_affine(&self, m: i64, c: i64) -> Ordering {
        if let Some((n, d)) = self.fast {
            // |m|,|c| < 2^63 and |n|,d < 2^63, so each product fits; the sum may not.
            let a = (m as i128) * n;
            let b = (c as i128) * d;
            if let Some(s) = a.checked_add(b) {
                return s.cmp(&0);
            }
        }
        let s = BigInt::from(m) * self.value.numer() + BigInt::from(c) * self.value.denom();
        match s.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    /// Exact value of `m * p + c`.
    pub fn affine(&self, m: i64, c: i64) -> BigRational {
        &self.value * BigRational::from_integer(m.into()) + BigRational::from_integer(c.into())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.value))
    }
}

/// Whether a positive real is known exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rationality {
    Rational { num: u64, den: u64 },
    Irrational,
}

/// Digits kept for irrational values.
pub const IRRATIONAL_DIGITS: usize = 40;
/// Minimum significant digits accepted for a user-supplied irrational.
pub const MIN_IRRATIONAL_DIGITS: usize = 30;

/// A positive real number: either an exact fraction or a high-precision
/// decimal approximation of an irrational with an explicit error bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositiveReal {
    approx: BigRational,
    error: BigRational,
    rationality: Rationality,
}

impl PositiveReal {
    pub fn rational(num: u64, den: u64) -> Result<Self, ExactError> {
        if num == 0 || den == 0 {
            return Err(ExactError::NotPositive(format!("{num}/{den}")));
        }
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        Ok(Self {
            approx: BigRational::new(num.into(), den.into()),
            error: BigRational::zero(),
            rationality: Rationality::Rational { num, den },
        })
    }

    pub fn from_rational(r: &BigRational) -> Result<Self, ExactError> {
        if !r.is_positive() {
            return Err(ExactError::NotPositive(format_rational(r)));
        }
        let num = r
            .numer()
            .to_u64()
            .ok_or_else(|| ExactError::BadRational(format_rational(r)))?;
        let den = r
            .denom()
            .to_u64()
            .ok_or_else(|| ExactError::BadRational(format_rational(r)))?;
        Self::rational(num, den)
    }

    /// An irrational given as a decimal string with at least
    /// [`MIN_IRRATIONAL_DIGITS`] significant digits.
    pub fn irrational_decimal(s: &str) -> Result<Self, ExactError> {
        let (approx, significant) = parse_decimal(s)?;
        if !approx.is_positive() {
            return Err(ExactError::NotPositive(s.to_string()));
        }
        if significant < MIN_IRRATIONAL_DIGITS {
            return Err(ExactError::InsufficientPrecision {
                needed: MIN_IRRATIONAL_DIGITS,
                got: significant,
            });
        }
        let frac_digits = s.trim().split_once('.').map(|(_, f)| f.len()).unwrap_or(0);
        let error = BigRational::new(
            BigInt::one(),
            num_traits::pow(BigInt::from(10u32), frac_digits),
        );
        Ok(Self {
            approx,
            error,
            rationality: Rationality::Irrational,
        })
    }

    /// `sqrt(n)` for a non-square `n`, truncated to [`IRRATIONAL_DIGITS`] decimals.
    pub fn sqrt_of(n: u64) -> Result<Self, ExactError> {
        let r = n.sqrt();
        if r * r == n {
            return Self::rational(r, 1);
        }
        let scale = num_traits::pow(BigInt::from(10u32), IRRATIONAL_DIGITS);
        let scaled = (BigInt::from(n) * &scale * &scale).sqrt();
        Ok(Self {
            approx: BigRational::new(scaled, scale.clone()),
            error: BigRational::new(BigInt::one(), scale),
            rationality: Rationality::Irrational,
        })
    }

    pub fn approx(&self) -> &BigRational {
        &self.approx
    }

    /// Upper bound on `|value - approx|` (zero when rational).
    pub fn error_bound(&self) -> &BigRational {
        &self.error
    }

    pub fn rationality(&self) -> &Rationality {
        &self.rationality
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.rationality, Rationality::Rational { .. })
    }

    pub fn as_fraction(&self) -> Option<(u64, u64)> {
        match self.rationality {
            Rationality::Rational { num, den } => Some((num, den)),
            Rationality::Irrational => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.approx)
    }

    /// Decimal rendering with `digits` digits after the point (truncated).
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let scale = num_traits::pow(BigInt::from(10u32), digits);
        let scaled = (self.approx.numer() * &scale) / self.approx.denom();
        let s = scaled.to_string();
        if digits == 0 {
            return s;
        }
        let s = format!("{:0>width$}", s, width = digits + 1);
        let (i, f) = s.split_at(s.len() - digits);
        format!("{i}.{f}")
    }

    /// JSON-facing string: `num/den` when rational, decimal otherwise.
    pub fn to_json_string(&self) -> String {
        match self.rationality {
            Rationality::Rational { num, den } => format!("{num}/{den}"),
            Rationality::Irrational => self.to_decimal_string(IRRATIONAL_DIGITS),
        }
    }

    pub fn cmp_one(&self) -> Ordering {
        match self.rationality {
            Rationality::Rational { num, den } => num.cmp(&den),
            Rationality::Irrational => self.approx.cmp(&BigRational::one()),
        }
    }
}

impl fmt::Display for PositiveReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rationality {
            Rationality::Rational { num, den } => write!(f, "{num}/{den}"),
            Rationality::Irrational => write!(f, "{}...", self.to_decimal_string(12)),
        }
    }
}

pub fn gcd_u64(values: &[u64]) -> u64 {
    values.iter().fold(0u64, |g, &v| g.gcd(&v))
}

pub fn gcd_i64(values: &[i64]) -> i64 {
    values.iter().fold(0i64, |g, &v| g.gcd(&v))
}

/// Extended Euclid: returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_rejects_decimals() {
        assert_eq!(
            parse_rational("6/4").unwrap(),
            BigRational::new(3.into(), 2.into())
        );
        assert_eq!(
            parse_rational(" 2 ").unwrap(),
            BigRational::from_integer(2.into())
        );
        assert!(matches!(
            parse_rational("1.5"),
            Err(ExactError::DecimalNotExact(_))
        ));
        assert!(parse_rational("1/0").is_err());
        assert!(Exponent::parse_exact("1/2").is_err());
        assert_eq!(Exponent::parse_lenient("1.25").unwrap().to_string(), "5/4");
    }

    #[test]
    fn doubles_convert_exactly() {
        let p = Exponent::from_f64(2.0 + 2f64.powi(-8)).unwrap();
        assert_eq!(p.to_string(), "513/256");
    }

    #[test]
    fn affine_sign_uses_exact_arithmetic() {
        let p = Exponent::from_ratio(3, 2).unwrap();
        assert_eq!(p.sign_affine(-2, 3), Ordering::Equal);
        assert_eq!(p.sign_affine(-2, 4), Ordering::Greater);
        assert_eq!(p.sign_affine(-3, 4), Ordering::Less);
        let big = Exponent::new(BigRational::new(BigInt::from(i64::MAX), BigInt::from(3))).unwrap();
        assert_eq!(big.sign_affine(i64::MAX, i64::MAX), Ordering::Greater);
    }

    #[test]
    fn sqrt_two_has_forty_digits() {
        let g = PositiveReal::sqrt_of(2).unwrap();
        assert!(!g.is_rational());
        assert_eq!(&g.to_decimal_string(40)[..22], "1.41421356237309504880");
        assert!((g.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(
            PositiveReal::sqrt_of(9).unwrap().as_fraction(),
            Some((3, 1))
        );
    }

    #[test]
    fn short_irrational_is_rejected() {
        assert!(matches!(
            PositiveReal::irrational_decimal("1.41421"),
            Err(ExactError::InsufficientPrecision { .. })
        ));
        let g =
            PositiveReal::irrational_decimal("1.4142135623730950488016887242096980785696").unwrap();
        assert_eq!(g.cmp_one(), Ordering::Greater);
    }

    #[test]
    fn extended_gcd_identity() {
        for (a, b) in [(3, 5), (-4, 6), (7, -3), (0, 5)] {
            let (g, x, y) = extended_gcd(a, b);
            assert_eq!(a * x + b * y, g);
            assert_eq!(g, gcd_i64(&[a, b]));
        }
    }
}
