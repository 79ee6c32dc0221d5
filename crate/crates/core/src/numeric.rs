//! Exact numeric types shared by every solver.
//!
//! Costs are exact rationals, capacities and supplies are integers, and both
//! may be `+infinity`. Infinity is a distinguished variant ordered above every
//! finite value; additions involving it saturate.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact cost value.
pub type Rational = Ratio<i64>;

/// A finite value or `+infinity`.
///
/// The derived ordering puts `Infinite` above every `Finite(_)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

/// Node capacity, flow supply, or connectivity value.
pub type Capacity = Extended<u64>;

/// Node or edge cost, possibly infinite.
pub type Cost = Extended<Rational>;

impl<T> Extended<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn as_finite(&self) -> Option<&T> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Extended<U> {
        match self {
            Extended::Finite(x) => Extended::Finite(f(x)),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl<T: Add<Output = T>> Add for Extended<T> {
    type Output = Extended<T>;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::Infinite,
        }
    }
}

impl<T> From<T> for Extended<T> {
    fn from(x: T) -> Self {
        Extended::Finite(x)
    }
}

impl Capacity {
    /// Finite value clamped to `limit`; infinity maps to `limit`.
    pub fn clamp_to(self, limit: u64) -> u64 {
        match self {
            Extended::Finite(x) => x.min(limit),
            Extended::Infinite => limit,
        }
    }

    /// `min(self, other)` where `other` is finite.
    pub fn min_finite(self, other: u64) -> u64 {
        self.clamp_to(other)
    }
}

impl Cost {
    pub fn zero() -> Self {
        Extended::Finite(Rational::zero())
    }

    pub fn int(x: i64) -> Self {
        Extended::Finite(Rational::from_integer(x))
    }
}

impl<T: fmt::Display> fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

/// Progress value of a covering oracle: an integer or `-infinity`.
///
/// `NegInfinite` is ordered below every finite level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    NegInfinite,
    Finite(i64),
}

impl Level {
    pub fn finite(self) -> Option<i64> {
        match self {
            Level::Finite(x) => Some(x),
            Level::NegInfinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Level::Finite(_))
    }
}

impl Add for Level {
    type Output = Level;

    fn add(self, rhs: Level) -> Level {
        match (self, rhs) {
            (Level::Finite(a), Level::Finite(b)) => Level::Finite(a + b),
            _ => Level::NegInfinite,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Finite(x) => write!(f, "{x}"),
            Level::NegInfinite => write!(f, "-inf"),
        }
    }
}

/// The harmonic number `H(j) = 1 + 1/2 + ... + 1/j`, exactly. `H(0) = 0`.
pub fn harmonic(j: u64) -> BigRational {
    let mut sum = BigRational::zero();
    for i in 1..=j {
        sum += BigRational::new(BigInt::one(), BigInt::from(i));
    }
    sum
}

pub fn to_big(x: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

pub fn big_to_f64(x: &BigRational) -> f64 {
    // Scale down huge operands before converting so H(j) for large j stays finite.
    let n = x.numer();
    let d = x.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift = (nb.max(db) - 60).max(0) as usize;
    let nf = (n.abs() >> shift).to_f64().unwrap_or(f64::NAN);
    let df = (d >> shift).to_f64().unwrap_or(f64::NAN);
    let v = if df == 0.0 { f64::INFINITY } else { nf / df };
    if n.is_negative() {
        -v
    } else {
        v
    }
}

/// `a <= bound * b` evaluated exactly.
pub fn within_factor(a: &Rational, bound: &BigRational, b: &Rational) -> bool {
    to_big(a) <= bound * to_big(b)
}

/// Realized ratio `a / b`; `None` when `b == 0` (then `a` must also be zero
/// for the ratio to be meaningful, and callers report it as 1).
pub fn ratio(a: &Rational, b: &Rational) -> Option<BigRational> {
    if b.is_zero() {
        None
    } else {
        Some(to_big(a) / to_big(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number `{0}`: expected an integer, a rational `p/q`, or `inf`")]
pub struct ParseNumberError(pub String);

/// Parses `"7"`, `"-3/4"`, or `"inf"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseNumberError> {
    let t = s.trim();
    let err = || ParseNumberError(s.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n = i64::from_str(n.trim()).map_err(|_| err())?;
            let d = i64::from_str(d.trim()).map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            Ok(Rational::new(n, d))
        }
        None => i64::from_str(t).map(Rational::from_integer).map_err(|_| err()),
    }
}

/// Canonical text form: integers bare, others as `p/q` in lowest terms.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn format_big(x: &BigRational) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Least common multiple of the denominators, for scaling costs to integers.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i64 {
    values
        .into_iter()
        .fold(1i64, |acc, x| num_integer::lcm(acc, *x.denom()))
}
