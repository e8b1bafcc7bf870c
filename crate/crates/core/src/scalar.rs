//! Dual-mode numbers: exact rationals where the data allows it, `f64` otherwise.
//!
//! Mixed operations promote to `Float`. Equality between two exact values is
//! exact; anything involving a float compares the `f64` images.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    Rational,
    Float,
}

impl FromStr for Arithmetic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" | "exact" => Ok(Arithmetic::Rational),
            "float" => Ok(Arithmetic::Float),
            other => Err(Error::Parse(format!(
                "unknown arithmetic mode {other:?} (expected rational|float)"
            ))),
        }
    }
}

impl fmt::Display for Arithmetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arithmetic::Rational => f.write_str("rational"),
            Arithmetic::Float => f.write_str("float"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Num {
    Exact(BigRational),
    Float(f64),
}

impl Num {
    pub fn zero(mode: Arithmetic) -> Num {
        match mode {
            Arithmetic::Rational => Num::Exact(BigRational::zero()),
            Arithmetic::Float => Num::Float(0.0),
        }
    }

    pub fn one(mode: Arithmetic) -> Num {
        match mode {
            Arithmetic::Rational => Num::Exact(BigRational::one()),
            Arithmetic::Float => Num::Float(1.0),
        }
    }

    pub fn ratio(numer: i64, denom: i64) -> Num {
        Num::Exact(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn integer(value: i64) -> Num {
        Num::Exact(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_biguint(value: &BigUint) -> Num {
        Num::Exact(BigRational::from_integer(BigInt::from(value.clone())))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Num::Exact(_))
    }

    pub fn mode(&self) -> Arithmetic {
        match self {
            Num::Exact(_) => Arithmetic::Rational,
            Num::Float(_) => Arithmetic::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(r) => rational_to_f64(r),
            Num::Float(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Num::Exact(r) => Some(r),
            Num::Float(_) => None,
        }
    }

    pub fn to_mode(&self, mode: Arithmetic) -> Num {
        match (self, mode) {
            (Num::Exact(r), Arithmetic::Float) => Num::Float(rational_to_f64(r)),
            _ => self.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Num::Exact(r) => r.is_zero(),
            Num::Float(x) => *x == 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Num::Exact(r) => r.is_negative(),
            Num::Float(x) => *x < 0.0,
        }
    }

    pub fn abs(&self) -> Num {
        match self {
            Num::Exact(r) => Num::Exact(r.abs()),
            Num::Float(x) => Num::Float(x.abs()),
        }
    }

    pub fn pow(&self, exp: u32) -> Num {
        match self {
            Num::Exact(r) => Num::Exact(num_traits::pow(r.clone(), exp as usize)),
            Num::Float(x) => Num::Float(x.powi(exp as i32)),
        }
    }

    /// `|self - other|` as an `f64`, exact when both sides are exact.
    pub fn distance(&self, other: &Num) -> f64 {
        (self - other).abs().to_f64()
    }

    /// Parses `"p/q"`, an integer, or a decimal/float literal. Decimals become floats.
    pub fn parse(text: &str) -> Result<Num> {
        let text = text.trim();
        if let Some((p, q)) = text.split_once('/') {
            let p: BigInt = p
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad numerator in {text:?}")))?;
            let q: BigInt = q
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad denominator in {text:?}")))?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {text:?}")));
            }
            return Ok(Num::Exact(BigRational::new(p, q)));
        }
        if let Ok(i) = text.parse::<BigInt>() {
            return Ok(Num::Exact(BigRational::from_integer(i)));
        }
        text.parse::<f64>()
            .map(Num::Float)
            .map_err(|_| Error::Parse(format!("not a number: {text:?}")))
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(x) = r.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    // Fall back to scaling both sides down when they do not fit.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Num::Float(x) => write!(f, "{x}"),
        }
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Num) -> bool {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Num) -> Option<std::cmp::Ordering> {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Num {
        Num::Float(x)
    }
}

impl From<BigRational> for Num {
    fn from(r: BigRational) -> Num {
        Num::Exact(r)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Num> for &Num {
            type Output = Num;
            fn $method(self, rhs: &Num) -> Num {
                match (self, rhs) {
                    (Num::Exact(a), Num::Exact(b)) => Num::Exact(a $op b),
                    _ => Num::Float(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $trait<Num> for Num {
            type Output = Num;
            fn $method(self, rhs: Num) -> Num {
                &self $op &rhs
            }
        }
        impl $trait<&Num> for Num {
            type Output = Num;
            fn $method(self, rhs: &Num) -> Num {
                &self $op rhs
            }
        }
        impl $trait<Num> for &Num {
            type Output = Num;
            fn $method(self, rhs: Num) -> Num {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Num {
    type Output = Num;
    fn neg(self) -> Num {
        match self {
            Num::Exact(r) => Num::Exact(-r),
            Num::Float(x) => Num::Float(-x),
        }
    }
}

impl std::iter::Sum for Num {
    fn sum<I: Iterator<Item = Num>>(iter: I) -> Num {
        iter.fold(Num::zero(Arithmetic::Rational), |acc, x| acc + x)
    }
}

impl std::iter::Product for Num {
    fn product<I: Iterator<Item = Num>>(iter: I) -> Num {
        iter.fold(Num::one(Arithmetic::Rational), |acc, x| acc * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Num::ratio(1, 3);
        let b = Num::ratio(1, 6);
        assert_eq!(&a + &b, Num::ratio(1, 2));
        assert!((&a * &b).is_exact());
    }

    #[test]
    fn mixing_promotes_to_float() {
        let s = Num::ratio(1, 2) + Num::Float(0.25);
        assert!(!s.is_exact());
        assert_eq!(s.to_f64(), 0.75);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(Num::parse("3/12").unwrap(), Num::ratio(1, 4));
        assert_eq!(Num::parse("7").unwrap(), Num::integer(7));
        assert!(!Num::parse("0.5").unwrap().is_exact());
        assert!(Num::parse("1/0").is_err());
        assert!(Num::parse("abc").is_err());
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigInt::from(10).pow(400);
        let r = BigRational::new(big.clone() + 1, big * 2);
        assert!((rational_to_f64(&r) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn display_exact() {
        assert_eq!(Num::ratio(2, 4).to_string(), "1/2");
        assert_eq!(Num::integer(3).to_string(), "3");
    }
}
