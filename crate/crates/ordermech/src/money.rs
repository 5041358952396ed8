//! Exact rational payoff arithmetic.
//!
//! Every payment, cost, profit, utility, and welfare value in the engine is a
//! [`Money`], an arbitrary-precision rational. Comparisons and sums never
//! round, so verification asserts equality with zero tolerance.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Unit-less exact rational payoff.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Money(BigRational);

impl Money {
    pub fn zero() -> Self {
        Money(BigRational::zero())
    }

    pub fn from_int(v: i64) -> Self {
        Money(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_u64(v: u64) -> Self {
        Money(BigRational::from_integer(BigInt::from(v)))
    }

    /// `num / den` with `den != 0`. Panics on a zero denominator; use
    /// [`Money::parse`] for untrusted input.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Money(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Parses `"p"` or `"p/q"` with optional sign.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::MalformedRational(s.to_string());
        let t = s.trim();
        if t.is_empty() {
            return Err(bad());
        }
        match t.split_once('/') {
            None => {
                let n = BigInt::from_str(t).map_err(|_| bad())?;
                Ok(Money(BigRational::from_integer(n)))
            }
            Some((p, q)) => {
                let num = BigInt::from_str(p.trim()).map_err(|_| bad())?;
                let den = BigInt::from_str(q.trim()).map_err(|_| bad())?;
                if den.is_zero() {
                    return Err(bad());
                }
                Ok(Money(BigRational::new(num, den)))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// Exact decimal string when the reduced denominator is of the form
    /// `2^a * 5^b` (the expansion terminates), otherwise `"p/q"`.
    pub fn to_csv_string(&self) -> String {
        let denom = self.0.denom();
        if denom.is_one() {
            return self.0.numer().to_string();
        }
        let (mut d, two, five) = (denom.clone(), BigInt::from(2), BigInt::from(5));
        let mut twos = 0u32;
        let mut fives = 0u32;
        while (&d % &two).is_zero() {
            d /= &two;
            twos += 1;
        }
        while (&d % &five).is_zero() {
            d /= &five;
            fives += 1;
        }
        if !d.is_one() {
            return self.to_string();
        }
        let places = twos.max(fives);
        let scale = two.pow(places - twos) * five.pow(places - fives);
        let scaled = (self.0.numer() * scale).magnitude().to_string();
        let sign = if self.0.numer().is_negative() { "-" } else { "" };
        let digits = if scaled.len() <= places as usize {
            format!("{}{}", "0".repeat(places as usize + 1 - scaled.len()), scaled)
        } else {
            scaled
        };
        let split = digits.len() - places as usize;
        format!("{sign}{}.{}", &digits[..split], &digits[split..])
    }

    pub fn to_f64_lossy(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Money {
    /// Canonical reduced form: `"p"` for integers, `"p/q"` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Add<&Money> for Money {
    type Output = Money;
    fn add(self, rhs: &Money) -> Money {
        Money(self.0 + &rhs.0)
    }
}

impl AddAssign<&Money> for Money {
    fn add_assign(&mut self, rhs: &Money) {
        self.0 += &rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Sub<&Money> for Money {
    type Output = Money;
    fn sub(self, rhs: &Money) -> Money {
        Money(self.0 - &rhs.0)
    }
}

impl SubAssign<&Money> for Money {
    fn sub_assign(&mut self, rhs: &Money) {
        self.0 -= &rhs.0;
    }
}

impl Mul for Money {
    type Output = Money;
    fn mul(self, rhs: Money) -> Money {
        Money(self.0 * rhs.0)
    }
}

impl Mul<&Money> for &Money {
    type Output = Money;
    fn mul(self, rhs: &Money) -> Money {
        Money(&self.0 * &rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |acc, m| acc + m)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |mut acc, m| {
            acc += m;
            acc
        })
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Money;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as \"p/q\" string or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Money, E> {
                Money::parse(v).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Money, E> {
                Ok(Money::from_int(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Money, E> {
                Ok(Money::from_u64(v))
            }
        }
        deserializer.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["0", "7", "-3", "1/2", "-17/4", "10/3"] {
            let m = Money::parse(s).unwrap();
            assert_eq!(m.to_string(), s);
        }
        // non-canonical input normalizes
        assert_eq!(Money::parse("4/2").unwrap().to_string(), "2");
        assert_eq!(Money::parse("2/-4").unwrap().to_string(), "-1/2");
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "a", "1/0", "1/2/3", "1.5"] {
            assert!(Money::parse(s).is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn exact_arithmetic() {
        let half = Money::ratio(1, 2);
        let third = Money::ratio(1, 3);
        assert_eq!(half.clone() + third.clone(), Money::ratio(5, 6));
        assert_eq!(half.clone() - third, Money::ratio(1, 6));
        assert_eq!(half.clone() + half.clone(), Money::from_int(1));
        assert!(Money::ratio(-1, 3).is_negative());
        assert_eq!(-half, Money::ratio(-1, 2));
    }

    #[test]
    fn csv_form_terminates_or_falls_back() {
        assert_eq!(Money::from_int(7).to_csv_string(), "7");
        assert_eq!(Money::ratio(17, 2).to_csv_string(), "8.5");
        assert_eq!(Money::ratio(1, 4).to_csv_string(), "0.25");
        assert_eq!(Money::ratio(-1, 8).to_csv_string(), "-0.125");
        assert_eq!(Money::ratio(1, 5).to_csv_string(), "0.2");
        assert_eq!(Money::ratio(1, 3).to_csv_string(), "1/3");
        assert_eq!(Money::ratio(-7, 6).to_csv_string(), "-7/6");
        assert_eq!(Money::ratio(1, 100).to_csv_string(), "0.01");
    }

    #[test]
    fn serde_uses_rational_strings() {
        let m = Money::ratio(17, 2);
        assert_eq!(serde_json::to_string(&m).unwrap(), "\"17/2\"");
        let back: Money = serde_json::from_str("\"17/2\"").unwrap();
        assert_eq!(back, m);
        let from_int: Money = serde_json::from_str("10").unwrap();
        assert_eq!(from_int, Money::from_int(10));
    }
}
