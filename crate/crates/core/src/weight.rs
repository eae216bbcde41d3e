//! Scalars read from configuration files.
//!
//! A weight is written either as a JSON number or as a string such as
//! `"1/3"`. Strings and integral numbers keep an exact rational value; other
//! floats only carry their `f64`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    value: f64,
    exact: Option<BigRational>,
}

impl Weight {
    pub fn from_f64(value: f64) -> Self {
        let exact = if value.is_finite() && value.fract() == 0.0 && value.abs() < 9.0e15 {
            Some(BigRational::from_integer(BigInt::from(value as i64)))
        } else {
            None
        };
        Weight { value, exact }
    }

    pub fn from_ratio(r: BigRational) -> Self {
        Weight {
            value: ratio_to_f64(&r),
            exact: Some(r),
        }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_ratio(BigRational::new(num.into(), den.into()))
    }

    pub fn one() -> Self {
        Self::from_ratio(BigRational::one())
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn is_positive(&self) -> bool {
        match &self.exact {
            Some(r) => r > &BigRational::zero(),
            None => self.value > 0.0,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

/// Convert a big rational to the nearest representable float, also when
/// numerator and denominator individually overflow `f64`.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let (n, d) = if shift > 0 {
        (r.numer().clone(), r.denom() << (shift as usize))
    } else {
        (r.numer() << ((-shift) as usize), r.denom().clone())
    };
    let q = (n / d).to_f64().unwrap_or(f64::NAN);
    q * 2f64.powi(shift as i32)
}

#[derive(Debug)]
pub struct ParseWeightError(String);

impl fmt::Display for ParseWeightError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse weight {:?}", self.0)
    }
}

impl std::error::Error for ParseWeightError {}

impl FromStr for Weight {
    type Err = ParseWeightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || ParseWeightError(s.to_string());
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Weight::from_ratio(BigRational::new(n, d)));
        }
        if let Ok(n) = t.parse::<BigInt>() {
            return Ok(Weight::from_ratio(BigRational::from_integer(n)));
        }
        // Decimal literals are exact rationals too.
        if let Some((ip, fp)) = t.split_once('.') {
            if !fp.is_empty() && fp.chars().all(|c| c.is_ascii_digit()) {
                let digits = format!("{ip}{fp}");
                if let Ok(n) = digits.parse::<BigInt>() {
                    let d = num_traits::pow(BigInt::from(10), fp.len());
                    return Ok(Weight::from_ratio(BigRational::new(n, d)));
                }
            }
        }
        t.parse::<f64>().map(Weight::from_f64).map_err(|_| err())
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.exact {
            Some(r) if r.is_integer() => match r.numer().to_i64() {
                Some(i) => s.serialize_i64(i),
                None => s.serialize_str(&self.to_string()),
            },
            Some(_) => s.serialize_str(&self.to_string()),
            None => s.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Weight;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a rational string like \"1/3\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Weight, E> {
                Ok(Weight::ratio(v, 1))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Weight, E> {
                Ok(Weight::from_ratio(BigRational::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Weight, E> {
                Ok(Weight::from_f64(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Weight, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        let w: Weight = "1/3".parse().unwrap();
        assert_eq!(w.exact(), Some(&BigRational::new(1.into(), 3.into())));
        let w: Weight = "0.25".parse().unwrap();
        assert_eq!(w.exact(), Some(&BigRational::new(1.into(), 4.into())));
        let w: Weight = serde_json::from_str("2").unwrap();
        assert_eq!(w.value(), 2.0);
        let w: Weight = serde_json::from_str("0.1").unwrap();
        assert!(w.exact().is_none());
        assert!("1/0".parse::<Weight>().is_err());
    }

    #[test]
    fn huge_ratio_to_float() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let r = BigRational::new(big.clone() * 3, big);
        assert!((ratio_to_f64(&r) - 3.0).abs() < 1e-15);
    }
}
