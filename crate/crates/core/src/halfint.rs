use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(v: i32) -> Self {
        HalfInt(2 * v)
    }

    pub fn from_f64(v: f64) -> Result<Self> {
        let t = 2.0 * v;
        let r = t.round();
        if !v.is_finite() || (t - r).abs() > 1e-9 || r.abs() > 1e8 {
            return Err(Error::LabelInvalid(format!("{v} is not a half-integer")));
        }
        Ok(HalfInt(r as i32))
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    pub fn neg(self) -> Self {
        HalfInt(-self.0)
    }

    /// `self + other` as an integer, if it is one.
    pub fn add_int(self, other: HalfInt) -> Option<i64> {
        let s = self.0 as i64 + other.0 as i64;
        (s % 2 == 0).then_some(s / 2)
    }

    /// `self - other` as an integer, if it is one.
    pub fn sub_int(self, other: HalfInt) -> Option<i64> {
        let s = self.0 as i64 - other.0 as i64;
        (s % 2 == 0).then_some(s / 2)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::LabelInvalid(format!("cannot parse half-integer from {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            let den: i32 = den.trim().parse().map_err(|_| bad())?;
            match den {
                1 => Ok(HalfInt(2 * num)),
                2 => Ok(HalfInt(num)),
                _ => Err(bad()),
            }
        } else {
            let v: f64 = s.parse().map_err(|_| bad())?;
            HalfInt::from_f64(v)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let raw = Raw::deserialize(d)?;
        let parsed = match raw {
            Raw::Num(v) => HalfInt::from_f64(v),
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("1/2".parse::<HalfInt>().unwrap(), HalfInt::HALF);
        assert_eq!("-3/2".parse::<HalfInt>().unwrap().twice(), -3);
        assert_eq!("1.5".parse::<HalfInt>().unwrap().twice(), 3);
        assert_eq!("2".parse::<HalfInt>().unwrap().twice(), 4);
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("0.3".parse::<HalfInt>().is_err());
    }

    #[test]
    fn display_roundtrip() {
        for t in -7..8 {
            let h = HalfInt::from_twice(t);
            assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
        }
    }

    #[test]
    fn serde_number_and_string() {
        let h: HalfInt = serde_json::from_str("0.5").unwrap();
        assert_eq!(h, HalfInt::HALF);
        let h: HalfInt = serde_json::from_str("\"3/2\"").unwrap();
        assert_eq!(h.twice(), 3);
        assert_eq!(serde_json::to_string(&HalfInt::from_twice(3)).unwrap(), "1.5");
    }
}
