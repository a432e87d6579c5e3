//! Integer-cent money and exact rational amounts.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational amount of cents, used wherever an average or a division
/// is unavoidable (expected utilities, closed-form equilibrium terms).
pub type Exact = Ratio<i128>;

/// Converts an exact cent amount to dollars as `f64`.
pub fn exact_to_dollars(x: &Exact) -> f64 {
    x.to_f64().unwrap_or(f64::NAN) / 100.0
}

/// An amount of money in integer cents. Serialized as a bare integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cents(pub i64);

impl Cents {
    pub const ZERO: Cents = Cents(0);

    pub fn from_dollars(dollars: i64) -> Self {
        Cents(dollars * 100)
    }

    /// Rounds a dollar amount to the nearest cent.
    pub fn from_dollars_f64(dollars: f64) -> Self {
        Cents((dollars * 100.0).round() as i64)
    }

    pub fn as_dollars(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn exact(self) -> Exact {
        Exact::from_integer(self.0 as i128)
    }
}

impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{}{}.{:02}", sign, abs / 100, abs % 100)
    }
}

impl FromStr for Cents {
    type Err = Error;

    /// Parses a dollar string with at most two decimals (`"16.56"`, `"-0.69"`, `"20"`).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('$');
        let bad = || Error::argument(format!("not a dollar amount with at most 2 decimals: {s:?}"));
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let (whole, frac) = match body.split_once('.') {
            Some((w, f)) => (w, f),
            None => (body, ""),
        };
        if frac.len() > 2
            || !whole.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || (whole.is_empty() && frac.is_empty())
        {
            return Err(bad());
        }
        let w: i64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        let f: i64 = match frac.len() {
            0 => 0,
            1 => frac.parse::<i64>().map_err(|_| bad())? * 10,
            _ => frac.parse().map_err(|_| bad())?,
        };
        let c = w.checked_mul(100).and_then(|x| x.checked_add(f)).ok_or_else(bad)?;
        Ok(Cents(if neg { -c } else { c }))
    }
}

impl Add for Cents {
    type Output = Cents;
    fn add(self, rhs: Cents) -> Cents {
        Cents(self.0 + rhs.0)
    }
}

impl Sub for Cents {
    type Output = Cents;
    fn sub(self, rhs: Cents) -> Cents {
        Cents(self.0 - rhs.0)
    }
}

impl Neg for Cents {
    type Output = Cents;
    fn neg(self) -> Cents {
        Cents(-self.0)
    }
}

impl AddAssign for Cents {
    fn add_assign(&mut self, rhs: Cents) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Cents {
    fn sub_assign(&mut self, rhs: Cents) {
        self.0 -= rhs.0;
    }
}

impl Sum for Cents {
    fn sum<I: Iterator<Item = Cents>>(iter: I) -> Cents {
        Cents(iter.map(|c| c.0).sum())
    }
}

impl<'a> Sum<&'a Cents> for Cents {
    fn sum<I: Iterator<Item = &'a Cents>>(iter: I) -> Cents {
        Cents(iter.map(|c| c.0).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        assert_eq!("16.56".parse::<Cents>().unwrap(), Cents(1656));
        assert_eq!("-0.69".parse::<Cents>().unwrap(), Cents(-69));
        assert_eq!("20".parse::<Cents>().unwrap(), Cents(2000));
        assert_eq!("2.5".parse::<Cents>().unwrap(), Cents(250));
        assert_eq!("$7.00".parse::<Cents>().unwrap(), Cents(700));
        assert!("1.234".parse::<Cents>().is_err());
        assert!("abc".parse::<Cents>().is_err());
        assert!("".parse::<Cents>().is_err());
        assert_eq!(Cents(-69).to_string(), "-0.69");
        assert_eq!(Cents(1656).to_string(), "16.56");
        assert_eq!(Cents(5).to_string(), "0.05");
    }

    #[test]
    fn dollars_round_trip() {
        for c in [-12345i64, -1, 0, 1, 99, 100, 2824] {
            let s = Cents(c).to_string();
            assert_eq!(s.parse::<Cents>().unwrap(), Cents(c));
        }
    }
}
