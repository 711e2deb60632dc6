//! Exact currency amounts held as signed integer minor units (cents).

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest magnitude accepted when converting from floating point or text.
/// Far above the ±10^15 cents every schedule needs and far below `i64::MAX`,
/// so sums of a 100-year schedule cannot overflow.
pub const MAX_MINOR_UNITS: i64 = 1_000_000_000_000_000_000 / 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoneyError {
    #[error("invalid money literal `{0}`: expected integer dollars or a decimal string with at most two fractional digits")]
    Syntax(String),
    #[error("money value {0} is outside the representable range")]
    OutOfRange(String),
    #[error("money value is not finite")]
    NotFinite,
}

/// A quantity of the scenario's single implied currency, in cents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MoneyAmount(i64);

impl MoneyAmount {
    pub const ZERO: MoneyAmount = MoneyAmount(0);

    pub const fn from_cents(cents: i64) -> Self {
        MoneyAmount(cents)
    }

    pub const fn from_dollars(dollars: i64) -> Self {
        MoneyAmount(dollars * 100)
    }

    /// Rounds a floating point dollar value to the nearest cent (half away from zero).
    pub fn from_dollars_f64(dollars: f64) -> Result<Self, MoneyError> {
        if !dollars.is_finite() {
            return Err(MoneyError::NotFinite);
        }
        let cents = (dollars * 100.0).round();
        if cents.abs() > MAX_MINOR_UNITS as f64 {
            return Err(MoneyError::OutOfRange(dollars.to_string()));
        }
        Ok(MoneyAmount(cents as i64))
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    pub fn to_dollars(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn abs(self) -> Self {
        MoneyAmount(self.0.abs())
    }

    pub fn checked_mul(self, factor: i64) -> Option<Self> {
        self.0.checked_mul(factor).map(MoneyAmount)
    }

    /// Nearest whole dollar, half away from zero.
    pub fn round_to_dollars(self) -> i64 {
        let q = self.0 / 100;
        let r = self.0 % 100;
        if r >= 50 {
            q + 1
        } else if r <= -50 {
            q - 1
        } else {
            q
        }
    }

    /// Whole dollars with thousands separators, e.g. `1,600,000`.
    pub fn display_dollars(self) -> String {
        group_thousands(self.round_to_dollars())
    }
}

pub(crate) fn group_thousands(value: i64) -> String {
    let digits = value.unsigned_abs().to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3 + 1);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    if value < 0 {
        out.insert(0, '-');
    }
    out
}

impl fmt::Display for MoneyAmount {
    /// Plain decimal dollars with two fractional digits, e.g. `-12.05`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{}{}.{:02}", sign, abs / 100, abs % 100)
    }
}

impl FromStr for MoneyAmount {
    type Err = MoneyError;

    /// Accepts `1600000`, `-12.5`, `157314.60`. No grouping separators,
    /// no currency symbols, `.` as the only decimal separator.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || MoneyError::Syntax(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (whole, frac) = match body.split_once('.') {
            Some((w, f)) => (w, f),
            None => (body, ""),
        };
        if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(syntax());
        }
        if frac.len() > 2 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(syntax());
        }
        if body.contains('.') && frac.is_empty() {
            return Err(syntax());
        }
        let whole: i64 = whole
            .parse()
            .map_err(|_| MoneyError::OutOfRange(s.to_string()))?;
        let frac_cents: i64 = match frac.len() {
            0 => 0,
            1 => frac.parse::<i64>().unwrap() * 10,
            _ => frac.parse::<i64>().unwrap(),
        };
        let cents = whole
            .checked_mul(100)
            .and_then(|c| c.checked_add(frac_cents))
            .filter(|c| *c <= MAX_MINOR_UNITS)
            .ok_or_else(|| MoneyError::OutOfRange(s.to_string()))?;
        Ok(MoneyAmount(if negative { -cents } else { cents }))
    }
}

impl Add for MoneyAmount {
    type Output = MoneyAmount;
    fn add(self, rhs: Self) -> Self {
        MoneyAmount(self.0 + rhs.0)
    }
}

impl AddAssign for MoneyAmount {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for MoneyAmount {
    type Output = MoneyAmount;
    fn sub(self, rhs: Self) -> Self {
        MoneyAmount(self.0 - rhs.0)
    }
}

impl SubAssign for MoneyAmount {
    fn sub_assign(&mut self, rhs: Self) {
        self.0 -= rhs.0;
    }
}

impl Neg for MoneyAmount {
    type Output = MoneyAmount;
    fn neg(self) -> Self {
        MoneyAmount(-self.0)
    }
}

impl Sum for MoneyAmount {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(MoneyAmount::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a MoneyAmount> for MoneyAmount {
    fn sum<I: Iterator<Item = &'a Self>>(iter: I) -> Self {
        iter.copied().sum()
    }
}

// Whole-dollar amounts serialize as integers, anything with cents as a
// decimal string. Both forms parse back to the same value.
impl Serialize for MoneyAmount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0 % 100 == 0 {
            serializer.serialize_i64(self.0 / 100)
        } else {
            serializer.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for MoneyAmount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct MoneyVisitor;

        impl<'de> Visitor<'de> for MoneyVisitor {
            type Value = MoneyAmount;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("integer dollars or a decimal string such as \"157314.60\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<MoneyAmount, E> {
                v.checked_mul(100)
                    .filter(|c| c.abs() <= MAX_MINOR_UNITS)
                    .map(MoneyAmount)
                    .ok_or_else(|| E::custom(MoneyError::OutOfRange(v.to_string())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<MoneyAmount, E> {
                let v = i64::try_from(v)
                    .map_err(|_| E::custom(MoneyError::OutOfRange(v.to_string())))?;
                self.visit_i64(v)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<MoneyAmount, E> {
                Err(E::custom(format!(
                    "money must be integer dollars or a decimal string, got float {v}; write \"{v}\" instead"
                )))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<MoneyAmount, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(MoneyVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_integer_and_decimal_forms() {
        assert_eq!("1600000".parse::<MoneyAmount>().unwrap().cents(), 160_000_000);
        assert_eq!("157314.60".parse::<MoneyAmount>().unwrap().cents(), 15_731_460);
        assert_eq!("157314.6".parse::<MoneyAmount>().unwrap().cents(), 15_731_460);
        assert_eq!("-12.05".parse::<MoneyAmount>().unwrap().cents(), -1205);
        assert_eq!("0.01".parse::<MoneyAmount>().unwrap().cents(), 1);
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in ["", "1,000", "$5", "1.234", "1.", ".5", "1e6", "12%", "--1", "1 000"] {
            assert!(bad.parse::<MoneyAmount>().is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn range_covers_ten_to_the_fifteen_cents() {
        let big = MoneyAmount::from_cents(1_000_000_000_000_000);
        assert_eq!((big + big - big).cents(), 1_000_000_000_000_000);
        assert_eq!((-big).cents(), -1_000_000_000_000_000);
        assert!("99999999999999999999".parse::<MoneyAmount>().is_err());
    }

    #[test]
    fn dollar_rounding_is_half_away_from_zero() {
        assert_eq!(MoneyAmount::from_cents(15_731_460).round_to_dollars(), 157_315);
        assert_eq!(MoneyAmount::from_cents(-150).round_to_dollars(), -2);
        assert_eq!(MoneyAmount::from_cents(-149).round_to_dollars(), -1);
        assert_eq!(MoneyAmount::from_dollars_f64(0.005).unwrap().cents(), 1);
        assert_eq!(MoneyAmount::from_dollars(1_600_000).display_dollars(), "1,600,000");
        assert_eq!(MoneyAmount::from_dollars(-999).display_dollars(), "-999");
    }

    #[test]
    fn display_is_plain_decimal() {
        assert_eq!(MoneyAmount::from_cents(-5).to_string(), "-0.05");
        assert_eq!(MoneyAmount::from_cents(15_731_460).to_string(), "157314.60");
    }

    proptest! {
        #[test]
        fn text_round_trip(cents in -MAX_MINOR_UNITS..=MAX_MINOR_UNITS) {
            let m = MoneyAmount::from_cents(cents);
            prop_assert_eq!(m.to_string().parse::<MoneyAmount>().unwrap(), m);
        }

        #[test]
        fn sums_are_order_independent(mut values in prop::collection::vec(-1_000_000_000_000_000i64..1_000_000_000_000_000, 0..100), seed in any::<u64>()) {
            let forward: MoneyAmount = values.iter().map(|&c| MoneyAmount::from_cents(c)).sum();
            // deterministic shuffle
            let mut state = seed | 1;
            for i in (1..values.len()).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                values.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let shuffled: MoneyAmount = values.iter().map(|&c| MoneyAmount::from_cents(c)).sum();
            prop_assert_eq!(forward, shuffled);
        }
    }
}
