//! Runtime values and exact rational helpers.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ast::TypeTag;

pub type Rational = BigRational;

/// A value held by a variable in one state.
///
/// `Infinity` is only ever produced by timeout expressions; it orders above
/// every finite real.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
    Real(Rational),
    Infinity,
}

impl Value {
    pub fn int(i: i64) -> Self {
        Value::Int(BigInt::from(i))
    }

    pub fn real(num: i64, den: i64) -> Self {
        Value::Real(rat(num, den))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn type_tag(&self) -> TypeTag {
        match self {
            Value::Bool(_) => TypeTag::Bool,
            Value::Int(_) => TypeTag::Int,
            Value::Real(_) | Value::Infinity => TypeTag::Real,
        }
    }

    /// Finite real payload, if any.
    pub fn as_real(&self) -> Option<&Rational> {
        match self {
            Value::Real(r) => Some(r),
            _ => None,
        }
    }

    /// Encoding used by trace JSON: `"num/den"` for reals, decimal strings for
    /// integers, `"inf"` for Infinity.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Int(i) => serde_json::Value::String(i.to_string()),
            Value::Real(r) => serde_json::Value::String(format_num_den(r)),
            Value::Infinity => serde_json::Value::String("inf".to_string()),
        }
    }

    pub fn from_json(ty: TypeTag, v: &serde_json::Value) -> Option<Value> {
        match (ty, v) {
            (TypeTag::Bool, serde_json::Value::Bool(b)) => Some(Value::Bool(*b)),
            (TypeTag::Int, serde_json::Value::String(s)) => s.trim().parse().ok().map(Value::Int),
            (TypeTag::Int, serde_json::Value::Number(n)) => n.as_i64().map(Value::int),
            (TypeTag::Real, serde_json::Value::String(s)) => {
                let s = s.trim();
                if s == "inf" {
                    Some(Value::Infinity)
                } else {
                    parse_rational(s).map(Value::Real)
                }
            }
            (TypeTag::Real, serde_json::Value::Number(n)) => {
                parse_rational(&n.to_string()).map(Value::Real)
            }
            _ => None,
        }
    }

    /// Total order between numeric values of the same sort. `None` on sort
    /// mismatch.
    pub fn num_cmp(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Real(a), Value::Real(b)) => Some(a.cmp(b)),
            (Value::Infinity, Value::Infinity) => Some(Ordering::Equal),
            (Value::Infinity, Value::Real(_)) => Some(Ordering::Greater),
            (Value::Real(_), Value::Infinity) => Some(Ordering::Less),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{}", format_num_den(r)),
            Value::Infinity => write!(f, "inf"),
        }
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `"15/1"`, `"-1/3"`.
pub fn format_num_den(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `"num/den"`, integers and finite decimals such as `"10.25"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    parse_decimal(s)
}

pub fn parse_decimal(s: &str) -> Option<Rational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = Rational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// Decimal rendering when the rational has a terminating expansion.
pub fn to_decimal(r: &Rational) -> Option<String> {
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let places = twos.max(fives).max(1);
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = (r * Rational::from_integer(scale)).to_integer();
    let neg = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = if digits.len() <= places {
        format!("{}{}", "0".repeat(places - digits.len() + 1), digits)
    } else {
        digits
    };
    let (i, f) = digits.split_at(digits.len() - places);
    let f = f.trim_end_matches('0');
    let f = if f.is_empty() { "0" } else { f };
    Some(format!("{}{}.{}", if neg { "-" } else { "" }, i, f))
}

/// Euclidean integer division, matching SMT-LIB `div`.
pub fn euclid_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    if r.is_negative() {
        if b.is_positive() {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip() {
        assert_eq!(parse_decimal("10.0"), Some(rat_int(10)));
        assert_eq!(parse_decimal("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_decimal("-2.5"), Some(rat(-5, 2)));
        assert_eq!(to_decimal(&rat(1, 4)).as_deref(), Some("0.25"));
        assert_eq!(to_decimal(&rat_int(50)).as_deref(), Some("50.0"));
        assert_eq!(to_decimal(&rat(-1, 20)).as_deref(), Some("-0.05"));
        assert_eq!(to_decimal(&rat(1, 3)), None);
    }

    #[test]
    fn num_den_strings() {
        assert_eq!(format_num_den(&rat_int(15)), "15/1");
        assert_eq!(parse_rational("15/1"), Some(rat_int(15)));
        assert_eq!(parse_rational("-2/6"), Some(rat(-1, 3)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn euclidean_division() {
        let d = |a: i64, b: i64| euclid_div(&BigInt::from(a), &BigInt::from(b));
        assert_eq!(d(7, 2), BigInt::from(3));
        assert_eq!(d(-7, 2), BigInt::from(-4));
        assert_eq!(d(-7, -2), BigInt::from(4));
        assert_eq!(d(7, -2), BigInt::from(-3));
    }

    #[test]
    fn infinity_orders_above_reals() {
        assert_eq!(Value::Infinity.num_cmp(&Value::real(10, 1)), Some(Ordering::Greater));
        assert_eq!(Value::int(1).num_cmp(&Value::real(1, 1)), None);
    }
}
