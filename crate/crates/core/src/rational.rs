//! Exact rational scalars and their string form (`"p/q"`).

use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parses `"p/q"`, `"p"` or a terminating decimal such as `"0.25"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if t.contains('/') || frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad rational '{s}'")));
        }
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let int_part = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(int_digits).map_err(|_| Error::Parse(format!("bad rational '{s}'")))?
        };
        let den = num::pow(BigInt::from(10), frac.len());
        let frac_part =
            BigInt::from_str(frac).map_err(|_| Error::Parse(format!("bad rational '{s}'")))?;
        let mag = Q::new(int_part * &den + frac_part, den);
        return Ok(if neg { -mag } else { mag });
    }
    let r = Q::from_str(t).map_err(|_| Error::Parse(format!("bad rational '{s}'")))?;
    Ok(r)
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Rational approximation of `x` with denominator `den`, exact for dyadic grids.
pub fn from_f64_grid(x: f64, den: i64) -> Q {
    let n = (x * den as f64).round() as i64;
    qf(n, den)
}

/// Bit length of numerator times denominator; the pivot cost used by elimination.
pub fn bit_cost(x: &Q) -> u64 {
    x.numer().bits() + x.denom().bits()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn vec_to_f64(v: &[Q]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

pub fn vec_sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_add(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_scale(a: &[Q], s: &Q) -> Vec<Q> {
    a.iter().map(|x| x * s).collect()
}

pub fn add_assign_scaled(acc: &mut [Q], v: &[Q], s: &Q) {
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += x * s;
        }
    }
}
