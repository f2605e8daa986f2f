//! Exact dyadic rationals `mantissa * 2^exponent`.
//!
//! All grid geometry (offsets, cube corners, top boundaries) lives in this
//! type so that membership and nesting questions are answered exactly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A dyadic rational in canonical form: the mantissa is odd, or the value is
/// zero and the exponent is 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    mantissa: BigInt,
    exponent: i64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseDyadicError {
    #[error("empty dyadic literal")]
    Empty,
    #[error("malformed dyadic literal `{0}`")]
    Malformed(String),
    #[error("denominator of `{0}` is not a power of two")]
    NotDyadic(String),
}

impl DyadicRational {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        Self {
            mantissa: mantissa >> tz,
            exponent: exponent + tz as i64,
        }
    }

    pub fn zero() -> Self {
        Self {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn from_int(value: i64) -> Self {
        Self::new(BigInt::from(value), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Self {
            mantissa: BigInt::one(),
            exponent: e,
        }
    }

    /// `p / 2^q`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Self::new(BigInt::from(p), -q)
    }

    /// Exact conversion; every finite binary64 value is a dyadic rational.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Self::zero());
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let fraction = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (fraction, -1074)
        } else {
            (fraction | (1u64 << 52), biased - 1075)
        };
        let m = BigInt::from(mant);
        Some(Self::new(if negative { -m } else { m }, exp))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn signum(&self) -> Ordering {
        if self.mantissa.is_zero() {
            Ordering::Equal
        } else if self.mantissa.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiply by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// True when the value is an integer multiple of `2^m`.
    pub fn is_multiple_of_pow2(&self, m: i64) -> bool {
        self.is_zero() || self.exponent >= m
    }

    /// Largest multiple of `2^m` that is `<= self`.
    pub fn floor_to_pow2(&self, m: i64) -> Self {
        if self.is_multiple_of_pow2(m) {
            return self.clone();
        }
        let shift = (m - self.exponent) as u64;
        let divisor = BigInt::one() << shift;
        Self::new(self.mantissa.div_floor(&divisor), m)
    }

    /// `self mod 2^m`, in `[0, 2^m)`.
    pub fn mod_pow2(&self, m: i64) -> Self {
        self - &self.floor_to_pow2(m)
    }

    /// `floor(self / 2^m)` as an integer.
    pub fn floor_div_pow2(&self, m: i64) -> BigInt {
        let f = self.floor_to_pow2(m);
        if f.is_zero() {
            return BigInt::zero();
        }
        f.mantissa << ((f.exponent - m) as u64)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits() as i64;
        // keep at most 64 significant bits before the float conversion
        let (m, e) = if bits > 64 {
            let drop = bits - 64;
            (&self.mantissa >> (drop as u64), self.exponent + drop)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        let mf = m.to_f64().unwrap_or(f64::NAN);
        scale_by_pow2(mf, e)
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, i64) {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << ((self.exponent - e) as u64);
        let b = &other.mantissa << ((other.exponent - e) as u64);
        (a, b, e)
    }
}

pub(crate) fn scale_by_pow2(x: f64, e: i64) -> f64 {
    let mut v = x;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exponent == other.exponent {
            return self.mantissa.cmp(&other.mantissa);
        }
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let (a, b, e) = self.aligned(rhs);
        DyadicRational::new(a + b, e)
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(rhs);
        DyadicRational::new(a - b, e)
    }
}

impl Mul for &DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for DyadicRational {
            type Output = DyadicRational;
            fn $method(self, rhs: DyadicRational) -> DyadicRational {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&DyadicRational> for DyadicRational {
            type Output = DyadicRational;
            fn $method(self, rhs: &DyadicRational) -> DyadicRational {
                (&self).$method(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        -&self
    }
}

impl From<i64> for DyadicRational {
    fn from(value: i64) -> Self {
        Self::from_int(value)
    }
}

/// Exact text: an integer, or `p/q` in lowest terms with `q = 2^k`.
impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent >= 0 {
            write!(f, "{}", &self.mantissa << self.exponent as u64)
        } else {
            write!(f, "{}/{}", self.mantissa, BigInt::one() << self.exponent.unsigned_abs())
        }
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self, self.to_f64())
    }
}

/// Accepts `m*2^e`, `p/2^q`, `p/q` with `q` a power of two, and plain integers.
impl FromStr for DyadicRational {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseDyadicError::Empty);
        }
        let malformed = || ParseDyadicError::Malformed(s.to_string());
        let int = |t: &str| t.trim().parse::<BigInt>().map_err(|_| malformed());
        let exp = |t: &str| t.trim().parse::<i64>().map_err(|_| malformed());
        if let Some((m, e)) = s.split_once('*') {
            let e = e.trim().strip_prefix("2^").ok_or_else(malformed)?;
            return Ok(Self::new(int(m)?, exp(e)?));
        }
        if let Some((p, q)) = s.split_once('/') {
            let q = q.trim();
            if let Some(e) = q.strip_prefix("2^") {
                return Ok(Self::new(int(p)?, -exp(e)?));
            }
            let q = int(q)?;
            if !q.is_positive() || !(&q & (&q - BigInt::one())).is_zero() {
                return Err(ParseDyadicError::NotDyadic(s.to_string()));
            }
            let e = q.trailing_zeros().unwrap_or(0) as i64;
            return Ok(Self::new(int(p)?, -e));
        }
        Ok(Self::new(int(s)?, 0))
    }
}

impl Serialize for DyadicRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DyadicRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
            Float(f64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(i) => Ok(Self::from_int(i)),
            Repr::Float(x) => {
                Self::from_f64(x).ok_or_else(|| serde::de::Error::custom("non-finite coordinate"))
            }
        }
    }
}

/// Convert a point given in binary64 coordinates to exact coordinates.
pub fn point_from_f64(x: &[f64]) -> Vec<DyadicRational> {
    x.iter()
        .map(|&v| DyadicRational::from_f64(v).expect("finite coordinate"))
        .collect()
}

pub fn point_to_f64(x: &[DyadicRational]) -> Vec<f64> {
    x.iter().map(DyadicRational::to_f64).collect()
}
