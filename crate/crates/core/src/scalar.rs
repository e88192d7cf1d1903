//! Scalar types the map family is generic over.
//!
//! Everything numeric in the crate is written against [`Real`], which extends
//! the `num-traits` field/sign traits with the handful of things iteration
//! under chaotic amplification needs: an explicit precision, exact conversion
//! to and from rationals, full-precision decimal output and ulp stepping.
//!
//! Three implementations are provided:
//!
//! * `f64`: fixed 53-bit precision, for quick exploratory runs.
//! * [`BigFloat`]: MPFR float whose arithmetic runs at the larger of the two
//!   operand precisions, so precision-free constants (`zero`, `one`) never
//!   truncate a wide operand.
//! * [`Rational`]: exact GMP rational. `next_up`/`next_down` are identities.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Num, One, Signed, Zero};
use rug::ops::Pow;
use rug::{Float, Integer};
use thiserror::Error;

/// Precision used when a value is parsed without an explicit precision
/// (only through `num_traits::Num::from_str_radix`).
pub const FALLBACK_BITS: u32 = 256;

/// Largest decimal exponent accepted by [`parse_exact`].
const MAX_DECIMAL_EXPONENT: i64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as a decimal or fraction")]
pub struct ParseRealError {
    pub input: String,
}

/// Parses `"-12.5e-3"`, `"7"`, or `"-11/30"` into an exact rational.
pub fn parse_exact(text: &str) -> Result<rug::Rational, ParseRealError> {
    let err = || ParseRealError {
        input: text.to_string(),
    };
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_integer(num.trim()).ok_or_else(err)?;
        let den = parse_integer(den.trim()).ok_or_else(err)?;
        if den == 0 {
            return Err(err());
        }
        return Ok(rug::Rational::from((num, den)));
    }

    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = body[pos + 1..].parse().map_err(|_| err())?;
            (&body[..pos], exp)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if int_part.len() + frac_part.len() == 0 || !all_digits(int_part) || !all_digits(frac_part)
    {
        return Err(err());
    }
    let digits: String = [int_part, frac_part].concat();
    let mut value = Integer::from_str_radix(&digits, 10).map_err(|_| err())?;
    if negative {
        value = -value;
    }
    let scale = exponent - frac_part.len() as i64;
    if scale.abs() > MAX_DECIMAL_EXPONENT {
        return Err(err());
    }
    let power = Integer::from(10).pow(scale.unsigned_abs() as u32);
    Ok(if scale >= 0 {
        rug::Rational::from(value * power)
    } else {
        rug::Rational::from((value, power))
    })
}

fn parse_integer(s: &str) -> Option<Integer> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Integer::from_str_radix(s, 10).ok()
}

/// `2^exp` as an exact rational.
pub fn pow2(exp: i32) -> rug::Rational {
    let one = Integer::from(1);
    if exp >= 0 {
        rug::Rational::from(one << exp.unsigned_abs())
    } else {
        rug::Rational::from((one.clone(), one << exp.unsigned_abs()))
    }
}

/// A real-number type the map can be iterated in.
pub trait Real:
    Num + Signed + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// `true` when arithmetic never rounds.
    const EXACT: bool;

    /// Mantissa precision in bits; `None` for exact types.
    fn precision(&self) -> Option<u32>;

    /// Correctly rounded conversion from an exact rational.
    fn from_rational(q: &rug::Rational, bits: u32) -> Self;

    /// Exact value as a rational. Panics on non-finite values.
    fn to_rational(&self) -> rug::Rational;

    fn to_f64(&self) -> f64;

    /// Decimal (or `p/q`) text that parses back to exactly this value.
    fn to_decimal(&self) -> String;

    /// Same value rounded (or widened) to `bits`; identity for fixed-width and exact types.
    fn with_precision(&self, bits: u32) -> Self;

    /// Next representable value toward +inf; identity for exact types.
    fn next_up(&self) -> Self;

    /// Next representable value toward -inf; identity for exact types.
    fn next_down(&self) -> Self;

    /// Storage footprint in bits, used to police exact-arithmetic blow-up.
    fn storage_bits(&self) -> u64;

    fn is_finite(&self) -> bool;

    fn parse_decimal(text: &str, bits: u32) -> Result<Self, ParseRealError> {
        parse_exact(text).map(|q| Self::from_rational(&q, bits))
    }

    /// Exact for every finite `v` (all f64 values are dyadic rationals).
    fn from_f64(v: f64, bits: u32) -> Self {
        let q = rug::Rational::from_f64(v).expect("finite f64");
        Self::from_rational(&q, bits)
    }

    fn from_i64(v: i64, bits: u32) -> Self {
        Self::from_rational(&rug::Rational::from(v), bits)
    }

    fn half(&self) -> Self {
        self.clone() / (Self::one() + Self::one())
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Real for f64 {
    const EXACT: bool = false;

    fn precision(&self) -> Option<u32> {
        Some(f64::MANTISSA_DIGITS)
    }

    fn from_rational(q: &rug::Rational, _bits: u32) -> Self {
        q.to_f64()
    }

    fn to_rational(&self) -> rug::Rational {
        rug::Rational::from_f64(*self).expect("finite f64")
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_decimal(&self) -> String {
        format!("{self:e}")
    }

    fn with_precision(&self, _bits: u32) -> Self {
        *self
    }

    fn next_up(&self) -> Self {
        f64::next_up(*self)
    }

    fn next_down(&self) -> Self {
        f64::next_down(*self)
    }

    fn storage_bits(&self) -> u64 {
        64
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Arbitrary-precision binary float.
///
/// Binary operations produce a result at `max(lhs.prec, rhs.prec)`, correctly
/// rounded to nearest.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigFloat(Float);

impl BigFloat {
    pub fn with_val<V>(bits: u32, value: V) -> Self
    where
        Float: rug::Assign<V>,
    {
        BigFloat(Float::with_val(bits, value))
    }

    pub fn from_float(f: Float) -> Self {
        BigFloat(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    fn widened(mut f: Float, prec: u32) -> Float {
        if f.prec() < prec {
            // raising precision never rounds
            f.set_prec(prec);
        }
        f
    }
}

macro_rules! bigfloat_binop {
    ($Trait:ident, $method:ident, $assign:ident) => {
        impl $Trait for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                self.$method(&rhs)
            }
        }

        impl<'a> $Trait<&'a BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &'a BigFloat) -> BigFloat {
                use std::ops::*;
                let prec = self.0.prec().max(rhs.0.prec());
                let mut lhs = BigFloat::widened(self.0, prec);
                lhs.$assign(&rhs.0);
                BigFloat(lhs)
            }
        }

        impl<'a> $Trait<&'a BigFloat> for &'a BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &'a BigFloat) -> BigFloat {
                self.clone().$method(rhs)
            }
        }
    };
}

bigfloat_binop!(Add, add, add_assign);
bigfloat_binop!(Sub, sub, sub_assign);
bigfloat_binop!(Mul, mul, mul_assign);
bigfloat_binop!(Div, div, div_assign);
bigfloat_binop!(Rem, rem, rem_assign);

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat(-self.0)
    }
}

impl Zero for BigFloat {
    fn zero() -> Self {
        BigFloat(Float::new(rug::float::prec_min()))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for BigFloat {
    fn one() -> Self {
        BigFloat(Float::with_val(rug::float::prec_min(), 1))
    }
}

impl Num for BigFloat {
    type FromStrRadixErr = ParseRealError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ParseRealError> {
        if radix != 10 {
            return Err(ParseRealError {
                input: s.to_string(),
            });
        }
        Self::parse_decimal(s, FALLBACK_BITS)
    }
}

impl Signed for BigFloat {
    fn abs(&self) -> Self {
        BigFloat(self.0.clone().abs())
    }
    fn abs_sub(&self, other: &Self) -> Self {
        if self <= other {
            Self::zero()
        } else {
            self - other
        }
    }
    fn signum(&self) -> Self {
        match self.0.cmp0() {
            Some(Ordering::Greater) => Self::one(),
            Some(Ordering::Less) => -Self::one(),
            _ => Self::zero(),
        }
    }
    fn is_positive(&self) -> bool {
        self.0.is_sign_positive() && !self.0.is_zero()
    }
    fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }
}

impl Real for BigFloat {
    const EXACT: bool = false;

    fn precision(&self) -> Option<u32> {
        Some(self.0.prec())
    }

    fn from_rational(q: &rug::Rational, bits: u32) -> Self {
        BigFloat(Float::with_val(bits, q))
    }

    fn to_rational(&self) -> rug::Rational {
        self.0.to_rational().expect("finite BigFloat")
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    fn to_decimal(&self) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        trim_decimal(&self.0.to_string_radix(10, None))
    }

    fn with_precision(&self, bits: u32) -> Self {
        BigFloat(Float::with_val(bits, &self.0))
    }

    fn next_up(&self) -> Self {
        let mut f = self.0.clone();
        f.next_up();
        BigFloat(f)
    }

    fn next_down(&self) -> Self {
        let mut f = self.0.clone();
        f.next_down();
        BigFloat(f)
    }

    fn storage_bits(&self) -> u64 {
        u64::from(self.0.prec())
    }

    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    fn half(&self) -> Self {
        BigFloat(self.0.clone() / 2u32)
    }
}

/// Drops trailing zeros of the mantissa in MPFR's `d.ddd[e±x]` output.
fn trim_decimal(s: &str) -> String {
    let (mantissa, exponent) = match s.find('e') {
        Some(pos) => s.split_at(pos),
        None => (s, ""),
    };
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    format!("{mantissa}{exponent}")
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}b]", self.to_decimal(), self.0.prec())
    }
}

/// Exact rational.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(rug::Rational);

impl Rational {
    pub fn new(value: rug::Rational) -> Self {
        Rational(value)
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Rational(rug::Rational::from((num, den)))
    }

    pub fn as_rational(&self) -> &rug::Rational {
        &self.0
    }

    pub fn into_rational(self) -> rug::Rational {
        self.0
    }
}

macro_rules! rational_binop {
    ($Trait:ident, $method:ident) => {
        impl $Trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }

        impl<'a> $Trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }

        impl<'a> $Trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(rug::Rational::from((&self.0).$method(&rhs.0)))
            }
        }
    };
}

rational_binop!(Add, add);
rational_binop!(Sub, sub);
rational_binop!(Mul, mul);
rational_binop!(Div, div);

impl Rem for Rational {
    type Output = Rational;
    fn rem(self, rhs: Rational) -> Rational {
        let quotient = rug::Rational::from(&self.0 / &rhs.0).trunc();
        Rational(self.0 - quotient * rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational(rug::Rational::new())
    }
    fn is_zero(&self) -> bool {
        self.0.cmp0() == Ordering::Equal
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational(rug::Rational::from(1))
    }
}

impl Num for Rational {
    type FromStrRadixErr = ParseRealError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ParseRealError> {
        if radix != 10 {
            return Err(ParseRealError {
                input: s.to_string(),
            });
        }
        parse_exact(s).map(Rational)
    }
}

impl Signed for Rational {
    fn abs(&self) -> Self {
        Rational(self.0.clone().abs())
    }
    fn abs_sub(&self, other: &Self) -> Self {
        if self <= other {
            Self::zero()
        } else {
            self - other
        }
    }
    fn signum(&self) -> Self {
        Rational(rug::Rational::from(self.0.cmp0() as i32))
    }
    fn is_positive(&self) -> bool {
        self.0.cmp0() == Ordering::Greater
    }
    fn is_negative(&self) -> bool {
        self.0.cmp0() == Ordering::Less
    }
}

impl Real for Rational {
    const EXACT: bool = true;

    fn precision(&self) -> Option<u32> {
        None
    }

    fn from_rational(q: &rug::Rational, _bits: u32) -> Self {
        Rational(q.clone())
    }

    fn to_rational(&self) -> rug::Rational {
        self.0.clone()
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    fn to_decimal(&self) -> String {
        self.0.to_string()
    }

    fn with_precision(&self, _bits: u32) -> Self {
        self.clone()
    }

    fn next_up(&self) -> Self {
        self.clone()
    }

    fn next_down(&self) -> Self {
        self.clone()
    }

    fn storage_bits(&self) -> u64 {
        u64::from(self.0.numer().significant_bits()) + u64::from(self.0.denom().significant_bits())
    }

    fn is_finite(&self) -> bool {
        true
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}
