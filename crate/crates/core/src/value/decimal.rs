//! Exact fixed-point decimal numbers.
//!
//! A [`Decimal`] is a 128-bit signed mantissa together with a base-10 scale,
//! so `12.50` is stored as mantissa `1250`, scale `2`. Addition, subtraction
//! and multiplication are exact as long as the result scale stays within
//! [`MAX_SCALE`]; anything finer is rounded half-to-even.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use thiserror::Error;

/// Largest number of fractional digits a decimal may carry.
pub const MAX_SCALE: u32 = 10;

/// Extra fractional digits produced by division and averages.
pub const DIVISION_EXTRA_SCALE: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimalError {
    #[error("decimal overflow")]
    Overflow,
    #[error("decimal division by zero")]
    DivisionByZero,
    #[error("invalid decimal literal {0:?}")]
    Invalid(String),
}

#[derive(Clone, Copy, Default)]
pub struct Decimal {
    mantissa: i128,
    scale: u32,
}

const fn pow10(exp: u32) -> i128 {
    let mut v: i128 = 1;
    let mut i = 0;
    while i < exp {
        v *= 10;
        i += 1;
    }
    v
}

fn checked_pow10(exp: u32) -> Option<i128> {
    10i128.checked_pow(exp)
}

/// Divides `num` by `den` rounding half-to-even. `den` must be non-zero.
fn div_round_half_even(num: i128, den: i128) -> i128 {
    let q = num / den;
    let r = num % den;
    if r == 0 {
        return q;
    }
    // |2r| vs |den|, computed without overflowing on large remainders.
    let r_abs = r.unsigned_abs();
    let d_abs = den.unsigned_abs();
    let half_cmp = r_abs.cmp(&(d_abs - r_abs));
    let away = match half_cmp {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => q % 2 != 0,
    };
    if !away {
        return q;
    }
    if (num < 0) != (den < 0) {
        q - 1
    } else {
        q + 1
    }
}

impl Decimal {
    pub const ZERO: Decimal = Decimal { mantissa: 0, scale: 0 };

    /// Builds `mantissa * 10^-scale`.
    pub fn new(mantissa: i128, scale: u32) -> Result<Self, DecimalError> {
        if scale > MAX_SCALE {
            return Err(DecimalError::Invalid(format!(
                "scale {scale} exceeds maximum {MAX_SCALE}"
            )));
        }
        Ok(Decimal { mantissa, scale })
    }

    pub fn from_i64(v: i64) -> Self {
        Decimal { mantissa: v as i128, scale: 0 }
    }

    pub fn mantissa(&self) -> i128 {
        self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa < 0
    }

    /// Re-expresses the value at a larger scale without changing it.
    pub fn rescale_up(&self, scale: u32) -> Result<Self, DecimalError> {
        debug_assert!(scale >= self.scale);
        let factor = checked_pow10(scale - self.scale).ok_or(DecimalError::Overflow)?;
        let mantissa = self.mantissa.checked_mul(factor).ok_or(DecimalError::Overflow)?;
        Ok(Decimal { mantissa, scale })
    }

    /// Rounds (half-to-even) to at most `scale` fractional digits.
    pub fn round_to(&self, scale: u32) -> Self {
        if scale >= self.scale {
            return *self;
        }
        let den = pow10(self.scale - scale);
        Decimal { mantissa: div_round_half_even(self.mantissa, den), scale }
    }

    /// Drops trailing fractional zeros: `1.500` becomes `1.5`.
    pub fn normalized(&self) -> Self {
        let mut m = self.mantissa;
        let mut s = self.scale;
        while s > 0 && m % 10 == 0 {
            m /= 10;
            s -= 1;
        }
        Decimal { mantissa: m, scale: s }
    }

    fn aligned(a: &Decimal, b: &Decimal) -> Result<(i128, i128, u32), DecimalError> {
        let scale = a.scale.max(b.scale);
        Ok((a.rescale_up(scale)?.mantissa, b.rescale_up(scale)?.mantissa, scale))
    }

    pub fn checked_add(&self, rhs: &Decimal) -> Result<Self, DecimalError> {
        let (a, b, scale) = Self::aligned(self, rhs)?;
        let mantissa = a.checked_add(b).ok_or(DecimalError::Overflow)?;
        Ok(Decimal { mantissa, scale })
    }

    pub fn checked_sub(&self, rhs: &Decimal) -> Result<Self, DecimalError> {
        let (a, b, scale) = Self::aligned(self, rhs)?;
        let mantissa = a.checked_sub(b).ok_or(DecimalError::Overflow)?;
        Ok(Decimal { mantissa, scale })
    }

    /// Exact product when the combined scale fits, otherwise rounded to
    /// [`MAX_SCALE`] digits.
    pub fn checked_mul(&self, rhs: &Decimal) -> Result<Self, DecimalError> {
        let mantissa = self.mantissa.checked_mul(rhs.mantissa).ok_or(DecimalError::Overflow)?;
        let scale = self.scale + rhs.scale;
        if scale <= MAX_SCALE {
            return Ok(Decimal { mantissa, scale });
        }
        let den = pow10(scale - MAX_SCALE);
        Ok(Decimal { mantissa: div_round_half_even(mantissa, den), scale: MAX_SCALE })
    }

    /// Quotient at scale `max(operand scales) + 4` (capped at [`MAX_SCALE`]),
    /// rounded half-to-even.
    pub fn checked_div(&self, rhs: &Decimal) -> Result<Self, DecimalError> {
        let scale = (self.scale.max(rhs.scale) + DIVISION_EXTRA_SCALE).min(MAX_SCALE);
        self.div_to_scale(rhs, scale)
    }

    /// Quotient rounded half-to-even to exactly `scale` digits.
    pub fn div_to_scale(&self, rhs: &Decimal, scale: u32) -> Result<Self, DecimalError> {
        if rhs.mantissa == 0 {
            return Err(DecimalError::DivisionByZero);
        }
        // self/rhs = (ma / 10^sa) / (mb / 10^sb) = ma * 10^(scale + sb - sa) / mb at `scale`.
        let shift = scale as i64 + rhs.scale as i64 - self.scale as i64;
        let (num, den) = if shift >= 0 {
            let f = checked_pow10(shift as u32).ok_or(DecimalError::Overflow)?;
            (self.mantissa.checked_mul(f).ok_or(DecimalError::Overflow)?, rhs.mantissa)
        } else {
            let f = checked_pow10((-shift) as u32).ok_or(DecimalError::Overflow)?;
            (self.mantissa, rhs.mantissa.checked_mul(f).ok_or(DecimalError::Overflow)?)
        };
        Ok(Decimal { mantissa: div_round_half_even(num, den), scale })
    }

    pub fn checked_neg(&self) -> Result<Self, DecimalError> {
        let mantissa = self.mantissa.checked_neg().ok_or(DecimalError::Overflow)?;
        Ok(Decimal { mantissa, scale: self.scale })
    }

    /// Integer part, truncated toward zero.
    pub fn trunc_to_i64(&self) -> Option<i64> {
        let q = self.mantissa / pow10(self.scale);
        i64::try_from(q).ok()
    }
}

impl From<i64> for Decimal {
    fn from(v: i64) -> Self {
        Decimal::from_i64(v)
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Decimal {}

impl Hash for Decimal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let n = self.normalized();
        n.mantissa.hash(state);
        n.scale.hash(state);
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.scale == other.scale {
            return self.mantissa.cmp(&other.mantissa);
        }
        match Decimal::aligned(self, other) {
            Ok((a, b, _)) => a.cmp(&b),
            // Rescaling overflowed, so the magnitudes are far apart: compare
            // integer parts first, then the exact fractional remainders.
            Err(_) => {
                let (ai, af) = split(self);
                let (bi, bf) = split(other);
                ai.cmp(&bi).then_with(|| {
                    let s = self.scale.max(other.scale);
                    let a = af * pow10(s - self.scale);
                    let b = bf * pow10(s - other.scale);
                    a.cmp(&b)
                })
            }
        }
    }
}

/// Floor-based split into integer and non-negative fractional mantissa.
fn split(d: &Decimal) -> (i128, i128) {
    let p = pow10(d.scale);
    (d.mantissa.div_euclid(p), d.mantissa.rem_euclid(p))
}

impl fmt::Debug for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Decimal({self})")
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.mantissa.unsigned_abs().to_string();
        let sign = if self.mantissa < 0 { "-" } else { "" };
        let scale = self.scale as usize;
        if scale == 0 {
            return write!(f, "{sign}{digits}");
        }
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int, frac) = padded.split_at(padded.len() - scale);
        write!(f, "{sign}{int}.{frac}")
    }
}

impl FromStr for Decimal {
    type Err = DecimalError;

    /// Accepts `[+-]digits[.digits][(e|E)[+-]digits]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || DecimalError::Invalid(s.to_string());
        let (body, exp) = match s.find(['e', 'E']) {
            Some(i) => {
                let e: i32 = s[i + 1..].parse().map_err(|_| invalid())?;
                (&s[..i], e)
            }
            None => (s, 0),
        };
        let (neg, body) = match body.as_bytes().first() {
            Some(b'-') => (true, &body[1..]),
            Some(b'+') => (false, &body[1..]),
            _ => (false, body),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        if body.contains('.') && frac.is_empty() {
            return Err(invalid());
        }
        if !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        let mut mantissa: i128 = 0;
        for b in int.bytes().chain(frac.bytes()) {
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add((b - b'0') as i128))
                .ok_or(DecimalError::Overflow)?;
        }
        let mut scale = frac.len() as i64 - exp as i64;
        if scale < 0 {
            let f = checked_pow10((-scale) as u32).ok_or(DecimalError::Overflow)?;
            mantissa = mantissa.checked_mul(f).ok_or(DecimalError::Overflow)?;
            scale = 0;
        }
        let mut d = Decimal { mantissa, scale: 0 };
        if scale as u32 > MAX_SCALE || scale > MAX_SCALE as i64 {
            // Trailing zeros beyond the maximum are harmless; real digits are not.
            let extra = (scale - MAX_SCALE as i64) as u32;
            if extra > 38 || mantissa % pow10(extra) != 0 {
                return Err(DecimalError::Invalid(format!(
                    "{s:?} has more than {MAX_SCALE} fractional digits"
                )));
            }
            d.mantissa /= pow10(extra);
            d.scale = MAX_SCALE;
        } else {
            d.scale = scale as u32;
        }
        if neg {
            d.mantissa = -d.mantissa;
        }
        Ok(d)
    }
}

impl serde::Serialize for Decimal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display_keep_scale() {
        assert_eq!(d("1500.00").to_string(), "1500.00");
        assert_eq!(d("-0.05").to_string(), "-0.05");
        assert_eq!(d("0.5").to_string(), "0.5");
        assert_eq!(d("+7").to_string(), "7");
        assert_eq!(d("1.5e2").to_string(), "150");
        assert_eq!(d("15e-1").to_string(), "1.5");
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "-", ".5", "1.", "1.2.3", "abc", "1e", "0.12345678901"] {
            assert!(bad.parse::<Decimal>().is_err(), "{bad}");
        }
        // Trailing zeros beyond the maximum scale are accepted.
        assert_eq!(d("1.500000000000").to_string(), "1.5000000000");
    }

    #[test]
    fn tax_example_is_exact() {
        assert_eq!(d("1500.00").checked_mul(&d("0.08")).unwrap().to_string(), "120.0000");
        assert_eq!(d("2000.00").checked_mul(&d("0.08")).unwrap().to_string(), "160.0000");
    }

    #[test]
    fn equality_ignores_scale() {
        assert_eq!(d("2"), d("2.000"));
        assert!(d("2.01") > d("2"));
        assert!(d("-1.5") < d("-1.49"));
    }

    #[test]
    fn division_rounds_half_even() {
        assert_eq!(d("1").checked_div(&d("3")).unwrap().to_string(), "0.3333");
        assert_eq!(d("2.00").checked_div(&d("3")).unwrap().to_string(), "0.666667");
        // 0.00005 -> 0.0000 (even), 0.00015 -> 0.0002
        assert_eq!(d("0.00005").div_to_scale(&d("1"), 4).unwrap().to_string(), "0.0000");
        assert_eq!(d("0.00015").div_to_scale(&d("1"), 4).unwrap().to_string(), "0.0002");
        assert_eq!(d("-0.00015").div_to_scale(&d("1"), 4).unwrap().to_string(), "-0.0002");
        assert_eq!(d("1").checked_div(&d("0")), Err(DecimalError::DivisionByZero));
    }

    #[test]
    fn multiplication_beyond_max_scale_rounds() {
        let p = d("0.000001").checked_mul(&d("0.000005")).unwrap();
        assert_eq!(p.scale(), MAX_SCALE);
        assert_eq!(p.to_string(), "0.0000000000");
    }

    #[test]
    fn trunc_toward_zero() {
        assert_eq!(d("-7.9").trunc_to_i64(), Some(-7));
        assert_eq!(d("7.9").trunc_to_i64(), Some(7));
    }

    #[test]
    fn overflow_is_reported() {
        let big = Decimal::new(i128::MAX, 0).unwrap();
        assert_eq!(big.checked_add(&d("1")), Err(DecimalError::Overflow));
    }

    #[test]
    fn ordering_survives_rescale_overflow() {
        let big = Decimal::new(i128::MAX / 2, 0).unwrap();
        let small = d("0.0000000001");
        assert_eq!(big.cmp(&small), Ordering::Greater);
        assert_eq!(small.cmp(&big), Ordering::Less);
    }
}
