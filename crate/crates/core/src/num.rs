//! Small helpers over `rug` big floats: construction, decimal I/O and a few
//! conversions that show up everywhere in the crate.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

/// Float from anything `rug` can assign from, at precision `prec`.
#[inline]
pub fn fl<T>(prec: u32, v: T) -> Float
where
    Float: rug::Assign<T>,
{
    let mut x = Float::new(prec);
    rug::Assign::assign(&mut x, v);
    x
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn sqrt_pi(prec: u32) -> Float {
    pi(prec).sqrt()
}

/// 2^e at precision `prec`.
pub fn pow2(prec: u32, e: i64) -> Float {
    let mut x = Float::with_val(prec, 1);
    if e >= 0 {
        x <<= e as u32;
    } else {
        x >>= (-e) as u32;
    }
    x
}

/// |x| as f64; saturates to f64::MAX, 0 for values below f64 range.
pub fn abs_f64(x: &Float) -> f64 {
    x.to_f64().abs()
}

/// log2 |x|, finite even when |x| is far outside the f64 range.
pub fn log2_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + e as f64
}

pub fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

pub fn cabs_f64(z: &Complex) -> f64 {
    cabs(z).to_f64()
}

pub fn cx(prec: u32, re: &Float, im: &Float) -> Complex {
    Complex::with_val(prec, (re, im))
}

/// Parses a plain decimal (`-1.25`, `3`, `1e-8`, `2.5E3`) into an exact rational.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.as_bytes().first()? {
        b'-' => (true, &mant[1..]),
        b'+' => (false, &mant[1..]),
        _ => (false, mant),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num = Integer::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = Integer::from(10);
    let mut r = Rational::from(num);
    if scale >= 0 {
        r *= Rational::from(ten.pow(scale as u32));
    } else {
        r /= Rational::from(ten.pow((-scale) as u32));
    }
    if neg {
        r = -r;
    }
    Some(r)
}

/// Significant decimal digits used for textual output at `prec` bits.
pub fn output_digits(prec: u32) -> usize {
    (prec as usize / 3).max(17)
}

/// Decimal string with `prec/3` significant digits. Deterministic for a fixed
/// value and precision.
pub fn to_decimal(x: &Float, prec: u32) -> String {
    x.to_string_radix(10, Some(output_digits(prec)))
}

/// Decimal string with a caller-chosen number of significant digits.
pub fn to_decimal_digits(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

/// Short scientific rendering for residuals and tolerances.
pub fn to_sci(x: &Float) -> String {
    x.to_string_radix(10, Some(6))
}

/// Parses a decimal string written by [`to_decimal`] back into a float.
pub fn parse_float(s: &str, prec: u32) -> Option<Float> {
    Float::parse(s).ok().map(|p| Float::with_val(prec, p))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64()
}

pub fn rational_to_float(r: &Rational, prec: u32) -> Float {
    Float::with_val(prec, r)
}
