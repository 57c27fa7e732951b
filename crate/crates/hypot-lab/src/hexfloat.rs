//! Exact hexadecimal float printing and parsing.
//!
//! Decimal output hides one-ulp differences, which are the whole subject
//! here, so every value the CLI prints also comes in `0x1.f6a7a2955385ep+1`
//! form, and any such literal parses back to the identical bit pattern.

use num_bigint::BigUint;
use thiserror::Error;

use crate::fp::BinaryFloat;
use crate::oracle::{round_to_nearest, ExactValue};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unparseable float literal `{0}`")]
    Invalid(String),
}

/// Format a value as a hex-float literal. Normals print as `0x1.<frac>p<e>`,
/// subnormals as `0x0.<frac>p<min_exp>`, with trailing zero digits trimmed.
pub fn format_hex<T: BinaryFloat>(x: T) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    let sign_bit = T::PRECISION_BITS - 1 + meta_bits::<T>();
    let sign = if x.to_bits_u64() >> sign_bit & 1 == 1 {
        "-"
    } else {
        ""
    };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits_u64();
    let frac_bits = T::PRECISION_BITS - 1;
    let exp_field = (bits >> frac_bits) & ((1 << meta_bits::<T>()) - 1);
    let frac = bits & ((1u64 << frac_bits) - 1);
    if exp_field == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_field == 0 {
        (0u64, T::MIN_NORMAL_EXP)
    } else {
        (1u64, exp_field as i64 + T::MIN_NORMAL_EXP - 1)
    };
    // left-align the fraction to a whole number of hex digits
    let digits = frac_bits.div_ceil(4);
    let frac = frac << (4 * digits - frac_bits);
    let mut hex = format!("{frac:0width$x}", width = digits as usize);
    while hex.ends_with('0') {
        hex.pop();
    }
    if hex.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{hex}p{exp:+}")
    }
}

fn meta_bits<T: BinaryFloat>() -> u32 {
    // exponent field width: total bits minus significand minus sign
    match T::PRECISION_BITS {
        24 => 8,
        53 => 11,
        _ => unreachable!(),
    }
}

/// Parse a decimal or hex-float literal. Hex literals of any length are
/// rounded exactly (an overlong mantissa goes through the exact-integer
/// rounding path), so representable inputs always reproduce their bits.
pub fn parse_float<T: BinaryFloat>(s: &str) -> Result<T, ParseError> {
    let t = s.trim();
    let (negative, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    let lower = body.to_ascii_lowercase();
    let magnitude = if lower == "inf" || lower == "infinity" {
        T::infinity()
    } else if lower == "nan" {
        return Ok(T::nan()); // sign of NaN is not meaningful here
    } else if let Some(hex) = lower.strip_prefix("0x") {
        parse_hex_body::<T>(hex).ok_or_else(|| ParseError::Invalid(s.to_string()))?
    } else {
        T::parse_decimal(body).map_err(|_| ParseError::Invalid(s.to_string()))?
    };
    Ok(if negative { -magnitude } else { magnitude })
}

fn parse_hex_body<T: BinaryFloat>(hex: &str) -> Option<T> {
    let (mantissa_part, exp_part) = match hex.split_once('p') {
        Some((m, e)) => (m, Some(e)),
        None => (hex, None),
    };
    let exp: i64 = match exp_part {
        Some(e) => e.parse().ok()?,
        None => 0,
    };
    let (int_part, frac_part) = match mantissa_part.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa_part, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let mut mantissa = BigUint::ZERO;
    for c in int_part.chars().chain(frac_part.chars()) {
        mantissa = (mantissa << 4u8) + c.to_digit(16).map(BigUint::from)?;
    }
    // each fraction digit shifts the binary point four bits down
    let exponent = exp - 4 * frac_part.len() as i64;
    // exponents beyond any representable magnitude saturate without
    // round-tripping through the exact value
    if mantissa == BigUint::ZERO {
        return Some(T::zero());
    }
    let value_exp = mantissa.bits() as i64 - 1 + exponent;
    if value_exp > T::MAX_FINITE_EXP + 1 {
        return Some(T::infinity());
    }
    if value_exp < T::MIN_ULP_EXP - 2 {
        return Some(T::zero());
    }
    let exact = ExactValue::from_mantissa_exponent(mantissa, exponent);
    Some(round_to_nearest::<T>(&exact).result)
}
