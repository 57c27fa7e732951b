//! Binary floating-point format metrology: format constants, a monotone
//! float-to-integer mapping, and ulp-distance measurement.
//!
//! Everything here is exact bit manipulation; no operation in this module
//! introduces rounding error of its own.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FpError {
    #[error("measurement requires finite operands")]
    NonFinite,
    #[error("unsupported format tag `{0}` (expected binary32 or binary64)")]
    UnsupportedFormat(String),
}

/// The two supported IEEE 754 binary formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatTag {
    Binary32,
    Binary64,
}

impl FormatTag {
    pub fn name(self) -> &'static str {
        match self {
            FormatTag::Binary32 => "binary32",
            FormatTag::Binary64 => "binary64",
        }
    }
}

impl std::str::FromStr for FormatTag {
    type Err = FpError;

    fn from_str(s: &str) -> Result<Self, FpError> {
        match s {
            "binary32" => Ok(FormatTag::Binary32),
            "binary64" => Ok(FormatTag::Binary64),
            other => Err(FpError::UnsupportedFormat(other.to_string())),
        }
    }
}

impl fmt::Display for FormatTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for f32 {}
    impl Sealed for f64 {}
}

/// An IEEE 754 binary floating-point scalar (`f32` or `f64`).
///
/// Exposes the exact bit-level structure the rest of the crate needs:
/// significand/exponent decomposition, an order-preserving integer key,
/// and exact reassembly of `n * 2^e` values.
pub trait BinaryFloat:
    sealed::Sealed
    + Copy
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + fmt::Display
    + fmt::Debug
    + Send
    + Sync
    + 'static
{
    /// Significand bits including the implicit leading bit (53 or 24).
    const PRECISION_BITS: u32;
    /// Smallest normalized exponent: value 2^MIN_NORMAL_EXP is the smallest normal.
    const MIN_NORMAL_EXP: i64;
    /// Largest finite exponent: f_max is just below 2^(MAX_FINITE_EXP+1).
    const MAX_FINITE_EXP: i64;
    /// Exponent of the smallest subnormal, i.e. of one ulp at the bottom.
    const MIN_ULP_EXP: i64;
    const TAG: FormatTag;

    fn zero() -> Self;
    fn one() -> Self;
    fn two() -> Self;
    fn infinity() -> Self;
    fn nan() -> Self;
    fn epsilon() -> Self;
    fn min_positive() -> Self;
    fn max_finite() -> Self;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    /// Fused multiply-add `self * a + b` with a single rounding.
    fn mul_add(self, a: Self, b: Self) -> Self;
    fn is_nan(self) -> bool;
    fn is_infinite(self) -> bool;
    fn is_finite(self) -> bool;
    fn recip(self) -> Self;

    fn to_bits_u64(self) -> u64;
    fn from_bits_u64(bits: u64) -> Self;
    fn to_f64(self) -> f64;
    fn from_f64(v: f64) -> Self;
    fn parse_decimal(s: &str) -> Result<Self, std::num::ParseFloatError>;

    /// Order-preserving key: for finite x, y we have key(x) < key(y) iff x < y,
    /// and adjacent finite floats get adjacent keys. Both zeros map to 0.
    fn ordered_key(self) -> i64;
    /// Inverse of [`ordered_key`](Self::ordered_key) over the finite range
    /// (and one step beyond each end, where it yields an infinity).
    fn from_ordered_key(key: i64) -> Self;

    /// Exact decomposition of a finite magnitude: |x| = m * 2^e with integer m.
    /// Zero decomposes to (0, 0).
    fn decompose_magnitude(self) -> (u64, i64);

    /// Exact assembly of `n * 2^e`. The value must be representable; this is
    /// an internal constructor for grid-aligned values, not a rounding cast.
    fn from_parts(n: u64, e: i64) -> Self;

    /// Exact power of two for MIN_ULP_EXP <= k <= MAX_FINITE_EXP.
    fn pow2(k: i64) -> Self;

    fn format() -> FpFormat<Self> {
        FpFormat::native()
    }
}

macro_rules! impl_binary_float {
    ($ty:ty, $bits:ty, $ibits:ty, $prec:expr, $min_norm:expr, $max_fin:expr, $tag:expr) => {
        impl BinaryFloat for $ty {
            const PRECISION_BITS: u32 = $prec;
            const MIN_NORMAL_EXP: i64 = $min_norm;
            const MAX_FINITE_EXP: i64 = $max_fin;
            const MIN_ULP_EXP: i64 = $min_norm - ($prec as i64 - 1);
            const TAG: FormatTag = $tag;

            fn zero() -> Self {
                0.0
            }
            fn one() -> Self {
                1.0
            }
            fn two() -> Self {
                2.0
            }
            fn infinity() -> Self {
                <$ty>::INFINITY
            }
            fn nan() -> Self {
                <$ty>::NAN
            }
            fn epsilon() -> Self {
                <$ty>::EPSILON
            }
            fn min_positive() -> Self {
                <$ty>::MIN_POSITIVE
            }
            fn max_finite() -> Self {
                <$ty>::MAX
            }

            fn abs(self) -> Self {
                self.abs()
            }
            fn sqrt(self) -> Self {
                self.sqrt()
            }
            fn mul_add(self, a: Self, b: Self) -> Self {
                self.mul_add(a, b)
            }
            fn is_nan(self) -> bool {
                self.is_nan()
            }
            fn is_infinite(self) -> bool {
                self.is_infinite()
            }
            fn is_finite(self) -> bool {
                self.is_finite()
            }
            fn recip(self) -> Self {
                self.recip()
            }

            fn to_bits_u64(self) -> u64 {
                self.to_bits() as u64
            }
            fn from_bits_u64(bits: u64) -> Self {
                <$ty>::from_bits(bits as $bits)
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn from_f64(v: f64) -> Self {
                v as $ty
            }
            fn parse_decimal(s: &str) -> Result<Self, std::num::ParseFloatError> {
                s.parse::<$ty>()
            }

            fn ordered_key(self) -> i64 {
                let b = self.to_bits() as $ibits;
                let key = if b >= 0 {
                    b
                } else {
                    // Sign-magnitude patterns for negatives run backwards;
                    // reflect them below zero so the map stays monotone.
                    <$ibits>::MIN.wrapping_sub(b)
                };
                key as i64
            }

            fn from_ordered_key(key: i64) -> Self {
                let k = key as $ibits;
                let bits = if k >= 0 {
                    k as $bits
                } else {
                    <$ibits>::MIN.wrapping_sub(k) as $bits
                };
                <$ty>::from_bits(bits)
            }

            fn decompose_magnitude(self) -> (u64, i64) {
                debug_assert!(self.is_finite());
                let bits = self.abs().to_bits() as u64;
                let frac_bits = Self::PRECISION_BITS - 1;
                let exp_field = (bits >> frac_bits) as i64;
                let frac = bits & ((1u64 << frac_bits) - 1);
                if exp_field == 0 {
                    if frac == 0 {
                        (0, 0)
                    } else {
                        (frac, Self::MIN_ULP_EXP)
                    }
                } else {
                    (
                        frac | (1u64 << frac_bits),
                        exp_field + Self::MIN_NORMAL_EXP - 1 - frac_bits as i64,
                    )
                }
            }

            fn from_parts(n: u64, e: i64) -> Self {
                if n == 0 {
                    return 0.0;
                }
                let (mut n, mut e) = (n, e);
                while e < Self::MIN_ULP_EXP {
                    assert!(n & 1 == 0, "value {}*2^{} not on the format grid", n, e);
                    n >>= 1;
                    e += 1;
                }
                assert!(n < (1u64 << (Self::PRECISION_BITS + 1)));
                let v = (n as $ty) * Self::pow2(e);
                assert!(v.is_finite(), "value {}*2^{} overflows the format", n, e);
                v
            }

            fn pow2(k: i64) -> Self {
                assert!((Self::MIN_ULP_EXP..=Self::MAX_FINITE_EXP).contains(&k));
                let frac_bits = Self::PRECISION_BITS - 1;
                if k >= Self::MIN_NORMAL_EXP {
                    let exp_field = (k - Self::MIN_NORMAL_EXP + 1) as $bits;
                    <$ty>::from_bits(exp_field << frac_bits)
                } else {
                    <$ty>::from_bits(1 as $bits << (k - Self::MIN_ULP_EXP))
                }
            }
        }
    };
}

impl_binary_float!(f32, u32, i32, 24, -126, 127, FormatTag::Binary32);
impl_binary_float!(f64, u64, i64, 53, -1022, 1023, FormatTag::Binary64);

/// Static description of a binary floating-point format together with the
/// derived thresholds the kernels branch on.
#[derive(Debug, Clone, Copy)]
pub struct FpFormat<T: BinaryFloat> {
    /// Significand bits including the implicit bit.
    pub precision_bits: u32,
    /// Gap between 1 and the next float above it.
    pub epsilon: T,
    /// Smallest positive normalized value.
    pub f_min: T,
    /// Largest finite value.
    pub f_max: T,
    /// Rounded value of sqrt(epsilon/2); below `ax * wide_threshold` the
    /// smaller operand cannot affect the rounded hypotenuse.
    pub wide_threshold: T,
    /// Rounded value of sqrt(f_max/2); above it the squares may overflow.
    pub overflow_guard: T,
    /// Exact value of sqrt(f_min); below it the squares may denormalize.
    pub underflow_guard: T,
    /// Power-of-two rescaling constant: the ulp of sqrt(f_min). Smaller than
    /// `underflow_guard` while its reciprocal exceeds `overflow_guard`, so one
    /// constant serves both rescaling directions without rounding error.
    pub rescale: T,
}

impl<T: BinaryFloat> FpFormat<T> {
    pub fn native() -> Self {
        let epsilon = T::epsilon();
        let f_min = T::min_positive();
        let f_max = T::max_finite();
        FpFormat {
            precision_bits: T::PRECISION_BITS,
            epsilon,
            f_min,
            f_max,
            wide_threshold: (epsilon / T::two()).sqrt(),
            overflow_guard: (f_max / T::two()).sqrt(),
            underflow_guard: f_min.sqrt(),
            rescale: T::pow2(T::MIN_NORMAL_EXP / 2 - (T::PRECISION_BITS as i64 - 1)),
        }
    }
}

/// Instantiate the format constants for a runtime tag, handing them to `f`
/// as the concrete `FpFormat<f32>` or `FpFormat<f64>` they describe.
pub fn format_for(tag: FormatTag) -> FormatDescription {
    match tag {
        FormatTag::Binary32 => FormatDescription::from_format(&FpFormat::<f32>::native()),
        FormatTag::Binary64 => FormatDescription::from_format(&FpFormat::<f64>::native()),
    }
}

/// Format constants widened to f64 for display and tag-driven callers.
#[derive(Debug, Clone, Copy)]
pub struct FormatDescription {
    pub tag: FormatTag,
    pub precision_bits: u32,
    pub epsilon: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub wide_threshold: f64,
    pub overflow_guard: f64,
    pub underflow_guard: f64,
    pub rescale: f64,
}

impl FormatDescription {
    fn from_format<T: BinaryFloat>(fmt: &FpFormat<T>) -> Self {
        FormatDescription {
            tag: T::TAG,
            precision_bits: fmt.precision_bits,
            epsilon: fmt.epsilon.to_f64(),
            f_min: fmt.f_min.to_f64(),
            f_max: fmt.f_max.to_f64(),
            wide_threshold: fmt.wide_threshold.to_f64(),
            overflow_guard: fmt.overflow_guard.to_f64(),
            underflow_guard: fmt.underflow_guard.to_f64(),
            rescale: fmt.rescale.to_f64(),
        }
    }
}

/// Signed ulp distance `key(computed) - key(reference)` under the ordered
/// mapping; 0 iff the two are the same value (both zeros count as equal).
pub fn ulp_distance<T: BinaryFloat>(computed: T, reference: T) -> Result<i128, FpError> {
    if !computed.is_finite() || !reference.is_finite() {
        return Err(FpError::NonFinite);
    }
    Ok(computed.ordered_key() as i128 - reference.ordered_key() as i128)
}

/// Adjacent representable neighbor above x; +infinity past f_max.
pub fn next_up<T: BinaryFloat>(x: T) -> T {
    debug_assert!(x.is_finite());
    T::from_ordered_key(x.ordered_key() + 1)
}

/// Adjacent representable neighbor below x; -infinity past -f_max.
pub fn next_down<T: BinaryFloat>(x: T) -> T {
    debug_assert!(x.is_finite());
    T::from_ordered_key(x.ordered_key() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary64_constants() {
        let fmt = FpFormat::<f64>::native();
        assert_eq!(fmt.epsilon, 2f64.powi(-52));
        assert_eq!(fmt.rescale, 2f64.powi(-563));
        assert_eq!(fmt.underflow_guard, 2f64.powi(-511));
        // rescale sits strictly inside the guard band
        assert!(fmt.rescale < fmt.underflow_guard);
        assert!(fmt.rescale.recip() > fmt.overflow_guard);
        // wide_threshold is the correctly rounded sqrt(eps/2): in exact
        // integer arithmetic the true root lies strictly between the
        // neighbors of the stored value (the stored value itself rounds up
        // in binary64, so its square slightly exceeds eps/2)
        assert_eq!(fmt.wide_threshold, (fmt.epsilon / 2.0).sqrt());
        let (m, e) = fmt.wide_threshold.decompose_magnitude();
        let shift = -53 - 2 * e;
        assert!((0..128).contains(&shift));
        let target = 1u128 << shift as u32;
        assert!(((m - 1) as u128).pow(2) < target);
        assert!(target < (m as u128).pow(2));
    }

    #[test]
    fn binary32_constants() {
        let fmt = FpFormat::<f32>::native();
        assert_eq!(fmt.epsilon, 2f32.powi(-23));
        assert_eq!(fmt.rescale, 2f32.powi(-86));
        assert_eq!(fmt.underflow_guard, 2f32.powi(-63));
        assert!(fmt.rescale < fmt.underflow_guard);
        assert!(fmt.rescale.recip() > fmt.overflow_guard);
    }

    #[test]
    fn format_tag_parsing() {
        use std::str::FromStr;
        assert_eq!(FormatTag::from_str("binary64").unwrap(), FormatTag::Binary64);
        assert_eq!(FormatTag::from_str("binary32").unwrap(), FormatTag::Binary32);
        assert!(matches!(
            FormatTag::from_str("binary128"),
            Err(FpError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn format_for_populates_tagged_descriptions() {
        let d64 = format_for(FormatTag::Binary64);
        assert_eq!(d64.precision_bits, 53);
        assert_eq!(d64.epsilon, 2f64.powi(-52));
        assert_eq!(d64.rescale, 2f64.powi(-563));
        let d32 = format_for(FormatTag::Binary32);
        assert_eq!(d32.precision_bits, 24);
        assert_eq!(d32.epsilon, 2f32.powi(-23) as f64);
        assert_eq!(d32.rescale, 2f32.powi(-86) as f64);
        assert_eq!(d32.f_max, f32::MAX as f64);
    }

    #[test]
    fn ulp_distance_examples() {
        assert_eq!(ulp_distance(1.0f64, 1.0f64).unwrap(), 0);
        assert_eq!(ulp_distance(1.0 + f64::EPSILON, 1.0).unwrap(), 1);
        assert_eq!(ulp_distance(next_down(2.0f64), 2.0f64).unwrap(), -1);
        assert_eq!(ulp_distance(0.0f64, -0.0f64).unwrap(), 0);
        assert!(ulp_distance(f64::NAN, 1.0).is_err());
        assert!(ulp_distance(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn neighbors() {
        assert_eq!(next_up(1.0f64), 1.0 + f64::EPSILON);
        assert_eq!(next_down(1.0f64), 1.0 - f64::EPSILON / 2.0);
        assert_eq!(next_up(f64::MAX), f64::INFINITY);
        assert_eq!(next_down(-f64::MAX), f64::NEG_INFINITY);
        assert_eq!(next_up(0.0f64), f64::from_bits(1));
        assert_eq!(next_down(0.0f64), -f64::from_bits(1));
        // agree with the std implementation across a spread of magnitudes
        for e in -300..300 {
            let x = 1.2345678901234567 * 2f64.powi(e);
            assert_eq!(next_up(x), x.next_up());
            assert_eq!(next_down(x), x.next_down());
            assert_eq!(next_up(-x), (-x).next_up());
        }
    }

    #[test]
    fn decompose_round_trips() {
        for &x in &[1.0f64, 1.5, 3.0, 4.0, 2f64.powi(-1030), f64::MIN_POSITIVE, f64::MAX] {
            let (m, e) = x.decompose_magnitude();
            assert_eq!(f64::from_parts(m, e), x, "x = {x:e}");
        }
        let (m, e) = 0.0f64.decompose_magnitude();
        assert_eq!((m, e), (0, 0));
        // smallest subnormal
        let tiny = f64::from_bits(1);
        assert_eq!(tiny.decompose_magnitude(), (1, -1074));
    }

    #[test]
    fn pow2_edges() {
        assert_eq!(f64::pow2(0), 1.0);
        assert_eq!(f64::pow2(-1074), f64::from_bits(1));
        assert_eq!(f64::pow2(-1022), f64::MIN_POSITIVE);
        assert_eq!(f64::pow2(1023), 2f64.powi(1023));
        assert_eq!(f32::pow2(-149), f32::from_bits(1));
    }

    #[test]
    fn ordered_key_spans_exponent_boundaries() {
        // 2.0 sits one key above the largest float below it
        let below = next_down(2.0f64);
        assert_eq!(2.0f64.ordered_key() - below.ordered_key(), 1);
        // and keys order negatives correctly
        assert!((-1.0f64).ordered_key() < (-0.5f64).ordered_key());
        assert!((-0.5f64).ordered_key() < 0.5f64.ordered_key());
    }
}
