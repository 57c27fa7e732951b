//! Exact reference for the correctly rounded sqrt(a^2 + b^2).
//!
//! The radicand a^2 + b^2 is carried exactly as an arbitrary-precision
//! integer times a power of two, and the square root is rounded using the
//! integer square root plus its remainder as sticky information. No step
//! involves floating-point rounding, so the result is the round-to-nearest,
//! ties-to-even value by construction, with ties and exactness detected
//! rather than approximated.

use num_bigint::BigUint;
use thiserror::Error;

use crate::fp::BinaryFloat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle requires finite operands")]
    NonFinite,
}

/// A nonnegative real of the form mantissa * 2^exponent.
///
/// Canonical form: zero is (0, 0); any other value keeps an odd mantissa,
/// so equal values always have identical representations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactValue {
    mantissa: BigUint,
    exponent: i64,
}

impl ExactValue {
    pub fn zero() -> Self {
        ExactValue {
            mantissa: BigUint::ZERO,
            exponent: 0,
        }
    }

    fn normalized(mantissa: BigUint, exponent: i64) -> Self {
        if mantissa == BigUint::ZERO {
            return ExactValue::zero();
        }
        let shift = mantissa.trailing_zeros().unwrap_or(0);
        ExactValue {
            mantissa: mantissa >> shift,
            exponent: exponent + shift as i64,
        }
    }

    /// Build mantissa * 2^exponent directly (normalizing to canonical form).
    pub fn from_mantissa_exponent(mantissa: BigUint, exponent: i64) -> Self {
        ExactValue::normalized(mantissa, exponent)
    }

    /// Exact conversion from any finite float magnitude.
    pub fn from_float<T: BinaryFloat>(x: T) -> Result<Self, OracleError> {
        if !x.is_finite() {
            return Err(OracleError::NonFinite);
        }
        let (m, e) = x.decompose_magnitude();
        Ok(ExactValue::normalized(BigUint::from(m), e))
    }

    /// The mathematically exact a^2 + b^2; no rounding anywhere.
    pub fn sum_of_squares<T: BinaryFloat>(a: T, b: T) -> Result<Self, OracleError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(OracleError::NonFinite);
        }
        let (ma, ea) = a.decompose_magnitude();
        let (mb, eb) = b.decompose_magnitude();
        // each square fits in u128: mantissas are < 2^53
        let sq = |m: u64| BigUint::from((m as u128) * (m as u128));
        let (sa, sb) = (sq(ma), sq(mb));
        if ma == 0 {
            return Ok(ExactValue::normalized(sb, 2 * eb));
        }
        if mb == 0 {
            return Ok(ExactValue::normalized(sa, 2 * ea));
        }
        let (ea2, eb2) = (2 * ea, 2 * eb);
        let e = ea2.min(eb2);
        let sum = (sa << (ea2 - e) as u64) + (sb << (eb2 - e) as u64);
        Ok(ExactValue::normalized(sum, e))
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == BigUint::ZERO
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// Exact multiplication by 2^k.
    pub fn scale_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return ExactValue::zero();
        }
        ExactValue {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// Exact |self - other|.
    pub fn abs_diff(&self, other: &Self) -> Self {
        use std::cmp::Ordering;
        match self.cmp(other) {
            Ordering::Equal => ExactValue::zero(),
            Ordering::Greater => self.sub_smaller(other),
            Ordering::Less => other.sub_smaller(self),
        }
    }

    fn sub_smaller(&self, smaller: &Self) -> Self {
        if smaller.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(smaller.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &smaller.mantissa << (smaller.exponent - e) as u64;
        ExactValue::normalized(a - b, e)
    }
}

impl PartialOrd for ExactValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        // compare log2 brackets first to avoid giant shifts
        let top_a = self.mantissa.bits() as i64 + self.exponent;
        let top_b = other.mantissa.bits() as i64 + other.exponent;
        if top_a != top_b {
            return top_a.cmp(&top_b);
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &other.mantissa << (other.exponent - e) as u64;
        a.cmp(&b)
    }
}

/// How the rounded result relates to the exact real value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Exact,
    RoundedDown,
    RoundedUp,
}

/// Result of rounding an exact real to a float, with full disclosure of
/// what the rounding did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingVerdict<T: BinaryFloat> {
    pub result: T,
    pub direction: Direction,
    /// True when the exact value lay exactly halfway between two floats
    /// (the even one was chosen).
    pub is_tie: bool,
}

/// Round-to-nearest-even decision from the three exact pieces the integer
/// computation hands us: the floor significand, the dropped low bits versus
/// their halfway point, and a sticky flag for everything below them.
fn round_pieces(
    sig: BigUint,
    dropped: &BigUint,
    half: &BigUint,
    sticky: bool,
) -> (BigUint, Direction, bool) {
    use std::cmp::Ordering;
    match dropped.cmp(half) {
        Ordering::Less => {
            let exact = *dropped == BigUint::ZERO && !sticky;
            let dir = if exact { Direction::Exact } else { Direction::RoundedDown };
            (sig, dir, false)
        }
        Ordering::Greater => (sig + 1u8, Direction::RoundedUp, false),
        Ordering::Equal => {
            if sticky {
                (sig + 1u8, Direction::RoundedUp, false)
            } else if (&sig & BigUint::from(1u8)) == BigUint::ZERO {
                (sig, Direction::RoundedDown, true)
            } else {
                (sig + 1u8, Direction::RoundedUp, true)
            }
        }
    }
}

/// Assemble `sig * 2^u` into the float format, folding in the carry from
/// rounding and saturating to +infinity past f_max.
fn assemble<T: BinaryFloat>(
    mut sig: BigUint,
    mut u: i64,
    direction: Direction,
    is_tie: bool,
) -> RoundingVerdict<T> {
    let p = T::PRECISION_BITS as u64;
    if sig.bits() > p {
        // rounding carried into a new bit; the significand is now 2^p
        debug_assert_eq!(sig.trailing_zeros(), Some(p));
        sig >>= 1;
        u += 1;
    }
    if sig.bits() as i64 - 1 + u > T::MAX_FINITE_EXP {
        return RoundingVerdict {
            result: T::infinity(),
            direction: Direction::RoundedUp,
            is_tie,
        };
    }
    let n: u64 = u64::try_from(&sig).expect("significand fits in u64 after rounding");
    RoundingVerdict {
        result: T::from_parts(n, u),
        direction,
        is_tie,
    }
}

/// The float nearest to sqrt(v) under round-to-nearest-even, determined
/// exactly.
///
/// The value is scaled by an even power of two until the integer square
/// root carries at least precision+2 bits, the square root is taken with
/// its exact remainder, and the remainder serves as the sticky bit that
/// settles rounding and detects ties. Subnormal results fall on the
/// coarser grid at the bottom of the format automatically, because the
/// ulp exponent is clamped there before any bits are discarded.
pub fn correctly_rounded_sqrt<T: BinaryFloat>(v: &ExactValue) -> RoundingVerdict<T> {
    if v.is_zero() {
        return RoundingVerdict {
            result: T::zero(),
            direction: Direction::Exact,
            is_tie: false,
        };
    }
    let p = T::PRECISION_BITS as i64;

    // Scale mantissa so the exponent is even and the root is wide enough.
    let mut shift = (v.exponent() & 1) as u64;
    let needed = 2 * (p as u64 + 2) + 1;
    let have = v.mantissa().bits() + shift;
    if have < needed {
        shift += (needed - have).div_ceil(2) * 2;
    }
    let scaled = v.mantissa() << shift;
    let half_exp = (v.exponent() - shift as i64) / 2;

    let root = scaled.sqrt();
    let remainder = &scaled - &root * &root;
    debug_assert!(remainder <= &root + &root); // root^2 <= scaled < (root+1)^2

    // True sqrt lies in [root, root+1) * 2^half_exp, so its binary exponent
    // is exactly bits(root)-1 + half_exp.
    let root_bits = root.bits() as i64;
    let value_exp = half_exp + root_bits - 1;
    let ulp_exp = (value_exp - (p - 1)).max(T::MIN_ULP_EXP);
    let drop = (ulp_exp - half_exp) as u64;
    debug_assert!(drop >= 2);

    let sig = &root >> drop;
    let dropped = &root - (&sig << drop);
    let half = BigUint::from(1u8) << (drop - 1);
    let sticky = remainder != BigUint::ZERO;

    let (rounded, direction, is_tie) = round_pieces(sig, &dropped, &half, sticky);
    assemble::<T>(rounded, ulp_exp, direction, is_tie)
}

/// Round an exact value itself (no square root) to the nearest float.
pub fn round_to_nearest<T: BinaryFloat>(v: &ExactValue) -> RoundingVerdict<T> {
    if v.is_zero() {
        return RoundingVerdict {
            result: T::zero(),
            direction: Direction::Exact,
            is_tie: false,
        };
    }
    let p = T::PRECISION_BITS as i64;
    let value_exp = v.mantissa().bits() as i64 - 1 + v.exponent();
    let ulp_exp = (value_exp - (p - 1)).max(T::MIN_ULP_EXP);
    let drop = ulp_exp - v.exponent();
    if drop <= 0 {
        // value sits on the grid already (mantissa is odd, so drop < 0 only
        // happens when the value is exactly representable after shifting up)
        let sig = v.mantissa() << (-drop) as u64;
        return assemble::<T>(sig, ulp_exp, Direction::Exact, false);
    }
    let drop = drop as u64;
    let sig = v.mantissa() >> drop;
    let dropped = v.mantissa() - (&sig << drop);
    let half = BigUint::from(1u8) << (drop - 1);
    let (rounded, direction, is_tie) = round_pieces(sig, &dropped, &half, false);
    assemble::<T>(rounded, ulp_exp, direction, is_tie)
}

/// The unique correctly rounded sqrt(a^2 + b^2): ground truth for every
/// ulp measurement in the crate.
pub fn oracle_hypot<T: BinaryFloat>(a: T, b: T) -> Result<T, OracleError> {
    let v = ExactValue::sum_of_squares(a, b)?;
    Ok(correctly_rounded_sqrt::<T>(&v).result)
}

/// Full verdict variant of [`oracle_hypot`] for tests that need the
/// direction or tie flag.
pub fn oracle_hypot_verdict<T: BinaryFloat>(a: T, b: T) -> Result<RoundingVerdict<T>, OracleError> {
    let v = ExactValue::sum_of_squares(a, b)?;
    Ok(correctly_rounded_sqrt::<T>(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::{next_down, next_up};

    fn exact(m: u64, e: i64) -> ExactValue {
        ExactValue::normalized(BigUint::from(m), e)
    }

    #[test]
    fn sum_of_squares_small_integers() {
        let v = ExactValue::sum_of_squares(3.0f64, 4.0f64).unwrap();
        assert_eq!(v, exact(25, 0));
        let v = ExactValue::sum_of_squares(1.0f64, 1.0f64).unwrap();
        assert_eq!(v, exact(2, 0)); // canonical: mantissa 1, exponent 1
        assert_eq!(v.mantissa(), &BigUint::from(1u8));
        assert_eq!(v.exponent(), 1);
    }

    #[test]
    fn sum_of_squares_mixed_scale() {
        // (3/2)^2 + (2^-30)^2 = (9*2^58 + 1) * 2^-60, worked out by hand
        let v = ExactValue::sum_of_squares(1.5f64, 2f64.powi(-30)).unwrap();
        let expect = BigUint::from(9u64 * (1u64 << 58) + 1);
        assert_eq!(v.mantissa(), &expect);
        assert_eq!(v.exponent(), -60);
    }

    #[test]
    fn sum_of_squares_rejects_non_finite() {
        assert!(ExactValue::sum_of_squares(f64::INFINITY, 1.0).is_err());
        assert!(ExactValue::sum_of_squares(1.0, f64::NAN).is_err());
    }

    #[test]
    fn sqrt_exact_square() {
        let verdict = correctly_rounded_sqrt::<f64>(&exact(25, 0));
        assert_eq!(verdict.result, 5.0);
        assert_eq!(verdict.direction, Direction::Exact);
        assert!(!verdict.is_tie);
        let verdict = correctly_rounded_sqrt::<f64>(&ExactValue::zero());
        assert_eq!(verdict.result, 0.0);
        assert_eq!(verdict.direction, Direction::Exact);
    }

    #[test]
    fn sqrt_of_two_matches_float_sqrt() {
        let verdict = correctly_rounded_sqrt::<f64>(&exact(2, 0));
        assert_eq!(verdict.result, 2f64.sqrt()); // hardware sqrt is correctly rounded
        assert_ne!(verdict.direction, Direction::Exact);
        assert!(!verdict.is_tie);
        // the result's square must be closer to 2 than either neighbor's
        let r = verdict.result;
        let d = |x: f64| {
            ExactValue::sum_of_squares(x, 0.0)
                .unwrap()
                .abs_diff(&exact(2, 0))
        };
        assert!(d(r) <= d(next_up(r)));
        assert!(d(r) <= d(next_down(r)));
    }

    #[test]
    fn oracle_basics() {
        assert_eq!(oracle_hypot(3.0f64, 4.0f64).unwrap(), 5.0);
        assert_eq!(oracle_hypot(0.0f64, 0.0f64).unwrap(), 0.0);
        assert_eq!(oracle_hypot(f64::MAX, f64::MAX).unwrap(), f64::INFINITY);
        // perturbation below eps/4 cannot move the rounded value off 1.0
        assert_eq!(oracle_hypot(1.0f64, 2f64.powi(-27)).unwrap(), 1.0);
        assert_eq!(oracle_hypot(1.0f64, 2f64.powi(-60)).unwrap(), 1.0);
    }

    #[test]
    fn oracle_overflow_is_rounded_up() {
        let verdict = oracle_hypot_verdict(f64::MAX, f64::MAX).unwrap();
        assert_eq!(verdict.result, f64::INFINITY);
        assert_eq!(verdict.direction, Direction::RoundedUp);
    }

    #[test]
    fn oracle_handles_subnormals() {
        let tiny = f64::from_bits(1); // 2^-1074
        assert_eq!(oracle_hypot(tiny, 0.0).unwrap(), tiny);
        // sqrt(2) * 2^-1074 = 1.414... * 2^-1074 rounds to 2^-1074 on the
        // subnormal grid
        assert_eq!(oracle_hypot(tiny, tiny).unwrap(), tiny);
        // 2 * 2^-1074 hypot with itself: sqrt(8)*2^-1074 = 2.83*2^-1074 -> 3*2^-1074
        let two_tiny = f64::from_bits(2);
        assert_eq!(oracle_hypot(two_tiny, two_tiny).unwrap(), f64::from_bits(3));
    }

    #[test]
    fn round_to_nearest_basics() {
        // representable values come back exact
        for &x in &[1.0f64, 1.5, 3.0, f64::MIN_POSITIVE, f64::MAX] {
            let v = ExactValue::from_float(x).unwrap();
            let verdict = round_to_nearest::<f64>(&v);
            assert_eq!(verdict.result, x);
            assert_eq!(verdict.direction, Direction::Exact);
        }
        // 1 + eps/2 is a tie: rounds to even (1.0)
        let v = exact((1u64 << 53) + 1, -53);
        let verdict = round_to_nearest::<f64>(&v);
        assert_eq!(verdict.result, 1.0);
        assert!(verdict.is_tie);
        // 1 + 3*eps/2 is a tie rounding up to the even 1 + 2eps
        let v = exact((1u64 << 53) + 3, -53);
        let verdict = round_to_nearest::<f64>(&v);
        assert_eq!(verdict.result, 1.0 + 2.0 * f64::EPSILON);
        assert!(verdict.is_tie);
    }

    #[test]
    fn exact_value_ordering_and_diff() {
        let a = exact(25, 0);
        let b = exact(3, 3); // 24
        assert!(b < a);
        assert_eq!(a.abs_diff(&b), exact(1, 0));
        assert_eq!(b.abs_diff(&a), exact(1, 0));
        assert_eq!(a.abs_diff(&a), ExactValue::zero());
        // scale_pow2 shifts the exponent only
        assert_eq!(a.scale_pow2(-3), exact(25, -3));
        // huge exponent gaps still compare via the log2 bracket
        let big = exact(1, 4000);
        let small = exact((1 << 53) - 1, -4000);
        assert!(small < big);
    }

    #[test]
    fn binary32_oracle_works() {
        assert_eq!(oracle_hypot(3.0f32, 4.0f32).unwrap(), 5.0f32);
        assert_eq!(oracle_hypot(1.0f32, 1.0f32).unwrap(), 2f32.sqrt());
        assert_eq!(oracle_hypot(f32::MAX, f32::MAX).unwrap(), f32::INFINITY);
    }
}
