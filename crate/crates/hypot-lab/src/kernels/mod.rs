//! The six sqrt(a^2+b^2) kernels under test.
//!
//! Five are generic over the binary format; the C-library port is hard-wired
//! to binary64 word layout and lives in [`clib`].

mod clib;

pub use clib::clib_hypot;

use std::fmt;

use crate::fp::{BinaryFloat, FormatTag, FpError};

/// Identifies one of the six kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlgorithmId {
    Julia11,
    Clib,
    NaiveUnfused,
    NaiveFused,
    CorrectedUnfused,
    CorrectedFused,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 6] = [
        AlgorithmId::Julia11,
        AlgorithmId::Clib,
        AlgorithmId::NaiveUnfused,
        AlgorithmId::NaiveFused,
        AlgorithmId::CorrectedUnfused,
        AlgorithmId::CorrectedFused,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            AlgorithmId::Julia11 => "julia11",
            AlgorithmId::Clib => "clib",
            AlgorithmId::NaiveUnfused => "naive_unfused",
            AlgorithmId::NaiveFused => "naive_fused",
            AlgorithmId::CorrectedUnfused => "corrected_unfused",
            AlgorithmId::CorrectedFused => "corrected_fused",
        }
    }

    /// The C-library port manipulates the binary64 word layout directly.
    pub fn requires_binary64(self) -> bool {
        matches!(self, AlgorithmId::Clib)
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for AlgorithmId {
    type Err = FpError;

    fn from_str(s: &str) -> Result<Self, FpError> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| FpError::UnsupportedFormat(s.to_string()))
    }
}

/// Outcome of the shared initialization: either the answer is already known
/// (special values, zero, widely separated operands) or the ordered and
/// possibly rescaled operands proceed to the main computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prelude<T> {
    Early(T),
    Proceed { ax: T, ay: T, scale: T },
}

/// Order, screen, and rescale the operands.
///
/// Infinities win over NaN, NaN wins over everything else. After ordering
/// |x| >= |y|, the smaller operand is dropped entirely when it cannot affect
/// the rounded result (this also swallows zeros). Otherwise both operands
/// are moved by an exact power of two into the range where their squares
/// neither overflow nor denormalize, and `scale` undoes the move at the end.
pub fn prelude<T: BinaryFloat>(x: T, y: T) -> Prelude<T> {
    if x.is_infinite() || y.is_infinite() {
        return Prelude::Early(T::infinity());
    }
    if x.is_nan() || y.is_nan() {
        return Prelude::Early(T::nan());
    }

    let (mut ax, mut ay) = (x.abs(), y.abs());
    if ay > ax {
        std::mem::swap(&mut ax, &mut ay);
    }

    let fmt = T::format();
    // widely varying operands (also catches ay == 0)
    if ay <= ax * fmt.wide_threshold {
        return Prelude::Early(ax);
    }

    let mut scale = fmt.rescale;
    if ax > fmt.overflow_guard {
        ax = ax * scale;
        ay = ay * scale;
        scale = scale.recip();
    } else if ay < fmt.underflow_guard {
        ax = ax / scale;
        ay = ay / scale;
    } else {
        scale = T::one();
    }
    Prelude::Proceed { ax, ay, scale }
}

/// The widely known stable textbook formulation: divide through by the
/// larger operand before squaring. Rescales even when nothing would have
/// overflowed, which costs accuracy.
pub fn julia11<T: BinaryFloat>(x: T, y: T) -> T {
    if x.is_infinite() || y.is_infinite() {
        return T::infinity();
    }
    if x.is_nan() || y.is_nan() {
        return T::nan();
    }
    let (mut a, mut b) = (x.abs(), y.abs());
    if b > a {
        std::mem::swap(&mut a, &mut b);
    }
    if a == T::zero() {
        return T::zero();
    }
    let r = b / a;
    a * (T::one() + r * r).sqrt()
}

/// Direct evaluation of sqrt(ax*ax + ay*ay) with every product rounded.
pub fn naive_unfused<T: BinaryFloat>(x: T, y: T) -> T {
    match prelude(x, y) {
        Prelude::Early(v) => v,
        Prelude::Proceed { ax, ay, scale } => (ax * ax + ay * ay).sqrt() * scale,
    }
}

/// Same as [`naive_unfused`] but the sum of squares takes a single rounding
/// through a fused multiply-add.
pub fn naive_fused<T: BinaryFloat>(x: T, y: T) -> T {
    match prelude(x, y) {
        Prelude::Early(v) => v,
        Prelude::Proceed { ax, ay, scale } => ax.mul_add(ax, ay * ay).sqrt() * scale,
    }
}

/// Differential correction without fused operations: recover the residual
/// x = h^2 - ax^2 - ay^2 by a carefully arranged two-branch formula, then
/// move h by the first-order step x/(2h).
pub fn corrected_unfused<T: BinaryFloat>(x: T, y: T) -> T {
    match prelude(x, y) {
        Prelude::Early(v) => v,
        Prelude::Proceed { ax, ay, scale } => {
            let two = T::two();
            let four = two + two;
            let mut h = (ax * ax + ay * ay).sqrt();
            if h <= two * ay {
                let delta = h - ay;
                let x = ax * (two * delta - ax) + (delta - two * (ax - ay)) * delta;
                h = h - x / (two * h);
            } else {
                let delta = h - ax;
                let x = two * delta * (ax - two * ay) + (four * delta - ay) * ay + delta * delta;
                h = h - x / (two * h);
            }
            h * scale
        }
    }
}

/// The single-branch correction variant; good over the full range but a
/// little weaker than the two-branch split. Kept for comparison in tests.
#[allow(dead_code)]
fn corrected_unfused_single_branch<T: BinaryFloat>(x: T, y: T) -> T {
    match prelude(x, y) {
        Prelude::Early(v) => v,
        Prelude::Proceed { ax, ay, scale } => {
            let two = T::two();
            let mut h = (ax * ax + ay * ay).sqrt();
            let delta = h - ax;
            h = h - (delta * (two * (ax - ay)) + (two * delta - ay) * ay + delta * delta) / (two * h);
            h * scale
        }
    }
}

/// Differential correction with fused multiply-adds: each square's rounding
/// error is recovered exactly, so the residual x is essentially exact and
/// the corrected result lands on the correctly rounded value.
pub fn corrected_fused<T: BinaryFloat>(x: T, y: T) -> T {
    match prelude(x, y) {
        Prelude::Early(v) => v,
        Prelude::Proceed { ax, ay, scale } => {
            let two = T::two();
            let h = ax.mul_add(ax, ay * ay).sqrt();
            let h_sq = h * h;
            let ax_sq = ax * ax;
            let x = (-ay).mul_add(ay, h_sq - ax_sq) + h.mul_add(h, -h_sq) - ax.mul_add(ax, -ax_sq);
            (h - x / (two * h)) * scale
        }
    }
}

/// Route to a kernel through one uniform signature.
///
/// The C-library kernel only exists for binary64; callers must screen that
/// combination out (as the experiment runner does) before dispatching.
pub fn dispatch<T: BinaryFloat>(id: AlgorithmId, x: T, y: T) -> T {
    match id {
        AlgorithmId::Julia11 => julia11(x, y),
        AlgorithmId::Clib => {
            assert!(
                T::TAG == FormatTag::Binary64,
                "clib kernel is defined for binary64 only"
            );
            // identity bit transform: T is f64 here
            T::from_bits_u64(
                clib_hypot(
                    f64::from_bits(x.to_bits_u64()),
                    f64::from_bits(y.to_bits_u64()),
                )
                .to_bits(),
            )
        }
        AlgorithmId::NaiveUnfused => naive_unfused(x, y),
        AlgorithmId::NaiveFused => naive_fused(x, y),
        AlgorithmId::CorrectedUnfused => corrected_unfused(x, y),
        AlgorithmId::CorrectedFused => corrected_fused(x, y),
    }
}
