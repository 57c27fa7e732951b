//! Accuracy lab for `sqrt(a^2 + b^2)` in binary floating point.
//!
//! Six kernels — the rescaled textbook method, the long-lived C library
//! routine, naive unfused/fused evaluation, and two differential-correction
//! variants — are measured against an exact correctly-rounded oracle built
//! on arbitrary-precision integer arithmetic. Experiments tally how often
//! each kernel misses the correctly rounded value and by how many ulps,
//! over standard-normal pairs and over pairs with a controlled exponent gap.

pub mod experiments;
pub mod fp;
pub mod hexfloat;
pub mod kernels;
pub mod oracle;
pub mod sampling;
pub mod verify;

pub use fp::{format_for, next_down, next_up, ulp_distance, BinaryFloat, FormatTag, FpFormat};
pub use kernels::{
    clib_hypot, corrected_fused, corrected_unfused, dispatch, julia11, naive_fused,
    naive_unfused, prelude, AlgorithmId, Prelude,
};
pub use oracle::{
    correctly_rounded_sqrt, oracle_hypot, oracle_hypot_verdict, round_to_nearest, Direction,
    ExactValue, RoundingVerdict,
};
pub use sampling::{SamplerKind, SamplerSpec};
