//! Runtime property sweep: symmetry, scale covariance, ulp-error bounds,
//! wide-branch exactness, exception hygiene, and oracle self-checks.
//!
//! Every check is seeded and deterministic, takes the kernels it examines
//! as plain function pointers (so a faulty kernel can be injected in tests),
//! and reports the first offending pair in hex-float form for replay.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::fp::{next_down, next_up, ulp_distance, BinaryFloat};
use crate::hexfloat::format_hex;
use crate::kernels::{
    clib_hypot, corrected_fused, corrected_unfused, julia11, naive_fused, naive_unfused,
};
use crate::oracle::{oracle_hypot, oracle_hypot_verdict, Direction, ExactValue};

/// A failed property with a replayable description of the offending input.
#[derive(Debug, Clone)]
pub struct Violation {
    pub property: &'static str,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.property, self.detail)
    }
}

pub type Kernel64 = fn(f64, f64) -> f64;

/// A kernel with its documented worst-case distance from the oracle.
#[derive(Clone, Copy)]
pub struct KernelUnderTest {
    pub name: &'static str,
    pub kernel: Kernel64,
    pub max_ulp: u64,
    /// Whether the kernel evaluates representable sums of squares exactly.
    /// True for every kernel except the textbook one, whose b/a rescaling
    /// rounds even when the inputs form an exact triple.
    pub exact_on_triples: bool,
}

/// All six kernels with their documented error bounds.
pub fn default_kernel_set() -> Vec<KernelUnderTest> {
    vec![
        KernelUnderTest { name: "julia11", kernel: julia11, max_ulp: 2, exact_on_triples: false },
        KernelUnderTest { name: "clib", kernel: clib_hypot, max_ulp: 1, exact_on_triples: true },
        KernelUnderTest { name: "naive_unfused", kernel: naive_unfused, max_ulp: 1, exact_on_triples: true },
        KernelUnderTest { name: "naive_fused", kernel: naive_fused, max_ulp: 1, exact_on_triples: true },
        KernelUnderTest { name: "corrected_unfused", kernel: corrected_unfused, max_ulp: 1, exact_on_triples: true },
        KernelUnderTest { name: "corrected_fused", kernel: corrected_fused, max_ulp: 1, exact_on_triples: true },
    ]
}

/// The four kernels that share the ordering/wide-branch/rescaling prelude.
pub fn rescaling_kernels() -> Vec<(&'static str, Kernel64)> {
    vec![
        ("naive_unfused", naive_unfused as Kernel64),
        ("naive_fused", naive_fused),
        ("corrected_unfused", corrected_unfused),
        ("corrected_fused", corrected_fused),
    ]
}

fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Uniform significand in the binade [2^exp, 2^(exp+1)).
fn float_at(r: &mut ChaCha12Rng, exp: i64) -> f64 {
    f64::from_parts((r.next_u64() >> 12) | (1 << 52), exp - 52)
}

fn range(r: &mut ChaCha12Rng, lo: i64, hi: i64) -> i64 {
    lo + (r.next_u64() % (hi - lo + 1) as u64) as i64
}

fn signed(r: &mut ChaCha12Rng, x: f64) -> f64 {
    if r.next_u64() & 1 == 0 {
        x
    } else {
        -x
    }
}

fn pair_str(x: f64, y: f64) -> String {
    format!("x = {} ({}), y = {} ({})", x, format_hex(x), y, format_hex(y))
}

/// kernel(x, y) must be bit-identical under operand swap and sign flips.
pub fn check_symmetry(
    kernels: &[KernelUnderTest],
    samples: u64,
    seed: u64,
) -> Result<(), Violation> {
    let mut r = rng(seed);
    for _ in 0..samples {
        let ex = range(&mut r, -300, 300);
        let x_mag = float_at(&mut r, ex);
        let x = signed(&mut r, x_mag);
        let ey = range(&mut r, -300, 300);
        let y_mag = float_at(&mut r, ey);
        let y = signed(&mut r, y_mag);
        for k in kernels {
            let h = (k.kernel)(x, y).to_bits();
            for (hx, hy) in [(y, x), (-x, y), (x, -y)] {
                if (k.kernel)(hx, hy).to_bits() != h {
                    return Err(Violation {
                        property: "symmetry",
                        detail: format!("{} asymmetric at {}", k.name, pair_str(x, y)),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Scaling both operands by 2^k scales the result by exactly 2^k for the
/// four rescaling kernels, as long as everything stays normalized.
pub fn check_scale_covariance(samples: u64, seed: u64) -> Result<(), Violation> {
    let mut r = rng(seed);
    for _ in 0..samples {
        let gap = range(&mut r, 0, 30);
        let a = float_at(&mut r, gap);
        let b = float_at(&mut r, 0);
        let k = range(&mut r, -1000, 990 - gap);
        let scale = f64::pow2(k);
        for (name, kernel) in rescaling_kernels() {
            let direct = kernel(a * scale, b * scale);
            let scaled = kernel(a, b) * scale;
            if direct.to_bits() != scaled.to_bits() {
                return Err(Violation {
                    property: "scale covariance",
                    detail: format!(
                        "{name} breaks power-of-two covariance at {} with k = {k}",
                        pair_str(a, b)
                    ),
                });
            }
        }
    }
    Ok(())
}

/// Every kernel stays within its documented ulp bound across exponent gaps
/// 0..=30 and near-overflow / near-underflow magnitudes.
pub fn check_ulp_bounds(
    kernels: &[KernelUnderTest],
    samples: u64,
    seed: u64,
) -> Result<(), Violation> {
    let mut r = rng(seed);
    for i in 0..samples {
        let gap = range(&mut r, 0, 30);
        let shift = match i % 3 {
            0 => range(&mut r, -60, 60),
            1 => 1019 - gap, // push the larger operand near the top
            _ => -1020,      // push the smaller operand near the bottom
        };
        let a_mag = float_at(&mut r, gap + shift);
        let a = signed(&mut r, a_mag);
        let b_mag = float_at(&mut r, shift);
        let b = signed(&mut r, b_mag);
        let reference = oracle_hypot(a, b).expect("finite sweep operands");
        for k in kernels {
            let h = (k.kernel)(a, b);
            let d = match ulp_distance(h, reference) {
                Ok(d) => d.unsigned_abs(),
                Err(_) => u128::MAX,
            };
            if d > u128::from(k.max_ulp) {
                return Err(Violation {
                    property: "one-ulp bound",
                    detail: format!(
                        "{} is {d} ulps from the oracle (bound {}) at {}",
                        k.name,
                        k.max_ulp,
                        pair_str(a, b)
                    ),
                });
            }
        }
    }
    Ok(())
}

/// Whenever the smaller operand falls under the wide-operand threshold, the
/// rescaling kernels return the larger operand bit-exactly, and that operand
/// is the correctly rounded hypotenuse.
pub fn check_wide_branch(samples: u64, seed: u64) -> Result<(), Violation> {
    let fmt = f64::format();
    let mut r = rng(seed);
    for i in 0..samples {
        let exp = range(&mut r, -300, 300);
        let ax = float_at(&mut r, exp);
        let limit = ax * fmt.wide_threshold;
        let ay = match i % 16 {
            0 => 0.0,
            1 => limit, // the boundary itself
            _ => {
                let u = (r.next_u64() >> 11) as f64 * 2f64.powi(-53);
                limit * u // rounding is monotone, so this stays <= limit
            }
        };
        debug_assert!(ay <= limit);
        let reference = oracle_hypot(ax, ay).expect("finite operands");
        if reference.to_bits() != ax.to_bits() {
            return Err(Violation {
                property: "wide-branch exactness",
                detail: format!("oracle disagrees with ax at {}", pair_str(ax, ay)),
            });
        }
        for (name, kernel) in rescaling_kernels() {
            if kernel(ax, ay).to_bits() != ax.to_bits() {
                return Err(Violation {
                    property: "wide-branch exactness",
                    detail: format!("{name} did not return ax at {}", pair_str(ax, ay)),
                });
            }
        }
    }
    Ok(())
}

/// With the larger operand at most f_max/2 and the smaller at least f_min,
/// no kernel may overflow to infinity or collapse to zero.
pub fn check_no_spurious_exceptions(
    kernels: &[KernelUnderTest],
    samples: u64,
    seed: u64,
) -> Result<(), Violation> {
    let mut r = rng(seed);
    for _ in 0..samples {
        let ea = range(&mut r, -1021, 1021);
        let eb = range(&mut r, -1021, ea);
        let a_mag = float_at(&mut r, ea);
        let a = signed(&mut r, a_mag);
        let b_mag = float_at(&mut r, eb);
        let b = signed(&mut r, b_mag);
        for k in kernels {
            let h = (k.kernel)(a, b);
            if !h.is_finite() || h == 0.0 {
                return Err(Violation {
                    property: "no spurious exceptions",
                    detail: format!("{} returned {h} at {}", k.name, pair_str(a, b)),
                });
            }
        }
    }
    Ok(())
}

/// The plainly evaluated z = a*a + b*b satisfies |z - (a^2+b^2)| <= eps * z,
/// verified in exact integer arithmetic.
pub fn check_naive_sum_bound(samples: u64, seed: u64) -> Result<(), Violation> {
    let mut r = rng(seed);
    for _ in 0..samples {
        let ea = range(&mut r, -300, 300);
        let a = float_at(&mut r, ea);
        let eb = range(&mut r, -300, 300);
        let b = float_at(&mut r, eb);
        let z = a * a + b * b;
        let z_exact = ExactValue::from_float(z).expect("z is finite");
        let truth = ExactValue::sum_of_squares(a, b).expect("finite operands");
        let diff = z_exact.abs_diff(&truth);
        let bound = z_exact.scale_pow2(-52); // eps * z, exactly
        if diff > bound {
            return Err(Violation {
                property: "naive sum bound",
                detail: format!("|z - (a^2+b^2)| > eps*z at {}", pair_str(a, b)),
            });
        }
    }
    Ok(())
}

/// The oracle result's square is at least as close to the exact radicand as
/// either neighbor's square; equality may only appear on a reported tie
/// resolved to an even significand.
pub fn check_oracle_neighbors<T: BinaryFloat>(samples: u64, seed: u64) -> Result<(), Violation> {
    let mut r = rng(seed);
    let frac_bits = T::PRECISION_BITS - 1;
    for _ in 0..samples {
        let exp_a = range(&mut r, T::MIN_NORMAL_EXP, T::MAX_FINITE_EXP - 2);
        let exp_b = range(&mut r, T::MIN_NORMAL_EXP, T::MAX_FINITE_EXP - 2);
        let a = T::from_parts((r.next_u64() >> (64 - frac_bits)) | (1 << frac_bits), exp_a - frac_bits as i64);
        let b = T::from_parts((r.next_u64() >> (64 - frac_bits)) | (1 << frac_bits), exp_b - frac_bits as i64);
        let verdict = oracle_hypot_verdict(a, b).expect("finite operands");
        let result = verdict.result;
        if !result.is_finite() {
            continue; // genuine overflow; neighbors are not representable
        }
        let radicand = ExactValue::sum_of_squares(a, b).unwrap();
        let dist = |x: T| {
            ExactValue::sum_of_squares(x, T::zero())
                .unwrap()
                .abs_diff(&radicand)
        };
        let here = dist(result);
        for neighbor in [next_up(result), next_down(result)] {
            if !neighbor.is_finite() {
                continue;
            }
            if here > dist(neighbor) {
                let even = result.decompose_magnitude().0 & 1 == 0;
                if verdict.is_tie && even {
                    continue; // ties go to the even significand by design
                }
                return Err(Violation {
                    property: "oracle squared-neighbor optimality",
                    detail: format!(
                        "neighbor {} is closer than oracle {} for inputs ({}, {})",
                        format_hex(neighbor),
                        format_hex(result),
                        format_hex(a),
                        format_hex(b)
                    ),
                });
            }
        }
    }
    Ok(())
}

/// Deterministic stream of Pythagorean triples (p, q, r), r < 2^26, scaled
/// by a random power of two.
fn scaled_triples(count: u64, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count as usize);
    while out.len() < count as usize {
        let m = range(&mut r, 2, 5791) as u64;
        let n = range(&mut r, 1, m as i64 - 1) as u64;
        if (m - n).is_multiple_of(2) || gcd(m, n) != 1 {
            continue;
        }
        let (p, q, h) = (m * m - n * n, 2 * m * n, m * m + n * n);
        debug_assert!(h < 1 << 26);
        let k = range(&mut r, -500, 500);
        let scale = f64::pow2(k);
        out.push((p as f64 * scale, q as f64 * scale, h as f64 * scale));
    }
    out
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The oracle reports direction = exact precisely on exact Pythagorean
/// relations.
pub fn check_triples_oracle(count: u64, seed: u64) -> Result<(), Violation> {
    for (p, q, h) in scaled_triples(count, seed) {
        let verdict = oracle_hypot_verdict(p, q).expect("finite triple");
        if verdict.result != h || verdict.direction != Direction::Exact {
            return Err(Violation {
                property: "oracle triple exactness",
                detail: format!(
                    "expected exact {} for ({}, {}), got {} ({:?})",
                    format_hex(h),
                    format_hex(p),
                    format_hex(q),
                    format_hex(verdict.result),
                    verdict.direction
                ),
            });
        }
    }
    Ok(())
}

/// Kernels that evaluate the sum of squares exactly must reproduce scaled
/// Pythagorean triples bit for bit; the rest stay inside their ulp bound.
pub fn check_triples_kernels(
    kernels: &[KernelUnderTest],
    count: u64,
    seed: u64,
) -> Result<(), Violation> {
    for (p, q, h) in scaled_triples(count, seed) {
        for k in kernels {
            let got = (k.kernel)(p, q);
            let ok = if k.exact_on_triples {
                got == h
            } else {
                ulp_distance(got, h).is_ok_and(|d| d.unsigned_abs() <= u128::from(k.max_ulp))
            };
            if !ok {
                return Err(Violation {
                    property: "exact-triple fidelity",
                    detail: format!(
                        "{} returned {} instead of {} for ({}, {})",
                        k.name,
                        format_hex(got),
                        format_hex(h),
                        format_hex(p),
                        format_hex(q)
                    ),
                });
            }
        }
    }
    Ok(())
}

pub struct PropertyReport {
    pub name: &'static str,
    pub outcome: Result<(), Violation>,
}

/// The full sweep at a given sample budget. Deterministic in (samples, seed).
pub fn run_all(samples: u64, seed: u64) -> Vec<PropertyReport> {
    let kernels = default_kernel_set();
    let triples = 500.min(samples);
    vec![
        PropertyReport {
            name: "symmetry",
            outcome: check_symmetry(&kernels, samples, seed),
        },
        PropertyReport {
            name: "scale covariance",
            outcome: check_scale_covariance(samples, seed ^ 0x1),
        },
        PropertyReport {
            name: "one-ulp bound",
            outcome: check_ulp_bounds(&kernels, samples, seed ^ 0x2),
        },
        PropertyReport {
            name: "wide-branch exactness",
            outcome: check_wide_branch(samples, seed ^ 0x3),
        },
        PropertyReport {
            name: "no spurious exceptions",
            outcome: check_no_spurious_exceptions(&kernels, samples, seed ^ 0x4),
        },
        PropertyReport {
            name: "naive sum bound",
            outcome: check_naive_sum_bound(samples, seed ^ 0x5),
        },
        PropertyReport {
            name: "oracle squared-neighbor optimality (binary64)",
            outcome: check_oracle_neighbors::<f64>(samples, seed ^ 0x6),
        },
        PropertyReport {
            name: "oracle squared-neighbor optimality (binary32)",
            outcome: check_oracle_neighbors::<f32>(samples, seed ^ 0x7),
        },
        PropertyReport {
            name: "oracle triple exactness",
            outcome: check_triples_oracle(triples, seed ^ 0x8),
        },
        PropertyReport {
            name: "exact-triple fidelity",
            outcome: check_triples_kernels(&kernels, triples, seed ^ 0x9),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_passes_at_small_scale() {
        for report in run_all(2_000, 0xB0C4E5) {
            assert!(
                report.outcome.is_ok(),
                "{}: {}",
                report.name,
                report.outcome.unwrap_err()
            );
        }
    }

    #[test]
    fn injected_asymmetric_kernel_is_caught_and_named() {
        fn lopsided(x: f64, y: f64) -> f64 {
            if x.abs() < y.abs() {
                naive_fused(x, y)
            } else {
                naive_unfused(x, y)
            }
        }
        let set = [KernelUnderTest { name: "lopsided", kernel: lopsided, max_ulp: 1, exact_on_triples: true }];
        let violation = check_symmetry(&set, 50_000, 7).unwrap_err();
        assert_eq!(violation.property, "symmetry");
        assert!(violation.detail.contains("lopsided"));
    }

    #[test]
    fn injected_biased_kernel_breaks_the_ulp_bound() {
        fn biased(x: f64, y: f64) -> f64 {
            let h = corrected_fused(x, y);
            next_up(next_up(h))
        }
        let set = [KernelUnderTest { name: "biased", kernel: biased, max_ulp: 1, exact_on_triples: true }];
        let violation = check_ulp_bounds(&set, 1_000, 7).unwrap_err();
        assert_eq!(violation.property, "one-ulp bound");
        assert!(violation.detail.contains("biased"));
    }

    #[test]
    fn injected_flushing_kernel_trips_exception_check() {
        fn flushy(x: f64, y: f64) -> f64 {
            let h = naive_fused(x, y);
            if h < 1e-280 {
                0.0
            } else {
                h
            }
        }
        let set = [KernelUnderTest { name: "flushy", kernel: flushy, max_ulp: 1, exact_on_triples: true }];
        let violation = check_no_spurious_exceptions(&set, 20_000, 7).unwrap_err();
        assert_eq!(violation.property, "no spurious exceptions");
    }

    #[test]
    fn triple_generator_yields_exact_triples() {
        for (p, q, h) in scaled_triples(200, 3) {
            // the relation must hold exactly in the reals
            let v = ExactValue::sum_of_squares(p, q).unwrap();
            let hh = ExactValue::sum_of_squares(h, 0.0).unwrap();
            assert_eq!(v, hh);
        }
    }
}
