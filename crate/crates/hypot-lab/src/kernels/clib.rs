//! Port of the hypot routine that has shipped with the standard C math
//! library since the early nineties, kept faithful to the original down to
//! its high-word thresholds and scaling constants (including the overly
//! broad wide-operand cutoff). binary64 only: the code manipulates the
//! 64-bit word layout directly.

/* origin: FreeBSD /usr/src/lib/msun/src/e_hypot.c */
/*
 * ====================================================
 * Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
 *
 * Developed at SunSoft, a Sun Microsystems, Inc. business.
 * Permission to use, copy, modify, and distribute this
 * software is freely granted, provided that this notice
 * is preserved.
 * ====================================================
 */

#[inline]
fn high_word(x: f64) -> i32 {
    (x.to_bits() >> 32) as i32
}

#[inline]
fn low_word(x: f64) -> u32 {
    x.to_bits() as u32
}

#[inline]
fn set_high_word(x: f64, hi: i32) -> f64 {
    f64::from_bits(((hi as u32 as u64) << 32) | (x.to_bits() & 0xffff_ffff))
}

/// A double with the given high word and an all-zero low word.
#[inline]
fn from_high_word(hi: i32) -> f64 {
    f64::from_bits((hi as u32 as u64) << 32)
}

pub fn clib_hypot(x: f64, y: f64) -> f64 {
    let mut ha = high_word(x) & 0x7fffffff;
    let mut hb = high_word(y) & 0x7fffffff;
    let (mut a, mut b);
    if hb > ha {
        a = y;
        b = x;
        std::mem::swap(&mut ha, &mut hb);
    } else {
        a = x;
        b = y;
    }
    a = a.abs();
    b = b.abs();
    if ha - hb > 0x3c00000 {
        return a + b; /* x/y > 2**60 */
    }
    let mut k: i32 = 0;
    if ha > 0x5f300000 {
        /* a > 2**500 */
        if ha >= 0x7ff00000 {
            /* Inf or NaN; use original arg order iff result is NaN, quieten sNaNs */
            let mut w = (x + 0.0).abs() - (y + 0.0).abs();
            if (ha as u32 & 0xfffff) | low_word(a) == 0 {
                w = a;
            }
            if ((hb ^ 0x7ff00000) as u32) | low_word(b) == 0 {
                w = b;
            }
            return w;
        }
        /* scale a and b by 2**-600 */
        ha -= 0x25800000;
        hb -= 0x25800000;
        k += 600;
        a = set_high_word(a, ha);
        b = set_high_word(b, hb);
    }
    if hb < 0x20b00000 {
        /* b < 2**-500 */
        if hb <= 0x000fffff {
            /* subnormal b, or 0 */
            if (hb as u32) | low_word(b) == 0 {
                return a;
            }
            let t1 = from_high_word(0x7fd00000); /* t1 = 2^1022 */
            b *= t1;
            a *= t1;
            k -= 1022;
        } else {
            /* scale a and b by 2^600 */
            ha += 0x25800000; /* a *= 2^600 */
            hb += 0x25800000; /* b *= 2^600 */
            k -= 600;
            a = set_high_word(a, ha);
            b = set_high_word(b, hb);
        }
    }
    /* medium size a and b */
    let mut w = a - b;
    if w > b {
        let t1 = from_high_word(ha);
        let t2 = a - t1;
        w = (t1 * t1 - (b * (-b) - t2 * (a + t1))).sqrt();
    } else {
        a = a + a;
        let y1 = from_high_word(hb);
        let y2 = b - y1;
        let t1 = from_high_word(ha + 0x00100000);
        let t2 = a - t1;
        w = (t1 * y1 - (w * (-w) - (t1 * y2 + t2 * b))).sqrt();
    }
    if k != 0 {
        let t1 = set_high_word(1.0, high_word(1.0) + (k << 20));
        t1 * w
    } else {
        w
    }
}
