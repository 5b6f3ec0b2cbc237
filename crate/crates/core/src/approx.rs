//! Logarithmic approximate divide and square root.
//!
//! Both ops treat a posit's significand 1+t as its own base-two logarithm
//! (log2(1+t) ~ t), do the arithmetic on scales and fractions alone, and
//! convert back, so no multiplier or divider array is involved.
//!
//! The raw log trick overshoots quotients one-sidedly by up to +12.5%.
//! The divide below therefore applies a parabolic correction on the way
//! back from the log domain, significand = 1 + t - (3/8)t(1-t), which
//! centres the error band to about +/-6.6% while keeping t = 0 a fixed
//! point: identical operands still divide to exactly one, and ratios of
//! powers of two stay exact. The square root's plain halving is already
//! one-sided below +6.1% and stays uncorrected.

use crate::posit::{round_pack, Posit16, Posit32, Posit8, Unpacked};

const FRAC: u64 = (1 << 63) - 1;

/// Divide in the log domain.
pub(crate) fn adiv_bits(a: Unpacked, b: Unpacked, n: u32) -> u32 {
    let nar = 1 << (n - 1);
    let (ra, rb) = match (a, b) {
        (Unpacked::NaR, _) | (_, Unpacked::NaR) => return nar,
        // Division by zero has no flag to raise; it answers NaR.
        (_, Unpacked::Zero) => return nar,
        (Unpacked::Zero, _) => return 0,
        (Unpacked::Finite(ra), Unpacked::Finite(rb)) => (ra, rb),
    };
    let ta = ra.frac & FRAC;
    let tb = rb.frac & FRAC;
    // Subtract the logs; borrow from the scale when the fraction goes
    // negative.
    let (mut t, scale) = if ta >= tb {
        (ta - tb, ra.scale - rb.scale)
    } else {
        (ta + (1 << 63) - tb, ra.scale - rb.scale - 1)
    };
    // Antilog with correction: 1 + t - (3/8)t(1-t), all in Q63. t(1-t)
    // peaks at 2^61, so tripling it stays inside u64.
    let tt = ((t as u128 * ((1u64 << 63) - t) as u128) >> 63) as u64;
    t -= (3 * tt) >> 3;
    let sig = (1 << 63) | t;
    round_pack(ra.neg != rb.neg, scale, (sig as u128) << 64, false, n)
}

/// Square root in the log domain: halve the scale, folding odd scales into
/// the fraction.
pub(crate) fn asqrt_bits(a: Unpacked, n: u32) -> u32 {
    let nar = 1 << (n - 1);
    let r = match a {
        Unpacked::NaR => return nar,
        Unpacked::Zero => return 0,
        Unpacked::Finite(r) => r,
    };
    if r.neg {
        return nar;
    }
    let t = r.frac & FRAC;
    let (scale, half_t, dropped) = if r.scale.rem_euclid(2) == 0 {
        // sqrt(2^s * (1+t)) ~ 2^(s/2) * (1 + t/2)
        (r.scale / 2, t >> 1, t & 1)
    } else {
        // Odd scale: shift one power of two into the significand first,
        // sqrt(2^(s-1) * 2 * (1+t)) ~ 2^((s-1)/2) * (1 + (1+t)/2).
        let folded = (1 << 63) | t;
        ((r.scale - 1) / 2, folded >> 1, folded & 1)
    };
    let sig = (1 << 63) | half_t;
    round_pack(false, scale, (sig as u128) << 64, dropped != 0, n)
}

macro_rules! approx_impl {
    ($name:ident, $uN:ty, $n:expr) => {
        impl $name {
            /// Approximate quotient `self / rhs` via log-domain subtract.
            /// NaR when either input is NaR or the divisor is zero.
            /// Relative error stays within a few percent; identical
            /// operands and power-of-two ratios are exact.
            pub fn adiv(self, rhs: Self) -> Self {
                Self(adiv_bits(self.unpack(), rhs.unpack(), $n) as $uN)
            }

            /// Approximate square root via log-domain halving. NaR for
            /// negative or NaR input; exact on even powers of two.
            pub fn asqrt(self) -> Self {
                Self(asqrt_bits(self.unpack(), $n) as $uN)
            }
        }
    };
}

approx_impl!(Posit8, u8, 8);
approx_impl!(Posit16, u16, 16);
approx_impl!(Posit32, u32, 32);
