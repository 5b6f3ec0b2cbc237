//! Posit arithmetic for widths 8, 16 and 32, all with two exponent bits.
//!
//! A posit packs sign, a run-length coded regime, up to two exponent bits and
//! a fraction into one machine word. The only special patterns are zero
//! (all bits clear) and NaR (sign bit alone). Everything else is a finite
//! nonzero real, and negative patterns are the two's complement of their
//! positive counterpart.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

/// Exponent field width. Fixed for every supported posit size.
pub const ES: u32 = 2;

/// A finite nonzero posit magnitude in unpacked form: `significand / 2^63 *
/// 2^scale`, with the hidden bit at position 63. `scale` already folds the
/// regime and exponent together (`4 * regime + exponent`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Real {
    pub neg: bool,
    pub scale: i32,
    pub frac: u64,
}

/// Decoded form of a pattern: the two specials, or an unpacked real.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Unpacked {
    Zero,
    NaR,
    Finite(Real),
}

/// Raw field split of a nonzero, non-NaR pattern, taken directly from the
/// stored bits without negating first. For negative patterns the fields
/// follow the direct decoding convention, where the value is
/// `((1 - 3s) + F/2^m) * 2^((1 - 2s)(4r + e + s))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositFields {
    /// Sign bit.
    pub sign: bool,
    /// Length of the leading run of identical regime bits.
    pub regime_run: u32,
    /// Regime value r: `-k` for a run of zeros, `k - 1` for a run of ones.
    pub regime: i32,
    /// Exponent bits, high-aligned when truncated (0..=3).
    pub exponent: u32,
    /// Fraction bits, right-aligned.
    pub fraction: u32,
    /// Number of fraction bits present.
    pub fraction_len: u32,
}

#[inline]
fn mask(n: u32) -> u32 {
    (!0u32).wrapping_shr(32 - n)
}

/// Largest finite scale at width `n`: maxpos = 2^(4(n-2)).
#[inline]
pub(crate) fn max_scale(n: u32) -> i32 {
    (4 * (n - 2)) as i32
}

/// Splits the raw fields of a pattern. The caller guarantees `bits` is
/// neither zero nor NaR at width `n`.
pub(crate) fn split_fields(bits: u32, n: u32) -> PositFields {
    let sign = (bits >> (n - 1)) & 1 == 1;
    // Left-align the bits after the sign so leading_zeros counts the run.
    // The shifted-in zeros can never extend a run past its true length:
    // a one-run is stopped by the zero padding itself, and a zero-run that
    // reached the padding would mean an all-zero body, which only the two
    // special patterns have.
    let rest = (bits << (32 - n + 1)) as u32;
    let r0 = rest >> 31;
    let run = if r0 == 1 {
        (!rest).leading_zeros()
    } else {
        rest.leading_zeros()
    };
    let regime = if r0 == 0 {
        -(run as i32)
    } else {
        run as i32 - 1
    };
    // Bits left after the regime and its terminator, if the terminator fits.
    let rem = (n - 1).saturating_sub(run + 1);
    let es_here = rem.min(ES);
    let tail = if rem == 0 { 0 } else { rest << (run + 1) };
    // A truncated exponent field keeps its high bits.
    let exponent = if es_here == 0 { 0 } else { (tail >> (32 - es_here)) << (ES - es_here) };
    let m = rem - es_here;
    let fraction = if m == 0 { 0 } else { (tail << es_here) >> (32 - m) };
    PositFields {
        sign,
        regime_run: run,
        regime,
        exponent,
        fraction,
        fraction_len: m,
    }
}

/// Decodes a pattern at width `n` into sign, scale and significand.
pub(crate) fn unpack(bits: u32, n: u32) -> Unpacked {
    let bits = bits & mask(n);
    if bits == 0 {
        return Unpacked::Zero;
    }
    if bits == 1 << (n - 1) {
        return Unpacked::NaR;
    }
    let neg = (bits >> (n - 1)) & 1 == 1;
    // Negate negative patterns so the field split below always sees the
    // magnitude encoding.
    let mag = if neg { bits.wrapping_neg() & mask(n) } else { bits };
    let f = split_fields(mag, n);
    let scale = 4 * f.regime + f.exponent as i32;
    let frac = (1u64 << 63) | ((f.fraction as u64) << (63 - f.fraction_len));
    Unpacked::Finite(Real { neg, scale, frac })
}

/// Rounds a real to the nearest pattern at width `n` and packs it.
///
/// `sig` is the significand with the hidden bit at position 127; `sticky`
/// is the OR of every discarded bit below it. Rounding is to nearest with
/// ties to even in pattern space, and the result saturates at the largest
/// and smallest nonzero magnitudes: no finite nonzero input ever rounds to
/// zero or to NaR.
pub(crate) fn round_pack(neg: bool, scale: i32, sig: u128, sticky: bool, n: u32) -> u32 {
    debug_assert!(sig >> 127 == 1, "significand must be normalized");
    let smax = max_scale(n);
    let body = if scale > smax {
        mask(n - 1)
    } else if scale < -smax {
        1
    } else {
        let r = scale >> 2;
        let e = (scale & 3) as u64;
        // Conceptual bit stream after the sign: the regime run, its
        // terminator, two exponent bits, then the fraction. Assemble the
        // head in a u64 (at most 31 + 3 bits) and let the fraction follow.
        let (head, head_len) = if r >= 0 {
            let run = r as u32 + 1;
            (((((1u64 << run) - 1) << 1) << 2) | e, run + 3)
        } else {
            let run = (-r) as u32;
            ((1 << 2) | e, run + 3)
        };
        let frac_tail = sig << 1; // drop the hidden bit
        let stream = ((head as u128) << (128 - head_len)) | (frac_tail >> head_len);
        let lost = frac_tail & ((1u128 << head_len) - 1);
        let body = (stream >> (128 - (n - 1))) as u32;
        let guard = (stream >> (128 - n)) & 1;
        let rest = (stream << n) != 0 || lost != 0 || sticky;
        let mut body = body;
        if guard == 1 && (rest || body & 1 == 1) {
            // The regime saturation above keeps an all-ones body out of
            // this branch, so the increment cannot carry into the sign.
            body += 1;
        }
        body
    };
    if neg {
        body.wrapping_neg() & mask(n)
    } else {
        body
    }
}

/// Exact sum of two unpacked reals, rounded and packed at width `n`.
///
/// Bits an extreme scale difference pushes below the 128-bit window fold
/// into the sticky OR; they can never reach the guard bit, so the packed
/// result is still correctly rounded. Exact cancellation returns the zero
/// pattern.
pub(crate) fn add_real(a: Real, b: Real, n: u32) -> u32 {
    if a.neg != b.neg && a.scale == b.scale && a.frac == b.frac {
        return 0;
    }
    // Order by magnitude so the subtraction below cannot go negative.
    let (hi, lo) = if (a.scale, a.frac) >= (b.scale, b.frac) {
        (a, b)
    } else {
        (b, a)
    };
    let diff = (hi.scale - lo.scale) as u32;
    let hi_sig = (hi.frac as u128) << 64;
    let mut scale = hi.scale;
    let mut sticky = false;
    let (lo_sig, lo_lost) = if diff <= 64 {
        ((lo.frac as u128) << (64 - diff), false)
    } else if diff <= 127 {
        (
            (lo.frac as u128) >> (diff - 64),
            lo.frac & ((1u64 << (diff - 64)) - 1) != 0,
        )
    } else {
        (0, true)
    };
    let mut sig;
    if hi.neg == lo.neg {
        let (sum, carry) = hi_sig.overflowing_add(lo_sig);
        if carry {
            sticky |= sum & 1 != 0 || lo_lost;
            sig = (1u128 << 127) | (sum >> 1);
            scale += 1;
        } else {
            sticky |= lo_lost;
            sig = sum;
        }
    } else {
        sig = hi_sig - lo_sig;
        if lo_lost {
            // The true remainder sits strictly between sig - 1 and sig.
            sig -= 1;
            sticky = true;
        }
        let lz = sig.leading_zeros();
        sig <<= lz;
        scale -= lz as i32;
    }
    round_pack(hi.neg, scale, sig, sticky, n)
}

/// Exact product of two unpacked reals, rounded at width `n`.
pub(crate) fn mul_real(a: Real, b: Real, n: u32) -> u32 {
    let neg = a.neg != b.neg;
    let prod = (a.frac as u128) * (b.frac as u128);
    // prod / 2^126 lies in [1, 4); renormalize to the hidden-at-127 form.
    let (sig, scale) = if prod >> 127 == 1 {
        (prod, a.scale + b.scale + 1)
    } else {
        (prod << 1, a.scale + b.scale)
    };
    round_pack(neg, scale, sig, false, n)
}

macro_rules! posit_type {
    ($(#[$doc:meta])* $name:ident, $uN:ty, $iN:ty, $n:expr) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, Default)]
        pub struct $name(pub(crate) $uN);

        impl $name {
            /// Width in bits.
            pub const N: u32 = $n;
            pub const ZERO: Self = Self(0);
            /// Not-a-real: the sign bit alone. Absorbing for arithmetic,
            /// below everything for comparisons, equal only to itself.
            pub const NAR: Self = Self(1 << ($n - 1));
            pub const ONE: Self = Self(1 << ($n - 2));
            /// Largest finite value, 2^(4(N-2)).
            pub const MAX_POS: Self = Self((1 << ($n - 1)) - 1);
            /// Smallest positive value, 2^-(4(N-2)).
            pub const MIN_POS: Self = Self(1);

            #[inline]
            pub const fn from_bits(bits: $uN) -> Self {
                Self(bits)
            }

            #[inline]
            pub const fn to_bits(self) -> $uN {
                self.0
            }

            #[inline]
            pub const fn is_zero(self) -> bool {
                self.0 == 0
            }

            #[inline]
            pub const fn is_nar(self) -> bool {
                self.0 == 1 << ($n - 1)
            }

            /// Raw field split, or `None` for the two special patterns.
            pub fn fields(self) -> Option<PositFields> {
                if self.is_zero() || self.is_nar() {
                    None
                } else {
                    Some(split_fields(self.0 as u32, $n))
                }
            }

            pub(crate) fn unpack(self) -> Unpacked {
                unpack(self.0 as u32, $n)
            }

            /// Two's complement negation; zero and NaR map to themselves.
            #[inline]
            pub const fn negate(self) -> Self {
                Self(self.0.wrapping_neg())
            }

            /// Copies the sign bit of `src` onto `self`.
            #[inline]
            pub const fn sign_inject(self, src: Self) -> Self {
                const SIGN: $uN = 1 << ($n - 1);
                Self((self.0 & !SIGN) | (src.0 & SIGN))
            }

            /// Copies the inverted sign bit of `src` onto `self`.
            #[inline]
            pub const fn sign_inject_not(self, src: Self) -> Self {
                const SIGN: $uN = 1 << ($n - 1);
                Self((self.0 & !SIGN) | (!src.0 & SIGN))
            }

            /// XORs the sign bit of `src` into `self`.
            #[inline]
            pub const fn sign_inject_xor(self, src: Self) -> Self {
                const SIGN: $uN = 1 << ($n - 1);
                Self((self.0 & !SIGN) | ((self.0 ^ src.0) & SIGN))
            }

            /// Minimum under the total order; NaR wins against anything.
            #[inline]
            pub fn min(self, other: Self) -> Self {
                if self <= other { self } else { other }
            }

            /// Maximum under the total order; NaR loses against anything.
            #[inline]
            pub fn max(self, other: Self) -> Self {
                if self >= other { self } else { other }
            }
        }

        // The total order is exactly the signed integer order of the raw
        // patterns, which places NaR below every real.
        impl Ord for $name {
            #[inline]
            fn cmp(&self, other: &Self) -> Ordering {
                (self.0 as $iN).cmp(&(other.0 as $iN))
            }
        }

        impl PartialOrd for $name {
            #[inline]
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                match (self.unpack(), rhs.unpack()) {
                    (Unpacked::NaR, _) | (_, Unpacked::NaR) => Self::NAR,
                    (Unpacked::Zero, _) => rhs,
                    (_, Unpacked::Zero) => self,
                    (Unpacked::Finite(a), Unpacked::Finite(b)) => {
                        Self(add_real(a, b, $n) as $uN)
                    }
                }
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                self + rhs.negate()
            }
        }

        impl Mul for $name {
            type Output = Self;
            fn mul(self, rhs: Self) -> Self {
                match (self.unpack(), rhs.unpack()) {
                    (Unpacked::NaR, _) | (_, Unpacked::NaR) => Self::NAR,
                    (Unpacked::Zero, _) | (_, Unpacked::Zero) => Self::ZERO,
                    (Unpacked::Finite(a), Unpacked::Finite(b)) => {
                        Self(mul_real(a, b, $n) as $uN)
                    }
                }
            }
        }

        impl Neg for $name {
            type Output = Self;
            #[inline]
            fn neg(self) -> Self {
                self.negate()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(
                    f,
                    concat!(stringify!($name), "({:#0w$x} = {})"),
                    self.0,
                    self.to_f64(),
                    w = ($n / 4 + 2) as usize
                )
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                if self.is_nar() {
                    write!(f, "NaR")
                } else {
                    fmt::Display::fmt(&self.to_f64(), f)
                }
            }
        }
    };
}

posit_type! {
    /// 8-bit posit, two exponent bits.
    Posit8, u8, i8, 8
}
posit_type! {
    /// 16-bit posit, two exponent bits.
    Posit16, u16, i16, 16
}
posit_type! {
    /// 32-bit posit, two exponent bits.
    Posit32, u32, i32, 32
}
