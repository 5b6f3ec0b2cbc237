//! Conversions between posits and integers or IEEE floats, plus the raw
//! register moves.
//!
//! Posit-to-float is exact for every supported width: a 32-bit posit carries
//! at most 28 significand bits and scales within ±120, well inside f64's
//! range. Float-to-posit and the integer paths round to nearest, ties to
//! even, and saturate like every other posit operation.

use crate::posit::{round_pack, Posit16, Posit32, Posit8, Real, Unpacked};

/// 2^k as an f64, built directly from the exponent field. `k` must lie in
/// the normal range.
#[inline]
fn exp2i(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((1023 + k as i64) as u64) << 52)
}

/// Exact value of an unpacked real as an f64.
fn real_to_f64(r: Real) -> f64 {
    // frac has at most 28 significant bits, so the integer conversion is
    // exact, and multiplying by a power of two cannot round.
    let v = (r.frac as f64) * exp2i(r.scale - 63);
    if r.neg {
        -v
    } else {
        v
    }
}

/// Decomposes a finite nonzero f64 into an unpacked real. Exact.
fn f64_to_real(x: f64) -> Real {
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let biased = ((bits >> 52) & 0x7FF) as i32;
    let man = bits & ((1u64 << 52) - 1);
    if biased == 0 {
        // Subnormal: value = man / 2^52 * 2^-1022.
        let lz = man.leading_zeros();
        Real {
            neg,
            scale: -1022 - (lz as i32 - 11),
            frac: man << lz,
        }
    } else {
        Real {
            neg,
            scale: biased - 1023,
            frac: (man | (1 << 52)) << 11,
        }
    }
}

/// Rounds a finite nonzero unpacked real to the nearest integer (ties to
/// even) and returns its magnitude clamped to a u128, plus the sign.
fn real_to_int_mag(r: Real) -> (bool, u128) {
    let mag = if r.scale < 0 {
        // |v| < 1: rounds to 0 unless v is above 1/2. Exactly 1/2 ties to
        // the even integer 0.
        let above_half = r.scale == -1 && r.frac > 1 << 63;
        above_half as u128
    } else if r.scale < 63 {
        let int = (r.frac >> (63 - r.scale)) as u128;
        let rest = r.frac << (r.scale + 1); // bits below the integer point
        let guard = rest >> 63;
        let sticky = rest << 1 != 0;
        if guard == 1 && (sticky || int & 1 == 1) {
            int + 1
        } else {
            int
        }
    } else {
        // Already an integer; the shift fits because posit scales top out
        // at 120.
        (r.frac as u128) << (r.scale - 63)
    };
    (r.neg, mag)
}

macro_rules! to_int_impl {
    ($fn_name:ident, $t:ty, $nar:expr) => {
        /// Converts to the integer type, rounding to nearest (ties to
        /// even) and saturating; NaR maps to the most negative value.
        pub fn $fn_name(self) -> $t {
            match self.unpack() {
                Unpacked::Zero => 0,
                Unpacked::NaR => $nar,
                Unpacked::Finite(r) => {
                    let (neg, mag) = real_to_int_mag(r);
                    if neg {
                        let lim = (<$t>::MIN as i128).unsigned_abs();
                        if mag >= lim {
                            <$t>::MIN
                        } else {
                            (mag as i128).wrapping_neg() as $t
                        }
                    } else if mag >= <$t>::MAX as u128 {
                        <$t>::MAX
                    } else {
                        mag as $t
                    }
                }
            }
        }
    };
}

macro_rules! convert_impl {
    ($name:ident, $uN:ty, $n:expr) => {
        impl $name {
            /// Exact conversion to f64. NaR becomes NaN.
            pub fn to_f64(self) -> f64 {
                match self.unpack() {
                    Unpacked::Zero => 0.0,
                    Unpacked::NaR => f64::NAN,
                    Unpacked::Finite(r) => real_to_f64(r),
                }
            }

            /// Conversion to f32, correctly rounded. NaR becomes NaN.
            pub fn to_f32(self) -> f32 {
                // to_f64 is exact, so the narrowing cast rounds once.
                self.to_f64() as f32
            }

            /// Nearest posit to an f64. NaN maps to NaR; infinities
            /// saturate like any other out-of-range magnitude.
            pub fn from_f64(x: f64) -> Self {
                if x.is_nan() {
                    return Self::NAR;
                }
                if x == 0.0 {
                    return Self::ZERO;
                }
                if x.is_infinite() {
                    return if x < 0.0 { Self::MAX_POS.negate() } else { Self::MAX_POS };
                }
                let r = f64_to_real(x);
                Self(round_pack(r.neg, r.scale, (r.frac as u128) << 64, false, $n) as $uN)
            }

            /// Nearest posit to an f32.
            pub fn from_f32(x: f32) -> Self {
                Self::from_f64(x as f64)
            }

            to_int_impl!(to_i32, i32, i32::MIN);
            to_int_impl!(to_u32, u32, 0);
            to_int_impl!(to_i64, i64, i64::MIN);
            to_int_impl!(to_u64, u64, 0);

            /// Nearest posit to a signed 64-bit integer.
            pub fn from_i64(x: i64) -> Self {
                if x == 0 {
                    return Self::ZERO;
                }
                Self::from_int_mag(x < 0, x.unsigned_abs())
            }

            /// Nearest posit to an unsigned 64-bit integer.
            pub fn from_u64(x: u64) -> Self {
                if x == 0 {
                    return Self::ZERO;
                }
                Self::from_int_mag(false, x)
            }

            /// Nearest posit to a signed 32-bit integer.
            pub fn from_i32(x: i32) -> Self {
                Self::from_i64(x as i64)
            }

            /// Nearest posit to an unsigned 32-bit integer.
            pub fn from_u32(x: u32) -> Self {
                Self::from_u64(x as u64)
            }

            fn from_int_mag(neg: bool, mag: u64) -> Self {
                let lz = mag.leading_zeros();
                Self(round_pack(neg, 63 - lz as i32, (mag as u128) << (64 + lz), false, $n) as $uN)
            }
        }
    };
}

convert_impl!(Posit8, u8, 8);
convert_impl!(Posit16, u16, 16);
convert_impl!(Posit32, u32, 32);

/// Raw pattern move into an integer register: the 32-bit pattern is
/// sign-extended to 64 bits, matching the float-move convention on 64-bit
/// hosts.
#[inline]
pub fn pmv_x_w(p: Posit32) -> u64 {
    p.to_bits() as i32 as i64 as u64
}

/// Raw pattern move from an integer register: the low 32 bits become the
/// posit pattern unmodified.
#[inline]
pub fn pmv_w_x(x: u64) -> Posit32 {
    Posit32::from_bits(x as u32)
}
