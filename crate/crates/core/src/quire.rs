//! Quire accumulators: fixed-point registers wide enough to add and
//! subtract posit products without any rounding.
//!
//! A width-n posit gets a 16n-bit two's complement quire whose unit (least
//! significant bit) weighs 2^(16-8n). Every product of two width-n posits
//! is an integer multiple of that unit, because a posit's own unit weight
//! never drops below 2^-(4(n-2)), so multiply-accumulate is exact. The top
//! bits beyond the largest product magnitude leave headroom for over two
//! billion accumulations before wraparound.
//!
//! NaR is sticky: once a NaR operand enters, the accumulator stays NaR
//! until cleared.

use crate::posit::{round_pack, Posit16, Posit32, Posit8, Unpacked};

/// Adds or subtracts a three-limb window into `acc` at limb `off`,
/// rippling the carry or borrow through the top. Overflow wraps, which is
/// exactly two's complement behaviour at the quire's width.
fn accumulate(acc: &mut [u64], off: usize, words: [u64; 3], negate: bool) {
    if negate {
        let mut borrow = false;
        for i in off..acc.len() {
            let w = *words.get(i - off).unwrap_or(&0);
            let (v, b1) = acc[i].overflowing_sub(w);
            let (v, b2) = v.overflowing_sub(borrow as u64);
            acc[i] = v;
            borrow = b1 || b2;
        }
    } else {
        let mut carry = false;
        for i in off..acc.len() {
            let w = *words.get(i - off).unwrap_or(&0);
            let (v, c1) = acc[i].overflowing_add(w);
            let (v, c2) = v.overflowing_add(carry as u64);
            acc[i] = v;
            carry = c1 || c2;
        }
    }
}

macro_rules! quire_type {
    ($(#[$doc:meta])* $name:ident, $posit:ident, $n:expr, $limbs:expr) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
        pub struct $name {
            limbs: [u64; $limbs],
            nar: bool,
        }

        impl $name {
            /// Total width in bits.
            pub const BITS: u32 = 16 * $n;
            /// Base-two exponent of the least significant bit.
            pub const UNIT_EXP: i32 = 16 - 8 * $n;

            pub fn new() -> Self {
                Self::default()
            }

            /// Resets to zero and drops any sticky NaR state.
            pub fn clear(&mut self) {
                *self = Self::default();
            }

            pub fn is_nar(&self) -> bool {
                self.nar
            }

            pub fn is_zero(&self) -> bool {
                !self.nar && self.limbs.iter().all(|&w| w == 0)
            }

            /// Raw limbs, least significant first. When the accumulator is
            /// NaR this returns the canonical NaR pattern (sign bit alone).
            pub fn limbs(&self) -> [u64; $limbs] {
                if self.nar {
                    let mut l = [0u64; $limbs];
                    l[$limbs - 1] = 1 << 63;
                    l
                } else {
                    self.limbs
                }
            }

            /// Two's complement negation of the whole register; NaR is
            /// unchanged. The most negative pattern wraps to itself.
            pub fn negate(&mut self) {
                if self.nar {
                    return;
                }
                let mut carry = true;
                for w in self.limbs.iter_mut() {
                    let (v, c) = (!*w).overflowing_add(carry as u64);
                    *w = v;
                    carry = c;
                }
            }

            /// Adds the exact product `a * b`.
            pub fn madd(&mut self, a: $posit, b: $posit) {
                self.mac(a, b, false);
            }

            /// Subtracts the exact product `a * b`.
            pub fn msub(&mut self, a: $posit, b: $posit) {
                self.mac(a, b, true);
            }

            fn mac(&mut self, a: $posit, b: $posit, negate: bool) {
                let (ra, rb) = match (a.unpack(), b.unpack()) {
                    (Unpacked::NaR, _) | (_, Unpacked::NaR) => {
                        self.nar = true;
                        return;
                    }
                    (Unpacked::Zero, _) | (_, Unpacked::Zero) => return,
                    (Unpacked::Finite(ra), Unpacked::Finite(rb)) => (ra, rb),
                };
                if self.nar {
                    return;
                }
                let mut prod = (ra.frac as u128) * (rb.frac as u128);
                // Bit 0 of prod weighs 2^(sa+sb-126); express that weight
                // in quire units. A negative offset only ever shifts out
                // zeros: each factor's set bits sit at or above weight
                // 2^-(4(n-2)), so the product is on the quire grid.
                let mut sh = ra.scale + rb.scale - 126 - Self::UNIT_EXP;
                if sh < 0 {
                    debug_assert!(prod.trailing_zeros() >= (-sh) as u32);
                    prod >>= -sh;
                    sh = 0;
                }
                let off = (sh / 64) as usize;
                let bit = sh % 64;
                let p0 = prod as u64;
                let p1 = (prod >> 64) as u64;
                let words = if bit == 0 {
                    [p0, p1, 0]
                } else {
                    [
                        p0 << bit,
                        (p1 << bit) | (p0 >> (64 - bit)),
                        p1 >> (64 - bit),
                    ]
                };
                accumulate(&mut self.limbs, off, words, negate ^ (ra.neg != rb.neg));
            }

            /// Rounds the accumulated value to the nearest posit (ties to
            /// even, saturating) and returns it. The accumulator keeps its
            /// contents.
            pub fn round(&self) -> $posit {
                if self.nar {
                    return $posit::NAR;
                }
                let neg = self.limbs[$limbs - 1] >> 63 == 1;
                let mut mag = self.limbs;
                if neg {
                    let mut carry = true;
                    for w in mag.iter_mut() {
                        let (v, c) = (!*w).overflowing_add(carry as u64);
                        *w = v;
                        carry = c;
                    }
                }
                // Most significant set bit of the magnitude. The most
                // negative pattern negates to itself; its magnitude bit is
                // still correct read as unsigned.
                let h = match (0..$limbs).rev().find(|&i| mag[i] != 0) {
                    None => return $posit::ZERO,
                    Some(i) => (i as u32) * 64 + 63 - mag[i].leading_zeros(),
                };
                // Gather the 128 bits from h downward, h at position 127.
                let hw = (h / 64) as usize;
                let hb = h % 64;
                let get = |i: isize| -> u64 {
                    if i < 0 {
                        0
                    } else {
                        mag[i as usize]
                    }
                };
                let hi = ((get(hw as isize) as u128) << 64) | get(hw as isize - 1) as u128;
                let sig = if hb == 63 {
                    hi
                } else {
                    (hi << (63 - hb)) | ((get(hw as isize - 2) as u128) >> (hb + 1))
                };
                // Everything strictly below bit h-127 only matters as a
                // sticky OR.
                let cut = h as i64 - 127;
                let sticky = if cut > 0 {
                    let cw = (cut / 64) as usize;
                    let cb = cut % 64;
                    mag[..cw].iter().any(|&w| w != 0)
                        || (cb > 0 && mag[cw] & ((1u64 << cb) - 1) != 0)
                } else {
                    false
                };
                let scale = h as i32 + Self::UNIT_EXP;
                $posit::from_bits(round_pack(neg, scale, sig, sticky, $n) as _)
            }

            /// Hexadecimal rendering of the full register, most significant
            /// limb first.
            pub fn to_hex(&self) -> String {
                let limbs = self.limbs();
                let mut s = String::with_capacity(2 + 16 * $limbs);
                s.push_str("0x");
                for w in limbs.iter().rev() {
                    s.push_str(&format!("{w:016x}"));
                }
                s
            }
        }
    };
}

quire_type! {
    /// 128-bit quire for 8-bit posits.
    Quire8, Posit8, 8, 2
}
quire_type! {
    /// 256-bit quire for 16-bit posits.
    Quire16, Posit16, 16, 4
}
quire_type! {
    /// 512-bit quire for 32-bit posits.
    Quire32, Posit32, 32, 8
}
