//! Shared test oracle: exact arithmetic on posit values, independent of the
//! library's own bit manipulation.
//!
//! Values are dyadic rationals backed by BigInt. Patterns are decoded with
//! the direct two's complement formula, value = ((1-3s) + F/2^m) *
//! 2^((1-2s)(4r+e+s)), reading the fields straight off the raw bits with no
//! negate-first step. Rounding to a posit runs a binary search over bodies
//! in pattern space and decides with the width-(n+1) midpoint pattern, so
//! none of the library's guard/sticky machinery is involved.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// num * 2^exp. Not kept normalized; exactness is what matters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub num: BigInt,
    pub exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }

    pub fn new(num: i64, exp: i64) -> Self {
        Dyadic { num: BigInt::from(num), exp }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite());
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let biased = ((bits >> 52) & 0x7FF) as i64;
        let man = (bits & ((1u64 << 52) - 1)) as i64;
        if biased == 0 {
            Dyadic { num: BigInt::from(sign * man), exp: -1074 }
        } else {
            Dyadic {
                num: BigInt::from(sign * (man | 1 << 52)),
                exp: biased - 1075,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn neg(&self) -> Self {
        Dyadic { num: -&self.num, exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Dyadic { num: self.num.abs(), exp: self.exp }
    }

    pub fn add(&self, other: &Self) -> Self {
        let exp = self.exp.min(other.exp);
        Dyadic {
            num: (&self.num << (self.exp - exp) as u64) + (&other.num << (other.exp - exp) as u64),
            exp,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Dyadic {
            num: &self.num * &other.num,
            exp: self.exp + other.exp,
        }
    }

    pub fn cmp_val(&self, other: &Self) -> Ordering {
        self.sub(other).num.sign().cmp(&num_bigint::Sign::NoSign)
    }

    /// Nearest f64, for reporting only.
    pub fn to_f64_lossy(&self) -> f64 {
        let bits = self.num.bits() as i64;
        // Keep the numerator inside f64 range by rescaling first.
        if bits > 900 {
            let shift = bits - 900;
            let scaled = &self.num >> shift as u64;
            scaled.to_f64().unwrap_or(f64::NAN) * exp2_i64(self.exp + shift)
        } else {
            self.num.to_f64().unwrap_or(f64::NAN) * exp2_i64(self.exp)
        }
    }
}

fn exp2_i64(e: i64) -> f64 {
    let mut v = 1.0f64;
    let mut e = e;
    while e > 1000 {
        v *= f64::from_bits((1023u64 + 1000) << 52);
        e -= 1000;
    }
    while e < -1000 {
        v *= f64::from_bits((1023u64 - 1000) << 52);
        e += 1000;
    }
    v * f64::from_bits(((1023 + e) as u64) << 52)
}

/// Field split per the direct decoding convention, straight off the raw
/// bits. Returns (s, r, e, F, m). Widths up to 64 are accepted so the
/// rounding search can decode its width-(n+1) midpoint patterns.
pub fn direct_fields(bits: u64, n: u32) -> (u32, i64, u32, u64, u32) {
    assert!(bits != 0 && bits != 1 << (n - 1));
    let s = ((bits >> (n - 1)) & 1) as u32;
    let mut pos = n as i64 - 2; // next bit to read, counting down
    let r0 = (bits >> pos) & 1;
    let mut k = 0u32;
    while pos >= 0 && (bits >> pos) & 1 == r0 {
        k += 1;
        pos -= 1;
    }
    if pos >= 0 {
        pos -= 1; // terminator
    }
    let r = if r0 == 0 { -(k as i64) } else { k as i64 - 1 };
    let mut e = 0u32;
    for slot in 0..2 {
        if pos >= 0 {
            e |= (((bits >> pos) & 1) as u32) << (1 - slot);
            pos -= 1;
        }
    }
    let m = (pos + 1) as u32;
    let f = if m == 0 { 0 } else { bits & ((1 << m) - 1) };
    (s, r, e, f, m)
}

/// Exact value of a pattern at width `n`; `None` for NaR.
pub fn posit_value(bits: u64, n: u32) -> Option<Dyadic> {
    let bits = bits & width_mask(n);
    if bits == 0 {
        return Some(Dyadic::zero());
    }
    if bits == 1 << (n - 1) {
        return None;
    }
    let (s, r, e, f, m) = direct_fields(bits, n);
    let sign_term: i64 = 1 - 3 * s as i64; // +1 or -2
    let num = BigInt::from(sign_term) * (BigInt::from(1) << m) + BigInt::from(f);
    let exp = (1 - 2 * s as i64) * (4 * r + e as i64 + s as i64) - m as i64;
    Some(Dyadic { num, exp })
}

pub fn width_mask(n: u32) -> u64 {
    (!0u64) >> (64 - n)
}

/// Largest finite magnitude at width n, 2^(4(n-2)).
pub fn maxpos_value(n: u32) -> Dyadic {
    Dyadic::new(1, 4 * (n as i64 - 2))
}

/// Smallest positive magnitude at width n.
pub fn minpos_value(n: u32) -> Dyadic {
    Dyadic::new(1, -4 * (n as i64 - 2))
}

/// Rounds a positive target to a width-n body (sign bit clear), given a
/// three-way comparison of candidate values against the target.
///
/// `cmp(c)` must say how the exact value `c` compares to the target. The
/// search leans on pattern monotonicity: for positive patterns, bigger body
/// means bigger value. Ties go to the even body; magnitudes at or beyond
/// maxpos and at or below minpos stick to those endpoints, so the result is
/// never zero or NaR.
fn round_positive_with(cmp: &dyn Fn(&Dyadic) -> Ordering, n: u32) -> u32 {
    let top = width_mask(n - 1) as u32;
    if cmp(&maxpos_value(n)) != Ordering::Greater {
        return top;
    }
    if cmp(&minpos_value(n)) != Ordering::Less {
        return 1;
    }
    // Largest body whose value is <= target.
    let (mut lo, mut hi) = (1u32, top); // value(lo) < target < value(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match cmp(&posit_value(mid as u64, n).unwrap()) {
            Ordering::Less => lo = mid,
            Ordering::Equal => return mid,
            Ordering::Greater => hi = mid,
        }
    }
    // The width-(n+1) pattern 2*lo+1 sits exactly between lo and hi.
    let mid_val = posit_value(2 * lo as u64 + 1, n + 1).unwrap();
    match cmp(&mid_val) {
        // Midpoint below the target: the target is in the upper half.
        Ordering::Less => hi,
        Ordering::Greater => lo,
        Ordering::Equal => {
            if lo & 1 == 0 {
                lo
            } else {
                hi
            }
        }
    }
}

/// Correctly rounded posit (nearest, ties to even in pattern space,
/// saturating) for an exact dyadic value.
pub fn round_to_posit(v: &Dyadic, n: u32) -> u32 {
    if v.is_zero() {
        return 0;
    }
    let mag = v.abs();
    let body = round_positive_with(&|c| c.cmp_val(&mag), n);
    apply_sign(body, v.is_negative(), n)
}

/// Correctly rounded posit for the exact quotient p/q, q nonzero.
pub fn round_quotient_to_posit(p: &Dyadic, q: &Dyadic, n: u32) -> u32 {
    assert!(!q.is_zero());
    if p.is_zero() {
        return 0;
    }
    let neg = p.is_negative() != q.is_negative();
    let (pa, qa) = (p.abs(), q.abs());
    // c <=> p/q  is  c*q <=> p  for positive q.
    let body = round_positive_with(&|c| c.mul(&qa).cmp_val(&pa), n);
    apply_sign(body, neg, n)
}

/// Correctly rounded posit for the exact square root of a nonnegative v.
pub fn round_sqrt_to_posit(v: &Dyadic, n: u32) -> u32 {
    assert!(!v.is_negative());
    if v.is_zero() {
        return 0;
    }
    // c <=> sqrt(v)  is  c^2 <=> v  for positive candidates.
    round_positive_with(&|c| c.mul(c).cmp_val(v), n)
}

fn apply_sign(body: u32, neg: bool, n: u32) -> u32 {
    if neg {
        body.wrapping_neg() & width_mask(n) as u32
    } else {
        body
    }
}

/// True when |x - exact| <= (bn/bd) * |exact|, all exactly.
pub fn rel_err_le(x: &Dyadic, exact: &Dyadic, bn: u64, bd: u64) -> bool {
    let err = x.sub(exact).abs();
    let lhs = err.mul(&Dyadic::new(bd as i64, 0));
    let rhs = exact.abs().mul(&Dyadic::new(bn as i64, 0));
    lhs.cmp_val(&rhs) != Ordering::Greater
}

/// Relative error |x - exact| / |exact| as an f64, for reporting.
pub fn rel_err_f64(x: &Dyadic, exact: &Dyadic) -> f64 {
    let err = x.sub(exact).abs();
    err.to_f64_lossy() / exact.abs().to_f64_lossy()
}

/// True when |x - p/q| <= (bn/bd) * |p/q|, all exactly; the quotient itself
/// need not be dyadic. Multiplying through by |q| gives
/// |x*q - p| * bd <= bn * |p|.
pub fn quotient_rel_err_le(x: &Dyadic, p: &Dyadic, q: &Dyadic, bn: u64, bd: u64) -> bool {
    assert!(!q.is_zero());
    let err = x.mul(q).sub(p).abs();
    let lhs = err.mul(&Dyadic::new(bd as i64, 0));
    let rhs = p.abs().mul(&Dyadic::new(bn as i64, 0));
    lhs.cmp_val(&rhs) != Ordering::Greater
}

/// Relative error |x - p/q| / |p/q| as an f64, for reporting.
pub fn quotient_rel_err_f64(x: &Dyadic, p: &Dyadic, q: &Dyadic) -> f64 {
    let err = x.mul(q).sub(p).abs();
    err.to_f64_lossy() / p.abs().to_f64_lossy()
}

/// True when |x - sqrt(v)| <= (bn/bd) * sqrt(v), all exactly, for v > 0,
/// x >= 0 and bn < bd. Both sides of (1 -/+ B) * sqrt(v) <= x are
/// nonnegative, so squaring preserves them:
/// (bd-bn)^2 * v <= bd^2 * x^2 <= (bd+bn)^2 * v.
pub fn sqrt_rel_err_le(x: &Dyadic, v: &Dyadic, bn: u64, bd: u64) -> bool {
    assert!(bn < bd && !v.is_negative() && !x.is_negative());
    let x2 = x.mul(x).mul(&Dyadic::new((bd * bd) as i64, 0));
    let lo = v.mul(&Dyadic::new(((bd - bn) * (bd - bn)) as i64, 0));
    let hi = v.mul(&Dyadic::new(((bd + bn) * (bd + bn)) as i64, 0));
    lo.cmp_val(&x2) != Ordering::Greater && x2.cmp_val(&hi) != Ordering::Greater
}

/// Relative error |x - sqrt(v)| / sqrt(v) as an f64, for reporting.
pub fn sqrt_rel_err_f64(x: &Dyadic, v: &Dyadic) -> f64 {
    let root = v.to_f64_lossy().sqrt();
    (x.to_f64_lossy() - root).abs() / root
}
