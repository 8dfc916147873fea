//! Fixed-point logistic map.
//!
//! States are `m`-bit unsigned fractions (`raw / 2^m`), the control parameter
//! is a `k+1`-bit fraction (`raw / 2^k`) so that λ = 1 is exact. One step of
//! `x -> 4λx(1-x)` is a single floored integer expression evaluated in 128-bit
//! arithmetic, which makes every orbit bit-identical on every platform.

use std::fmt;

use crate::error::{Error, Result};

pub const MIN_WIDTH: u32 = 4;
pub const MAX_WIDTH: u32 = 32;

/// Lowest admissible key λ as a fraction: `ceil(0.99 * 2^k)`.
pub fn chaotic_floor(k: u32) -> u64 {
    // 0.99 * 2^k = 99 * 2^k / 100, rounded up.
    ((99u128 << k).div_ceil(100)) as u64
}

pub(crate) fn check_width(name: &'static str, width: u32) -> Result<()> {
    if (MIN_WIDTH..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(Error::WidthOutOfRange { name, width })
    }
}

#[inline]
pub(crate) fn mask(m: u32) -> u32 {
    if m == 32 {
        u32::MAX
    } else {
        (1u32 << m) - 1
    }
}

/// An `m`-bit fixed-point fraction in `[0, 1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FxWord {
    raw: u32,
    m: u8,
}

impl FxWord {
    pub fn new(raw: u32, m: u32) -> Result<Self> {
        check_width("m", m)?;
        if raw > mask(m) {
            return Err(Error::WordOutOfRange { raw: raw as u64, m });
        }
        Ok(FxWord { raw, m: m as u8 })
    }

    /// Keeps the low `m` bits of `raw`.
    ///
    /// Panics if `m` is outside `[4, 32]`.
    #[inline]
    pub fn truncate(raw: u32, m: u32) -> Self {
        assert!((MIN_WIDTH..=MAX_WIDTH).contains(&m), "word width {m} out of range");
        FxWord { raw: raw & mask(m), m: m as u8 }
    }

    #[inline]
    pub fn zero(m: u32) -> Self {
        Self::truncate(0, m)
    }

    #[inline]
    pub fn raw(self) -> u32 {
        self.raw
    }

    #[inline]
    pub fn width(self) -> u32 {
        self.m as u32
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.raw == 0
    }

    pub fn to_f64(self) -> f64 {
        self.raw as f64 / (1u64 << self.m) as f64
    }
}

impl std::ops::BitXor for FxWord {
    type Output = FxWord;

    #[inline]
    fn bitxor(self, rhs: FxWord) -> FxWord {
        debug_assert_eq!(self.m, rhs.m, "xor of words with different widths");
        FxWord { raw: self.raw ^ rhs.raw, m: self.m }
    }
}

impl fmt::Debug for FxWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.m as usize).div_ceil(4);
        write!(f, "FxWord(0x{:0digits$x}/{})", self.raw, self.m)
    }
}

/// Control parameter λ ∈ [0, 1] with `k` fractional bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lambda {
    raw: u64,
    k: u8,
}

impl Lambda {
    pub fn new(raw: u64, k: u32) -> Result<Self> {
        check_width("k", k)?;
        if raw > 1u64 << k {
            return Err(Error::LambdaOutOfRange { raw, k });
        }
        Ok(Lambda { raw, k: k as u8 })
    }

    /// Like [`Lambda::new`], additionally requiring the chaotic band
    /// `[ceil(0.99 * 2^k), 2^k]`.
    pub fn chaotic(raw: u64, k: u32) -> Result<Self> {
        let lambda = Self::new(raw, k)?;
        if raw < chaotic_floor(k) {
            return Err(Error::LambdaOutOfRange { raw, k });
        }
        Ok(lambda)
    }

    pub fn one(k: u32) -> Result<Self> {
        Self::new(1u64 << k, k)
    }

    #[inline]
    pub fn raw(self) -> u64 {
        self.raw
    }

    #[inline]
    pub fn width(self) -> u32 {
        self.k as u32
    }

    pub fn to_f64(self) -> f64 {
        self.raw as f64 / (1u64 << self.k) as f64
    }
}

impl fmt::Debug for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lambda(0x{:x}/{})", self.raw, self.k)
    }
}

/// `floor(numerator * 2^m / denominator)` as an `m`-bit word.
pub fn fx_from_rational(numerator: u64, denominator: u64, m: u32) -> Result<FxWord> {
    check_width("m", m)?;
    if denominator == 0 || numerator >= denominator {
        return Err(Error::NotAFraction { numerator, denominator });
    }
    let raw = ((numerator as u128) << m) / denominator as u128;
    Ok(FxWord::truncate(raw as u32, m))
}

/// One application of `x -> 4λx(1-x)`.
///
/// Computes `floor(λ.raw * x.raw * (2^m - x.raw) / 2^(k+m-2))`, clamped to
/// `2^m - 1` where the real map reaches 1.0. The triple product is below
/// `2^97` for all admissible widths.
#[inline]
pub fn logistic_step(x: FxWord, lambda: Lambda) -> FxWord {
    let m = x.m as u32;
    let k = lambda.k as u32;
    let xr = x.raw as u128;
    let product = lambda.raw as u128 * xr * ((1u128 << m) - xr);
    let next = product >> (k + m - 2);
    let max = mask(m) as u128;
    FxWord { raw: next.min(max) as u32, m: x.m }
}

/// `[x1, .., x_count]` starting from `x0` (which is not included).
pub fn logistic_orbit(x0: FxWord, lambda: Lambda, count: usize) -> Vec<FxWord> {
    let mut out = Vec::with_capacity(count);
    let mut x = x0;
    for _ in 0..count {
        x = logistic_step(x, lambda);
        out.push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w16(raw: u32) -> FxWord {
        FxWord::new(raw, 16).unwrap()
    }

    #[test]
    fn rational_conversion() {
        assert_eq!(fx_from_rational(1, 2, 16).unwrap().raw(), 0x8000);
        assert_eq!(fx_from_rational(0, 1, 16).unwrap().raw(), 0);
        assert_eq!(fx_from_rational(1, 3, 8).unwrap().raw(), 0x55);
        assert!(fx_from_rational(3, 3, 16).is_err());
        assert!(fx_from_rational(4, 3, 16).is_err());
        assert!(fx_from_rational(1, 2, 3).is_err());
        assert!(fx_from_rational(1, 2, 33).is_err());
    }

    #[test]
    fn step_examples() {
        let one = Lambda::one(16).unwrap();
        assert_eq!(logistic_step(w16(0), one).raw(), 0);
        assert_eq!(logistic_step(w16(0x4000), one).raw(), 0xC000);
        assert_eq!(logistic_step(w16(0x8000), one).raw(), 0xFFFF);
        assert_eq!(logistic_step(w16(0xFFFF), one).raw(), 0x0003);
    }

    #[test]
    fn orbit_examples() {
        let one = Lambda::one(16).unwrap();
        assert_eq!(logistic_orbit(w16(0), one, 5), vec![w16(0); 5]);
        assert_eq!(logistic_orbit(w16(0x4000), one, 2), vec![w16(0xC000), w16(0xC000)]);

        let small = Lambda::new((0.2 * 65536.0) as u64, 16).unwrap();
        let orbit = logistic_orbit(w16(0x9876), small, 100);
        assert_eq!(orbit.last().unwrap().raw(), 0);
    }

    #[test]
    fn widths_and_ranges() {
        assert!(FxWord::new(0x10, 4).is_err());
        assert!(FxWord::new(0xF, 4).is_ok());
        assert!(FxWord::new(u32::MAX, 32).is_ok());
        assert!(Lambda::new(17, 4).is_err());
        assert!(Lambda::new(16, 4).is_ok());
        assert!(Lambda::chaotic(15, 4).is_err());
        assert_eq!(chaotic_floor(4), 16);
        assert_eq!(chaotic_floor(8), 254);
        assert_eq!(chaotic_floor(16), 64881);
    }

    #[test]
    fn closure_exhaustive_m16() {
        for lam in [1u64 << 16, chaotic_floor(16), 40000] {
            let lambda = Lambda::new(lam, 16).unwrap();
            for raw in 0..=0xFFFF {
                let x = w16(raw);
                assert!(logistic_step(x, lambda).raw() <= 0xFFFF);
            }
        }
    }

    #[test]
    fn near_symmetry_about_half() {
        let lambda = Lambda::one(16).unwrap();
        for raw in 1..=0xFFFFu32 {
            let a = logistic_step(w16(raw), lambda).raw() as i64;
            let b = logistic_step(w16(0x10000 - raw), lambda).raw() as i64;
            assert!((a - b).abs() <= 1, "x={raw:#x}: {a} vs {b}");
        }
    }

    #[test]
    fn widest_words_do_not_overflow() {
        let lambda = Lambda::one(32).unwrap();
        let x = FxWord::new(0x8000_0000, 32).unwrap();
        assert_eq!(logistic_step(x, lambda).raw(), u32::MAX);
        let x = FxWord::new(0x4000_0000, 32).unwrap();
        assert_eq!(logistic_step(x, lambda).raw(), 0xC000_0000);
    }
}
