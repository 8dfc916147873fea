//! Shared fixtures and reference implementations for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use chaoscipher::{parse_key, CipherKey, FxWord};
use num_bigint::BigUint;

pub const FIXTURE_ENTROPY: &str = "0123456789ABCDEF";

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture_key() -> CipherKey {
    parse_key(std::str::from_utf8(&fixture("key16.key")).unwrap()).unwrap()
}

pub fn fixture_entropy() -> chaoscipher::SeededEntropy {
    chaoscipher::SeededEntropy::new(&hex::decode(FIXTURE_ENTROPY).unwrap())
}

pub fn prose() -> Vec<u8> {
    fixture("prose.txt")
}

/// The prose fixture repeated up to `len` bytes.
pub fn prose_of_len(len: usize) -> Vec<u8> {
    prose().into_iter().cycle().take(len).collect()
}

pub fn hex_lines(name: &str) -> Vec<u32> {
    String::from_utf8(fixture(name))
        .unwrap()
        .lines()
        .map(|l| u32::from_str_radix(l, 16).unwrap())
        .collect()
}

pub fn words(raws: &[u32], m: u32) -> Vec<FxWord> {
    raws.iter().map(|&r| FxWord::new(r, m).unwrap()).collect()
}

/// `floor(4 λ x (1 - x) 2^m)` with λ = L/2^k, x = X/2^m, in big integers,
/// clamped to `2^m - 1`.
pub fn oracle_step(x: u32, lambda: u64, m: u32, k: u32) -> u32 {
    let one = BigUint::from(1u8);
    let two_m = &one << m;
    let num = BigUint::from(4u8) * BigUint::from(lambda) * BigUint::from(x) * (&two_m - BigUint::from(x));
    let den = &one << (k + m);
    let v = num / den;
    let max = &two_m - &one;
    let v = if v > max { max } else { v };
    v.to_u32_digits().first().copied().unwrap_or(0)
}

/// Straight-line mixing reference over raw integers.
pub fn reference_encrypt(mut x: u32, mut xp: u32, lambda: u64, m: u32, k: u32, plain: &[u32]) -> Vec<u32> {
    let repair = 0x5A5A_5A5Au32 & ((1u64 << m) - 1) as u32;
    plain
        .iter()
        .map(|&y| {
            let p = x ^ xp;
            let c = p ^ y;
            let xn = oracle_step(x, lambda, m, k);
            let xpn = oracle_step(xp, lambda, m, k);
            x = xn ^ c;
            xp = if xpn == 0 { repair } else { xpn };
            c
        })
        .collect()
}
