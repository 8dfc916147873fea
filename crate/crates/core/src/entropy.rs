//! Byte sources for key material, session seeds and dummy filler.
//!
//! Everything drawn from a source is consumed big-endian through the helpers
//! below, so the same bytes yield the same keys and containers everywhere.

use rand_chacha::ChaCha20Rng;
use rand_core::{OsRng, RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fxchaos::{mask, FxWord};

pub trait EntropySource {
    fn fill(&mut self, buf: &mut [u8]) -> Result<()>;
}

impl<E: EntropySource + ?Sized> EntropySource for &mut E {
    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        (**self).fill(buf)
    }
}

/// A finite, caller-supplied byte string. Running dry is an error.
#[derive(Debug, Clone)]
pub struct FixedEntropy {
    bytes: Vec<u8>,
    pos: usize,
}

impl FixedEntropy {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        FixedEntropy { bytes: bytes.into(), pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

impl EntropySource for FixedEntropy {
    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        let end = self.pos + buf.len();
        if end > self.bytes.len() {
            return Err(Error::InsufficientEntropy);
        }
        buf.copy_from_slice(&self.bytes[self.pos..end]);
        self.pos = end;
        Ok(())
    }
}

/// Unbounded deterministic stream: ChaCha20 keyed with SHA-256 of a seed.
pub struct SeededEntropy(ChaCha20Rng);

impl SeededEntropy {
    pub fn new(seed: &[u8]) -> Self {
        let digest: [u8; 32] = Sha256::digest(seed).into();
        SeededEntropy(ChaCha20Rng::from_seed(digest))
    }
}

impl EntropySource for SeededEntropy {
    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        self.0.fill_bytes(buf);
        Ok(())
    }
}

/// Operating-system randomness.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemEntropy;

impl EntropySource for SystemEntropy {
    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        OsRng.try_fill_bytes(buf).map_err(|e| Error::EntropySource(e.to_string()))
    }
}

pub(crate) fn next_u64(src: &mut dyn EntropySource) -> Result<u64> {
    let mut buf = [0u8; 8];
    src.fill(&mut buf)?;
    Ok(u64::from_be_bytes(buf))
}

/// Uniform integer in `[0, bound)` by rejection sampling.
pub(crate) fn uniform_below(src: &mut dyn EntropySource, bound: u64) -> Result<u64> {
    assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
    loop {
        let v = next_u64(src)?;
        if v <= zone {
            return Ok(v % bound);
        }
    }
}

/// A uniform `m`-bit word read from `ceil(m/8)` big-endian bytes.
pub(crate) fn random_word(src: &mut dyn EntropySource, m: u32) -> Result<FxWord> {
    let bytes = (m as usize).div_ceil(8);
    let mut buf = [0u8; 4];
    src.fill(&mut buf[4 - bytes..])?;
    Ok(FxWord::truncate(u32::from_be_bytes(buf) & mask(m), m))
}

pub(crate) fn nonzero_word(src: &mut dyn EntropySource, m: u32) -> Result<FxWord> {
    loop {
        let w = random_word(src, m)?;
        if !w.is_zero() {
            return Ok(w);
        }
    }
}
