//! Container format.
//!
//! ```text
//! "CHS1" | dummy region: D words | body words
//! ```
//!
//! Every word is stored big-endian in `ceil(m/8)` bytes. The dummy region is
//! filler noise with round `r`'s session seed at slot `(o + r*s) mod D`. The
//! body is one cipher stream over
//!
//! ```text
//! pack(len_u64_be || plaintext) split into blocks of 256 words,
//! each block followed by the sentinel word 0x00A5 (masked to m bits)
//! ```
//!
//! so a final partial block is also closed by a sentinel. D, m, n and the seed
//! slots come from the key and never appear in the file.

use crate::cipher::cipher_init;
use crate::entropy::{random_word, EntropySource};
use crate::error::{ContainerError, Error, Result};
use crate::fxchaos::{mask, FxWord};
use crate::keyspace::{CipherKey, SessionSeed};

pub const MAGIC: &[u8; 4] = b"CHS1";
pub const BLOCK_WORDS: usize = 256;
const LENGTH_HEADER: usize = 8;

pub fn sentinel(m: u32) -> FxWord {
    FxWord::truncate(0x00A5 & mask(m), m)
}

pub fn bytes_per_word(m: u32) -> usize {
    (m as usize).div_ceil(8)
}

/// Packs bytes into consecutive big-endian `m`-bit fields; the last word is
/// zero-padded.
pub fn pack_words(bytes: &[u8], m: u32) -> Vec<FxWord> {
    let nwords = (bytes.len() * 8).div_ceil(m as usize);
    let mut out = Vec::with_capacity(nwords);
    let mut acc: u64 = 0;
    let mut bits = 0u32;
    for &b in bytes {
        acc = (acc << 8) | b as u64;
        bits += 8;
        while bits >= m {
            bits -= m;
            out.push(FxWord::truncate((acc >> bits) as u32, m));
            acc &= (1u64 << bits) - 1;
        }
    }
    if bits > 0 {
        out.push(FxWord::truncate((acc << (m - bits)) as u32, m));
    }
    debug_assert_eq!(out.len(), nwords);
    out
}

/// Inverse of [`pack_words`]; `byte_len` must be the packed length.
pub fn unpack_words(words: &[FxWord], byte_len: usize, m: u32) -> Result<Vec<u8>> {
    if words.len() != (byte_len * 8).div_ceil(m as usize) {
        return Err(ContainerError::PackLength { byte_len, words: words.len(), m }.into());
    }
    let mut out = Vec::with_capacity(byte_len);
    let mut acc: u64 = 0;
    let mut bits = 0u32;
    for w in words {
        acc = (acc << m) | w.raw() as u64;
        bits += m;
        while bits >= 8 && out.len() < byte_len {
            bits -= 8;
            out.push((acc >> bits) as u8);
            acc &= (1u64 << bits) - 1;
        }
    }
    Ok(out)
}

pub fn write_words(words: &[FxWord], m: u32, out: &mut Vec<u8>) {
    let bpw = bytes_per_word(m);
    for w in words {
        out.extend_from_slice(&w.raw().to_be_bytes()[4 - bpw..]);
    }
}

/// Reads whole big-endian words; trailing bytes that do not fill a word are
/// an error. Values wider than `m` bits are rejected.
pub fn read_words(bytes: &[u8], m: u32) -> Result<Vec<FxWord>> {
    let bpw = bytes_per_word(m);
    if !bytes.len().is_multiple_of(bpw) {
        return Err(ContainerError::Truncated.into());
    }
    bytes
        .chunks_exact(bpw)
        .map(|chunk| {
            let mut buf = [0u8; 4];
            buf[4 - bpw..].copy_from_slice(chunk);
            FxWord::new(u32::from_be_bytes(buf), m)
        })
        .collect()
}

fn with_sentinels(payload: &[FxWord], m: u32) -> Vec<FxWord> {
    let mut body = Vec::with_capacity(payload.len() + payload.len().div_ceil(BLOCK_WORDS));
    for block in payload.chunks(BLOCK_WORDS) {
        body.extend_from_slice(block);
        body.push(sentinel(m));
    }
    body
}

/// Session seed plus dummy region for a fresh message.
fn dummy_region(key: &CipherKey, entropy: &mut dyn EntropySource) -> Result<(SessionSeed, Vec<FxWord>)> {
    let session = SessionSeed::generate(key, entropy)?;
    let d = key.dummy_len() as usize;
    let mut region: Vec<Option<FxWord>> = vec![None; d];
    for (r, &w) in session.words().iter().enumerate() {
        region[key.seed_slot(r)] = Some(w);
    }
    let region = region
        .into_iter()
        .map(|slot| match slot {
            Some(w) => Ok(w),
            None => random_word(entropy, key.m()),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((session, region))
}

/// Encrypts `plaintext` into a container, drawing the session seeds and
/// dummy filler from `entropy`.
pub fn seal(key: &CipherKey, plaintext: &[u8], entropy: &mut dyn EntropySource) -> Result<Vec<u8>> {
    if plaintext.len() as u64 >= 1u64 << 61 {
        return Err(ContainerError::TooLarge.into());
    }
    let m = key.m();
    let (session, region) = dummy_region(key, entropy)?;

    let mut framed = Vec::with_capacity(LENGTH_HEADER + plaintext.len());
    framed.extend_from_slice(&(plaintext.len() as u64).to_be_bytes());
    framed.extend_from_slice(plaintext);
    let body = with_sentinels(&pack_words(&framed, m), m);
    let body = cipher_init(key, &session)?.encrypt_stream(&body);

    let mut out = Vec::with_capacity(4 + (region.len() + body.len()) * bytes_per_word(m));
    out.extend_from_slice(MAGIC);
    write_words(&region, m, &mut out);
    write_words(&body, m, &mut out);
    Ok(out)
}

/// A container split into its dummy region and body, not yet decrypted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedContainer {
    pub dummy: Vec<FxWord>,
    pub body: Vec<FxWord>,
}

impl ParsedContainer {
    pub fn parse(key: &CipherKey, container: &[u8]) -> Result<Self> {
        if container.len() < MAGIC.len() {
            return Err(ContainerError::Truncated.into());
        }
        if &container[..4] != MAGIC {
            return Err(ContainerError::BadMagic.into());
        }
        let m = key.m();
        let bpw = bytes_per_word(m);
        let dummy_bytes = key.dummy_len() as usize * bpw;
        let rest = &container[4..];
        if rest.len() < dummy_bytes {
            return Err(ContainerError::Truncated.into());
        }
        let dummy = read_words(&rest[..dummy_bytes], m)?;
        let body = read_words(&rest[dummy_bytes..], m)?;
        let header_words = (LENGTH_HEADER * 8).div_ceil(m as usize);
        let tail = body.len() % (BLOCK_WORDS + 1);
        if body.len() < header_words + 1 || tail == 1 {
            return Err(ContainerError::Truncated.into());
        }
        Ok(ParsedContainer { dummy, body })
    }

    pub fn session(&self, key: &CipherKey) -> Result<SessionSeed> {
        let words = (0..key.rounds()).map(|r| self.dummy[key.seed_slot(r)]).collect();
        // A zero seed slot can only come from tampering or a foreign key.
        SessionSeed::new(words).map_err(|_| ContainerError::SentinelMismatch { block: 0 }.into())
    }

    /// Decrypted body, sentinels included.
    pub fn decrypt_body(&self, key: &CipherKey) -> Result<Vec<FxWord>> {
        let session = self.session(key)?;
        Ok(cipher_init(key, &session)?.decrypt_stream(&self.body))
    }
}

/// Per-block sentinel verdicts (`true` = sentinel intact).
pub fn block_check(key: &CipherKey, container: &[u8]) -> Result<Vec<bool>> {
    let parsed = ParsedContainer::parse(key, container)?;
    let plain = parsed.decrypt_body(key)?;
    let s = sentinel(key.m());
    Ok(plain.chunks(BLOCK_WORDS + 1).map(|b| *b.last().unwrap() == s).collect())
}

pub fn open(key: &CipherKey, container: &[u8]) -> Result<Vec<u8>> {
    let m = key.m();
    let parsed = ParsedContainer::parse(key, container)?;
    let plain = parsed.decrypt_body(key)?;

    let s = sentinel(m);
    let mut payload = Vec::with_capacity(plain.len());
    for (block, chunk) in plain.chunks(BLOCK_WORDS + 1).enumerate() {
        let (last, words) = chunk.split_last().unwrap();
        if *last != s {
            return Err(ContainerError::SentinelMismatch { block }.into());
        }
        payload.extend_from_slice(words);
    }

    let header_words = (LENGTH_HEADER * 8).div_ceil(m as usize);
    let header = unpack_words(&payload[..header_words], LENGTH_HEADER, m)?;
    let claimed = u64::from_be_bytes(header.try_into().unwrap());
    let available = (payload.len() as u64 * m as u64 / 8).saturating_sub(LENGTH_HEADER as u64);
    if claimed > available {
        return Err(ContainerError::LengthExceedsPayload { claimed, available }.into());
    }
    let framed_len = LENGTH_HEADER + claimed as usize;
    let mut framed = unpack_words(&payload, framed_len, m).map_err(|_| {
        Error::from(ContainerError::LengthExceedsPayload { claimed, available })
    })?;
    Ok(framed.split_off(LENGTH_HEADER))
}
