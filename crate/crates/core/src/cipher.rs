//! The mixing state machine.
//!
//! Two logistic trajectories run side by side. `xprime` evolves freely;
//! `x` is re-seeded every step with the ciphertext word, which is what makes
//! the receiver's state follow the sender's. Per word:
//!
//! ```text
//! P  = x ^ x'            C = P ^ y
//! x  <- F(x) ^ C         x' <- F(x')
//! ```

use crate::error::{Error, Result};
use crate::fxchaos::{logistic_step, FxWord, Lambda};
use crate::keyspace::{repair_constant, CipherKey, SessionSeed};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CipherState {
    x: FxWord,
    xprime: FxWord,
    lambda: Lambda,
}

impl CipherState {
    /// State from explicit trajectory values. `xprime` may not be zero.
    pub fn from_parts(x: FxWord, xprime: FxWord, lambda: Lambda) -> Result<Self> {
        if x.width() != xprime.width() {
            return Err(Error::Input("x and x' widths differ".into()));
        }
        if xprime.is_zero() {
            return Err(Error::ZeroSeed { index: 0 });
        }
        Ok(CipherState { x, xprime, lambda })
    }

    pub fn x(&self) -> FxWord {
        self.x
    }

    pub fn xprime(&self) -> FxWord {
        self.xprime
    }

    pub fn lambda(&self) -> Lambda {
        self.lambda
    }

    /// `P = x ^ x'` for the word about to be processed.
    #[inline]
    pub fn difference(&self) -> FxWord {
        self.x ^ self.xprime
    }

    #[inline]
    fn advance(&mut self, c: FxWord) {
        let x_next = logistic_step(self.x, self.lambda);
        let xp_next = logistic_step(self.xprime, self.lambda);
        self.x = x_next ^ c;
        self.xprime = if xp_next.is_zero() { repair_constant(xp_next.width()) } else { xp_next };
    }

    #[inline]
    pub fn encrypt_word(&mut self, y: FxWord) -> FxWord {
        let c = self.difference() ^ y;
        self.advance(c);
        c
    }

    #[inline]
    pub fn decrypt_word(&mut self, c: FxWord) -> FxWord {
        let y = self.difference() ^ c;
        self.advance(c);
        y
    }

    pub fn encrypt_in_place(&mut self, words: &mut [FxWord]) {
        for w in words {
            *w = self.encrypt_word(*w);
        }
    }

    pub fn decrypt_in_place(&mut self, words: &mut [FxWord]) {
        for w in words {
            *w = self.decrypt_word(*w);
        }
    }
}

/// One state per encryption round; round `r`'s ciphertext is round `r+1`'s
/// plaintext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundPipeline {
    states: Vec<CipherState>,
}

impl RoundPipeline {
    pub fn from_states(states: Vec<CipherState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidKey("round count must be at least 1".into()));
        }
        Ok(RoundPipeline { states })
    }

    pub fn states(&self) -> &[CipherState] {
        &self.states
    }

    pub fn rounds(&self) -> usize {
        self.states.len()
    }

    pub fn encrypt_stream(&mut self, words: &[FxWord]) -> Vec<FxWord> {
        let mut out = words.to_vec();
        for state in &mut self.states {
            state.encrypt_in_place(&mut out);
        }
        out
    }

    pub fn decrypt_stream(&mut self, words: &[FxWord]) -> Vec<FxWord> {
        let mut out = words.to_vec();
        for state in self.states.iter_mut().rev() {
            state.decrypt_in_place(&mut out);
        }
        out
    }
}

/// Initial pipeline for a message: x₁ from the session, x'₁ per key mode.
pub fn cipher_init(key: &CipherKey, session: &SessionSeed) -> Result<RoundPipeline> {
    let words = session.words();
    if words.len() != key.rounds() {
        return Err(Error::SeedCount { expected: key.rounds(), got: words.len() });
    }
    let states = words
        .iter()
        .enumerate()
        .map(|(r, &x1)| {
            if x1.is_zero() {
                return Err(Error::ZeroSeed { index: r });
            }
            if x1.width() != key.m() {
                return Err(Error::WordOutOfRange { raw: x1.raw() as u64, m: key.m() });
            }
            let xprime = key.initial_xprime(r, x1)?;
            Ok(CipherState { x: x1, xprime, lambda: key.lambdas()[r] })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RoundPipeline { states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyspace::XPrimeMode;

    fn w(raw: u32) -> FxWord {
        FxWord::new(raw, 16).unwrap()
    }

    fn key16(rounds: usize) -> CipherKey {
        CipherKey::new(16, 16, &vec![0x10000; rounds], XPrimeMode::Derived, 32, 0, 1).unwrap()
    }

    #[test]
    fn init_derives_xprime() {
        let p = cipher_init(&key16(1), &SessionSeed::new(vec![w(0x1234)]).unwrap()).unwrap();
        let s = p.states()[0];
        assert_eq!(s.x(), w(0x1234));
        assert_eq!(s.xprime(), logistic_step(w(0x1234), Lambda::one(16).unwrap()));

        let p = cipher_init(&key16(3), &SessionSeed::new(vec![w(1), w(2), w(3)]).unwrap()).unwrap();
        assert_eq!(p.rounds(), 3);
    }

    #[test]
    fn init_rejects_bad_sessions() {
        assert!(SessionSeed::new(vec![w(0)]).is_err());
        let two = SessionSeed::new(vec![w(1), w(2)]).unwrap();
        assert_eq!(
            cipher_init(&key16(1), &two),
            Err(Error::SeedCount { expected: 1, got: 2 })
        );
    }

    #[test]
    fn equal_trajectories_leak_plaintext() {
        let one = Lambda::one(16).unwrap();
        let mut s = CipherState::from_parts(w(0x7777), w(0x7777), one).unwrap();
        assert_eq!(s.encrypt_word(w(0x00FF)), w(0x00FF));

        let mut s = CipherState::from_parts(w(1), w(2), one).unwrap();
        assert_eq!(s.encrypt_word(w(0)), w(3));
    }

    #[test]
    fn word_round_trip_exhaustive_m8() {
        let lambda = Lambda::new(0xFE, 8).unwrap();
        let base = CipherState::from_parts(
            FxWord::new(0x3C, 8).unwrap(),
            FxWord::new(0x91, 8).unwrap(),
            lambda,
        )
        .unwrap();
        for y in 0..=0xFF {
            let y = FxWord::new(y, 8).unwrap();
            let (mut enc, mut dec) = (base, base);
            let c = enc.encrypt_word(y);
            assert_eq!(dec.decrypt_word(c), y);
            assert_eq!(enc, dec);
        }
    }

    #[test]
    fn free_trajectory_never_zero() {
        // λ small enough that x' collapses to 0 quickly without repair.
        let lambda = Lambda::new(0x3000, 16).unwrap();
        let mut s = CipherState::from_parts(w(0x100), w(0x100), lambda).unwrap();
        for _ in 0..200 {
            s.encrypt_word(w(0xABCD));
            assert!(!s.xprime().is_zero());
        }
    }

    #[test]
    fn multi_round_is_composition() {
        let key = CipherKey::new(16, 16, &[0xFFF0, 0xFD80], XPrimeMode::Derived, 32, 3, 5).unwrap();
        let session = SessionSeed::new(vec![w(0xBEEF), w(0x1357)]).unwrap();
        let plain: Vec<_> = (0..500u32).map(|i| w(i * 131 % 65536)).collect();

        let mut p = cipher_init(&key, &session).unwrap();
        let both = p.encrypt_stream(&plain);

        let mut states = cipher_init(&key, &session).unwrap().states().to_vec();
        let mut manual = plain.clone();
        states[0].encrypt_in_place(&mut manual);
        states[1].encrypt_in_place(&mut manual);
        assert_eq!(both, manual);

        let mut p = cipher_init(&key, &session).unwrap();
        assert_eq!(p.decrypt_stream(&both), plain);
    }

    #[test]
    fn corruption_damages_the_corrupted_word_and_its_successor() {
        let key = key16(1);
        let session = SessionSeed::new(vec![w(0x1234)]).unwrap();
        let plain: Vec<_> = (0..64u32).map(|i| w(0x4141 + i)).collect();
        let mut cipher = cipher_init(&key, &session).unwrap().encrypt_stream(&plain);
        cipher[10] = cipher[10] ^ w(0x0100);
        let out = cipher_init(&key, &session).unwrap().decrypt_stream(&cipher);
        assert_eq!(out[..10], plain[..10]);
        assert_ne!(out[10], plain[10]);
        assert_ne!(out[11], plain[11]);
    }
}
