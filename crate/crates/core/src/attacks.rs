//! Desk-scale attacks: exhaustive key search against a known plaintext
//! window, zero-P scanning, and trajectory divergence.

use std::time::Instant;

use crate::cipher::{cipher_init, CipherState};
use crate::entropy::{uniform_below, EntropySource};
use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::fxchaos::{chaotic_floor, check_width, FxWord, Lambda};
use crate::keyspace::{derive_xprime, CipherKey, SessionSeed};

pub const DEFAULT_SPACE_CAP: u128 = 1 << 26;
pub const MIN_KNOWN_WORDS: usize = 4;

/// What the attacker enumerates: λ over a band, x over all `m`-bit words and,
/// in independent mode, x' as well.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchSpace {
    pub m: u32,
    pub k: u32,
    pub independent_xprime: bool,
    pub lambda_lo: u64,
    pub lambda_hi: u64,
}

impl SearchSpace {
    /// The whole chaotic band `[ceil(0.99 * 2^k), 2^k]`.
    pub fn chaotic_band(m: u32, k: u32, independent_xprime: bool) -> Result<Self> {
        check_width("m", m)?;
        check_width("k", k)?;
        Ok(SearchSpace { m, k, independent_xprime, lambda_lo: chaotic_floor(k), lambda_hi: 1 << k })
    }

    pub fn lambda_count(&self) -> u64 {
        self.lambda_hi - self.lambda_lo + 1
    }

    /// Closed-form number of states: |λ| · 2^m, or |λ| · 2^(2m).
    pub fn size(&self) -> u128 {
        let per_lambda = if self.independent_xprime { 2 * self.m } else { self.m };
        (self.lambda_count() as u128) << per_lambda
    }

    /// Exponent of the naive count 2^(n(2m+k)) for `rounds` rounds.
    pub fn naive_bits(m: u32, k: u32, rounds: u32) -> u32 {
        rounds * (2 * m + k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Candidate {
    pub lambda: u64,
    pub x: u32,
    pub xprime: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    /// Sorted by λ, then x, then x'.
    pub candidates: Vec<Candidate>,
    pub attempts: u128,
    pub elapsed_secs: f64,
}

impl AttackResult {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "lambda,x,xprime")?;
        for c in &self.candidates {
            writeln!(out, "{:x},{:x},{:x}", c.lambda, c.x, c.xprime)?;
        }
        Ok(())
    }
}

fn reproduces(mut state: CipherState, plain: &[FxWord], cipher: &[FxWord]) -> bool {
    plain.iter().zip(cipher).all(|(&y, &c)| state.encrypt_word(y) == c)
}

/// Tries every initial state in `space` and keeps those that encrypt
/// `known_plain` to `observed_cipher`. Both windows start at the same stream
/// position; in derived mode that position must be the stream start.
pub fn brute_force(
    known_plain: &[FxWord],
    observed_cipher: &[FxWord],
    space: &SearchSpace,
    cap: u128,
) -> Result<AttackResult> {
    brute_force_with(known_plain, observed_cipher, space, cap, Execution::default())
}

pub fn brute_force_with(
    known_plain: &[FxWord],
    observed_cipher: &[FxWord],
    space: &SearchSpace,
    cap: u128,
    exec: Execution,
) -> Result<AttackResult> {
    if known_plain.len() != observed_cipher.len() {
        return Err(Error::LengthMismatch { left: known_plain.len(), right: observed_cipher.len() });
    }
    if known_plain.len() < MIN_KNOWN_WORDS {
        return Err(Error::Input(format!("need at least {MIN_KNOWN_WORDS} known words")));
    }
    if known_plain.iter().chain(observed_cipher).any(|w| w.width() != space.m) {
        return Err(Error::Input(format!("window words must be {} bits", space.m)));
    }
    let size = space.size();
    if size > cap {
        return Err(Error::SpaceTooLarge { size, cap, bits: (size as f64).log2() });
    }

    let started = Instant::now();
    let m = space.m;
    let words = 1usize << m;
    // One unit per (λ, x); each unit owns its cipher state.
    let units = space.lambda_count() as usize * words;
    let per_unit = map_indices(exec, units, |unit| {
        let lambda = Lambda::new(space.lambda_lo + (unit / words) as u64, space.k).unwrap();
        let x = FxWord::truncate((unit % words) as u32, m);
        let mut found = Vec::new();
        let mut attempts = 0u64;
        if space.independent_xprime {
            for xp in 0..words as u32 {
                attempts += 1;
                let xprime = FxWord::truncate(xp, m);
                if let Ok(state) = CipherState::from_parts(x, xprime, lambda) {
                    if reproduces(state, known_plain, observed_cipher) {
                        found.push(Candidate { lambda: lambda.raw(), x: x.raw(), xprime: xp });
                    }
                }
            }
        } else {
            attempts += 1;
            if let Ok(xprime) = derive_xprime(x, lambda) {
                let state = CipherState::from_parts(x, xprime, lambda).unwrap();
                if reproduces(state, known_plain, observed_cipher) {
                    found.push(Candidate { lambda: lambda.raw(), x: x.raw(), xprime: xprime.raw() });
                }
            }
        }
        (attempts, found)
    });

    let attempts = per_unit.iter().map(|(a, _)| *a as u128).sum();
    let mut candidates: Vec<Candidate> = per_unit.into_iter().flat_map(|(_, c)| c).collect();
    candidates.sort();
    Ok(AttackResult { candidates, attempts, elapsed_secs: started.elapsed().as_secs_f64() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroScan {
    pub positions: Vec<usize>,
    pub rate: f64,
    /// 2^-m, the rate expected for uniformly distributed P.
    pub expected_rate: f64,
}

impl ZeroScan {
    pub fn has_adjacent(&self) -> bool {
        self.positions.windows(2).any(|p| p[1] == p[0] + 1)
    }
}

/// Positions where the ciphertext word equals the plaintext word, i.e. where
/// P_n was zero.
pub fn zero_pn_scan(plain: &[FxWord], cipher: &[FxWord]) -> Result<ZeroScan> {
    if plain.len() != cipher.len() {
        return Err(Error::LengthMismatch { left: plain.len(), right: cipher.len() });
    }
    let positions: Vec<usize> =
        plain.iter().zip(cipher).enumerate().filter(|(_, (p, c))| p == c).map(|(i, _)| i).collect();
    let m = plain.first().map_or(16, |w| w.width());
    let rate = if plain.is_empty() { 0.0 } else { positions.len() as f64 / plain.len() as f64 };
    Ok(ZeroScan { positions, rate, expected_rate: 0.5f64.powi(m as i32) })
}

/// Outcome of tracing P through an encryption.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaTrace {
    pub words: usize,
    pub zero_events: usize,
    /// Zero-P positions whose successor difference was not `y_n`.
    pub violations: Vec<usize>,
    /// Zero-P positions immediately followed by another.
    pub adjacent: Vec<usize>,
}

/// Encrypts `plain` with `state`, checking after every P_n = 0 that
/// P_{n+1} = y_n.
pub fn trace_zero_p(state: &mut CipherState, plain: &[FxWord]) -> LemmaTrace {
    let mut trace = LemmaTrace { words: plain.len(), ..Default::default() };
    let mut pending: Option<(usize, FxWord)> = None;
    for (i, &y) in plain.iter().enumerate() {
        let p = state.difference();
        if let Some((at, y_prev)) = pending.take() {
            if p != y_prev {
                trace.violations.push(at);
            }
            if p.is_zero() {
                trace.adjacent.push(at);
            }
        }
        if p.is_zero() {
            trace.zero_events += 1;
            pending = Some((i, y));
        }
        state.encrypt_word(y);
    }
    if let Some((at, y_prev)) = pending {
        if state.difference() != y_prev {
            trace.violations.push(at);
        }
    }
    trace
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceCurve {
    /// Fraction of differing bits per ciphertext word.
    pub per_word: Vec<f64>,
}

pub const DIVERGENCE_SKIP: usize = 16;

impl DivergenceCurve {
    pub fn mean_beyond(&self, skip: usize) -> f64 {
        let tail = self.per_word.get(skip..).unwrap_or(&[]);
        if tail.is_empty() {
            0.0
        } else {
            tail.iter().sum::<f64>() / tail.len() as f64
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "word_index,bit_difference")?;
        for (i, d) in self.per_word.iter().enumerate() {
            writeln!(out, "{i},{d:.6}")?;
        }
        Ok(())
    }
}

/// Per-word Hamming distance between the encryptions of `plaintext` under
/// two sessions of the same key.
pub fn divergence(
    key: &CipherKey,
    session_a: &SessionSeed,
    session_b: &SessionSeed,
    plaintext: &[FxWord],
) -> Result<DivergenceCurve> {
    let a = cipher_init(key, session_a)?.encrypt_stream(plaintext);
    let b = cipher_init(key, session_b)?.encrypt_stream(plaintext);
    let m = key.m() as f64;
    let per_word = a.iter().zip(&b).map(|(x, y)| (x.raw() ^ y.raw()).count_ones() as f64 / m).collect();
    Ok(DivergenceCurve { per_word })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvalancheSummary {
    pub mean_curve: DivergenceCurve,
    /// Per trial mean difference beyond word 16.
    pub trial_means: Vec<f64>,
    pub mean_beyond: f64,
}

/// `trials` random sessions, each compared against itself with one random
/// bit of one round's seed flipped.
pub fn avalanche(
    key: &CipherKey,
    plaintext: &[FxWord],
    trials: usize,
    entropy: &mut dyn EntropySource,
    exec: Execution,
) -> Result<AvalancheSummary> {
    if trials == 0 || plaintext.is_empty() {
        return Err(Error::Input("avalanche needs at least one trial and one word".into()));
    }
    let mut pairs = Vec::with_capacity(trials);
    while pairs.len() < trials {
        let base = SessionSeed::generate(key, entropy)?;
        let round = uniform_below(entropy, key.rounds() as u64)? as usize;
        let bit = uniform_below(entropy, key.m() as u64)? as u32;
        // Flipping the only set bit would give a zero seed; draw again.
        if let Ok(flipped) = base.with_flipped_bit(round, bit) {
            pairs.push((base, flipped));
        }
    }
    let curves = map_indices(exec, trials, |i| divergence(key, &pairs[i].0, &pairs[i].1, plaintext));
    let curves = curves.into_iter().collect::<Result<Vec<_>>>()?;
    let n = plaintext.len();
    let mut mean = vec![0.0; n];
    for c in &curves {
        for (acc, v) in mean.iter_mut().zip(&c.per_word) {
            *acc += v / trials as f64;
        }
    }
    let trial_means: Vec<f64> = curves.iter().map(|c| c.mean_beyond(DIVERGENCE_SKIP)).collect();
    let mean_beyond = trial_means.iter().sum::<f64>() / trials as f64;
    Ok(AvalancheSummary { mean_curve: DivergenceCurve { per_word: mean }, trial_means, mean_beyond })
}
