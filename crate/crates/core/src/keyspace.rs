//! Key material, session seeds and the key file format.
//!
//! A key file is ASCII, one `name=hex` pair per LF-terminated line, in this
//! fixed order:
//!
//! ```text
//! m=10
//! k=10
//! n=1
//! xprime_mode=0
//! D=20
//! o=7
//! s=3
//! lambda[0]=fee3
//! ```
//!
//! `xprime_mode` is `0` (x'₁ derived from x₁) or `1` (independent x'₁, in
//! which case `xprime[0]..xprime[n-1]` follow the lambdas).

use crate::entropy::{nonzero_word, uniform_below, EntropySource};
use crate::error::{Error, KeyParseError, Result};
use crate::fxchaos::{chaotic_floor, check_width, logistic_step, mask, FxWord, Lambda};

/// Replacement for a free-running state that hits the absorbing zero.
pub fn repair_constant(m: u32) -> FxWord {
    FxWord::truncate(0x5A5A_5A5A & mask(m), m)
}

/// x'₁ = F(x₁), or the repair constant if that lands on zero.
pub fn derive_xprime(x1: FxWord, lambda: Lambda) -> Result<FxWord> {
    if x1.is_zero() {
        return Err(Error::ZeroSeed { index: 0 });
    }
    let next = logistic_step(x1, lambda);
    Ok(if next.is_zero() { repair_constant(x1.width()) } else { next })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XPrimeMode {
    Derived,
    /// One nonzero x'₁ per round, fixed by the key.
    Independent(Vec<FxWord>),
}

impl XPrimeMode {
    pub fn is_independent(&self) -> bool {
        matches!(self, XPrimeMode::Independent(_))
    }
}

/// Long-term secret: per-round λ, widths, round count, x' mode and the
/// geometry of the dummy region that hides the session seeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherKey {
    m: u32,
    k: u32,
    lambdas: Vec<Lambda>,
    xprime: XPrimeMode,
    dummy_len: u32,
    offset: u32,
    stride: u32,
}

impl CipherKey {
    /// Builds and validates a key. `lambdas` are raw values, one per round.
    pub fn new(
        m: u32,
        k: u32,
        lambdas: &[u64],
        xprime: XPrimeMode,
        dummy_len: u32,
        offset: u32,
        stride: u32,
    ) -> Result<Self> {
        check_width("m", m)?;
        check_width("k", k)?;
        let n = lambdas.len();
        if n == 0 {
            return Err(Error::InvalidKey("round count must be at least 1".into()));
        }
        let lambdas = lambdas
            .iter()
            .map(|&raw| Lambda::chaotic(raw, k))
            .collect::<Result<Vec<_>>>()?;
        if let XPrimeMode::Independent(ws) = &xprime {
            if ws.len() != n {
                return Err(Error::InvalidKey(format!("{} xprime words for {n} rounds", ws.len())));
            }
            if let Some(i) = ws.iter().position(|w| w.is_zero() || w.width() != m) {
                return Err(Error::InvalidKey(format!("xprime[{i}] must be a nonzero {m}-bit word")));
            }
        }
        check_geometry(n as u64, dummy_len, offset, stride)?;
        Ok(CipherKey { m, k, lambdas, xprime, dummy_len, offset, stride })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn rounds(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[Lambda] {
        &self.lambdas
    }

    pub fn xprime_mode(&self) -> &XPrimeMode {
        &self.xprime
    }

    pub fn dummy_len(&self) -> u32 {
        self.dummy_len
    }

    pub fn offset(&self) -> u32 {
        self.offset
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    /// Dummy-region slot holding the seed of round `r`.
    pub fn seed_slot(&self, r: usize) -> usize {
        ((self.offset as u64 + r as u64 * self.stride as u64) % self.dummy_len as u64) as usize
    }

    /// Initial x'₁ for round `r` given that round's session word.
    pub fn initial_xprime(&self, r: usize, x1: FxWord) -> Result<FxWord> {
        match &self.xprime {
            XPrimeMode::Derived => derive_xprime(x1, self.lambdas[r]),
            XPrimeMode::Independent(ws) => Ok(ws[r]),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_geometry(n: u64, dummy_len: u32, offset: u32, stride: u32) -> Result<()> {
    let d = dummy_len as u64;
    if stride == 0 || d < n * stride as u64 + 1 {
        return Err(Error::InvalidKey(format!(
            "dummy length {d} cannot hold {n} seeds at stride {stride}"
        )));
    }
    if gcd(stride as u64, d) != 1 {
        return Err(Error::InvalidKey(format!("stride {stride} shares a factor with dummy length {d}")));
    }
    if offset as u64 >= d {
        return Err(Error::InvalidKey(format!("offset {offset} not below dummy length {d}")));
    }
    Ok(())
}

/// Per-message starting values x₁, one per round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionSeed {
    words: Vec<FxWord>,
}

impl SessionSeed {
    pub fn new(words: Vec<FxWord>) -> Result<Self> {
        if let Some(index) = words.iter().position(|w| w.is_zero()) {
            return Err(Error::ZeroSeed { index });
        }
        Ok(SessionSeed { words })
    }

    pub fn generate(key: &CipherKey, entropy: &mut dyn EntropySource) -> Result<Self> {
        let words = (0..key.rounds())
            .map(|_| nonzero_word(entropy, key.m()))
            .collect::<Result<Vec<_>>>()?;
        Ok(SessionSeed { words })
    }

    pub fn words(&self) -> &[FxWord] {
        &self.words
    }

    /// Same seed with bit `bit` of round `round`'s word inverted.
    pub fn with_flipped_bit(&self, round: usize, bit: u32) -> Result<Self> {
        let mut words = self.words.clone();
        let w = words[round];
        words[round] = FxWord::truncate(w.raw() ^ (1 << bit), w.width());
        Self::new(words)
    }
}

/// Parameters for [`keygen`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyParams {
    pub m: u32,
    pub k: u32,
    pub rounds: u32,
    pub dummy_len: u32,
    pub independent_xprime: bool,
}

/// Draws a key from `entropy`: λ uniform in the chaotic band, offset uniform
/// in `[0, D)`, stride uniform among admissible residues coprime with D.
pub fn keygen(params: KeyParams, entropy: &mut dyn EntropySource) -> Result<CipherKey> {
    let KeyParams { m, k, rounds, dummy_len, independent_xprime } = params;
    check_width("m", m)?;
    check_width("k", k)?;
    if rounds == 0 {
        return Err(Error::InvalidKey("round count must be at least 1".into()));
    }
    let strides: Vec<u32> = (1..=dummy_len.saturating_sub(1) / rounds)
        .filter(|&s| gcd(s as u64, dummy_len as u64) == 1)
        .collect();
    if strides.is_empty() {
        return Err(Error::InvalidKey(format!(
            "dummy length {dummy_len} cannot hold {rounds} seeds"
        )));
    }

    let floor = chaotic_floor(k);
    let band = (1u64 << k) - floor + 1;
    let lambdas = (0..rounds)
        .map(|_| Ok(floor + uniform_below(entropy, band)?))
        .collect::<Result<Vec<_>>>()?;
    let offset = uniform_below(entropy, dummy_len as u64)? as u32;
    let stride = strides[uniform_below(entropy, strides.len() as u64)? as usize];
    let xprime = if independent_xprime {
        let ws = (0..rounds).map(|_| nonzero_word(entropy, m)).collect::<Result<Vec<_>>>()?;
        XPrimeMode::Independent(ws)
    } else {
        XPrimeMode::Derived
    };
    CipherKey::new(m, k, &lambdas, xprime, dummy_len, offset, stride)
}

pub fn serialize_key(key: &CipherKey) -> String {
    let mut out = String::new();
    let mut line = |name: &str, value: u64| out.push_str(&format!("{name}={value:x}\n"));
    line("m", key.m as u64);
    line("k", key.k as u64);
    line("n", key.rounds() as u64);
    line("xprime_mode", key.xprime.is_independent() as u64);
    line("D", key.dummy_len as u64);
    line("o", key.offset as u64);
    line("s", key.stride as u64);
    for (i, l) in key.lambdas.iter().enumerate() {
        line(&format!("lambda[{i}]"), l.raw());
    }
    if let XPrimeMode::Independent(ws) = &key.xprime {
        for (i, w) in ws.iter().enumerate() {
            line(&format!("xprime[{i}]"), w.raw() as u64);
        }
    }
    out
}

fn is_known_field(name: &str) -> bool {
    const SCALARS: [&str; 7] = ["m", "k", "n", "xprime_mode", "D", "o", "s"];
    if SCALARS.contains(&name) {
        return true;
    }
    ["lambda[", "xprime["].iter().any(|p| {
        name.strip_prefix(p)
            .and_then(|rest| rest.strip_suffix(']'))
            .is_some_and(|idx| !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit()))
    })
}

struct FieldReader<'a> {
    lines: std::iter::Enumerate<std::str::Split<'a, char>>,
    last_line: usize,
}

impl<'a> FieldReader<'a> {
    fn new(text: &'a str) -> Self {
        let body = text.strip_suffix('\n').unwrap_or(text);
        FieldReader { lines: body.split('\n').enumerate(), last_line: 0 }
    }

    fn next_raw(&mut self) -> Option<(usize, &'a str)> {
        let (i, l) = self.lines.next()?;
        self.last_line = i + 1;
        Some((i + 1, l))
    }

    /// Reads the next line, which must be `expected=<hex>`.
    fn field(&mut self, expected: &str) -> Result<(usize, u64), KeyParseError> {
        let Some((line, text)) = self.next_raw() else {
            return Err(KeyParseError::MissingField { line: self.last_line + 1, name: expected.into() });
        };
        let (name, value) = split_line(line, text)?;
        if name != expected {
            if !is_known_field(name) {
                return Err(KeyParseError::UnknownField { line, name: name.into() });
            }
            return Err(KeyParseError::OutOfOrder { line, expected: expected.into(), found: name.into() });
        }
        let parsed = if value.is_empty() || value.len() > 16 {
            None
        } else {
            u64::from_str_radix(value, 16).ok()
        };
        match parsed {
            Some(v) if value.bytes().all(|b| b.is_ascii_hexdigit()) => Ok((line, v)),
            _ => Err(KeyParseError::BadHex { line, name: name.into() }),
        }
    }
}

fn split_line(line: usize, text: &str) -> Result<(&str, &str), KeyParseError> {
    if !text.is_ascii() || text.contains('\r') {
        return Err(KeyParseError::Malformed { line });
    }
    match text.split_once('=') {
        Some((name, value)) if !name.is_empty() && !value.contains('=') => Ok((name, value)),
        _ => Err(KeyParseError::Malformed { line }),
    }
}

fn ranged(line: usize, name: &str, v: u64, lo: u64, hi: u64) -> Result<u32, KeyParseError> {
    if (lo..=hi).contains(&v) {
        Ok(v as u32)
    } else {
        Err(KeyParseError::OutOfRange { line, name: name.into() })
    }
}

pub fn parse_key(text: &str) -> Result<CipherKey, KeyParseError> {
    let mut rd = FieldReader::new(text);
    let (l, v) = rd.field("m")?;
    let m = ranged(l, "m", v, 4, 32)?;
    let (l, v) = rd.field("k")?;
    let k = ranged(l, "k", v, 4, 32)?;
    let (l, v) = rd.field("n")?;
    let n = ranged(l, "n", v, 1, u16::MAX as u64)? as usize;
    let (l, v) = rd.field("xprime_mode")?;
    let independent = ranged(l, "xprime_mode", v, 0, 1)? == 1;
    let (l, v) = rd.field("D")?;
    let dummy_len = ranged(l, "D", v, 1, u32::MAX as u64)?;
    let (l, v) = rd.field("o")?;
    let offset = ranged(l, "o", v, 0, dummy_len as u64 - 1)?;
    let (l, v) = rd.field("s")?;
    let stride = ranged(l, "s", v, 1, u32::MAX as u64)?;

    let mut lambdas = Vec::with_capacity(n);
    for i in 0..n {
        let (line, v) = rd.field(&format!("lambda[{i}]"))?;
        if v > 1u64 << k || v < chaotic_floor(k) {
            return Err(KeyParseError::LambdaOutOfRange { line });
        }
        lambdas.push(v);
    }
    let xprime = if independent {
        let mut ws = Vec::with_capacity(n);
        for i in 0..n {
            let name = format!("xprime[{i}]");
            let (line, v) = rd.field(&name)?;
            if v == 0 || v > mask(m) as u64 {
                return Err(KeyParseError::OutOfRange { line, name });
            }
            ws.push(FxWord::truncate(v as u32, m));
        }
        XPrimeMode::Independent(ws)
    } else {
        XPrimeMode::Derived
    };
    if let Some((line, text)) = rd.next_raw() {
        let (name, _) = split_line(line, text)?;
        return Err(KeyParseError::UnknownField { line, name: name.into() });
    }
    CipherKey::new(m, k, &lambdas, xprime, dummy_len, offset, stride)
        .map_err(|e| KeyParseError::Invalid(e.to_string()))
}
