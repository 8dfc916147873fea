//! Measurements on cipher output: slot entropy profile, byte-level flatness,
//! Huffman compressibility, phase-space occupancy and the 1-bit combiner
//! table.

mod huffman;

use std::fmt;

pub use huffman::{
    byte_counts, canonical_codes, code_lengths, decode as huffman_decode, encode as huffman_encode,
    huffman_ratio, huffman_report, kraft_sum, Encoded, HuffmanReport,
};

use crate::error::{Error, Result};
use crate::fxchaos::FxWord;

pub const DEFAULT_SLOTS: usize = 30_000;
pub const DEFAULT_GRID: usize = 64;

/// Verdict thresholds.
pub const ENTROPY_R2_MIN: f64 = 0.99;
pub const FLATNESS_MAX_DEVIATION: f64 = 0.10;
pub const HUFFMAN_RATIO_MAX: f64 = 1.0;
pub const OCCUPANCY_MIN: f64 = 0.5;

/// Counts of word values over `M` equal-width slots of the `m`-bit space;
/// value `v` lands in slot `floor(v * M / 2^m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotHistogram {
    counts: Vec<u64>,
    total: u64,
}

impl SlotHistogram {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        SlotHistogram { counts, total }
    }

    pub fn build(words: &[FxWord], slots: usize) -> Result<Self> {
        if slots < 2 {
            return Err(Error::Analysis("slot count must be at least 2".into()));
        }
        let mut counts = vec![0u64; slots];
        for w in words {
            counts[slot_of(*w, slots)] += 1;
        }
        Ok(SlotHistogram { counts, total: words.len() as u64 })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn slots(&self) -> usize {
        self.counts.len()
    }
}

#[inline]
pub fn slot_of(w: FxWord, slots: usize) -> usize {
    ((w.raw() as u128 * slots as u128) >> w.width()) as usize
}

#[inline]
fn surprisal_term(count: u64, total: u64) -> f64 {
    if count == 0 {
        0.0
    } else {
        let p = count as f64 / total as f64;
        -p * p.log2()
    }
}

/// `-Σ p log2 p` over occupied slots, in bits.
pub fn shannon_entropy(hist: &SlotHistogram) -> Result<f64> {
    if hist.total == 0 {
        return Err(Error::Analysis("entropy of an empty histogram".into()));
    }
    Ok(hist.counts.iter().map(|&c| surprisal_term(c, hist.total)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    /// Running entropy sum up to and including each slot, ascending value.
    pub cumulative: Vec<f64>,
    pub total_bits: f64,
    /// Coefficient of determination of the least-squares line through
    /// `(slot, cumulative)`; 0 when the curve is flat.
    pub r_squared: f64,
}

impl EntropyProfile {
    pub fn passes(&self) -> bool {
        self.r_squared >= ENTROPY_R2_MIN
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "slot_index,cumulative_bits")?;
        for (i, v) in self.cumulative.iter().enumerate() {
            writeln!(out, "{i},{v:.9}")?;
        }
        Ok(())
    }
}

pub fn r_squared(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (i, &y) in ys.iter().enumerate() {
        let dx = i as f64 - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if syy <= 0.0 {
        return 0.0;
    }
    (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
}

pub fn entropy_profile(words: &[FxWord], slots: usize) -> Result<EntropyProfile> {
    if words.is_empty() {
        return Err(Error::Analysis("entropy profile of empty input".into()));
    }
    let hist = SlotHistogram::build(words, slots)?;
    let mut acc = 0.0;
    let cumulative: Vec<f64> = hist
        .counts
        .iter()
        .map(|&c| {
            acc += surprisal_term(c, hist.total);
            acc
        })
        .collect();
    let r_squared = r_squared(&cumulative);
    Ok(EntropyProfile { total_bits: acc, cumulative, r_squared })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flatness {
    pub counts: [u64; 256],
    /// max/min count; infinite when some byte value never occurs.
    pub ratio: f64,
    /// max |count - mean| / mean.
    pub max_deviation: f64,
    /// Pearson χ² against uniform, 255 degrees of freedom. Informational.
    pub chi_square: f64,
}

impl Flatness {
    pub fn passes(&self) -> bool {
        self.max_deviation <= FLATNESS_MAX_DEVIATION
    }
}

pub fn byte_flatness(bytes: &[u8]) -> Result<Flatness> {
    if bytes.len() < 256 {
        return Err(Error::Analysis(format!(
            "flatness needs at least 256 bytes, got {}",
            bytes.len()
        )));
    }
    let counts = byte_counts(bytes);
    let max = *counts.iter().max().unwrap();
    let min = *counts.iter().min().unwrap();
    let mean = bytes.len() as f64 / 256.0;
    let ratio = if min == 0 { f64::INFINITY } else { max as f64 / min as f64 };
    let max_deviation = counts.iter().map(|&c| (c as f64 - mean).abs()).fold(0.0, f64::max) / mean;
    let chi_square = counts.iter().map(|&c| (c as f64 - mean).powi(2) / mean).sum();
    Ok(Flatness { counts, ratio, max_deviation, chi_square })
}

/// Fraction of the `g × g` grid hit by consecutive pairs `(w_i, w_{i+1})`.
pub fn phase_occupancy(words: &[FxWord], grid: usize) -> Result<f64> {
    if words.len() < 2 || grid < 2 {
        return Err(Error::Analysis("phase occupancy needs at least 2 words and grid >= 2".into()));
    }
    let mut seen = vec![false; grid * grid];
    for pair in words.windows(2) {
        seen[slot_of(pair[0], grid) * grid + slot_of(pair[1], grid)] = true;
    }
    Ok(seen.iter().filter(|&&b| b).count() as f64 / (grid * grid) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CombinerRow {
    pub x: u8,
    pub xprime: u8,
    pub p: u8,
    pub y: u8,
    pub c: u8,
    pub y_eq_c: u8,
}

impl CombinerRow {
    fn cells(&self) -> [u8; 6] {
        [self.x, self.xprime, self.p, self.y, self.c, self.y_eq_c]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinerTable {
    pub rows: [CombinerRow; 8],
    /// Percentage of ones per column.
    pub balance: [f64; 6],
}

/// All single-bit `(x, x', y)` inputs pushed through `P = x ^ x'`, `C = P ^ y`.
pub fn combiner_table() -> CombinerTable {
    let rows: [CombinerRow; 8] = std::array::from_fn(|i| {
        let (x, xprime, y) = ((i >> 2) as u8 & 1, (i >> 1) as u8 & 1, i as u8 & 1);
        let p = x ^ xprime;
        let c = p ^ y;
        CombinerRow { x, xprime, p, y, c, y_eq_c: (y == c) as u8 }
    });
    let balance = std::array::from_fn(|col| {
        rows.iter().map(|r| r.cells()[col] as f64).sum::<f64>() * 100.0 / rows.len() as f64
    });
    CombinerTable { rows, balance }
}

impl fmt::Display for CombinerTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "x_n x'_n P_n y_n C_n y_n=C_n")?;
        for r in &self.rows {
            let [a, b, c, d, e, g] = r.cells();
            writeln!(f, "{a} {b} {c} {d} {e} {g}")?;
        }
        let pct: Vec<String> = self.balance.iter().map(|b| format!("{b:.0}%")).collect();
        writeln!(f, "{}", pct.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Full battery over one ciphertext: `words` for the word-level checks and
/// `bytes` for the byte-level ones.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub entropy: EntropyProfile,
    pub flatness: Option<Flatness>,
    pub huffman: HuffmanReport,
    pub occupancy: f64,
    pub entropy_verdict: Verdict,
    pub flatness_verdict: Option<Verdict>,
    pub huffman_verdict: Verdict,
    pub occupancy_verdict: Verdict,
}

impl AnalysisReport {
    pub fn measure(words: &[FxWord], bytes: &[u8], slots: usize, grid: usize) -> Result<Self> {
        let entropy = entropy_profile(words, slots)?;
        let flatness = if bytes.len() >= 256 { Some(byte_flatness(bytes)?) } else { None };
        let huffman = huffman_report(bytes)?;
        let occupancy = phase_occupancy(words, grid)?;
        Ok(AnalysisReport {
            entropy_verdict: verdict(entropy.passes()),
            flatness_verdict: flatness.as_ref().map(|f| verdict(f.passes())),
            huffman_verdict: verdict(huffman.ratio <= HUFFMAN_RATIO_MAX),
            occupancy_verdict: verdict(occupancy >= OCCUPANCY_MIN),
            entropy,
            flatness,
            huffman,
            occupancy,
        })
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "entropy    r2={:.6} H={:.4} bits  (r2 >= {ENTROPY_R2_MIN}) {}",
            self.entropy.r_squared, self.entropy.total_bits, self.entropy_verdict
        )?;
        match (&self.flatness, self.flatness_verdict) {
            (Some(fl), Some(v)) => writeln!(
                f,
                "flatness   max_dev={:.4} ratio={:.4} chi2={:.2}  (max_dev <= {FLATNESS_MAX_DEVIATION}) {v}",
                fl.max_deviation, fl.ratio, fl.chi_square
            )?,
            _ => writeln!(f, "flatness   skipped (fewer than 256 bytes)")?,
        }
        writeln!(
            f,
            "complexity ratio={:.4}  (ratio <= {HUFFMAN_RATIO_MAX}) {}",
            self.huffman.ratio, self.huffman_verdict
        )?;
        writeln!(
            f,
            "phase      occupancy={:.4}  (>= {OCCUPANCY_MIN}) {}",
            self.occupancy, self.occupancy_verdict
        )
    }
}
