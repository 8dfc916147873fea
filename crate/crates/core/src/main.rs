use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chaoscipher::analysis::{self, AnalysisReport};
use chaoscipher::attacks::{self, SearchSpace, DEFAULT_SPACE_CAP, DIVERGENCE_SKIP};
use chaoscipher::framing::{pack_words, read_words};
use chaoscipher::{
    keygen, open, parse_key, seal, serialize_key, CipherKey, ContainerError, EntropySource, Error,
    Execution, KeyParams, SeededEntropy, SystemEntropy,
};

/// Exit statuses. 2 is clap's usage error.
mod exit {
    pub const IO: u8 = 3;
    pub const REFUSED_OVERWRITE: u8 = 4;
    pub const BAD_KEY: u8 = 5;
    pub const SENTINEL_MISMATCH: u8 = 6;
    pub const MALFORMED_CONTAINER: u8 = 7;
    pub const BAD_INPUT: u8 = 8;
    pub const SPACE_CAP: u8 = 9;
    pub const ENTROPY: u8 = 10;
}

#[derive(Parser)]
#[command(name = "chaoscipher", version, about = "Chaotic mixing stream cipher and its analysis tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key file.
    Keygen(KeygenArgs),
    /// Seal a file into a CHS1 container.
    Encrypt(EncryptArgs),
    /// Open a CHS1 container.
    Decrypt(DecryptArgs),
    /// Run a measurement on a file.
    Analyze(AnalyzeArgs),
    /// Run an attack experiment.
    Attack(AttackArgs),
}

#[derive(Clone, Debug)]
enum EntropyChoice {
    System,
    Fixed(Vec<u8>),
}

impl EntropyChoice {
    fn source(&self) -> Box<dyn EntropySource> {
        match self {
            EntropyChoice::System => Box::new(SystemEntropy),
            EntropyChoice::Fixed(seed) => Box::new(SeededEntropy::new(seed)),
        }
    }
}

fn parse_entropy(s: &str) -> Result<EntropyChoice, String> {
    if s == "system" {
        return Ok(EntropyChoice::System);
    }
    let hex_part = s.strip_prefix("fixed:").ok_or("expected `system` or `fixed:<hex>`")?;
    let bytes = hex::decode(hex_part).map_err(|e| format!("bad hex: {e}"))?;
    if bytes.is_empty() {
        return Err("fixed entropy needs at least one byte".into());
    }
    Ok(EntropyChoice::Fixed(bytes))
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(4..=32))]
    m: u32,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(4..=32))]
    k: u32,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=65535))]
    rounds: u32,
    /// Dummy region length D in words.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(2..))]
    dummy: u32,
    /// Store an independent x'₁ per round in the key.
    #[arg(long)]
    independent: bool,
    #[arg(long, default_value = "system", value_parser = parse_entropy)]
    entropy: EntropyChoice,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct EncryptArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value = "system", value_parser = parse_entropy)]
    entropy: EntropyChoice,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct DecryptArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Measure {
    Entropy,
    Flatness,
    Complexity,
    Phase,
    Table,
    All,
}

#[derive(Args)]
struct AnalyzeArgs {
    measure: Measure,
    /// Input file (not needed for `table`).
    input: Option<PathBuf>,
    /// Word width used to read the input as big-endian bit-packed words.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(4..=32))]
    m: u32,
    #[arg(long, default_value_t = analysis::DEFAULT_SLOTS, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(2..))]
    slots: usize,
    #[arg(long, default_value_t = analysis::DEFAULT_GRID, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(2..=4096))]
    grid: usize,
    /// Write the curve / histogram / pairs as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    #[command(subcommand)]
    kind: AttackKind,
}

#[derive(Subcommand)]
enum AttackKind {
    /// Exhaustive search for initial states reproducing a known window.
    Brute(BruteArgs),
    /// Report positions where ciphertext equals known plaintext.
    Scan(ScanArgs),
    /// Ciphertext divergence under one-bit session flips.
    Avalanche(AvalancheArgs),
}

#[derive(Args)]
struct BruteArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(4..=32))]
    m: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(4..=32))]
    k: u32,
    /// Known plaintext bytes, bit-packed into m-bit words.
    #[arg(long)]
    known: PathBuf,
    /// Ciphertext file of big-endian words.
    #[arg(long)]
    cipher: PathBuf,
    /// Bytes to skip at the start of the ciphertext file.
    #[arg(long, default_value_t = 0)]
    skip: usize,
    /// Number of words to match (default: all known words).
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    independent: bool,
    /// Acknowledged search-space ceiling.
    #[arg(long, default_value_t = DEFAULT_SPACE_CAP)]
    max_space: u128,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(4..=32))]
    m: u32,
    #[arg(long)]
    plain: PathBuf,
    #[arg(long)]
    cipher: PathBuf,
    #[arg(long, default_value_t = 0)]
    skip: usize,
}

#[derive(Args)]
struct AvalancheArgs {
    #[arg(long)]
    key: PathBuf,
    /// Plaintext (default: 10240 bytes of 'A').
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 100, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    trials: usize,
    #[arg(long, default_value = "system", value_parser = parse_entropy)]
    entropy: EntropyChoice,
    #[arg(long)]
    csv: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Container(ContainerError::SentinelMismatch { .. }) => exit::SENTINEL_MISMATCH,
            Error::Container(_) => exit::MALFORMED_CONTAINER,
            Error::KeyParse(_)
            | Error::InvalidKey(_)
            | Error::WidthOutOfRange { .. }
            | Error::LambdaOutOfRange { .. } => exit::BAD_KEY,
            Error::InsufficientEntropy | Error::EntropySource(_) => exit::ENTROPY,
            Error::SpaceTooLarge { .. } => exit::SPACE_CAP,
            _ => exit::BAD_INPUT,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::new(exit::IO, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, data: &[u8], force: bool) -> CmdResult {
    if !force && path.exists() {
        return Err(Failure::new(
            exit::REFUSED_OVERWRITE,
            format!("{} exists; pass --force to overwrite", path.display()),
        ));
    }
    fs::write(path, data).map_err(|e| Failure::new(exit::IO, format!("{}: {e}", path.display())))
}

fn load_key(path: &Path) -> Result<CipherKey, Failure> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::new(exit::BAD_KEY, format!("{}: key file is not ASCII", path.display())))?;
    parse_key(&text).map_err(|e| Failure::new(exit::BAD_KEY, format!("{}: {e}", path.display())))
}

fn write_csv(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> CmdResult {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    write_file(path, &buf, true)
}

fn cmd_keygen(a: KeygenArgs) -> CmdResult {
    if !a.force && a.output.exists() {
        return write_file(&a.output, &[], false);
    }
    let params = KeyParams {
        m: a.m,
        k: a.k,
        rounds: a.rounds,
        dummy_len: a.dummy,
        independent_xprime: a.independent,
    };
    let key = keygen(params, &mut *a.entropy.source())?;
    write_file(&a.output, serialize_key(&key).as_bytes(), a.force)
}

fn cmd_encrypt(a: EncryptArgs) -> CmdResult {
    let key = load_key(&a.key)?;
    if !a.force && a.output.exists() {
        return write_file(&a.output, &[], false);
    }
    let plain = read_file(&a.input)?;
    let container = seal(&key, &plain, &mut *a.entropy.source())?;
    write_file(&a.output, &container, a.force)
}

fn cmd_decrypt(a: DecryptArgs) -> CmdResult {
    let key = load_key(&a.key)?;
    if !a.force && a.output.exists() {
        return write_file(&a.output, &[], false);
    }
    let container = read_file(&a.input)?;
    let plain = open(&key, &container)?;
    write_file(&a.output, &plain, a.force)
}

fn cmd_analyze(a: AnalyzeArgs) -> CmdResult {
    if let Measure::Table = a.measure {
        print!("{}", analysis::combiner_table());
        return Ok(());
    }
    let path = a.input.ok_or_else(|| Failure::new(2, "an input file is required"))?;
    let bytes = read_file(&path)?;
    let words = pack_words(&bytes, a.m);
    match a.measure {
        Measure::Entropy => {
            let p = analysis::entropy_profile(&words, a.slots)?;
            if let Some(csv) = &a.csv {
                write_csv(csv, |out| p.write_csv(out))?;
            }
            let v = if p.passes() { "PASS" } else { "FAIL" };
            println!("slots={} words={} H={:.6} bits", a.slots, words.len(), p.total_bits);
            println!("r2={:.6} (>= {}) {v}", p.r_squared, analysis::ENTROPY_R2_MIN);
        }
        Measure::Flatness => {
            let f = analysis::byte_flatness(&bytes)?;
            if let Some(csv) = &a.csv {
                write_csv(csv, |out| {
                    writeln!(out, "byte,count")?;
                    f.counts.iter().enumerate().try_for_each(|(b, c)| writeln!(out, "{b},{c}"))
                })?;
            }
            let v = if f.passes() { "PASS" } else { "FAIL" };
            println!("bytes={} ratio={:.6} chi2={:.2}", bytes.len(), f.ratio, f.chi_square);
            println!("max_deviation={:.6} (<= {}) {v}", f.max_deviation, analysis::FLATNESS_MAX_DEVIATION);
        }
        Measure::Complexity => {
            let r = analysis::huffman_report(&bytes)?;
            let v = if r.ratio <= analysis::HUFFMAN_RATIO_MAX { "PASS" } else { "FAIL" };
            println!("original={} coded={} table={}", r.original_bytes, r.coded_bytes, r.table_bytes);
            println!("ratio={:.6} (<= {}) {v}", r.ratio, analysis::HUFFMAN_RATIO_MAX);
        }
        Measure::Phase => {
            let occ = analysis::phase_occupancy(&words, a.grid)?;
            if let Some(csv) = &a.csv {
                write_csv(csv, |out| {
                    writeln!(out, "x,y")?;
                    words
                        .windows(2)
                        .try_for_each(|p| writeln!(out, "{:.9},{:.9}", p[0].to_f64(), p[1].to_f64()))
                })?;
            }
            let v = if occ >= analysis::OCCUPANCY_MIN { "PASS" } else { "FAIL" };
            println!("grid={} words={}", a.grid, words.len());
            println!("occupancy={occ:.6} (>= {}) {v}", analysis::OCCUPANCY_MIN);
        }
        Measure::All => {
            let report = AnalysisReport::measure(&words, &bytes, a.slots, a.grid)?;
            if let Some(csv) = &a.csv {
                write_csv(csv, |out| report.entropy.write_csv(out))?;
            }
            print!("{report}");
        }
        Measure::Table => unreachable!(),
    }
    Ok(())
}

fn cipher_words(path: &Path, skip: usize, m: u32) -> Result<Vec<chaoscipher::FxWord>, Failure> {
    let bytes = read_file(path)?;
    let body = bytes.get(skip..).ok_or_else(|| Failure::new(exit::BAD_INPUT, "skip beyond end of file"))?;
    let bpw = (m as usize).div_ceil(8);
    let whole = body.len() / bpw * bpw;
    Ok(read_words(&body[..whole], m)?)
}

fn cmd_brute(a: BruteArgs) -> CmdResult {
    let space = SearchSpace::chaotic_band(a.m, a.k, a.independent)?;
    let known = pack_words(&read_file(&a.known)?, a.m);
    let cipher = cipher_words(&a.cipher, a.skip, a.m)?;
    let window = a.window.unwrap_or(known.len()).min(known.len()).min(cipher.len());
    println!("space: |lambda|={} x'={} size={}", space.lambda_count(),
        if a.independent { "independent" } else { "derived" }, space.size());
    println!(
        "size bits={:.3} naive bound 2^{}",
        (space.size() as f64).log2(),
        SearchSpace::naive_bits(a.m, a.k, 1)
    );
    let r = attacks::brute_force(&known[..window], &cipher[..window], &space, a.max_space)?;
    eprintln!("elapsed {:.3}s", r.elapsed_secs);
    println!("window={window} attempts={}", r.attempts);
    println!("candidates={}", r.candidates.len());
    for c in &r.candidates {
        println!("lambda={:x} x={:x} xprime={:x}", c.lambda, c.x, c.xprime);
    }
    if let Some(csv) = &a.csv {
        write_csv(csv, |out| r.write_csv(out))?;
    }
    Ok(())
}

fn cmd_scan(a: ScanArgs) -> CmdResult {
    let plain = pack_words(&read_file(&a.plain)?, a.m);
    let cipher = cipher_words(&a.cipher, a.skip, a.m)?;
    let n = plain.len().min(cipher.len());
    let scan = attacks::zero_pn_scan(&plain[..n], &cipher[..n])?;
    println!("words={n} matches={} rate={:.3e} expected={:.3e} adjacent={}",
        scan.positions.len(), scan.rate, scan.expected_rate, scan.has_adjacent());
    for p in &scan.positions {
        println!("{p}");
    }
    Ok(())
}

fn cmd_avalanche(a: AvalancheArgs) -> CmdResult {
    let key = load_key(&a.key)?;
    let plain = match &a.input {
        Some(p) => read_file(p)?,
        None => vec![b'A'; 10_240],
    };
    let words = pack_words(&plain, key.m());
    let summary = attacks::avalanche(&key, &words, a.trials, &mut *a.entropy.source(), Execution::default())?;
    if let Some(csv) = &a.csv {
        write_csv(csv, |out| summary.mean_curve.write_csv(out))?;
    }
    println!("trials={} words={}", a.trials, words.len());
    println!("mean bit difference beyond word {DIVERGENCE_SKIP}: {:.6}", summary.mean_beyond);
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Keygen(a) => cmd_keygen(a),
        Command::Encrypt(a) => cmd_encrypt(a),
        Command::Decrypt(a) => cmd_decrypt(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Attack(a) => match a.kind {
            AttackKind::Brute(b) => cmd_brute(b),
            AttackKind::Scan(s) => cmd_scan(s),
            AttackKind::Avalanche(v) => cmd_avalanche(v),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("chaoscipher: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
