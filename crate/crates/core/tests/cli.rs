mod common;

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaoscipher")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn keygen_reproduces_fixture_and_refuses_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.key");
    let args = ["keygen", "--m", "16", "--k", "16", "--rounds", "1", "--dummy", "32",
        "--entropy", "fixed:DEADBEEFCAFEF00D", "-o", p(&out)];
    assert!(run(&args).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), common::fixture("key16.key"));
    assert_eq!(run(&args).status.code(), Some(4));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert!(run(&forced).status.success());

    let bad = run(&["keygen", "--rounds", "0", "-o", p(&dir.path().join("z.key"))]);
    assert_eq!(bad.status.code(), Some(2));
    let cramped = run(&["keygen", "--rounds", "3", "--dummy", "2", "-o", p(&dir.path().join("z.key"))]);
    assert_eq!(cramped.status.code(), Some(5));
}

#[test]
fn encrypt_decrypt_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let key = common::fixture_path("key16.key");
    let container = dir.path().join("hello.chs");
    let plain = dir.path().join("hello.txt");
    let enc = run(&["encrypt", "--key", p(&key), "-i", p(&common::fixture_path("hello.txt")),
        "-o", p(&container), "--entropy", &format!("fixed:{}", common::FIXTURE_ENTROPY)]);
    assert!(enc.status.success(), "{}", String::from_utf8_lossy(&enc.stderr));
    assert_eq!(std::fs::read(&container).unwrap(), common::fixture("hello.chs"));

    assert!(run(&["decrypt", "--key", p(&key), "-i", p(&container), "-o", p(&plain)]).status.success());
    assert_eq!(std::fs::read(&plain).unwrap(), b"Hello, chaos.");

    let other = dir.path().join("other.key");
    run(&["keygen", "--entropy", "fixed:01", "-o", p(&other)]);
    let wrong = run(&["decrypt", "--key", p(&other), "-i", p(&container), "-o", p(&dir.path().join("x"))]);
    assert_eq!(wrong.status.code(), Some(6));

    let missing = run(&["decrypt", "--key", p(&key), "-i", p(&dir.path().join("nope")), "-o", p(&dir.path().join("y"))]);
    assert_eq!(missing.status.code(), Some(3));

    std::fs::write(dir.path().join("junk"), b"JUNKJUNK").unwrap();
    let junk = run(&["decrypt", "--key", p(&key), "-i", p(&dir.path().join("junk")), "-o", p(&dir.path().join("z"))]);
    assert_eq!(junk.status.code(), Some(7));
}

#[test]
fn analyze_table_and_measures() {
    let out = run(&["analyze", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0 1 1 0 1 0"));
    assert!(text.trim_end().ends_with("50% 50% 50% 50% 50% 50%"));

    let dir = tempfile::tempdir().unwrap();
    let cont = dir.path().join("p.chs");
    std::fs::write(&cont, chaoscipher::seal(&common::fixture_key(), &common::prose(), &mut common::fixture_entropy()).unwrap()).unwrap();
    let csv = dir.path().join("curve.csv");
    let out = run(&["analyze", "entropy", p(&cont), "--slots", "30000", "--csv", p(&csv)]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("PASS"));
    let curve = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(curve.lines().count(), 30_001);
    assert!(curve.starts_with("slot_index,cumulative_bits\n0,"));

    let out = run(&["analyze", "complexity", p(&cont)]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("PASS"));
    let out = run(&["analyze", "complexity", p(&common::fixture_path("prose.txt"))]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));

    let out = run(&["analyze", "all", p(&cont)]);
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    for line in ["entropy", "flatness", "complexity", "phase"] {
        assert!(summary.lines().any(|l| l.starts_with(line)), "{summary}");
    }

    std::fs::write(dir.path().join("tiny"), b"ab").unwrap();
    assert_eq!(run(&["analyze", "flatness", p(&dir.path().join("tiny"))]).status.code(), Some(8));
}

#[test]
fn attack_workflows() {
    let dir = tempfile::tempdir().unwrap();
    let key = chaoscipher::CipherKey::new(8, 8, &[0xFF], chaoscipher::XPrimeMode::Derived, 9, 4, 2).unwrap();
    let plain = b"attack at dawn, bring the maps and the lanterns".to_vec();
    let container = chaoscipher::seal(&key, &plain, &mut common::fixture_entropy()).unwrap();
    let cpath = dir.path().join("c.cst");
    std::fs::write(&cpath, &container).unwrap();
    let mut known = (plain.len() as u64).to_be_bytes().to_vec();
    known.extend_from_slice(&plain[..24]);
    let kpath = dir.path().join("p.bin");
    std::fs::write(&kpath, &known).unwrap();
    let skip = (4 + 9).to_string();

    let out = run(&["attack", "brute", "--m", "8", "--k", "8", "--known", p(&kpath), "--cipher", p(&cpath), "--skip", &skip]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success());
    assert!(text.contains("attempts=768"), "{text}");
    let seed = chaoscipher::framing::ParsedContainer::parse(&key, &container).unwrap().session(&key).unwrap().words()[0];
    assert!(text.contains(&format!("candidates=1\nlambda=ff x={:x}", seed.raw())), "{text}");

    let out = run(&["attack", "brute", "--m", "16", "--k", "16", "--independent", "--known", p(&kpath), "--cipher", p(&cpath)]);
    assert_eq!(out.status.code(), Some(9));
    assert!(String::from_utf8(out.stderr).unwrap().contains(&(656u128 << 32).to_string()));

    let out = run(&["attack", "scan", "--m", "8", "--plain", p(&kpath), "--cipher", p(&cpath), "--skip", &skip]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("words=32 matches="));

    let csv = dir.path().join("aval.csv");
    let key_path = common::fixture_path("key16.key");
    let args = ["attack", "avalanche", "--key", p(&key_path), "--trials", "10",
        "--entropy", "fixed:AA", "--csv", p(&csv)];
    let first = run(&args);
    assert!(first.status.success());
    let curve = std::fs::read(&csv).unwrap();
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(curve, std::fs::read(&csv).unwrap());
}
