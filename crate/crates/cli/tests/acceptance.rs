//! End-to-end checks of the `phigamma` binary: repeated invocations must
//! produce identical bytes on both streams, and exit codes must follow the
//! documented contract (0 success, 1 validation or I/O failure, 2 window
//! exhaustion, 3 parse error, 64 usage error).
//!
//! The test prints exactly one PASS or FAIL line.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phigamma"))
        .args(args)
        .output()
        .expect("the binary should spawn")
}

fn fixture_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("phigamma-cli-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("fixture directory");
    dir
}

fn write_fixture(dir: &PathBuf, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).expect("fixture file");
    path.to_str().expect("utf-8 path").to_string()
}

const TRIVIAL: &str = "phigamma v1\n\
    p = 3\n\
    n = 1\n\
    f = 1\n\
    chi = 2\n\
    rank = 1\n\
    \n\
    phi:\n\
    (0,0): 1\n\
    \n\
    gamma:\n\
    (0,0): 1\n";

const NOT_ETALE: &str = "phigamma v1\n\
    p = 3\n\
    n = 1\n\
    f = 1\n\
    chi = 2\n\
    rank = 1\n\
    \n\
    phi:\n\
    (0,0): 3\n\
    \n\
    gamma:\n\
    (0,0): 1\n";

const GARBLED: &str = "phigamma v1\np = 3\nnonsense\n";

fn check_twice(args: &[&str], label: &str) -> Result<Vec<u8>, String> {
    let a = run(args);
    let b = run(args);
    if !a.status.success() {
        return Err(format!(
            "{label}: expected success, got {:?} with stderr {}",
            a.status.code(),
            String::from_utf8_lossy(&a.stderr)
        ));
    }
    if a.stdout != b.stdout || a.stderr != b.stderr {
        return Err(format!("{label}: two runs differ"));
    }
    Ok(a.stdout)
}

fn expect_exit(args: &[&str], want: i32, label: &str) -> Result<(), String> {
    let out = run(args);
    match out.status.code() {
        Some(c) if c == want => Ok(()),
        other => Err(format!(
            "{label}: expected exit {want}, got {other:?} with stderr {}",
            String::from_utf8_lossy(&out.stderr)
        )),
    }
}

fn check(dir: &PathBuf) -> Result<String, String> {
    let trivial = write_fixture(dir, "trivial.pg", TRIVIAL);
    let not_etale = write_fixture(dir, "notetale.pg", NOT_ETALE);
    let garbled = write_fixture(dir, "garbled.pg", GARBLED);
    let missing = dir.join("missing.pg").to_str().unwrap().to_string();

    // every reporting verb, run twice, byte for byte
    let h = check_twice(&["h", "--machine", &trivial], "h --machine")?;
    let text = String::from_utf8_lossy(&h);
    for needle in ["h0 = 1", "h1 = 1,1", "h2 = ", "begin h", "end h"] {
        if !text.contains(needle) {
            return Err(format!("h --machine output misses '{needle}':\n{text}"));
        }
    }
    check_twice(&["validate", "--machine", &trivial], "validate")?;
    check_twice(&["euler", "--machine", &trivial], "euler")?;
    check_twice(&["pair", "--machine", &trivial], "pair")?;
    check_twice(&["dual", &trivial], "dual")?;
    check_twice(
        &["oracle", "equivalence", "--seed", "7", "--cases", "6"],
        "oracle equivalence",
    )?;
    check_twice(&["witt", "selftest", "--seed", "3"], "witt selftest")?;

    // the exit code contract
    expect_exit(&["validate", &trivial], 0, "valid file")?;
    expect_exit(&["validate", &not_etale], 1, "non-etale file")?;
    expect_exit(&["h", &missing], 1, "missing file")?;
    expect_exit(&["validate", &garbled], 3, "garbled file")?;
    expect_exit(
        &["h", "--max-window", "32", &trivial],
        2,
        "window exhaustion",
    )?;
    expect_exit(&["h", "--bogus-flag", &trivial], 64, "unknown flag")?;
    expect_exit(&["h"], 64, "missing argument")?;
    expect_exit(
        &["h", "--window", "-16:16", &trivial],
        0,
        "explicit window with a negative edge",
    )?;
    expect_exit(&["h", "--window", "banana", &trivial], 64, "malformed window")?;
    expect_exit(&["--help"], 0, "help")?;

    Ok("seven verbs byte-identical across two runs; exit codes 0/1/2/3/64 as documented".into())
}

#[test]
fn cli_output_is_reproducible_and_exit_codes_hold() {
    let dir = fixture_dir();
    let res = check(&dir);
    let _ = fs::remove_dir_all(&dir);
    match res {
        Ok(detail) => println!("PASS command line determinism and exit codes: {detail}"),
        Err(e) => {
            println!("FAIL command line determinism and exit codes: {e}");
            panic!("{e}");
        }
    }
}
