//! Command line front end for the cohomology engine.
//!
//! Verbs take module files in the `phigamma v1` format and print stable,
//! reproducible reports; `--machine` switches to `begin <section>` /
//! `key = value` / `end <section>` blocks meant for scripts.  Exit codes:
//! 0 success, 1 validation or consistency failure, 2 window stabilization
//! gave up, 3 malformed input file, 64 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use phigamma::c3::{c3_h0, verify_symbolic_complex, TwoGenModule};
use phigamma::charp::{FqElement, FqParams};
use phigamma::cohomology::expected_euler_characteristic;
use phigamma::duality::pairing_reports;
use phigamma::oracle::{equivalence_experiment, smallest_irreducible};
use phigamma::snf::Presentation;
use phigamma::textio::{parse_module, serialize_module, ModuleFile};
use phigamma::witt::{witt_to_coeff, witt_to_znp, znp_to_witt, FqWittCtx, WittRing};
use phigamma::{cohomology, EngineOptions, Error, RingParams};

// ---------------------------------------------------------------- argument plumbing

#[derive(Parser)]
#[command(
    name = "phigamma",
    version,
    about = "Galois cohomology of étale Φ-Γ-modules over truncated Cohen rings"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a module file and check every module axiom
    Validate {
        file: PathBuf,
        #[arg(long)]
        machine: bool,
    },
    /// Cohomology in degrees 0, 1, 2 with stabilized windows
    H {
        file: PathBuf,
        #[command(flatten)]
        win: WindowArgs,
        #[arg(long)]
        machine: bool,
    },
    /// Euler characteristic: the computed alternating sum and the value
    /// forced by rank and torsion
    Euler {
        file: PathBuf,
        #[command(flatten)]
        win: WindowArgs,
        #[arg(long)]
        machine: bool,
    },
    /// Print the dual module (values in the differential twist) as a module
    /// file
    Dual { file: PathBuf },
    /// Duality pairing tables and perfectness in all three degrees
    Pair {
        file: PathBuf,
        #[command(flatten)]
        win: WindowArgs,
        #[arg(long)]
        machine: bool,
    },
    /// The two-generator complex
    #[command(subcommand)]
    C3(C3Cmd),
    /// Brute-force cross-checks over finite fields
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Witt vector arithmetic checks
    #[command(subcommand)]
    Witt(WittCmd),
}

#[derive(Subcommand)]
enum C3Cmd {
    /// Check symbolically that the three-term complex composes to zero
    Verify {
        /// Exponent in the commutation rule γγ′ = (γ′)^a γ
        #[arg(long)]
        a: u64,
        #[arg(long)]
        machine: bool,
    },
    /// Invariants of a module with a `gammaprime:` block
    H0 {
        file: PathBuf,
        #[command(flatten)]
        win: WindowArgs,
        #[arg(long)]
        machine: bool,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Compare the fixed-space route with the direct procyclic formulas on
    /// seeded random representations
    Equivalence {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        cases: usize,
        #[arg(long)]
        machine: bool,
    },
}

#[derive(Subcommand)]
enum WittCmd {
    /// Exercise the ring laws: W₂(F₃) against ℤ/9 exhaustively, F∘V = p and
    /// the coefficient-ring bridge on seeded random vectors
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        machine: bool,
    },
}

#[derive(Args)]
struct WindowArgs {
    /// Starting window lo:hi; the engine stabilizes from radius max(-lo, hi)
    #[arg(long, default_value = "-32:32", value_parser = parse_window, allow_hyphen_values = true)]
    window: (i64, i64),
    /// Radius at which window doubling gives up
    #[arg(long, default_value_t = 256)]
    max_window: i64,
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| "expected lo:hi, e.g. -32:32".to_string())?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad lower bound '{lo}'"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad upper bound '{hi}'"))?;
    if lo > hi {
        return Err(format!("window {lo}:{hi} is empty"));
    }
    Ok((lo, hi))
}

impl WindowArgs {
    fn options(&self) -> EngineOptions {
        let radius = (-self.window.0).max(self.window.1).max(1);
        EngineOptions { window_start: radius, window_max: self.max_window.max(radius) }
    }
}

// ---------------------------------------------------------------- failure plumbing

enum Failure {
    Lib(Error),
    Io(PathBuf, std::io::Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Lib(e)
    }
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Lib(e) => {
                eprintln!("error: {e}");
                match e {
                    Error::Parse { .. } => ExitCode::from(3),
                    Error::NoStabilization(_) => ExitCode::from(2),
                    _ => ExitCode::from(1),
                }
            }
            Failure::Io(path, e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                ExitCode::from(1)
            }
            Failure::Check(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(64) };
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

// ---------------------------------------------------------------- shared formatting

fn load(path: &PathBuf) -> Result<ModuleFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(path.clone(), e))?;
    Ok(parse_module(&text)?)
}

fn exponent_list(orders: &[u32]) -> String {
    orders.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
}

/// `Z/9 + Z/3` style rendering of invariant-factor exponents.
fn group_name(p: u64, orders: &[u32]) -> String {
    if orders.is_empty() {
        return "0".into();
    }
    orders.iter().map(|&e| format!("Z/{}", p.pow(e))).collect::<Vec<_>>().join(" + ")
}

fn machine_block(name: &str, pairs: &[(&str, String)]) {
    println!("begin {name}");
    for (k, v) in pairs {
        println!("{k} = {v}");
    }
    println!("end {name}");
}

fn ring_name(m: &phigamma::PhiGammaModule) -> String {
    let p = m.params.p();
    let n = m.params.n();
    let q = p.pow(m.params.f() as u32);
    format!("W_{n}(F_{q})((pi))")
}

// ---------------------------------------------------------------- verbs

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Validate { file, machine } => {
            let parsed = load(&file)?;
            let m = &parsed.module;
            let gp = match &parsed.gammaprime {
                Some(gp) => {
                    TwoGenModule::new(m.clone(), gp.clone())?;
                    "present"
                }
                None => "absent",
            };
            if machine {
                machine_block(
                    "validate",
                    &[
                        ("file", file.display().to_string()),
                        ("p", m.params.p().to_string()),
                        ("n", m.params.n().to_string()),
                        ("f", m.params.f().to_string()),
                        ("chi", m.act.a().to_string()),
                        ("rank", m.rank().to_string()),
                        ("torsion", exponent_list(&m.torsion)),
                        ("gammaprime", gp.into()),
                        ("ok", "true".into()),
                    ],
                );
            } else {
                println!(
                    "{}: valid rank-{} module over {} with chi = {}",
                    file.display(),
                    m.rank(),
                    ring_name(m),
                    m.act.a()
                );
                if parsed.gammaprime.is_some() {
                    println!("the gammaprime block satisfies the two-generator relations");
                }
            }
            Ok(())
        }

        Cmd::H { file, win, machine } => {
            let parsed = load(&file)?;
            let m = &parsed.module;
            let res = cohomology(m, &win.options())?;
            let (h0, h1, h2) = res.invariants();
            let p = m.params.p();
            if machine {
                machine_block(
                    "h",
                    &[
                        ("file", file.display().to_string()),
                        ("p", p.to_string()),
                        ("n", m.params.n().to_string()),
                        ("f", m.params.f().to_string()),
                        ("rank", m.rank().to_string()),
                        ("window", res.window.to_string()),
                        ("h0", exponent_list(&h0)),
                        ("h1", exponent_list(&h1)),
                        ("h2", exponent_list(&h2)),
                    ],
                );
            } else {
                println!("H^0 = {}", group_name(p, &h0));
                println!("H^1 = {}", group_name(p, &h1));
                println!("H^2 = {}", group_name(p, &h2));
                println!("stabilized at window radius {}", res.window);
            }
            Ok(())
        }

        Cmd::Euler { file, win, machine } => {
            let parsed = load(&file)?;
            let m = &parsed.module;
            let res = cohomology(m, &win.options())?;
            let computed = res.euler_characteristic();
            let predicted = expected_euler_characteristic(m);
            let (h0, h1, h2) = res.invariants();
            let lengths: Vec<i64> = [&h0, &h1, &h2]
                .iter()
                .map(|o| o.iter().map(|&e| e as i64).sum())
                .collect();
            if machine {
                machine_block(
                    "euler",
                    &[
                        ("file", file.display().to_string()),
                        ("h0_length", lengths[0].to_string()),
                        ("h1_length", lengths[1].to_string()),
                        ("h2_length", lengths[2].to_string()),
                        ("computed", computed.to_string()),
                        ("predicted", predicted.to_string()),
                        ("agree", (computed == predicted).to_string()),
                    ],
                );
            } else {
                println!(
                    "l(H^0) - l(H^1) + l(H^2) = {} - {} + {} = {computed}",
                    lengths[0], lengths[1], lengths[2]
                );
                println!("-f * (torsion sum)       = {predicted}");
                println!(
                    "{}",
                    if computed == predicted {
                        "the two readings agree"
                    } else {
                        "MISMATCH between the computed and forced values"
                    }
                );
            }
            if computed == predicted {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "euler characteristic {computed} does not match the forced value {predicted}"
                )))
            }
        }

        Cmd::Dual { file } => {
            let parsed = load(&file)?;
            let dual = parsed.module.hom_dual(None)?;
            print!("{}", serialize_module(&dual, None));
            Ok(())
        }

        Cmd::Pair { file, win, machine } => {
            let parsed = load(&file)?;
            let m = &parsed.module;
            let p = m.params.p();
            let reports = pairing_reports(m, &win.options())?;
            let mut all = true;
            for r in &reports {
                all &= r.perfect;
                let (dl, dr) = r.degrees;
                let rows: Vec<String> = (0..r.table.rows)
                    .map(|i| {
                        (0..r.table.cols)
                            .map(|j| r.table.at(i, j).to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .collect();
                if machine {
                    machine_block(
                        &format!("pairing-{dl}-{dr}"),
                        &[
                            ("left", exponent_list(&r.left_orders)),
                            ("right", exponent_list(&r.right_orders)),
                            ("table", rows.join(";")),
                            ("perfect", r.perfect.to_string()),
                        ],
                    );
                } else {
                    println!("H^{dl}(M) x H^{dr}(M~) -> Z/p^n:");
                    println!("  left  = {}", group_name(p, &r.left_orders));
                    println!("  right = {}", group_name(p, &r.right_orders));
                    if r.table.rows > 0 && r.table.cols > 0 {
                        for row in &rows {
                            println!("  [{}]", row.replace(',', " "));
                        }
                    }
                    println!("  {}", if r.perfect { "perfect" } else { "NOT PERFECT" });
                }
            }
            if !machine {
                println!(
                    "{}",
                    if all {
                        "the pairing is perfect in every degree"
                    } else {
                        "the pairing FAILS to be perfect in some degree"
                    }
                );
            }
            if all {
                Ok(())
            } else {
                Err(Failure::Check("the duality pairing is not perfect".into()))
            }
        }

        Cmd::C3(C3Cmd::Verify { a, machine }) => {
            verify_symbolic_complex(a)?;
            if machine {
                machine_block("c3-verify", &[("a", a.to_string()), ("ok", "true".into())]);
            } else {
                println!(
                    "with gamma*gamma' = gamma'^{a}*gamma the three-term complex composes to zero: A1*A0 = 0 and A2*A1 = 0"
                );
            }
            Ok(())
        }

        Cmd::C3(C3Cmd::H0 { file, win, machine }) => {
            let parsed = load(&file)?;
            let gp = parsed.gammaprime.ok_or_else(|| {
                Failure::Lib(Error::WrongModule(
                    "the file has no gammaprime: block, so the two-generator complex is not defined"
                        .into(),
                ))
            })?;
            let p = parsed.module.params.p();
            let tg = TwoGenModule::new(parsed.module, gp)?;
            let h0: Presentation = c3_h0(&tg, &win.options())?;
            if machine {
                machine_block("c3-h0", &[("h0", exponent_list(&h0.orders))]);
            } else {
                println!("H^0 = {}", group_name(p, &h0.orders));
            }
            Ok(())
        }

        Cmd::Oracle(OracleCmd::Equivalence { seed, cases, machine }) => {
            let records = equivalence_experiment(seed, cases)?;
            let agreeing = records.iter().filter(|c| c.agrees()).count();
            if machine {
                machine_block(
                    "oracle-equivalence",
                    &[
                        ("seed", seed.to_string()),
                        ("cases", cases.to_string()),
                        ("agreeing", agreeing.to_string()),
                        ("ok", (agreeing == cases).to_string()),
                    ],
                );
            } else {
                for (i, c) in records.iter().enumerate() {
                    println!(
                        "case {:>3}: q={} m={} d={}  fixed-space ({}, {})  direct ({}, {})  {}",
                        i + 1,
                        c.q,
                        c.m,
                        c.d,
                        c.h0_fixed_route,
                        c.h1_fixed_route,
                        c.h0_direct,
                        c.h1_direct,
                        if c.agrees() { "ok" } else { "MISMATCH" }
                    );
                }
                println!("{agreeing}/{cases} cases agree");
            }
            if agreeing == cases {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "{} of {cases} cases disagree between the two routes",
                    cases - agreeing
                )))
            }
        }

        Cmd::Witt(WittCmd::Selftest { seed, machine }) => witt_selftest(seed, machine),
    }
}

// ---------------------------------------------------------------- witt selftest

fn witt_selftest(seed: u64, machine: bool) -> Result<(), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // W₂(F₃) against ℤ/9, every pair, both operations
    let f3 = FqParams::new(3, 1, None)?;
    let ring2 = WittRing::new(FqWittCtx { params: f3 }, 2)?;
    let mut exhaustive = 0usize;
    for v in 0..9u64 {
        for w in 0..9u64 {
            let x = znp_to_witt(&ring2, v, 2);
            let y = znp_to_witt(&ring2, w, 2);
            let sum = witt_to_znp(&ring2, &ring2.add(&x, &y));
            let prod = witt_to_znp(&ring2, &ring2.mul(&x, &y));
            if sum != (v + w) % 9 || prod != (v * w) % 9 {
                return Err(Failure::Check(format!(
                    "W_2(F_3) disagrees with Z/9 at ({v}, {w}): got sum {sum}, product {prod}"
                )));
            }
            exhaustive += 1;
        }
    }

    // F∘V = p on random vectors over F₉
    let f9 = FqParams::new(3, 2, Some(smallest_irreducible(3, 2)))?;
    let ring3 = WittRing::new(FqWittCtx { params: f9.clone() }, 3)?;
    let random_elt = |rng: &mut ChaCha8Rng| {
        let c = [rng.random_range(0..3u64), rng.random_range(0..3u64)];
        FqElement::from_coeffs(&f9, &c)
    };
    let fv_samples = 100usize;
    for _ in 0..fv_samples {
        let x = vec![random_elt(&mut rng), random_elt(&mut rng)];
        let fv = ring3.frobenius(&ring3.verschiebung(&x));
        let px = ring3.mul(&x, &ring3.scalar(3, 2));
        if fv != px {
            return Err(Failure::Check("F(V(x)) differs from p*x over F_9".into()));
        }
    }

    // the bridge into the coefficient ring is a ring map on random pairs
    let params = RingParams::new(3, 2, 2, Some(smallest_irreducible(3, 2)))?;
    let ring = WittRing::new(FqWittCtx { params: f9.clone() }, 2)?;
    let bridge_samples = 100usize;
    for _ in 0..bridge_samples {
        let x = vec![random_elt(&mut rng), random_elt(&mut rng)];
        let y = vec![random_elt(&mut rng), random_elt(&mut rng)];
        let xs = witt_to_coeff(&ring, &x, &params);
        let ys = witt_to_coeff(&ring, &y, &params);
        let sum = witt_to_coeff(&ring, &ring.add(&x, &y), &params);
        let prod = witt_to_coeff(&ring, &ring.mul(&x, &y), &params);
        if xs.add(&ys) != sum || xs.mul(&ys) != prod {
            return Err(Failure::Check(
                "the Witt model and the coefficient ring disagree over F_9".into(),
            ));
        }
    }

    if machine {
        machine_block(
            "witt-selftest",
            &[
                ("seed", seed.to_string()),
                ("exhaustive_pairs", exhaustive.to_string()),
                ("fv_samples", fv_samples.to_string()),
                ("bridge_samples", bridge_samples.to_string()),
                ("ok", "true".into()),
            ],
        );
    } else {
        println!("W_2(F_3) matches Z/9 on all {exhaustive} pairs under + and *");
        println!("F(V(x)) = 3x on {fv_samples} random vectors over F_9");
        println!("the coefficient-ring bridge respects + and * on {bridge_samples} random pairs");
    }
    Ok(())
}
