//! `opwin` command-line front end.
//!
//! Exit codes: 0 success, 1 failing checks, 2 usage or input error,
//! 3 resource cap exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use opwin::cohen::{cohen, localization, symbol_mod_norm};
use opwin::operator::{b_norm, modulation_norm, op_stft, schatten_norm};
use opwin::phase::gaussian_window;
use opwin::stft::stft;
use opwin::verify::{self, RunConfig, SuiteReport, DEFAULT_MAX_N4, SUITES};
use opwin::weights::weight_polynomial;
use opwin::wire::Wire;
use opwin::{Error, Signal};

#[derive(Parser)]
#[command(name = "opwin", version, about = "Operator-window time-frequency analysis on Z_N")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a report.
    Verify(VerifyArgs),
    /// Compute a single transform or norm from input files.
    #[command(subcommand)]
    Compute(ComputeCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long)]
    suite: String,
    #[arg(long = "N", default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; the summary is still printed to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Largest N accepted by the O(N^4) suites.
    #[arg(long = "max-n4", default_value_t = DEFAULT_MAX_N4)]
    max_n4: usize,
    /// Record wall-clock time (reports are then no longer byte-identical).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct Output {
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from the --out extension, CSV otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct Exponents {
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// Exponent s of the weight (1 + |x| + |xi|)^s, distances taken on the torus.
    #[arg(long = "weight-s", default_value_t = 0.0)]
    weight_s: f64,
}

#[derive(Subcommand)]
enum ComputeCmd {
    /// STFT of a signal; the window defaults to the periodized Gaussian.
    Stft {
        #[arg(long = "f", alias = "in")]
        f: PathBuf,
        #[arg(long)]
        g: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Operator-window STFT of a signal.
    OpStft {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "f")]
        f: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// B_{p,q}^m norm of an operator window.
    BNorm {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        exps: Exponents,
        /// Reference window; defaults to the periodized Gaussian.
        #[arg(long)]
        window: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Schatten p-norm.
    Schatten {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Cohen's class distribution Q_T f on the phase-space grid.
    Cohen {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "f")]
        f: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Localization operator of a symbol; windows default to the periodized Gaussian.
    Localize {
        #[arg(long, alias = "in")]
        symbol: PathBuf,
        #[arg(long)]
        phi1: Option<PathBuf>,
        #[arg(long)]
        phi2: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Modulation norm of a signal, or of a phase-space symbol.
    ModNorm {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        exps: Exponents,
        #[command(flatten)]
        out: Output,
    },
}

/// Failure carrying its exit code.
struct Exit {
    code: u8,
    message: String,
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Resource { .. } => 3,
            _ => 2,
        };
        Exit {
            code,
            message: e.to_string(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Exit {
    Exit {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("opwin: {message}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Verify(args) => cmd_verify(&args),
        Command::Compute(cmd) => cmd_compute(cmd).map(|()| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("opwin: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("OPWIN_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("OPWIN_THREADS must be a positive integer, got `{raw}`"))?;
    if threads == 0 {
        return Err("OPWIN_THREADS must be a positive integer, got `0`".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, Exit> {
    let cfg = RunConfig {
        max_n4: args.max_n4,
        timing: args.timing,
    };
    let reports: Vec<SuiteReport> = if args.suite == "all" {
        let mut out = Vec::new();
        for name in SUITES {
            match verify::run_suite_with(name, args.n, args.trials, args.seed, &cfg) {
                Ok(r) => out.push(r),
                // `all` skips capped suites rather than aborting the whole run
                Err(Error::Resource { what, n, cap }) => {
                    println!("{name:<20} n={n:<3} SKIP {what} capped at n <= {cap}");
                }
                Err(e) => return Err(e.into()),
            }
        }
        out
    } else {
        vec![verify::run_suite_with(
            &args.suite,
            args.n,
            args.trials,
            args.seed,
            &cfg,
        )?]
    };
    for r in &reports {
        println!("{}", r.summary());
    }
    if let Some(path) = &args.out {
        let text = match resolve_format(args.format, Some(path), Format::Json) {
            Format::Csv => verify::reports_to_csv(&reports),
            Format::Json if reports.len() == 1 => reports[0].to_json(),
            Format::Json => serde_json::to_string_pretty(&reports).expect("reports serialize"),
        };
        fs::write(path, text).map_err(|e| io_error(path, e))?;
    }
    let failures: usize = reports.iter().map(SuiteReport::failures).sum();
    if failures > 0 {
        println!("{failures} failing check(s)");
        Ok(1)
    } else {
        Ok(0)
    }
}

fn resolve_format(explicit: Option<Format>, path: Option<&Path>, fallback: Format) -> Format {
    explicit.unwrap_or_else(|| match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        _ => fallback,
    })
}

fn read_wire(path: &Path) -> Result<Wire, Exit> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Wire::parse(&text).map_err(|e| Exit {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn read_signal(path: &Path) -> Result<Signal, Exit> {
    Ok(read_wire(path)?.to_signal()?)
}

fn read_window(path: Option<&PathBuf>, n: usize) -> Result<Signal, Exit> {
    match path {
        Some(p) => read_signal(p),
        None => Ok(gaussian_window(n)?),
    }
}

fn emit(wire: &Wire, out: &Output) -> Result<(), Exit> {
    let text = match (wire, out.format, &out.out) {
        // bare scalars print as a plain number
        (Wire::Scalar { value }, None, None) => format!("{value:?}\n"),
        _ => match resolve_format(out.format, out.out.as_deref(), Format::Csv) {
            Format::Json => wire.to_json() + "\n",
            Format::Csv => wire.to_csv(),
        },
    };
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_compute(cmd: ComputeCmd) -> Result<(), Exit> {
    match cmd {
        ComputeCmd::Stft { f, g, out } => {
            let f = read_signal(&f)?;
            let g = read_window(g.as_ref(), f.n())?;
            emit(&Wire::from_field(&stft(&f, &g)?), &out)
        }
        ComputeCmd::OpStft { input, f, out } => {
            let s = read_wire(&input)?.to_operator()?;
            let f = read_signal(&f)?;
            emit(&Wire::from_vec_field(&op_stft(&s, &f)?), &out)
        }
        ComputeCmd::BNorm {
            input,
            exps,
            window,
            out,
        } => {
            let s = read_wire(&input)?.to_operator()?;
            let m = weight_polynomial(s.n(), exps.weight_s)?;
            let g = read_window(window.as_ref(), s.n())?;
            let value = b_norm(&s, exps.p, exps.q, &m, &g)?;
            emit(&Wire::Scalar { value }, &out)
        }
        ComputeCmd::Schatten { input, p, out } => {
            let t = read_wire(&input)?.to_operator()?;
            let value = schatten_norm(&t, p)?;
            emit(&Wire::Scalar { value }, &out)
        }
        ComputeCmd::Cohen { input, f, out } => {
            let t = read_wire(&input)?.to_operator()?;
            let f = read_signal(&f)?;
            emit(&Wire::from_field(&cohen(&t, &f)?), &out)
        }
        ComputeCmd::Localize {
            symbol,
            phi1,
            phi2,
            out,
        } => {
            let a = read_wire(&symbol)?.to_field()?;
            let phi1 = read_window(phi1.as_ref(), a.n())?;
            let phi2 = read_window(phi2.as_ref(), a.n())?;
            emit(&Wire::from_operator(&localization(&a, &phi1, &phi2)?), &out)
        }
        ComputeCmd::ModNorm { input, exps, out } => {
            let value = match read_wire(&input)? {
                w @ Wire::Signal { .. } => {
                    let f = w.to_signal()?;
                    let m = weight_polynomial(f.n(), exps.weight_s)?;
                    modulation_norm(&f, exps.p, exps.q, &m)?
                }
                w @ Wire::Field { .. } => {
                    if exps.weight_s != 0.0 {
                        return Err(Exit {
                            code: 2,
                            message: "--weight-s is only supported for signal inputs".into(),
                        });
                    }
                    symbol_mod_norm(&w.to_field()?, exps.p, exps.q)?
                }
                other => {
                    return Err(Exit {
                        code: 2,
                        message: format!("mod-norm expects a signal or a field, found a {}", other.kind()),
                    })
                }
            };
            emit(&Wire::Scalar { value }, &out)
        }
    }
}
