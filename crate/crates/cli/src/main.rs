use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use padic_orbits::linearization::LinError;
use padic_orbits::orbit::OrbitError;
use padic_orbits::padic::PAdicError;
use padic_orbits::pcf::PcfError;
use padic_orbits::report::{self, envelope, ReportError, Suite, VerifyConfig};
use padic_orbits::tree::TreeError;
use padic_orbits::{
    critical_orbit_tree, level_profile, orbit_mod, ClassifyOptions, PAdicInt,
};

const DEFAULT_PREC: u32 = 24;

#[derive(Parser)]
#[command(name = "padic-orbits", version, about = "Critical orbits of z^2 + c over the p-adic integers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Critical orbit of z^2 + c mod p^level.
    Orbit {
        #[arg(long)]
        p: u64,
        /// Signed integer or `digits:d0.d1d2...`.
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        prec: Option<u32>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite/infinite verdict from the level profile.
    Classify {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long)]
        prec: Option<u32>,
        #[arg(long)]
        kmax: Option<u32>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Orbit type at every level 1..=kmax.
    Profile {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long, default_value_t = 8)]
        kmax: u32,
        #[arg(long)]
        prec: Option<u32>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All PCF parameters in Z_p.
    Pcf {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        prec: Option<u32>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Critical-orbit tree to a given depth.
    Tree {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        prec: Option<u32>,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parameter space sweep over residues mod p^j, j <= depth.
    Atlas {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        depth: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One DOT tree per PCF parameter plus an index.json.
    Figures {
        #[arg(long)]
        p: u64,
        /// Output directory; without it only the index is printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite: c2, lemma54, pezda, tail or counts.
    Verify {
        suite: String,
        #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
        p: Vec<u64>,
        /// Inclusive range such as `2..5`.
        #[arg(long, default_value = "2..5")]
        k: String,
        #[arg(long, default_value = "1..6")]
        i: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        kmax: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Verification(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

fn padic_is_usage(e: &PAdicError) -> bool {
    matches!(
        e,
        PAdicError::NotPrime(_)
            | PAdicError::ZeroPrecision
            | PAdicError::Parse(_)
            | PAdicError::InsufficientPrecision { .. }
    )
}

fn orbit_is_usage(e: &OrbitError) -> bool {
    match e {
        OrbitError::PAdic(e) => padic_is_usage(e),
        OrbitError::ZeroLevel
        | OrbitError::LevelExceedsPrecision { .. }
        | OrbitError::WindowTooSmall(_) => true,
        _ => false,
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        let usage = match &e {
            ReportError::NotPrime(_) | ReportError::ZeroDepth | ReportError::UnknownSuite(_) => true,
            ReportError::PAdic(e) => padic_is_usage(e),
            ReportError::Orbit(e) => orbit_is_usage(e),
            ReportError::Pcf(e) => match e {
                PcfError::PAdic(e) => padic_is_usage(e),
                PcfError::EvenPrime | PcfError::NotPrime(_) => true,
                PcfError::FrontierExplosion { .. } => false,
            },
            ReportError::Tree(e) => match e {
                TreeError::PAdic(e) => padic_is_usage(e),
                TreeError::Orbit(e) => orbit_is_usage(e),
                _ => false,
            },
            ReportError::Lin(e) => matches!(e, LinError::Precondition(_)),
        };
        if usage {
            Failure::Usage(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

macro_rules! lib_err {
    ($t:ty) => {
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                ReportError::from(e).into()
            }
        }
    };
}
lib_err!(PAdicError);
lib_err!(OrbitError);
lib_err!(PcfError);
lib_err!(TreeError);

type CliResult<T> = Result<T, Failure>;

/// A digit string carries its own precision; `--prec` may only lower it.
/// Integers get `--prec`, or `default` when it is absent.
fn parse_c(input: &str, p: u64, prec: Option<u32>, default: u32) -> CliResult<PAdicInt> {
    if let Some(digits) = input.strip_prefix("digits:") {
        let x = PAdicInt::from_digits(digits, p)?;
        return match prec {
            Some(k) => Ok(x.truncate(k)?),
            None => Ok(x),
        };
    }
    let n: BigInt = input
        .parse()
        .map_err(|_| Failure::Usage(format!("cannot parse c = {input:?}")))?;
    Ok(PAdicInt::from_integer(&n, p, prec.unwrap_or(default))?)
}

fn parse_range(s: &str) -> CliResult<(u32, u32)> {
    let bad = || Failure::Usage(format!("bad range {s:?}, expected a..b"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn formats(format: Format, allowed: &[Format], cmd: &str) -> CliResult<()> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{cmd} does not support this --format")))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Internal(e.to_string())),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Orbit { p, c, level, prec, format, out } => {
            formats(format, &[Format::Text, Format::Json], "orbit")?;
            let c = parse_c(&c, p, prec, level.max(DEFAULT_PREC))?;
            let text = match format {
                Format::Text => format!("{}\n", report::orbit_line(&c, level)?),
                _ => pretty(&envelope("orbit", orbit_mod(&c, level)?.to_json())),
            };
            emit(out.as_deref(), &text)
        }
        Command::Classify { p, c, prec, kmax, format, out } => {
            formats(format, &[Format::Text, Format::Json], "classify")?;
            let c = parse_c(&c, p, prec, DEFAULT_PREC)?;
            let opts = ClassifyOptions { k_max: kmax, hensel_certified: false };
            let v = report::classify_json(&c, opts)?;
            let text = match format {
                Format::Text => {
                    let mut s = v["verdict"].as_str().unwrap_or("?").to_string();
                    if let Some(cert) = v["certainty"].as_str() {
                        s = format!("{s} ({cert})");
                    }
                    for key in ["m", "n", "resolved_at"] {
                        if let Some(x) = v.get(key) {
                            s.push_str(&format!(" {key}={x}"));
                        }
                    }
                    s + "\n"
                }
                _ => pretty(&v),
            };
            emit(out.as_deref(), &text)
        }
        Command::Profile { p, c, kmax, prec, format, out } => {
            formats(format, &[Format::Text, Format::Json], "profile")?;
            let c = parse_c(&c, p, prec, kmax)?;
            let prof = level_profile(&c, kmax)?;
            let text = match format {
                Format::Text => prof
                    .levels
                    .iter()
                    .map(|(k, t)| format!("{k}  {t}\n"))
                    .collect(),
                _ => pretty(&envelope("profile", prof.to_json())),
            };
            emit(out.as_deref(), &text)
        }
        Command::Pcf { p, prec, format, out } => {
            formats(format, &[Format::Text, Format::Json], "pcf")?;
            let params = padic_orbits::enumerate_pcf(p, prec)?;
            let text = match format {
                Format::Text => params
                    .iter()
                    .map(|x| {
                        format!(
                            "{}  {:?}  resolved_at={}  c={}\n",
                            x.orbit_type,
                            x.kind,
                            x.resolved_at,
                            x.c.to_digit_string()
                        )
                    })
                    .collect(),
                _ => pretty(&envelope(
                    "pcf",
                    json!({
                        "p": p,
                        "count": params.len(),
                        "parameters": params.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
                    }),
                )),
            };
            emit(out.as_deref(), &text)
        }
        Command::Tree { p, c, depth, prec, format, out } => {
            formats(format, &[Format::Dot, Format::Json], "tree")?;
            let c = parse_c(&c, p, prec, depth)?;
            let tree = critical_orbit_tree(&c, depth)?;
            let text = match format {
                Format::Dot => tree.to_dot(),
                _ => pretty(&envelope("tree", tree.to_json())),
            };
            emit(out.as_deref(), &text)
        }
        Command::Atlas { p, depth, format, out } => {
            formats(format, &[Format::Dot, Format::Json], "atlas")?;
            let a = report::atlas(p, depth)?;
            let text = match format {
                Format::Dot => a.to_dot(),
                _ => pretty(&a.to_json()),
            };
            emit(out.as_deref(), &text)
        }
        Command::Figures { p, out } => {
            let bundle = report::figures(p)?;
            if bundle.provisional {
                eprintln!("note: completeness is only certified for p in {{3, 5, 7}}; output for p = {p} is provisional");
            }
            let index = pretty(&bundle.index_json());
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| {
                        Failure::Usage(format!("cannot create {}: {e}", dir.display()))
                    })?;
                    for e in &bundle.entries {
                        let path = dir.join(format!("{}.dot", e.file_stem()));
                        emit(Some(&path), &e.tree.to_dot())?;
                    }
                    emit(Some(&dir.join("index.json")), &index)
                }
                None => emit(None, &index),
            }
        }
        Command::Verify { suite, p, k, i, samples, seed, kmax, format, out } => {
            formats(format, &[Format::Text, Format::Json], "verify")?;
            let suite: Suite = suite.parse()?;
            let cfg = VerifyConfig {
                primes: p,
                ks: parse_range(&k)?,
                i_max: parse_range(&i)?.1,
                samples,
                seed,
                k_max: kmax,
                ..VerifyConfig::default()
            };
            let r = report::run_suite(suite, &cfg)?;
            let text = match format {
                Format::Text => r.to_text(),
                _ => pretty(&r.to_json()),
            };
            emit(out.as_deref(), &text)?;
            if r.passed() {
                Ok(())
            } else {
                Err(Failure::Verification(format!(
                    "{} of {} cases failed",
                    r.failures().len(),
                    r.cases.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
                Failure::Internal(m) => eprintln!("internal error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
