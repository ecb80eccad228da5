//! Command-line front end for `mmp-core`.
//!
//! [`run`] takes the argument list and output streams so the binary and the
//! tests share one entry point. Exit codes: 0 success, 1 domain error (a JSON
//! object on the error stream), 2 usage error.

mod args;
pub mod formats;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use mmp_core::chain::{chain_from_fraction, ChainError};
use mmp_core::driver::{self, DriverError};
use mmp_core::flip::{self, antiflip_sites, flip_sites};
use mmp_core::homology::{self, canonicalize, filling_data, EmbeddingData, HomologyError};
use mmp_core::t0::{self, t0_recognize, t_recognize, validate_m_resolution};
use mmp_core::toi::{self, TreeError, TreeTrace};
use mmp_core::{DecoratedChain, FlipError, FlipSite, Fraction, MoveKind, MoveTrace, TCertificate};
use serde::Serialize;

pub use args::{Cli, Command, Direction, T0Command, ZeroCommand};
use formats::{TraceDoc, TreeDoc};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Flip(#[from] FlipError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error("no {0} site in {1}")]
    NoSite(&'static str, String),
    #[error("{0} is not of class T")]
    NotClassT(String),
    #[error("{0} is not of class T0")]
    NotT0(String),
    #[error("not an M-resolution")]
    Invalid,
    #[error("malformed input: {0}")]
    Format(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad JSON in {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

impl CliError {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Chain(ChainError::Parse { .. }) => "parse",
            CliError::Chain(_) => "chain",
            CliError::Flip(_) => "flip",
            CliError::Driver(DriverError::InvalidMResolution(_)) | CliError::Invalid => "invalid-m-resolution",
            CliError::Driver(_) => "driver",
            CliError::Tree(_) => "tree",
            CliError::Homology(HomologyError::NotAFlipPair(_)) => "not-a-flip-pair",
            CliError::Homology(_) => "homology",
            CliError::NoSite(..) => "no-site",
            CliError::NotClassT(_) | CliError::NotT0(_) => "not-t0",
            CliError::Format(_) => "format",
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "json",
        }
    }
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: &'a str,
    message: String,
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            let doc = ErrorDoc { error: e.kind(), message: e.to_string() };
            let _ = writeln!(err, "{}", serde_json::to_string(&doc).expect("plain strings serialize"));
            1
        }
    }
}

fn chain(s: &str) -> Result<DecoratedChain, CliError> {
    Ok(s.parse()?)
}

/// Accepts `[2,5,3]`, `2,5,3` or `2-5-3`.
fn weights(s: &str) -> Result<Vec<i64>, CliError> {
    let body = s.trim().trim_start_matches('[').trim_end_matches(']');
    body.split([',', '-'])
        .map(|t| t.trim().parse::<i64>().map_err(|_| CliError::Format(format!("bad weight list {s:?}"))))
        .collect()
}

fn render_weights(w: &[i64]) -> String {
    let parts: Vec<String> = w.iter().map(i64::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn phrase(kind: MoveKind) -> &'static str {
    match kind {
        MoveKind::RationalBlowUp => "A rational blow-up",
        MoveKind::RationalBlowDown => "A rational blow-down",
        MoveKind::Flip => "A symplectic flip",
        MoveKind::Antiflip => "A symplectic antiflip",
    }
}

fn render_tree_trace(t: &TreeTrace) -> String {
    let mut s = format!("Start: {}\n", t.start);
    for (k, m) in t.moves.iter().enumerate() {
        let _ = writeln!(s, "{}. {} at {}: {}", k + 1, phrase(m.kind), m.site, m.after);
    }
    s
}

fn csv_rows(d: &EmbeddingData) -> String {
    let mut s = String::new();
    for c in &d.classes {
        let mut row = vec![c.l.to_string()];
        row.extend(c.e.iter().map(i64::to_string));
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

fn pick_site(given: Option<&str>, sites: Vec<FlipSite>, kind: &'static str, ch: &DecoratedChain) -> Result<FlipSite, CliError> {
    match given {
        Some(s) => Ok(s.parse()?),
        None => sites.first().copied().ok_or_else(|| CliError::NoSite(kind, ch.to_string())),
    }
}

fn execute(cmd: &Command) -> Result<(String, i32), CliError> {
    let ok = |s: String| Ok((s, 0));
    match cmd {
        Command::Fraction { chain: c } => {
            let f = Fraction::from_projective(chain(c)?.fraction_value())?;
            ok(format!("{}/{}\n", f.n(), f.q()))
        }
        Command::Resolve { fraction } => {
            let f: Fraction = fraction.parse()?;
            ok(format!("{}\n", DecoratedChain::plain(&chain_from_fraction(f))?))
        }
        Command::T0 { command } => match command {
            T0Command::Check { weights: w } => {
                let w = weights(w)?;
                if let Some(c) = t0_recognize(&w) {
                    return ok(format!("T0 n={} a={} initial={}\n", c.n, c.a, c.initial_index));
                }
                match t_recognize(&w) {
                    Some(TCertificate::Rdp) => ok("T rdp\n".to_string()),
                    Some(TCertificate::Tdna { d, n, a }) => ok(format!("T d={d} n={n} a={a}\n")),
                    None => Err(CliError::NotClassT(render_weights(&w))),
                }
            }
            T0Command::Generate { max_len } => {
                let mut s = String::new();
                for w in t0::t0_generate(*max_len) {
                    let _ = writeln!(s, "{}", render_weights(&w));
                }
                ok(s)
            }
            T0Command::Initial { weights: w } => {
                let w = weights(w)?;
                let c = t0_recognize(&w).ok_or_else(|| CliError::NotT0(render_weights(&w)))?;
                ok(format!("{}\n", c.initial_index))
            }
        },
        Command::Validate { chain: c } => {
            let report = validate_m_resolution(&chain(c)?);
            if report.is_valid() {
                return ok("valid\n".to_string());
            }
            let mut s = String::new();
            for v in &report.violations {
                let _ = writeln!(s, "{v}");
            }
            Ok((s, 1))
        }
        Command::Flip { chain: c, site } => {
            let ch = chain(c)?;
            let s = pick_site(site.as_deref(), flip_sites(&ch), "flip", &ch)?;
            ok(format!("{}\n", flip::flip(&ch, s)?))
        }
        Command::Antiflip { chain: c, site } => {
            let ch = chain(c)?;
            let s = pick_site(site.as_deref(), antiflip_sites(&ch), "antiflip", &ch)?;
            ok(format!("{}\n", flip::antiflip(&ch, s)?))
        }
        Command::Trace { chain: c, json: as_json, direction } => {
            let ch = chain(c)?;
            let t: MoveTrace = match direction {
                Direction::Down => driver::from_minimal(&ch)?,
                Direction::Up => driver::to_minimal(&ch)?,
            };
            if *as_json {
                ok(json(&TraceDoc::from(&t)))
            } else {
                ok(t.render())
            }
        }
        Command::Replay { trace } => {
            let doc: TraceDoc = read_json(trace)?;
            let end = driver::replay_trace(&doc.to_chain_trace()?)?;
            ok(format!("{end}\n"))
        }
        Command::Toi { tree, json: as_json } => {
            let doc: TreeDoc = read_json(tree)?;
            let t = toi::toi_trace(&doc.to_tree()?)?;
            if *as_json {
                ok(json(&TraceDoc::from(&t)))
            } else {
                ok(render_tree_trace(&t))
            }
        }
        Command::Certify { y, y_plus, show_classes } => {
            let (y, yp) = (chain(y)?, chain(y_plus)?);
            let verdict = homology::verify_flip_pair(&y, &yp)?;
            let mut s = format!("{verdict}\n");
            if *show_classes {
                for (label, ch) in [("Y", &y), ("Y+", &yp)] {
                    let _ = writeln!(s, "# {label}");
                    s.push_str(&csv_rows(&canonicalize(&filling_data(ch)?)));
                }
            }
            ok(s)
        }
        Command::Zero { command: ZeroCommand::Enum { bounds } } => {
            let mut s = String::new();
            for k in homology::enumerate_zero_strings(bounds) {
                let parts: Vec<String> = k.iter().map(i64::to_string).collect();
                let _ = writeln!(s, "({})", parts.join(","));
            }
            ok(s)
        }
    }
}
