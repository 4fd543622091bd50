//! `ss-skeleton`: JSON front-end over the core library.
//!
//! Every subcommand reads one JSON document (a bare payload or a request
//! envelope), writes one JSON document, and exits with 0 on success or a
//! valid verdict, 1 on a negative verdict and 2 on an input error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub mod commands;
pub mod poly;

pub const ENVELOPE_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Core(#[from] ss_skeleton::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ss-skeleton", version, about = "Exact monomial semivaluations and semistable covering certificates")]
pub struct Cli {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// Input JSON file, or `-` for stdin.
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<String>,
    /// Output file, or `-` for stdout.
    #[arg(long, global = true, value_name = "PATH", default_value = "-")]
    pub output: String,
    /// Write an SVG drawing of the covering (cover only).
    #[arg(long, global = true, value_name = "PATH")]
    pub emit_svg: Option<PathBuf>,
    /// Write the leaf triangulations as CSV (cover only).
    #[arg(long, global = true, value_name = "PATH")]
    pub emit_csv: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Cap on exponent denominators in parsed values, powers and λ searches.
    #[arg(long, global = true, value_name = "N", default_value_t = 64)]
    pub max_denominator: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Compare two values; optionally raise to a power or test membership in r^Q.
    ValueCmp,
    /// Special representation, dominating monomial and PL function of a polynomial.
    Special,
    /// Evaluate |a|_r at a point of the skeleton.
    Eval,
    /// Decide whether a dominates b on the skeleton.
    Dominates,
    /// Unit tests in R and in R_eta.
    Units,
    /// Factor a generic unit as u * pi' * t_0^n_0 ... t_m^n_m.
    Factor,
    /// Build and certify a covering, or run a single covering step.
    Cover,
    /// Re-check a covering certificate.
    Verify,
    /// Run the randomized invariant suite.
    Selftest {
        /// Trials per invariant.
        #[arg(long, default_value_t = 2000)]
        trials: usize,
    },
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ValueCmp => "value-cmp",
            Command::Special => "special",
            Command::Eval => "eval",
            Command::Dominates => "dominates",
            Command::Units => "units",
            Command::Factor => "factor",
            Command::Cover => "cover",
            Command::Verify => "verify",
            Command::Selftest { .. } => "selftest",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<T> {
    command: String,
    #[serde(default)]
    version: Option<u32>,
    #[serde(default)]
    seed: Option<u64>,
    payload: T,
}

/// A response envelope, emitted when the request came in one. Fields are in
/// key order so that reprinting parsed output reproduces it byte for byte.
#[derive(Debug, Serialize)]
pub struct Response<'a> {
    pub command: &'a str,
    pub result: &'a serde_json::Value,
    pub version: u32,
}

/// The request text and what is known about its envelope.
pub struct Request {
    text: String,
    command: &'static str,
    enveloped: bool,
    seed: Option<u64>,
}

impl Request {
    pub fn new(text: String, command: &'static str) -> CliResult<Self> {
        let json: serde_json::Value = serde_json::from_str(&text)?;
        let enveloped = json.get("command").is_some() && json.get("payload").is_some();
        let mut seed = None;
        if enveloped {
            let env: Envelope<serde_json::Value> = serde_json::from_str(&text)?;
            if env.command != command {
                return Err(CliError::Usage(format!(
                    "envelope is for `{}` but `{command}` was invoked",
                    env.command
                )));
            }
            if let Some(v) = env.version.filter(|&v| v != ENVELOPE_VERSION) {
                return Err(CliError::Usage(format!(
                    "unsupported envelope version {v}, expected {ENVELOPE_VERSION}"
                )));
            }
            seed = env.seed;
        }
        Ok(Request {
            text,
            command,
            enveloped,
            seed,
        })
    }

    /// The payload as untyped JSON, for dispatching on its keys.
    pub fn json(&self) -> CliResult<serde_json::Value> {
        let json: serde_json::Value = serde_json::from_str(&self.text)?;
        Ok(if self.enveloped {
            json.get("payload").cloned().unwrap_or_default()
        } else {
            json
        })
    }

    /// Deserializes straight from the text so errors carry line and column.
    pub fn payload<T: DeserializeOwned>(&self) -> CliResult<T> {
        if self.enveloped {
            Ok(serde_json::from_str::<Envelope<T>>(&self.text)?.payload)
        } else {
            Ok(serde_json::from_str(&self.text)?)
        }
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// What a command produced: the JSON document, whether the verdict is
/// positive, and side files to write.
pub struct Outcome {
    pub result: serde_json::Value,
    pub positive: bool,
    pub files: Vec<(PathBuf, String)>,
}

impl Outcome {
    pub fn new(result: serde_json::Value, positive: bool) -> Self {
        Outcome {
            result,
            positive,
            files: Vec::new(),
        }
    }
}

fn read_input(path: Option<&str>) -> CliResult<String> {
    let path = path.unwrap_or("-");
    if path == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text).map_err(|source| CliError::Io {
            context: "reading stdin".into(),
            source,
        })?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|source| CliError::Io {
            context: format!("reading {path}"),
            source,
        })
    }
}

fn write_file(path: &std::path::Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

fn write_output(path: &str, text: &str) -> CliResult<()> {
    if path == "-" {
        let mut out = io::stdout().lock();
        out.write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|source| CliError::Io {
                context: "writing stdout".into(),
                source,
            })
    } else {
        write_file(std::path::Path::new(path), text)
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SS_SKELETON_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Runs one command to completion without touching stdout.
pub fn execute(cli: &Cli) -> CliResult<(String, Outcome)> {
    ss_skeleton::value_group::set_max_denominator(cli.io.max_denominator);
    let name = cli.command.name();
    let request = match (cli.command, &cli.io.input) {
        (Command::Selftest { .. }, None) => None,
        (_, path) => Some(Request::new(read_input(path.as_deref())?, name)?),
    };
    if !matches!(cli.command, Command::Cover) && (cli.io.emit_svg.is_some() || cli.io.emit_csv.is_some()) {
        return Err(CliError::Usage("--emit-svg and --emit-csv apply to `cover` only".into()));
    }
    log::info!("running {name}");
    let outcome = match (cli.command, &request) {
        (Command::Selftest { trials }, req) => {
            let seed = cli.io.seed.or(req.as_ref().and_then(Request::seed)).unwrap_or(0);
            commands::selftest(seed, trials)?
        }
        (command, Some(req)) => commands::dispatch(command, req, &cli.io)?,
        (_, None) => unreachable!("only selftest runs without input"),
    };
    let body = match &request {
        Some(req) if req.enveloped => serde_json::to_string_pretty(&Response {
            command: req.command,
            version: ENVELOPE_VERSION,
            result: &outcome.result,
        })?,
        _ => serde_json::to_string_pretty(&outcome.result)?,
    };
    Ok((body + "\n", outcome))
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = execute(&cli).and_then(|(body, outcome)| {
        for (path, text) in &outcome.files {
            write_file(path, text)?;
        }
        write_output(&cli.io.output, &body)?;
        Ok(outcome.positive)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
