//! `hankelshift`: positivity, propagation, recursion and perturbation
//! analyses of weighted-shift moment sequences.

mod commands;
mod input;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use hankelshift::numkit::{Rational, ToleranceContext};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use commands::Outcome;
use input::{Backend, Kind, Loaded};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Precondition(String),
    Consistency(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Consistency(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Precondition(_) => "precondition",
            CliError::Consistency(_) => "consistency",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Precondition(m) | CliError::Consistency(m) => m,
        }
    }
}

impl From<hankelshift::Error> for CliError {
    fn from(e: hankelshift::Error) -> Self {
        use hankelshift::Error as E;
        let msg = e.to_string();
        match e {
            E::Parse(_) | E::InvalidMoments(_) | E::NotSquare | E::NotSymmetric { .. } | E::Dimension(_) => {
                CliError::Input(msg)
            }
            E::Consistency(_) => CliError::Consistency(msg),
            _ => CliError::Precondition(msg),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "hankelshift", version, about = "Hankel positivity and weighted-shift moment analyses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// k-positivity ladder, log-convexity, flatness and propagation.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Highest positivity order tested.
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Determinants of every order-k Hankel block.
    Dets {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Linear recursion, atom recovery and finite-mass test.
    Recursion {
        #[command(flatten)]
        common: Common,
        /// Largest recursion order searched (default: half the horizon).
        #[arg(long)]
        max_order: Option<usize>,
    },
    /// Interval of t keeping the rank-one perturbation k-hyponormal.
    Perturb {
        #[command(flatten)]
        common: Common,
        /// Index of the perturbed weight.
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Use the closed-form route (k <= 2), cross-checked by bisection.
        #[arg(long)]
        closed_form: bool,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON sequence file or CSV list of moments.
    file: PathBuf,
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    #[arg(long)]
    float: bool,
    #[arg(long)]
    tol_zero: Option<f64>,
    /// Relative tolerance; overrides HANKELSHIFT_TOL_REL.
    #[arg(long)]
    tol_rel: Option<f64>,
    #[arg(long)]
    bisect_eps: Option<f64>,
    /// Emit the report as one JSON object.
    #[arg(long)]
    json: bool,
    /// Omit the timestamp so reports are byte-for-byte reproducible.
    #[arg(long)]
    no_timestamp: bool,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Dets { .. } => "dets",
            Command::Recursion { .. } => "recursion",
            Command::Perturb { .. } => "perturb",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Analyze { common, .. }
            | Command::Dets { common, .. }
            | Command::Recursion { common, .. }
            | Command::Perturb { common, .. } => common,
        }
    }
}

struct Tolerances {
    ctx: ToleranceContext,
    rel_source: &'static str,
}

fn tolerances(c: &Common) -> Result<Tolerances, CliError> {
    let mut ctx = ToleranceContext::default();
    let mut rel_source = "default";
    if let Ok(v) = std::env::var("HANKELSHIFT_TOL_REL") {
        ctx.rel_eps = v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("HANKELSHIFT_TOL_REL is not a number: {v:?}")))?;
        rel_source = "env";
    }
    if let Some(v) = c.tol_rel {
        ctx.rel_eps = v;
        rel_source = "flag";
    }
    if let Some(v) = c.tol_zero {
        ctx.zero_eps = v;
    }
    if let Some(v) = c.bisect_eps {
        ctx.bisect_eps = v;
    }
    ctx.validate().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(Tolerances { ctx, rel_source })
}

fn run_backend<S: Backend>(cmd: &Command, loaded: &Loaded, ctx: &ToleranceContext) -> Result<(Outcome, usize), CliError> {
    let seq = input::build::<S>(loaded)?;
    let horizon = seq.gamma.horizon();
    let is_shift = loaded.kind == Kind::Weights;
    let out = match cmd {
        Command::Analyze { k, .. } => commands::analyze(&seq, *k, is_shift, ctx)?,
        Command::Dets { k, .. } => commands::dets(&seq, *k, ctx)?,
        Command::Recursion { max_order, .. } => commands::recursion(&seq, *max_order, ctx)?,
        Command::Perturb { l, k, closed_form, .. } => commands::perturb(&seq, *l, *k, *closed_form, ctx)?,
    };
    Ok((out, horizon))
}

struct Envelope {
    header: Value,
    exact: bool,
}

fn envelope(cmd: &Command, bytes: &[u8], loaded: Option<&Loaded>, tol: Option<&Tolerances>, exact: bool) -> Envelope {
    let c = cmd.common();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let mut header = json!({
        "tool": "hankelshift",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "argv": argv,
        "input": {
            "path": c.file.display().to_string(),
            "sha256": hex::encode(Sha256::digest(bytes)),
        },
        "mode": if exact { "exact" } else { "float" },
    });
    if let Some(l) = loaded {
        header["input"]["kind"] = json!(l.kind.as_str());
        header["input"]["format"] = json!(if l.csv { "csv" } else { "json" });
    }
    if let Some(t) = tol {
        header["tolerances"] = json!({
            "zero_eps": t.ctx.zero_eps,
            "rel_eps": t.ctx.rel_eps,
            "rel_eps_source": t.rel_source,
            "psd_floor": t.ctx.psd_floor,
            "bisect_eps": t.ctx.bisect_eps,
        });
    }
    if !c.no_timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        header["timestamp_unix"] = json!(secs);
    }
    Envelope { header, exact }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = &cli.command;
    let common = cmd.common();
    let bytes = match std::fs::read(&common.file) {
        Ok(b) => b,
        Err(e) => return fail(cmd, &[], None, None, false, CliError::Input(format!("{}: {e}", common.file.display()))),
    };
    let text = match std::str::from_utf8(&bytes) {
        Ok(t) => t,
        Err(e) => return fail(cmd, &bytes, None, None, false, CliError::Input(format!("input is not UTF-8: {e}"))),
    };
    let loaded = match input::parse(text) {
        Ok(l) => l,
        Err(e) => return fail(cmd, &bytes, None, None, false, e),
    };
    let exact = if common.exact {
        true
    } else if common.float {
        false
    } else {
        loaded.file_exact
    };
    let tol = match tolerances(common) {
        Ok(t) => t,
        Err(e) => return fail(cmd, &bytes, Some(&loaded), None, exact, e),
    };
    let run = if exact {
        run_backend::<Rational>(cmd, &loaded, &tol.ctx)
    } else {
        run_backend::<f64>(cmd, &loaded, &tol.ctx)
    };
    let (mut out, horizon) = match run {
        Ok(r) => r,
        Err(e) => return fail(cmd, &bytes, Some(&loaded), Some(&tol), exact, e),
    };
    if !exact && loaded.has_strings {
        out.warnings.insert(0, "--float converted exact \"p/q\" input to double precision".into());
    }
    let env = envelope(cmd, &bytes, Some(&loaded), Some(&tol), exact);
    let code: u8 = if out.incidents.is_empty() { 0 } else { 4 };
    if common.json {
        let mut report = env.header;
        report["input"]["horizon"] = json!(horizon);
        report["result"] = out.result;
        report["warnings"] = json!(out.warnings);
        report["incidents"] = json!(out.incidents);
        report["exit_code"] = json!(code);
        emit(&(serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"));
    } else {
        emit(&render_text(&env, cmd, &out, &tol));
    }
    ExitCode::from(code)
}

fn render_text(env: &Envelope, cmd: &Command, out: &Outcome, tol: &Tolerances) -> String {
    let mut s = String::new();
    let input = &env.header["input"];
    let _ = writeln!(s, "hankelshift {}: {}", cmd.name(), input["path"].as_str().unwrap_or(""));
    let _ = writeln!(s, 
        "input: {} ({}), sha256 {}",
        input["kind"].as_str().unwrap_or("?"),
        input["format"].as_str().unwrap_or("?"),
        input["sha256"].as_str().unwrap_or("")
    );
    if env.exact {
        let _ = writeln!(s, "mode: exact (bisect_eps {:e})", tol.ctx.bisect_eps);
    } else {
        let _ = writeln!(s, 
            "mode: float (zero_eps {:e}, rel_eps {:e} from {}, psd_floor {:e}, bisect_eps {:e})",
            tol.ctx.zero_eps, tol.ctx.rel_eps, tol.rel_source, tol.ctx.psd_floor, tol.ctx.bisect_eps
        );
    }
    if let Some(ts) = env.header.get("timestamp_unix") {
        let _ = writeln!(s, "timestamp: {ts}");
    }
    s.push('\n');
    for line in &out.lines {
        let _ = writeln!(s, "{line}");
    }
    for w in &out.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    for i in &out.incidents {
        let _ = writeln!(s, "INCIDENT: {i}");
    }
    s
}

fn fail(cmd: &Command, bytes: &[u8], loaded: Option<&Loaded>, tol: Option<&Tolerances>, exact: bool, e: CliError) -> ExitCode {
    if cmd.common().json {
        let mut report = envelope(cmd, bytes, loaded, tol, exact).header;
        report["error"] = json!({ "kind": e.kind(), "message": e.message() });
        report["exit_code"] = json!(e.code());
        emit(&(serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"));
    }
    eprintln!("error ({}): {}", e.kind(), e.message());
    ExitCode::from(e.code())
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush());
}

#[cfg(test)]
mod tests {
    use super::*;
    use hankelshift::Error;

    #[test]
    fn library_errors_map_to_exit_codes() {
        let code = |e: Error| CliError::from(e).code();
        assert_eq!(code(Error::Parse("x".into())), 2);
        assert_eq!(code(Error::InvalidMoments("x".into())), 2);
        assert_eq!(code(Error::InsufficientMoments { required: 9, horizon: 4 }), 3);
        assert_eq!(code(Error::NonPositiveMoment { index: 2 }), 3);
        assert_eq!(code(Error::Precondition("x".into())), 3);
        assert_eq!(code(Error::Consistency("x".into())), 4);
    }
}
