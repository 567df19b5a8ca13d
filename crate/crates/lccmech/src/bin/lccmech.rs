//! Command-line front end: validate structures, simulate trajectories,
//! check Hamilton-Jacobi candidates, and evaluate brackets from a
//! declarative JSON model. Stdout carries machine output only; human
//! diagnostics go to stderr. The actual work lives in `lccmech::ops`.
//!
//! Exit codes: 0 pass, 1 parse/schema error, 2 check failure, 3 singular
//! sampling, 4 mid-trajectory singularity.

use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use lccmech::dynamics::Method;
use lccmech::error::Error;
use lccmech::hj;
use lccmech::model::{self, CompiledModel};
use lccmech::ops;

#[derive(Parser)]
#[command(
    name = "lccmech",
    version,
    about = "Locally conformal cosymplectic mechanics toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to a JSON model file
    model: Option<String>,
    /// Use a built-in model instead of a file (e.g. `oscillator`)
    #[arg(long)]
    preset: Option<String>,
    /// Write primary output to a file instead of stdout
    #[arg(long)]
    out: Option<String>,
    /// Omit timestamp and wall-time fields for byte-identical reruns
    #[arg(long)]
    no_timestamp: bool,
    /// Sampling seed (overrides LCCMECH_SEED and the model's seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sample points for structure checks
    #[arg(long)]
    samples: Option<usize>,
    /// Worker count; evaluation order and output are deterministic
    /// regardless of the value
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structure equations, nondegeneracy, musical round-trips,
    /// and closed-form displays of the model
    Validate(Common),
    /// Integrate the evolution field and emit a CSV trajectory
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        method: Option<String>,
        /// Initial point as comma-separated coordinates q1..qn,p1..pn,t
        #[arg(long)]
        x0: Option<String>,
    },
    /// Evaluate the Hamilton-Jacobi residuals of the model's candidate S
    HjCheck {
        #[command(flatten)]
        common: Common,
        /// auto | symplectic | cosymplectic | lcc
        #[arg(long, default_value = "auto")]
        regime: String,
    },
    /// Evaluate the Jacobi bracket of two functions over a sample grid
    Bracket {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::UnknownIdentifier { .. }
        | Error::Schema(_)
        | Error::UnboundVariable(_)
        | Error::Io(_) => 1,
        Error::SingularPoint(_) => 3,
        _ => 2,
    }
}

fn load(common: &Common) -> Result<CompiledModel, Error> {
    match (&common.preset, &common.model) {
        (Some(name), _) => model::preset(name),
        (None, Some(path)) => model::load_model(path),
        (None, None) => Err(Error::Schema(
            "provide a model file or --preset".to_string(),
        )),
    }
}

fn resolve_seed(common: &Common, m: &CompiledModel) -> u64 {
    if let Some(s) = common.seed {
        return s;
    }
    if let Ok(v) = std::env::var("LCCMECH_SEED") {
        if let Ok(s) = v.parse() {
            return s;
        }
        eprintln!("warning: ignoring unparseable LCCMECH_SEED={v}");
    }
    m.seed()
}

fn emit(common: &Common, text: &str) -> Result<(), Error> {
    match &common.out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate(common) => run(cmd_validate(&common)),
        Command::Simulate {
            common,
            dt,
            steps,
            method,
            x0,
        } => run(cmd_simulate(
            &common,
            dt,
            steps,
            method.as_deref(),
            x0.as_deref(),
        )),
        Command::HjCheck { common, regime } => run(cmd_hj_check(&common, &regime)),
        Command::Bracket { common, f, g } => run(cmd_bracket(&common, &f, &g)),
    };
    std::process::exit(code);
}

fn run(result: Result<i32, Error>) -> i32 {
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_validate(common: &Common) -> Result<i32, Error> {
    let start = Instant::now();
    let m = load(common)?;
    let seed = resolve_seed(common, &m);
    let samples = common.samples.unwrap_or_else(|| m.samples());
    let mut report = ops::validate(&m, samples, seed)?;
    if !common.no_timestamp {
        report.stamp(start);
    }
    let pass = report.pass;
    emit(common, &(report.to_json() + "\n"))?;
    Ok(if pass { 0 } else { 2 })
}

fn cmd_simulate(
    common: &Common,
    dt: Option<f64>,
    steps: Option<usize>,
    method: Option<&str>,
    x0: Option<&str>,
) -> Result<i32, Error> {
    let start = Instant::now();
    let m = load(common)?;
    let seed = resolve_seed(common, &m);
    let method = method.map(Method::parse).transpose()?;
    let x0: Option<Vec<f64>> = x0
        .map(|text| {
            text.split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::Schema(format!("bad coordinate '{t}' in --x0")))
                })
                .collect::<Result<_, _>>()
        })
        .transpose()?;

    let mut sim = ops::simulate(&m, x0, dt, steps, method, seed)?;
    if !common.no_timestamp {
        sim.report.stamp(start);
    }

    // CSV is the primary output; the JSON report accompanies it on stdout
    // only when the CSV goes to a file, otherwise it lands on stderr as a
    // diagnostic so stdout stays pure CSV.
    emit(common, &sim.csv)?;
    if common.out.is_some() {
        println!("{}", sim.report.to_json());
    } else {
        eprintln!("{}", sim.report.to_json());
    }
    if sim.truncated.is_some() {
        return Ok(4);
    }
    Ok(if sim.report.pass { 0 } else { 2 })
}

fn cmd_hj_check(common: &Common, regime_flag: &str) -> Result<i32, Error> {
    let start = Instant::now();
    let m = load(common)?;
    let seed = resolve_seed(common, &m);
    let regime = match regime_flag {
        "auto" => None,
        "symplectic" => Some(hj::Regime::Symplectic),
        "cosymplectic" => Some(hj::Regime::Cosymplectic),
        "lcc" => Some(hj::Regime::Lcc),
        other => {
            return Err(Error::Schema(format!(
                "unknown regime '{other}' (auto|symplectic|cosymplectic|lcc)"
            )))
        }
    };
    let mut outcome = ops::hj_check(&m, regime, seed)?;
    if !common.no_timestamp {
        outcome.report.stamp(start);
    }
    let pass = outcome.report.pass;
    emit(common, &(outcome.report.to_json() + "\n"))?;
    if outcome.closedness_failed {
        return Ok(2);
    }
    Ok(if pass { 0 } else { 2 })
}

fn cmd_bracket(common: &Common, f_text: &str, g_text: &str) -> Result<i32, Error> {
    let start = Instant::now();
    let m = load(common)?;
    let seed = resolve_seed(common, &m);
    let samples = common.samples.unwrap_or_else(|| m.samples());
    let mut outcome = ops::bracket(&m, f_text, g_text, samples, seed)?;
    if !common.no_timestamp {
        outcome.report.stamp(start);
    }
    let pass = outcome.report.pass;
    emit(common, &(outcome.to_json() + "\n"))?;
    Ok(if pass { 0 } else { 2 })
}
