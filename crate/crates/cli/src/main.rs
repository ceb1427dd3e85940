use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use theta_eta::identities::weierstrass_points;
use theta_eta::{
    run_suite, theta_eval_detailed, theta_jet_char, Fixtures, Parallelism, Suite, SuiteConfig,
    ThetaCharacteristic, ThetaError,
};

mod parse;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "theta-eta",
    version,
    about = "Evaluate Riemann theta functions and verify identities of eta"
)]
struct Cli {
    /// Emit JSON (the default and only format).
    #[arg(long, global = true, default_value_t = true)]
    json: bool,
    /// Print nothing on stdout; the exit code carries the result.
    #[arg(long, global = true)]
    quiet: bool,
    /// Fixtures file with named period matrices.
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Target absolute error, relative to the growth factor.
    #[arg(long, env = "THETA_ETA_EPS", default_value_t = 1e-12)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate theta (optionally with a characteristic, gradient and hessian).
    Eval {
        #[arg(long)]
        n: Option<usize>,
        /// Fixture name, `random-near-iI`, `a,b;c,d` rows, JSON rows, or a scalar.
        #[arg(long)]
        tau: String,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// `zero`, `odd:K`, `even:K`, or `a1,..:b1,..`.
        #[arg(long = "char", default_value = "zero")]
        characteristic: String,
        #[arg(long)]
        jet: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification sweep.
    Verify {
        suite: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        tau: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        /// Run samples on one thread.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        common: Common,
    },
    /// List the odd half-periods of a genus-two period matrix.
    Weierstrass {
        #[arg(long, default_value = "iI2+0.1S")]
        tau: String,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Numeric(String),
    Precondition(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numeric(_) => EXIT_NUMERIC,
            Failure::Precondition(_) => EXIT_PRECONDITION,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) | Failure::Precondition(m) => m,
        }
    }
}

fn compute_error(e: ThetaError) -> Failure {
    match e {
        ThetaError::Decomposable | ThetaError::Precondition(_) => {
            Failure::Precondition(e.to_string())
        }
        ThetaError::UnsupportedDimension(_)
        | ThetaError::EpsilonOutOfRange(_)
        | ThetaError::DimensionMismatch { .. } => Failure::Usage(e.to_string()),
        other => Failure::Numeric(other.to_string()),
    }
}

fn check_epsilon(epsilon: f64) -> Result<(), Failure> {
    if (1e-13..=1e-3).contains(&epsilon) {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "epsilon {epsilon:e} is outside [1e-13, 1e-3]"
        )))
    }
}

fn load_fixtures(path: &Option<PathBuf>) -> Result<Fixtures, Failure> {
    match path {
        None => Ok(Fixtures::builtin()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            Fixtures::parse(&text).map_err(|e| Failure::Usage(e.to_string()))
        }
    }
}

/// Returns the JSON document and whether the command succeeded.
fn run(cli: &Cli) -> Result<(Value, bool), Failure> {
    let fixtures = load_fixtures(&cli.fixtures)?;
    match &cli.command {
        Command::Eval {
            n,
            tau,
            z,
            characteristic,
            jet,
            common,
        } => {
            check_epsilon(common.epsilon)?;
            let tau = parse::tau(tau, *n, common.seed, &fixtures).map_err(Failure::Usage)?;
            let z = parse::complex_list(z).map_err(Failure::Usage)?;
            if z.len() != tau.dim() {
                return Err(Failure::Usage(format!(
                    "z has {} coordinates but tau is {}x{}",
                    z.len(),
                    tau.dim(),
                    tau.dim()
                )));
            }
            let ch: ThetaCharacteristic =
                parse::characteristic(characteristic, tau.dim()).map_err(Failure::Usage)?;
            let eval = theta_eval_detailed(&z, &tau, &ch, common.epsilon).map_err(compute_error)?;
            let mut out = json!({
                "value": eval.value,
                "error_bound": eval.error_bound,
                "terms_summed": eval.terms_summed,
                "characteristic": ch.to_string(),
            });
            if *jet {
                let j = theta_jet_char(&z, &tau, &ch, common.epsilon).map_err(compute_error)?;
                let n = tau.dim();
                let hessian: Vec<Vec<_>> = (0..n)
                    .map(|r| (0..n).map(|c| j.hessian[(r, c)]).collect())
                    .collect();
                out["gradient"] = json!(j.gradient);
                out["hessian"] = json!(hessian);
            }
            Ok((out, true))
        }
        Command::Verify {
            suite,
            n,
            tau,
            samples,
            sequential,
            common,
        } => {
            check_epsilon(common.epsilon)?;
            let suite: Suite = suite.parse().map_err(Failure::Usage)?;
            let tau = tau
                .as_deref()
                .map(|t| parse::tau(t, *n, common.seed, &fixtures))
                .transpose()
                .map_err(Failure::Usage)?;
            let config = SuiteConfig {
                n: *n,
                tau,
                samples: *samples,
                seed: common.seed,
                epsilon: common.epsilon,
                parallelism: if *sequential {
                    Parallelism::Sequential
                } else {
                    Parallelism::default()
                },
            };
            let report = run_suite(suite, &config).map_err(compute_error)?;
            let passed = report.passed;
            Ok((
                serde_json::to_value(report).expect("report serializes"),
                passed,
            ))
        }
        Command::Weierstrass { tau, common } => {
            check_epsilon(common.epsilon)?;
            let tau = parse::tau(tau, None, common.seed, &fixtures).map_err(Failure::Usage)?;
            if tau.dim() != 2 {
                return Err(Failure::Usage(format!(
                    "weierstrass needs n = 2, got {}",
                    tau.dim()
                )));
            }
            let points = weierstrass_points(&tau, common.epsilon).map_err(compute_error)?;
            let ok = points
                .iter()
                .all(|p| p.theta_abs < 1e-10 && p.eta_abs < 1e-8 * p.eta_scale);
            Ok((json!({ "points": points }), ok))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((value, ok)) => {
            if !cli.quiet {
                // A closed pipe (e.g. `| head`) is not an error.
                let text = serde_json::to_string_pretty(&value).expect("json");
                let _ = writeln!(std::io::stdout().lock(), "{text}");
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NUMERIC)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
