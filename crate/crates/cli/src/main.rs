//! `hck`: certificates and probes for images of quadratic maps plus planar
//! cones.

mod commands;
mod envelope;
mod error;
mod problem;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use commands::{ConvexityArgs, Input, SampleArgs, WitnessArgs};
use envelope::{digest, ResultEnvelope};
use error::{exit, CliError};
use problem::Problem;

#[derive(Debug, Parser)]
#[command(name = "hck", version, about = "Membership witnesses and convexity probes for F(x) + cone")]
struct Cli {
    /// JSON file with tolerance overrides; a nested "search" object tunes the
    /// S-lemma search. Applied after the problem file's own "tolerances".
    #[arg(long, global = true, value_name = "FILE")]
    tol_config: Option<PathBuf>,

    /// Seed for sampling commands [default: the search seed]
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Write the result here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ProblemArg {
    /// Problem file (JSON)
    problem: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the image of the line through XBAR and YBAR
    ClassifyLine {
        #[command(flatten)]
        file: ProblemArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        xbar: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        ybar: Vec<f64>,
    },
    /// Write alpha·(F(xu)+e1) + (1-alpha)·(F(xv)+e2) as F(x*) + e*
    Witness {
        #[command(flatten)]
        file: ProblemArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        xu: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        e1: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        xv: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        e2: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
    },
    /// Re-check a witness envelope against its problem file
    Verify {
        #[command(flatten)]
        file: ProblemArg,
        /// Envelope written by `witness`
        #[arg(long, value_name = "FILE")]
        envelope: PathBuf,
    },
    /// Decide between a multiplier and a counterexample for f, g
    Slemma {
        #[command(flatten)]
        file: ProblemArg,
        /// Slater point (g(x_star) < 0)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x_star: Vec<f64>,
    },
    /// Emit points F(x) + e, one "v1 v2" per line
    Sample {
        #[command(flatten)]
        file: ProblemArg,
        #[arg(long)]
        count: usize,
        /// Half-width of the box x is drawn from
        #[arg(long = "box", default_value_t = 5.0)]
        box_radius: f64,
        /// Cone coordinates of e are drawn from [0, radius] [default: box]
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Certify random convex combinations of members of F(x) + cone
    VerifyConvexity {
        #[command(flatten)]
        file: ProblemArg,
        #[arg(long)]
        trials: usize,
        #[arg(long = "box", default_value_t = 5.0)]
        box_radius: f64,
        /// Probe F(C) - rho·(1, 0) + R²₊ on the manifold C instead
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<f64>,
    },
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(path: &Path, overrides: Option<&Value>) -> Result<Input, CliError> {
    let bytes = read(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Validation(format!("{}: not UTF-8 ({e})", path.display())))?;
    let problem = Problem::parse(text, overrides)?;
    log::info!("loaded {} (n = {})", path.display(), problem.n());
    Ok(Input {
        problem,
        digest: digest(&bytes),
    })
}

fn cone_vector(field: &str, v: &[f64]) -> Result<[f64; 2], CliError> {
    v.try_into()
        .map_err(|_| CliError::Validation(format!("{field}: expected 2 entries, got {}", v.len())))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        None => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        })?)),
    })
}

fn emit(envelope: &ResultEnvelope, path: Option<&Path>) -> Result<(), CliError> {
    let mut out = open_output(path)?;
    let io = |source| CliError::Io {
        path: path.map_or("stdout".into(), |p| p.display().to_string()),
        source,
    };
    writeln!(out, "{}", envelope::to_json(envelope, true)).map_err(io)?;
    out.flush().map_err(io)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let overrides: Option<Value> = cli
        .tol_config
        .as_deref()
        .map(|p| {
            let bytes = read(p)?;
            serde_json::from_slice(&bytes).map_err(|e| CliError::Validation(format!("--tol-config {}: {e}", p.display())))
        })
        .transpose()?;
    let overrides = overrides.as_ref();
    let out = cli.out.as_deref();

    let report = match &cli.command {
        Command::ClassifyLine { file, xbar, ybar } => {
            let input = load(&file.problem, overrides)?;
            let args = serde_json::json!({"problem": file.problem, "xbar": xbar, "ybar": ybar});
            commands::classify_line(&input, args, xbar, ybar)
        }
        Command::Witness {
            file,
            xu,
            e1,
            xv,
            e2,
            alpha,
        } => {
            let input = load(&file.problem, overrides)?;
            let args = serde_json::json!({
                "problem": file.problem, "xu": xu, "e1": e1, "xv": xv, "e2": e2, "alpha": alpha
            });
            let w = WitnessArgs {
                xu,
                e1: cone_vector("e1", e1)?,
                xv,
                e2: cone_vector("e2", e2)?,
                alpha: *alpha,
            };
            match commands::witness(&input, args.clone(), w) {
                Err(e) if e.trace().is_some() => {
                    // a breakdown still reports how far the construction got
                    let env = ResultEnvelope {
                        command: envelope::CommandEcho {
                            name: "witness".into(),
                            args,
                        },
                        input_digest: input.digest.clone(),
                        outcome: serde_json::json!({"error": e.to_string()}),
                        trace: serde_json::to_value(e.trace()).ok(),
                        timing: envelope::Timing { elapsed_seconds: 0.0 },
                        tolerances: input.problem.tolerances.clone(),
                        search: input.problem.search.clone(),
                    };
                    emit(&env, out)?;
                    return Err(e);
                }
                r => r,
            }
        }
        Command::Verify { file, envelope } => {
            let input = load(&file.problem, overrides)?;
            let bytes = read(envelope)?;
            let previous: ResultEnvelope = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Validation(format!("{}: {e}", envelope.display())))?;
            let args = serde_json::json!({"problem": file.problem, "envelope": envelope});
            commands::verify(&input, args, &previous)
        }
        Command::Slemma { file, x_star } => {
            let input = load(&file.problem, overrides)?;
            let args = serde_json::json!({"problem": file.problem, "x_star": x_star});
            commands::slemma(&input, args, x_star)
        }
        Command::Sample {
            file,
            count,
            box_radius,
            radius,
        } => {
            let input = load(&file.problem, overrides)?;
            let a = SampleArgs {
                count: *count,
                seed: cli.seed.unwrap_or(input.problem.search.seed),
                box_radius: *box_radius,
                radius: radius.unwrap_or(*box_radius),
            };
            let mut w = open_output(out)?;
            commands::sample(&input.problem, &a, &mut w)?;
            return Ok(exit::OK);
        }
        Command::VerifyConvexity {
            file,
            trials,
            box_radius,
            rho,
        } => {
            let input = load(&file.problem, overrides)?;
            let a = ConvexityArgs {
                trials: *trials,
                seed: cli.seed.unwrap_or(input.problem.search.seed),
                box_radius: *box_radius,
                rho: *rho,
            };
            let args = serde_json::json!({
                "problem": file.problem, "trials": trials, "seed": a.seed, "box": box_radius, "rho": rho
            });
            commands::verify_convexity(&input, args, &a)
        }
    }?;
    emit(&report.envelope, out)?;
    Ok(report.exit_code)
}

fn init_logging() -> Result<(), CliError> {
    let level = match std::env::var("HCK_LOG").as_deref() {
        Err(_) | Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("trace") => log::LevelFilter::Trace,
        Ok(other) => {
            return Err(CliError::Validation(format!(
                "HCK_LOG: unknown level {other:?} (expected quiet, info or trace)"
            )))
        }
    };
    env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).init();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = init_logging().and_then(|()| run(cli)).unwrap_or_else(|e| {
        eprintln!("hck: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
