//! `pdmu`: model checking the modal μ-calculus with backwards modalities over
//! pushdown systems.
//!
//! Exit codes: 0 success (and `true` for `member`), 1 `false` from `member`
//! or disagreements from `diff`, 2 input errors, 3 a fixpoint exceeded the
//! iteration limit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use pdmu_core::ama::Denotation;
use pdmu_core::engine::{model_check, EngineError, Options, DEFAULT_ITERATION_LIMIT};
use pdmu_core::mucalc::{parse_closed, Formula};
use pdmu_core::oracle::{diff_check, DiffOptions, Mode, OracleError, Sample};
use pdmu_core::pds::{parse_pds, PushdownSystem};

/// Fixed seed used by `diff --samples` when `--seed` is not given.
const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser)]
#[command(name = "pdmu", version, about = "Modal mu-calculus model checking over pushdown systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the denotation automaton and write it as JSON.
    Check {
        #[command(flatten)]
        input: Input,
        /// Output path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Print `n=.. k=.. iters=[..] delta=..` (to stdout, or stderr when
        /// the JSON goes to stdout).
        #[arg(long)]
        stats: bool,
    },
    /// Decide whether a configuration satisfies the formula.
    Member {
        #[command(flatten)]
        input: Input,
        /// Configuration such as `p a b $`.
        #[arg(long)]
        config: String,
    },
    /// List satisfying configurations up to a stack depth.
    Sample {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
    },
    /// Compare the engine against an independent oracle.
    Diff {
        #[command(flatten)]
        input: Input,
        /// kripke, prestar, poststar or invariant.
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
        /// Check this many random configurations instead of all of them.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render a denotation JSON file as Graphviz DOT.
    ExportDot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    pds: PathBuf,
    /// Formula text.
    #[arg(long, conflicts_with = "formula_file", required_unless_present = "formula_file")]
    formula: Option<String>,
    /// File holding the formula.
    #[arg(long)]
    formula_file: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ITERATION_LIMIT)]
    iteration_limit: usize,
}

impl Input {
    fn load(&self) -> Result<(PushdownSystem, Formula, Options)> {
        let sys = load_pds(&self.pds)?;
        let phi = match (&self.formula, &self.formula_file) {
            (Some(text), _) => parse_closed(text).map_err(|e| anyhow!("formula: {e}"))?,
            (None, Some(path)) => {
                let text = read(path)?;
                parse_closed(text.trim()).map_err(|e| anyhow!("{}: {e}", path.display()))?
            }
            (None, None) => unreachable!("clap requires one of the formula flags"),
        };
        let options = Options {
            iteration_limit: self.iteration_limit,
            ..Options::default()
        };
        Ok((sys, phi, options))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_pds(path: &Path) -> Result<PushdownSystem> {
    parse_pds(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn write_or_print(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check { input, output, stats } => {
            let (sys, phi, options) = input.load()?;
            let d = model_check(&sys, &phi, &options)?;
            let mut json = d.to_json();
            json.push('\n');
            write_or_print(output.as_deref(), &json)?;
            if stats {
                if output.is_some() {
                    println!("{}", d.stats);
                } else {
                    eprintln!("{}", d.stats);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Member { input, config } => {
            let (sys, phi, options) = input.load()?;
            let c = sys.parse_config(&config).map_err(|e| anyhow!("config: {e}"))?;
            let d = model_check(&sys, &phi, &options)?;
            let holds = d.accepts(&c)?;
            println!("{holds}");
            Ok(if holds { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Sample { input, max_depth } => {
            let (sys, phi, options) = input.load()?;
            let d = model_check(&sys, &phi, &options)?;
            for c in d.sample_accepted(max_depth) {
                println!("{}", sys.format_config(&c));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Diff {
            input,
            mode,
            max_depth,
            samples,
            seed,
            jobs,
            output,
        } => {
            let (sys, phi, engine) = input.load()?;
            let mode: Mode = mode.parse()?;
            let sample = match samples {
                Some(samples) => Sample::Random {
                    max_depth,
                    samples,
                    seed: seed.unwrap_or(DEFAULT_SEED),
                },
                None => Sample::Exhaustive { max_depth },
            };
            let report = diff_check(
                &sys,
                &phi,
                &DiffOptions {
                    mode,
                    sample,
                    engine,
                    jobs,
                },
            )?;
            let mut json = report.to_json();
            json.push('\n');
            write_or_print(output.as_deref(), &json)?;
            eprintln!("{} cases, {} disagreements", report.cases, report.disagreements.len());
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::ExportDot { input, output } => {
            let d = Denotation::from_json(&read(&input)?).map_err(|e| anyhow!("{}: {e}", input.display()))?;
            write_or_print(output.as_deref(), &d.to_dot())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn is_iteration_limit(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(c.downcast_ref::<EngineError>(), Some(EngineError::IterationLimit { .. }))
            || matches!(
                c.downcast_ref::<OracleError>(),
                Some(OracleError::Engine(EngineError::IterationLimit { .. }))
            )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_iteration_limit(&e) {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
