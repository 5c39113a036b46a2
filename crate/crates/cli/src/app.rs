//! Command-line definition and dispatch.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::commands::{self, CertifyInput, FuzzInput, Output, EXIT_OK, EXIT_PARSE};
use crate::fuzz::MAX_HEIGHT;
use pets_core::derivation::VNF_LENGTH_CONSTANT;

#[derive(Parser, Debug)]
#[command(
    name = "pets",
    version,
    about = "Check and certify derivations in equational theories over binary strings"
)]
pub struct RunConfig {
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a theory and check a derivation against it.
    Check {
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        derivation: PathBuf,
    },
    /// Print the Variable Normal Form of a derivation.
    Vnf {
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        derivation: PathBuf,
        /// Fail when the normal form is longer than C * lh(D)^2.
        #[arg(long, default_value_t = VNF_LENGTH_CONSTANT)]
        constant: usize,
    },
    /// Certify one or more derivations and print certificates as JSON.
    Certify {
        #[arg(long)]
        theory: PathBuf,
        #[arg(long = "derivation", required = true, num_args = 1..)]
        derivations: Vec<PathBuf>,
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long)]
        assignment: Option<PathBuf>,
        /// Print the instruction sequences to stderr.
        #[arg(long)]
        trace: bool,
        /// Worker threads when certifying several derivations.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Evaluate a term in a frame.
    Eval {
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long)]
        assignment: Option<PathBuf>,
    },
    /// Exhaustively check that a frame is a κ-model for a derivation's axioms.
    ModelCheck {
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        derivation: PathBuf,
        #[arg(long)]
        frame: PathBuf,
        /// Gauge bound; defaults to G(F) + lh(D).
        #[arg(long)]
        kappa: Option<usize>,
        #[arg(long, default_value_t = commands::MODEL_CHECK_CAP)]
        cap: usize,
    },
    /// Rewrite a ground term with the axioms.
    Oracle {
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
    },
    /// Generate random theories and derivations and certify them all.
    Fuzz {
        /// Use this theory instead of random ones.
        #[arg(long)]
        theory: Option<PathBuf>,
        #[arg(long, env = "PETS_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Number of random theories.
        #[arg(long, default_value_t = 20)]
        theories: usize,
        #[arg(long, default_value_t = MAX_HEIGHT)]
        max_height: usize,
        /// Write the corpus files into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

fn read(path: &Path) -> Result<String, Output> {
    fs::read_to_string(path).map_err(|e| Output {
        status: EXIT_PARSE,
        stdout: String::new(),
        stderr: format!("{}: {e}\n", path.display()),
    })
}

fn read_opt(path: &Option<PathBuf>) -> Result<Option<String>, Output> {
    path.as_deref().map(read).transpose()
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Runs a parsed command line.
pub fn run(config: &RunConfig) -> Output {
    match dispatch(&config.command) {
        Ok(out) | Err(out) => out,
    }
}

fn dispatch(command: &Command) -> Result<Output, Output> {
    Ok(match command {
        Command::Check { theory, derivation } => commands::cmd_check(&read(theory)?, &read(derivation)?),
        Command::Vnf {
            theory,
            derivation,
            constant,
        } => commands::cmd_vnf(&read(theory)?, &read(derivation)?, *constant),
        Command::Certify {
            theory,
            derivations,
            frame,
            assignment,
            trace,
            jobs,
        } => {
            let th = read(theory)?;
            let frame = read_opt(frame)?;
            let assignment = read_opt(assignment)?;
            let texts = derivations.iter().map(|p| read(p)).collect::<Result<Vec<_>, _>>()?;
            let certify_one = |text: &String| {
                commands::cmd_certify(&CertifyInput {
                    theory: &th,
                    derivation: text,
                    frame: frame.as_deref(),
                    assignment: assignment.as_deref(),
                    trace: *trace,
                })
            };
            if texts.len() == 1 {
                certify_one(&texts[0])
            } else {
                let outs: Vec<Output> = with_jobs(*jobs, || texts.par_iter().map(certify_one).collect());
                combine(derivations, outs)
            }
        }
        Command::Eval {
            theory,
            term,
            frame,
            assignment,
        } => commands::cmd_eval(
            &read(theory)?,
            term,
            read_opt(frame)?.as_deref(),
            read_opt(assignment)?.as_deref(),
        ),
        Command::ModelCheck {
            theory,
            derivation,
            frame,
            kappa,
            cap,
        } => commands::cmd_model_check(&read(theory)?, &read(derivation)?, &read(frame)?, *kappa, *cap),
        Command::Oracle { theory, term, fuel } => commands::cmd_oracle(&read(theory)?, term, *fuel),
        Command::Fuzz {
            theory,
            seed,
            count,
            theories,
            max_height,
            out,
            jobs,
        } => {
            let theory = read_opt(theory)?;
            let input = FuzzInput {
                seed: *seed,
                count: *count,
                theories: *theories,
                theory: theory.as_deref(),
                max_height: *max_height,
            };
            let (mut result, corpus) = if *jobs > 0 {
                with_jobs(*jobs, || commands::cmd_fuzz(&input))
            } else {
                commands::cmd_fuzz(&input)
            };
            if let (Some(dir), Some(corpus)) = (out, corpus) {
                let written = fs::create_dir_all(dir).and_then(|()| {
                    commands::corpus_files(&corpus)
                        .into_iter()
                        .try_for_each(|(name, text)| fs::write(dir.join(name), text))
                });
                if let Err(e) = written {
                    result.status = EXIT_PARSE;
                    result.stderr.push_str(&format!("{}: {e}\n", dir.display()));
                }
            }
            result
        }
    })
}

/// Merges per-file outputs into one JSON array, keeping the worst status.
fn combine(paths: &[PathBuf], outs: Vec<Output>) -> Output {
    let mut status = EXIT_OK;
    let mut stderr = String::new();
    let mut items = Vec::new();
    for (path, out) in paths.iter().zip(outs) {
        status = status.max(out.status);
        for line in out.stderr.lines() {
            stderr.push_str(&format!("{}: {line}\n", path.display()));
        }
        let cert: serde_json::Value = serde_json::from_str(&out.stdout).unwrap_or(serde_json::Value::Null);
        items.push(serde_json::json!({
            "file": path.display().to_string(),
            "status": out.status,
            "certificate": cert,
        }));
    }
    Output {
        status,
        stdout: crate::report::to_json(&items),
        stderr,
    }
}
