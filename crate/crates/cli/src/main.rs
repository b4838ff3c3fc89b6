use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use quantrange_cli::bench::{self, BenchError};
use quantrange_cli::generate::{generate, Family};
use quantrange_cli::problem_file::load_problem;
use quantrange_cli::report::{solve, RunError, SolveSettings};
use quantrange_core::vector::PiSearch;

const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "quantrange", version, about = "Inner and outer approximations of quantified ranges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print the intervals.
    Solve {
        file: PathBuf,
        /// Also write the report as JSON to this path.
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
        /// Add a grid-sampling estimate, e.g. `points=41`.
        #[arg(long, value_name = "points=N", value_parser = parse_sample)]
        sample: Option<usize>,
        /// How to choose the joint inner assignment (overrides the file).
        #[arg(long, value_enum)]
        pi: Option<PiMode>,
        /// Refuse sampling runs above this many evaluations.
        #[arg(long, default_value_t = 1e8)]
        sample_budget: f64,
    },
    /// Time generated instances and emit CSV.
    Bench {
        family: Family,
        /// Comma-separated sizes, e.g. `2,5,10`.
        #[arg(value_parser = parse_sizes)]
        sizes: Sizes,
        /// Write the CSV here instead of standard output.
        #[arg(long, value_name = "OUT")]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a generated problem file.
    Gen {
        family: Family,
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PiMode {
    Exhaustive,
    Greedy,
}

#[derive(Clone, Debug)]
struct Sizes(Vec<usize>);

fn parse_sample(s: &str) -> Result<usize, String> {
    let n = s.strip_prefix("points=").ok_or_else(|| format!("expected `points=N`, got `{s}`"))?;
    let n: usize = n.parse().map_err(|e| format!("bad point count `{n}`: {e}"))?;
    if n < 2 {
        return Err("at least 2 points are needed".to_string());
    }
    Ok(n)
}

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let sizes = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| match p.trim().parse::<usize>() {
            Ok(0) => Err("sizes must be at least 1".to_string()),
            Ok(k) => Ok(k),
            Err(e) => Err(format!("bad size `{p}`: {e}")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if sizes.is_empty() {
        return Err("the size list is empty".to_string());
    }
    Ok(Sizes(sizes))
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Solve { file, json, sample, pi, sample_budget } => {
            let loaded = match load_problem(&file) {
                Ok(l) => l,
                Err(e) => return fail(EXIT_INPUT, e),
            };
            let settings = SolveSettings {
                search: pi.map(|m| match m {
                    PiMode::Exhaustive => PiSearch::Exhaustive,
                    PiMode::Greedy => PiSearch::Greedy,
                }),
                sample_points: sample,
                sample_budget,
            };
            let report = match solve(&loaded, &settings) {
                Ok(r) => r,
                Err(e @ RunError::SampleBudget { .. }) => return fail(EXIT_USAGE, e),
                Err(e) => return fail(EXIT_INTERNAL, e),
            };
            print!("{}", report.to_text());
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&report).expect("reports serialize");
                if let Err(e) = std::fs::write(&path, text + "\n") {
                    return fail(EXIT_INTERNAL, format!("cannot write {}: {e}", path.display()));
                }
            }
            ExitCode::SUCCESS
        }
        Command::Bench { family, sizes, csv, seed } => {
            let rows = match bench::run(family, &sizes.0, seed) {
                Ok(r) => r,
                Err(e @ BenchError::Generate(_)) => return fail(EXIT_USAGE, e),
                Err(e) => return fail(EXIT_INTERNAL, e),
            };
            let written = match csv {
                Some(path) => match std::fs::File::create(&path) {
                    Ok(f) => bench::write_csv(&rows, f),
                    Err(e) => return fail(EXIT_INTERNAL, format!("cannot write {}: {e}", path.display())),
                },
                None => bench::write_csv(&rows, std::io::stdout().lock()),
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(EXIT_INTERNAL, e),
            }
        }
        Command::Gen { family, k, seed } => match generate(family, k, seed) {
            Ok(f) => {
                println!("{}", f.to_json());
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_USAGE, e),
        },
    }
}
