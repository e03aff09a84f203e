//! `decint`: evaluate decomposition integrals from problem files.

mod problem;
mod run;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use problem::ProblemFile;
use run::{Flags, Mode, Outcome, EXIT_INPUT};

#[derive(Parser)]
#[command(
    name = "decint",
    version,
    about = "Sub- and super-decomposition integrals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every query of a problem file and print the result document.
    Run {
        /// Problem file, `-` for stdin.
        file: PathBuf,
        #[command(flatten)]
        flags: FlagArgs,
    },
    /// Run a seeded property suite.
    Check {
        suite: String,
        /// Use the base of this problem file where the suite supports one.
        #[arg(long)]
        file: Option<PathBuf>,
        #[command(flatten)]
        flags: FlagArgs,
    },
    /// Print the optimal decomposition behind each result.
    Explain {
        file: PathBuf,
        /// Comma-separated query; defaults to the file's queries.
        #[arg(long, value_delimiter = ',')]
        query: Option<Vec<f64>>,
        #[command(flatten)]
        flags: FlagArgs,
    },
    /// Print a problem file in canonical form.
    Fmt { file: PathBuf },
}

#[derive(Args, Clone)]
struct FlagArgs {
    /// Overrides the file's mode.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    grid_step: Option<f64>,
    /// Replace the system's constraint by "at most k members".
    #[arg(long)]
    max_parts: Option<usize>,
    #[arg(long)]
    node_budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tolerance: Option<f64>,
}

impl FlagArgs {
    fn flags(&self) -> Flags {
        Flags {
            grid_step: self.grid_step,
            max_parts: self.max_parts,
            node_budget: self.node_budget,
            seed: self.seed,
            tolerance: self.tolerance,
        }
    }
}

fn load(path: &PathBuf) -> anyhow::Result<ProblemFile> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?
    };
    ProblemFile::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn execute(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Run { file, flags } => {
            let problem = load(&file)?;
            let outcome = run::run(&problem, flags.mode.as_deref(), &flags.flags())?;
            match &outcome {
                Outcome::Results(doc) => print!("{}", doc.to_json()),
                Outcome::Check(report) => print!("{report}"),
            }
            Ok(outcome.exit_code())
        }
        Command::Check { suite, file, flags } => {
            let base = match file {
                Some(path) => Some(load(&path)?.base(problem::Overrides::default())?),
                None => None,
            };
            let report = run::check(&suite, base, &flags.flags())?;
            print!("{report}");
            Ok(Outcome::Check(report).exit_code())
        }
        Command::Explain { file, query, flags } => {
            let mut problem = load(&file)?;
            if let Some(q) = query {
                problem.queries = vec![q];
                problem = ProblemFile::parse(&problem.to_canonical())?;
            }
            let mode = Mode::parse(flags.mode.as_deref().unwrap_or(&problem.mode))?;
            let outcome = run::run(&problem, flags.mode.as_deref(), &flags.flags())?;
            let Outcome::Results(doc) = &outcome else {
                anyhow::bail!("explain needs an evaluation mode, not a check");
            };
            let symbol = problem.symbol.as_deref().unwrap_or("A");
            for row in &doc.results {
                print!("{}", run::explain(row, symbol, run::direction_of(&mode)));
            }
            Ok(outcome.exit_code())
        }
        Command::Fmt { file } => {
            print!("{}", load(&file)?.to_canonical());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
