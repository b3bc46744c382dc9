use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use floer_cli::{run, Command, Outcome, RunOptions};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "floer", version, about = "Floer homology of finite-type maps and plane curve singularity monodromies")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Truncation bound for Newton–Puiseux expansions
    #[arg(long, global = true)]
    order_bound: Option<u64>,
    /// Emit JSON reports instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Number of input files processed in parallel
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct Files {
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Floer homology of a map of finite type
    HfMap(Files),
    /// Full singularity pipeline: monodromy, verification and Floer homology
    HfSing {
        #[command(flatten)]
        files: Files,
        /// Embedding of the Milnor fiber into a closed surface
        #[arg(long)]
        embedding: Option<PathBuf>,
    },
    /// Splice diagram and characteristic set
    Splice {
        #[command(flatten)]
        files: Files,
        /// Write the collapsed diagram in Graphviz format
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check an input document
    Validate(Files),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut opts = RunOptions { order_bound: cli.order_bound, embedding: None };
    let mut dot_out = None;
    let (command, files) = match cli.command {
        Cmd::HfMap(f) => (Command::HfMap, f.files),
        Cmd::HfSing { files, embedding } => {
            opts.embedding = embedding;
            (Command::HfSing, files.files)
        }
        Cmd::Splice { files, dot } => {
            dot_out = dot;
            (Command::Splice, files.files)
        }
        Cmd::Validate(f) => (Command::Validate, f.files),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    let outcomes: Vec<Outcome> = pool.install(|| files.par_iter().map(|f| run(command, f, &opts)).collect());
    let mut exit = 0;
    for (i, out) in outcomes.iter().enumerate() {
        if cli.json {
            println!("{}", serde_json::to_string_pretty(&out.report).expect("serializable report"));
        } else {
            print!("{}", out.text);
        }
        if let (Some(path), Some(dot)) = (&dot_out, &out.dot) {
            // one file per input; later inputs get a numeric suffix
            let target = if i == 0 { path.clone() } else { path.with_extension(format!("{i}.dot")) };
            if let Err(e) = std::fs::write(&target, dot) {
                eprintln!("cannot write {}: {e}", target.display());
                exit = exit.max(1);
            }
        }
        exit = exit.max(out.exit_code);
    }
    ExitCode::from(exit as u8)
}
