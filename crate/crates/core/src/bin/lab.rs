use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lca_weights::acceptance;
use lca_weights::experiment::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "lab", version, about = "Weighted maximal-function experiments on finite group models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of an experiment config and write the reports.
    Run {
        config: PathBuf,
        /// Write reports here instead of the config's output_dir.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Print the structure of a model, e.g. `padic{3,2}` or `window{4}`.
    Describe { model_spec: String },
    /// Run the full acceptance suite.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, output_dir } => {
            let outcome = ExperimentConfig::load(&config).and_then(|cfg| match &output_dir {
                Some(dir) => experiment::run_into(&cfg, dir),
                None => experiment::run(&cfg),
            });
            match outcome {
                Ok(o) => {
                    print!("{}", o.summary);
                    println!("reports written to {}", o.output_dir.display());
                    ExitCode::from(o.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("lab run: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Describe { model_spec } => match experiment::describe(&model_spec) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("lab describe: {e}");
                ExitCode::from(2)
            }
        },
        Command::Selftest => {
            if let Err(e) = experiment::threads_from_env().and_then(|n| {
                let mut b = rayon::ThreadPoolBuilder::new();
                if let Some(n) = n {
                    b = b.num_threads(n);
                }
                b.build_global().map_err(|e| lca_weights::Error::Config(e.to_string()))
            }) {
                eprintln!("lab selftest: {e}");
                return ExitCode::from(2);
            }
            let mut ok = true;
            for outcome in acceptance::run_all() {
                println!("{outcome}");
                ok &= outcome.pass;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
