use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spinbath_cli::schema::{config_schema, report_schema};
use spinbath_cli::{exit, run, RunConfig, RunOptions};

#[derive(Parser)]
#[command(name = "spinbath", version, about = "Central spin decoherence in a spin bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON configuration.
    Run {
        config: PathBuf,
        /// Output directory (overrides output.directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (overrides numerics.threads).
        #[arg(long)]
        threads: Option<usize>,
        /// Print stage timings and warnings to stderr.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
    /// Print a JSON Schema.
    Schema {
        #[arg(value_enum, default_value_t = SchemaKind::Config)]
        kind: SchemaKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemaKind {
    Config,
    Report,
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Schema { kind } => {
            let schema = match kind {
                SchemaKind::Config => config_schema(),
                SchemaKind::Report => report_schema(),
            };
            println!("{}", serde_json::to_string_pretty(&schema).expect("schema serializes"));
            code(exit::OK)
        }
        Command::Validate { config } => match RunConfig::load(&config).and_then(|c| c.validate()) {
            Ok(()) => {
                println!("{}: ok", config.display());
                code(exit::OK)
            }
            Err(e) => {
                eprintln!("{e}");
                code(exit::CONFIG)
            }
        },
        Command::Run { config, out, threads, verbose } => {
            let cfg = match RunConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return code(exit::CONFIG);
                }
            };
            match run(&cfg, &RunOptions { out, threads }) {
                Ok(outcome) => {
                    let r = &outcome.report;
                    if verbose {
                        for t in &r.timings {
                            eprintln!("{:>10}: {:.3} s", t.stage, t.seconds);
                        }
                        eprintln!("{:>10}: {:.3} s", "total", r.total_seconds);
                    }
                    for w in &r.warnings {
                        eprintln!("warning: {w}");
                    }
                    for f in &r.flags {
                        eprintln!("unconverged: {f}");
                    }
                    println!("{}", outcome.directory.join(spinbath_cli::runner::REPORT_FILE).display());
                    code(r.exit_code)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    code(e.exit_code())
                }
            }
        }
    }
}
