use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wander_service::config::ServiceConfig;
use wander_service::{replay, server, tools};

#[derive(Parser)]
#[command(name = "wander", version, about = "Conversational tour guide for virtual museums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the session server.
    Serve {
        /// TOML or JSON config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        museum: Option<PathBuf>,
    },
    /// Replay a transcript against the scripted backend.
    Replay {
        transcript: PathBuf,
        #[arg(long)]
        museum: Option<PathBuf>,
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Load a museum file and check its invariants.
    Validate { museum: PathBuf },
    /// Print the planned path to an artwork.
    Route {
        #[arg(long, default_value = "fixtures/museum35.json")]
        museum: PathBuf,
        /// Start point as X,Y in metres.
        #[arg(long, value_parser = tools::parse_point, allow_hyphen_values = true)]
        from: [f64; 2],
        /// Artwork id or name.
        #[arg(long)]
        to: String,
    },
}

fn finish(outcome: tools::Outcome) -> ExitCode {
    if outcome.code == 0 {
        println!("{}", outcome.message);
    } else {
        eprintln!("{}", outcome.message);
    }
    ExitCode::from(outcome.code as u8)
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Serve { config, port, museum } => {
            let mut cfg = match config {
                Some(path) => match ServiceConfig::load(&path) {
                    Ok(c) => c,
                    Err(e) => {
                        eprintln!("{e}");
                        return ExitCode::from(tools::EXIT_IO as u8);
                    }
                },
                None => ServiceConfig::default(),
            };
            if let Some(p) = port {
                cfg.port = p;
            }
            if let Some(m) = museum {
                cfg.museum = m;
            }
            match server::serve(&cfg).await {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(tools::EXIT_INVALID as u8)
                }
            }
        }
        Command::Replay {
            transcript,
            museum,
            rules,
        } => match replay::replay_file(&transcript, museum.as_deref(), rules.as_deref()).await {
            Ok(report) => {
                if report.turns.is_empty() {
                    eprintln!("warning: transcript has no turns");
                }
                print!("{}", report.render());
                if report.all_passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(tools::EXIT_INVALID as u8)
                }
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(tools::EXIT_IO as u8)
            }
        },
        Command::Validate { museum } => finish(tools::validate(&museum)),
        Command::Route { museum, from, to } => finish(tools::route(&museum, from, &to)),
    }
}
