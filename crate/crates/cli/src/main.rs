use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cobra_cli::{check_presentation, cmd_configure, cmd_new, CliError};
use cobra_core::assistants::serve_demo;
use cobra_core::languages;
use cobra_server::{start, RunOptions};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(
    name = "cobra",
    version,
    about = "Live code presentations in the browser"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a new presentation directory
    New { name: PathBuf },
    /// Serve a presentation (also: `cobra <dir>`)
    Run {
        #[arg(default_value = ".")]
        dir: PathBuf,
        /// Port to listen on, overriding binding.port (0 picks a free one)
        #[arg(long)]
        port: Option<u16>,
        /// Interface to listen on, overriding binding.interface
        #[arg(long)]
        interface: Option<String>,
        /// Do not watch cobra.conf for changes
        #[arg(long)]
        no_watch: bool,
    },
    /// Check what a language assistant needs
    Configure { language: String },
    /// Serve the built-in assistant over stdin/stdout
    #[command(hide = true)]
    DemoAssistant {
        #[arg(long, default_value = "demo")]
        language: String,
    },
}

const SUBCOMMANDS: &[&str] = &["new", "run", "configure", "demo-assistant", "help"];

/// `cobra <dir> [flags]` is `cobra run <dir> [flags]`.
fn with_run_alias(mut args: Vec<String>) -> Vec<String> {
    if let Some(first) = args.get(1) {
        let is_meta = matches!(first.as_str(), "-h" | "--help" | "-V" | "--version");
        if !is_meta && !SUBCOMMANDS.contains(&first.as_str()) {
            args.insert(1, "run".into());
        }
    }
    args
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("cobra: {e}");
    ExitCode::from(e.exit_code())
}

async fn run(dir: PathBuf, options: RunOptions) -> Result<(), CliError> {
    let presentation = check_presentation(&dir)?;
    for w in &presentation.warnings {
        tracing::warn!("{w}");
    }
    let title = presentation.settings.title.clone();
    let server = start(presentation, options).await?;
    println!("Serving \"{title}\" at {}", server.url());
    let _ = std::io::stdout().flush();
    let _ = tokio::signal::ctrl_c().await;
    server.shutdown().await;
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse_from(with_run_alias(std::env::args().collect()));
    match cli.command {
        Command::New { name } => match cmd_new(&name) {
            Ok(dir) => {
                println!(
                    "Created {}; start it with `cobra {}`",
                    dir.display(),
                    dir.display()
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Configure { language } => {
            match cmd_configure(&language, std::path::Path::new("."), &mut std::io::stdout()) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => fail(e),
            }
        }
        Command::Run {
            dir,
            port,
            interface,
            no_watch,
        } => {
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(source) => {
                    return fail(CliError::Io {
                        context: "starting the runtime".into(),
                        source,
                    })
                }
            };
            let options = RunOptions {
                port,
                interface,
                watch: !no_watch,
            };
            match runtime.block_on(run(dir, options)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
        Command::DemoAssistant { language } => {
            let Some(lang) = languages::lookup(&language) else {
                return fail(CliError::UnknownLanguage {
                    name: language,
                    known: languages::known_ids()
                        .into_iter()
                        .map(str::to_owned)
                        .collect(),
                });
            };
            let stdin = std::io::stdin();
            match serve_demo(
                stdin.lock(),
                std::io::stdout().lock(),
                std::io::stderr(),
                &lang.syntax,
            ) {
                Ok(()) => ExitCode::SUCCESS,
                Err(source) => fail(CliError::Io {
                    context: "serving the demo assistant".into(),
                    source,
                }),
            }
        }
    }
}
