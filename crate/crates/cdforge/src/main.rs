use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cdforge::{app, open_wiki, Config};
use cdforge_core::om::Severity;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cdforge", version, about = "Collaborative maintenance of OpenMath content dictionaries")]
struct Cli {
    /// Repository directory.
    #[arg(long, global = true, env = "CDFORGE_REPO", default_value = "cdforge-repo")]
    repo: PathBuf,
    /// TOML config file (tokens, namespaces, lock lifetime, port).
    #[arg(long, global = true, env = "CDFORGE_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API.
    Serve {
        /// Overrides the port from the config file.
        #[arg(long)]
        port: Option<u16>,
        /// Render every page into the cache before accepting requests.
        #[arg(long)]
        warm: bool,
    },
    /// Bulk-load .ocd, .sts and .ntn files from a directory.
    Import {
        dir: PathBuf,
        #[arg(long, default_value = "import")]
        author: String,
    },
    /// Write the head revision as plain files.
    Export { dir: PathBuf },
    /// Emit every page as static HTML.
    Render {
        #[arg(long, required = true)]
        all: bool,
        #[arg(long, default_value = "site")]
        out: PathBuf,
    },
    /// Validate every content dictionary and signature file.
    Check,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Box<dyn std::error::Error>> {
    Ok(match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    })
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let config = load_config(cli.config.as_deref())?;
    let wiki = open_wiki(&cli.repo, &config)?;
    match cli.command {
        Command::Serve { port, warm } => {
            if warm {
                let ids = wiki.state().page_ids();
                for id in &ids {
                    wiki.page(id)?;
                }
                tracing::info!(pages = ids.len(), "cache warmed");
            }
            let port = port.unwrap_or(config.port);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
                tracing::info!(addr = %listener.local_addr()?, repo = %cli.repo.display(), "serving");
                axum::serve(listener, app(wiki, &config))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
            })?;
        }
        Command::Import { dir, author } => match wiki.import_dir(&dir, &author)? {
            Some(rev) => println!("imported {} files as r{}", rev.changed_paths.len(), rev.number),
            None => println!("nothing to import"),
        },
        Command::Export { dir } => {
            let n = wiki.export(&dir)?;
            println!("exported {n} files to {}", dir.display());
        }
        Command::Render { out, .. } => {
            let n = wiki.render_all(&out)?;
            println!("rendered {n} pages to {}", out.display());
        }
        Command::Check => {
            let diags = wiki.check()?;
            let mut errors = 0;
            for d in &diags {
                if d.severity == Severity::Error {
                    errors += 1;
                }
                let at = d.symbol.as_deref().map(|s| format!("#{s}")).unwrap_or_default();
                println!("{:?}: {}{at}: {} [{}]", d.severity, d.cd, d.message, d.code);
            }
            println!("{} diagnostics, {errors} errors", diags.len());
            if errors > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
