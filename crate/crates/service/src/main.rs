use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;
use layout_eval_core::ClassRegistry;
use layout_eval_service::{bind_and_serve, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "layout-eval-server", version, about = "Layout analysis evaluation over HTTP")]
struct Args {
    /// Address to listen on
    #[arg(long, env = "LAYOUT_EVAL_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Directory holding collections and jobs
    #[arg(long, env = "LAYOUT_EVAL_DATA_DIR", default_value = "layout-eval-data")]
    data_dir: PathBuf,
    /// Jobs evaluated concurrently
    #[arg(long, env = "LAYOUT_EVAL_WORKERS", default_value_t = 2)]
    workers: usize,
    /// Class registry file (TOML); defaults to the DIVA-HisDB encoding
    #[arg(long, env = "LAYOUT_EVAL_CLASSES")]
    classes: Option<PathBuf>,
    /// Largest accepted request body, in MiB
    #[arg(long, env = "LAYOUT_EVAL_MAX_BODY_MB", default_value_t = 512)]
    max_body_mb: usize,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let args = Args::parse();

    let mut config = ServiceConfig::new(&args.data_dir);
    config.workers = args.workers;
    config.max_body_bytes = args.max_body_mb * 1024 * 1024;
    if let Some(path) = &args.classes {
        config.registry = ClassRegistry::from_path(path)
            .with_context(|| format!("loading class registry {}", path.display()))?;
    }

    bind_and_serve(args.listen, config, |addr| tracing::info!("listening on http://{addr}"))
        .await
        .context("server failed")
}
