// SPDX-License-Identifier: Apache-2.0

use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use clap::Parser;
use domainhub_server::{start, ServerConfig};

/// Directory service: HTTP API plus the agent relay listener.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// HTTP API address.
    #[arg(long, env = "DOMAINHUB_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Address agents connect to.
    #[arg(long, env = "DOMAINHUB_AGENT_LISTEN", default_value = "127.0.0.1:8081")]
    agent_listen: SocketAddr,
    /// Where the snapshot and attachment blobs live.
    #[arg(long, env = "DOMAINHUB_DATA_DIR", default_value = "domainhub-data")]
    data_dir: PathBuf,
    /// Seconds between snapshots; 0 saves only on shutdown.
    #[arg(long, env = "DOMAINHUB_SNAPSHOT_INTERVAL", default_value_t = 60)]
    snapshot_interval: u64,
    /// Directory with the web client bundle, served at `/`.
    #[arg(long, env = "DOMAINHUB_STATIC_DIR")]
    static_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let args = Args::parse();
    let server = start(ServerConfig {
        listen: args.listen,
        agent_listen: args.agent_listen,
        data_dir: Some(args.data_dir),
        snapshot_interval: (args.snapshot_interval > 0)
            .then(|| Duration::from_secs(args.snapshot_interval)),
        static_dir: args.static_dir,
        ..ServerConfig::default()
    })
    .await?;
    println!("http {} agents {}", server.http_addr, server.agent_addr);
    tokio::signal::ctrl_c().await?;
    tracing::info!("shutting down");
    server.stop().await
}
