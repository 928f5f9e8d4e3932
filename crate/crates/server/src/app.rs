// SPDX-License-Identifier: Apache-2.0

//! Server startup, periodic snapshots and shutdown.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use domainhub_core::{
    load_snapshot, Argon2Scheme, Clock, PasswordScheme, Policy, Registry, Service, SystemClock,
};
use domainhub_relay::{Hub, RelayConfig};
use tokio::net::TcpListener;
use tokio::sync::watch;
use tokio::task::JoinHandle;
use tower_http::services::ServeDir;

use crate::api::{router, AppState};

pub const SNAPSHOT_FILE: &str = "state.snapshot";

pub struct ServerConfig {
    pub listen: SocketAddr,
    pub agent_listen: SocketAddr,
    /// Snapshot location. `None` keeps everything in memory.
    pub data_dir: Option<PathBuf>,
    /// `None` disables periodic saves; a final save still happens on stop.
    pub snapshot_interval: Option<Duration>,
    /// Static web client served at `/`.
    pub static_dir: Option<PathBuf>,
    pub relay: RelayConfig,
    pub passwords: Arc<dyn PasswordScheme>,
    pub policy: Policy,
    pub clock: Arc<dyn Clock>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            listen: ([127, 0, 0, 1], 8080).into(),
            agent_listen: ([127, 0, 0, 1], 8081).into(),
            data_dir: None,
            snapshot_interval: Some(Duration::from_secs(60)),
            static_dir: None,
            relay: RelayConfig::default(),
            passwords: Arc::new(Argon2Scheme::default()),
            policy: Policy::default(),
            clock: Arc::new(SystemClock),
        }
    }
}

pub fn snapshot_path(data_dir: &Path) -> PathBuf {
    data_dir.join(SNAPSHOT_FILE)
}

/// Loads the snapshot in `data_dir` if there is one, else starts empty.
pub fn open_registry(
    data_dir: Option<&Path>,
    clock: Arc<dyn Clock>,
    policy: Policy,
) -> anyhow::Result<Registry> {
    if let Some(dir) = data_dir {
        let path = snapshot_path(dir);
        if path.exists() {
            let snapshot =
                load_snapshot(&path).with_context(|| format!("loading {}", path.display()))?;
            return Ok(Registry::from_snapshot(snapshot, clock, policy)?);
        }
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(Registry::new(clock, policy))
}

/// A started server. Dropping it leaves the tasks running; call
/// [`RunningServer::stop`] for an orderly shutdown with a final save.
pub struct RunningServer {
    pub http_addr: SocketAddr,
    pub agent_addr: SocketAddr,
    pub state: AppState,
    data_dir: Option<PathBuf>,
    shutdown: watch::Sender<bool>,
    http: JoinHandle<std::io::Result<()>>,
    tasks: Vec<JoinHandle<()>>,
}

impl RunningServer {
    pub fn base_url(&self) -> String {
        format!("http://{}", self.http_addr)
    }

    /// Writes a snapshot now, if a data directory is configured.
    pub async fn save(&self) -> anyhow::Result<()> {
        save(&self.state, self.data_dir.clone()).await
    }

    pub async fn stop(self) -> anyhow::Result<()> {
        let _ = self.shutdown.send(true);
        for t in &self.tasks {
            t.abort();
        }
        self.http.await??;
        save(&self.state, self.data_dir).await
    }
}

async fn save(state: &AppState, data_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let Some(dir) = data_dir else {
        return Ok(());
    };
    let service = state.service.clone();
    tokio::task::spawn_blocking(move || service.save(&snapshot_path(&dir))).await??;
    Ok(())
}

pub async fn start(config: ServerConfig) -> anyhow::Result<RunningServer> {
    let registry = open_registry(
        config.data_dir.as_deref(),
        config.clock.clone(),
        config.policy.clone(),
    )?;
    let service = Arc::new(Service::new(registry, config.passwords.clone()));
    let auth_service = service.clone();
    let hub = Hub::new(config.relay.clone(), move |token: &str| {
        auth_service.authenticate(token).ok()
    });
    let state = AppState { service, hub };

    let http_listener = TcpListener::bind(config.listen)
        .await
        .with_context(|| format!("binding {}", config.listen))?;
    let agent_listener = TcpListener::bind(config.agent_listen)
        .await
        .with_context(|| format!("binding {}", config.agent_listen))?;
    let http_addr = http_listener.local_addr()?;
    let agent_addr = agent_listener.local_addr()?;

    let mut app = router(state.clone());
    if let Some(dir) = &config.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    let (shutdown, mut stop_rx) = watch::channel(false);
    let http = tokio::spawn(async move {
        axum::serve(http_listener, app)
            .with_graceful_shutdown(async move {
                let _ = stop_rx.wait_for(|stop| *stop).await;
            })
            .await
    });

    let mut tasks = Vec::new();
    let hub = state.hub.clone();
    tasks.push(tokio::spawn(async move {
        if let Err(e) = hub.listen(agent_listener).await {
            tracing::error!(error = %e, "agent listener failed");
        }
    }));
    if let (Some(every), Some(dir)) = (config.snapshot_interval, config.data_dir.clone()) {
        let state = state.clone();
        tasks.push(tokio::spawn(async move {
            let mut tick = tokio::time::interval(every);
            tick.tick().await;
            loop {
                tick.tick().await;
                if let Err(e) = save(&state, Some(dir.clone())).await {
                    tracing::error!(error = %e, "periodic snapshot failed");
                }
            }
        }));
    }
    tracing::info!(%http_addr, %agent_addr, "listening");
    Ok(RunningServer {
        http_addr,
        agent_addr,
        state,
        data_dir: config.data_dir,
        shutdown,
        http,
        tasks,
    })
}
