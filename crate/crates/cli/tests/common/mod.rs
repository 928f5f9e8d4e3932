// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use domainhub_core::{Argon2Scheme, ManualClock, Service};
use domainhub_relay::RelayConfig;
use domainhub_server::{start, RunningServer, ServerConfig};
use serde_json::Value;

pub const PASSWORD: &str = "password123";

/// A server on its own runtime so tests can block on the CLI.
pub struct TestServer {
    rt: tokio::runtime::Runtime,
    server: Option<RunningServer>,
    pub base: String,
    pub agent_addr: String,
    pub home: tempfile::TempDir,
}

pub fn config(data_dir: Option<PathBuf>) -> ServerConfig {
    ServerConfig {
        listen: ([127, 0, 0, 1], 0).into(),
        agent_listen: ([127, 0, 0, 1], 0).into(),
        data_dir,
        snapshot_interval: None,
        static_dir: None,
        relay: RelayConfig {
            list_timeout: Duration::from_millis(500),
            fetch_idle_timeout: Duration::from_millis(500),
            ..RelayConfig::default()
        },
        passwords: Arc::new(Argon2Scheme::light()),
        clock: Arc::new(ManualClock::default()),
        ..ServerConfig::default()
    }
}

impl TestServer {
    pub fn start() -> Self {
        Self::with_config(config(None))
    }

    pub fn with_config(config: ServerConfig) -> Self {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        let server = rt.block_on(start(config)).unwrap();
        Self {
            base: server.base_url(),
            agent_addr: server.agent_addr.to_string(),
            server: Some(server),
            rt,
            home: tempfile::tempdir().unwrap(),
        }
    }

    pub fn service(&self) -> Arc<Service> {
        self.server.as_ref().unwrap().state.service.clone()
    }

    pub fn running(&self) -> &RunningServer {
        self.server.as_ref().unwrap()
    }

    pub fn stop(&mut self) {
        if let Some(s) = self.server.take() {
            self.rt.block_on(s.stop()).unwrap();
        }
    }

    /// CLI identity with its own profile file.
    pub fn user(&self, name: &str) -> Cli {
        Cli {
            profile: self.home.path().join(format!("{name}.toml")),
            base: self.base.clone(),
            format: None,
        }
    }

    /// Registers and logs in through the CLI.
    pub fn account(&self, name: &str) -> Cli {
        let cli = self.user(name);
        cli.ok(&["register", name, "--password", PASSWORD]);
        cli.ok(&["login", name, "--password", PASSWORD]);
        cli
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        self.stop();
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl Outcome {
    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.stdout).into_owned()
    }

    pub fn lines(&self) -> Vec<Value> {
        self.text()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{l:?}: {e}")))
            .collect()
    }

    pub fn one(&self) -> Value {
        let mut lines = self.lines();
        assert_eq!(lines.len(), 1, "{}", self.text());
        lines.remove(0)
    }
}

#[derive(Clone, Debug)]
pub struct Cli {
    pub profile: PathBuf,
    pub base: String,
    pub format: Option<&'static str>,
}

impl Cli {
    pub fn json(&self) -> Self {
        Self {
            format: Some("json-lines"),
            ..self.clone()
        }
    }

    pub fn profile_path(&self) -> &Path {
        &self.profile
    }

    pub fn run(&self, args: &[&str]) -> Outcome {
        let mut argv: Vec<String> = vec![
            "domainhub".into(),
            "--config".into(),
            self.profile.display().to_string(),
            "--server".into(),
            self.base.clone(),
        ];
        if let Some(f) = self.format {
            argv.push("--format".into());
            argv.push(f.into());
        }
        argv.extend(args.iter().map(|s| s.to_string()));
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = domainhub_cli::run(argv, &mut out, &mut err);
        Outcome {
            code,
            stdout: out,
            stderr: String::from_utf8_lossy(&err).into_owned(),
        }
    }

    pub fn ok(&self, args: &[&str]) -> Outcome {
        let o = self.run(args);
        assert_eq!(o.code, 0, "{args:?}: {}", o.stderr);
        o
    }

    /// Runs and expects exit code 1 with the given error code.
    pub fn refused(&self, args: &[&str], code: &str) {
        let o = self.run(args);
        assert_eq!(o.code, 1, "{args:?}: {}{}", o.text(), o.stderr);
        assert!(
            o.stderr.contains(&format!("{code}:")),
            "{args:?}: {}",
            o.stderr
        );
    }

    pub fn id(&self, args: &[&str]) -> u64 {
        self.json().ok(args).one()["id"].as_u64().unwrap()
    }

    /// Starts `agent run --once` for this account on a background thread.
    pub fn spawn_agent(
        &self,
        agent_addr: &str,
        share: &Path,
        label: &str,
        agent_id: &str,
    ) -> std::thread::JoinHandle<Outcome> {
        let cli = self.clone();
        let args: Vec<String> = [
            "agent",
            "run",
            "--once",
            "--share",
            &share.display().to_string(),
            "--label",
            label,
            "--agent-id",
            agent_id,
            "--agent-server",
            agent_addr,
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        std::thread::spawn(move || {
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            cli.run(&refs)
        })
    }
}

/// Polls until `f` holds or two seconds pass.
pub fn eventually(mut f: impl FnMut() -> bool) -> bool {
    for _ in 0..200 {
        if f() {
            return true;
        }
        std::thread::sleep(Duration::from_millis(10));
    }
    false
}
