// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::sync::Arc;
use std::time::Duration;

use domainhub_core::{Argon2Scheme, Clock, ManualClock};
use domainhub_relay::RelayConfig;
use domainhub_server::{start, RunningServer, ServerConfig};
use reqwest::{Method, StatusCode};
use serde_json::{json, Value};

pub fn config(data_dir: Option<std::path::PathBuf>, clock: Arc<dyn Clock>) -> ServerConfig {
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
        clock,
        ..ServerConfig::default()
    }
}

pub async fn server() -> RunningServer {
    start(config(None, Arc::new(ManualClock::default())))
        .await
        .unwrap()
}

#[derive(Clone)]
pub struct Api {
    pub base: String,
    pub http: reqwest::Client,
}

#[derive(Debug)]
pub struct Reply {
    pub status: StatusCode,
    pub body: Value,
}

impl Reply {
    pub fn ok(&self) -> &Value {
        assert!(self.status.is_success(), "{} {}", self.status, self.body);
        &self.body
    }

    pub fn code(&self) -> &str {
        self.body["error"].as_str().unwrap_or("")
    }
}

impl Api {
    pub fn new(server: &RunningServer) -> Self {
        Self {
            base: server.base_url(),
            http: reqwest::Client::new(),
        }
    }

    pub async fn call(
        &self,
        method: Method,
        path: &str,
        token: Option<&str>,
        body: Option<Value>,
    ) -> Reply {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        let status = resp.status();
        let bytes = resp.bytes().await.unwrap();
        let body = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
        Reply { status, body }
    }

    pub async fn get(&self, path: &str, token: &str) -> Reply {
        self.call(Method::GET, path, Some(token), None).await
    }

    pub async fn post(&self, path: &str, token: &str, body: Value) -> Reply {
        self.call(Method::POST, path, Some(token), Some(body)).await
    }

    pub async fn delete(&self, path: &str, token: &str) -> Reply {
        self.call(Method::DELETE, path, Some(token), None).await
    }

    /// Registers and logs in; returns (user id, token).
    pub async fn account(&self, name: &str) -> (u64, String) {
        let creds = json!({"username": name, "password": "password123"});
        let user = self
            .call(Method::POST, "/api/register", None, Some(creds.clone()))
            .await;
        let id = user.ok()["id"].as_u64().unwrap();
        let login = self
            .call(Method::POST, "/api/login", None, Some(creds))
            .await;
        (id, login.ok()["token"].as_str().unwrap().to_string())
    }

    pub async fn mkdir(&self, token: &str, parent: u64, name: &str) -> u64 {
        let r = self
            .post("/api/dirs", token, json!({"parent": parent, "name": name}))
            .await;
        r.ok()["id"].as_u64().unwrap()
    }
}
