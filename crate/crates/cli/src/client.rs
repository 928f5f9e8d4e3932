// SPDX-License-Identifier: Apache-2.0

use std::io::{Read, Write};
use std::time::Duration;

use reqwest::blocking::{Client as Http, Response};
use reqwest::{Method, StatusCode};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Blocking JSON client for the HTTP API.
#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    token: Option<String>,
    http: Http,
}

pub type Params<'a> = &'a [(&'a str, String)];

impl Client {
    pub fn new(base: &str, token: Option<String>) -> CliResult<Self> {
        let base = base.trim_end_matches('/').to_string();
        if !base.starts_with("http://") {
            return Err(CliError::usage(format!(
                "server URL must start with http:// (got {base:?})"
            )));
        }
        let http = Http::builder()
            .connect_timeout(Duration::from_secs(10))
            .timeout(None)
            .build()
            .map_err(|e| CliError::Local(e.to_string()))?;
        Ok(Self { base, token, http })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn token(&self) -> Option<&str> {
        self.token.as_deref()
    }

    fn send(
        &self,
        method: Method,
        path: &str,
        query: Params<'_>,
        body: Option<&Value>,
    ) -> CliResult<Response> {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if !query.is_empty() {
            req = req.query(query);
        }
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(b);
        }
        let resp = req
            .send()
            .map_err(|e| CliError::Connection(format!("{}: {e}", self.base)))?;
        if resp.status().is_success() {
            Ok(resp)
        } else {
            Err(api_error(resp))
        }
    }

    pub fn call(
        &self,
        method: Method,
        path: &str,
        query: Params<'_>,
        body: Option<&Value>,
    ) -> CliResult<Value> {
        let resp = self.send(method, path, query, body)?;
        if resp.status() == StatusCode::NO_CONTENT {
            return Ok(Value::Null);
        }
        resp.json()
            .map_err(|e| CliError::Connection(format!("bad response body: {e}")))
    }

    pub fn get(&self, path: &str, query: Params<'_>) -> CliResult<Value> {
        self.call(Method::GET, path, query, None)
    }

    pub fn post(&self, path: &str, body: &Value) -> CliResult<Value> {
        self.call(Method::POST, path, &[], Some(body))
    }

    pub fn delete(&self, path: &str) -> CliResult<Value> {
        self.call(Method::DELETE, path, &[], None)
    }

    /// Streams a response body into `sink`. A body that ends early is an
    /// error, never a short file.
    pub fn download(&self, path: &str, query: Params<'_>, sink: &mut dyn Write) -> CliResult<u64> {
        let mut resp = self.send(Method::GET, path, query, None)?;
        let mut buf = vec![0u8; 64 * 1024];
        let mut total = 0u64;
        loop {
            let n = match resp.read(&mut buf) {
                Ok(0) => break,
                Ok(n) => n,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
                Err(e) => {
                    return Err(CliError::Api {
                        status: 502,
                        code: "TransferInterrupted".into(),
                        message: format!("transfer broke off after {total} bytes: {e}"),
                    })
                }
            };
            sink.write_all(&buf[..n])?;
            total += n as u64;
        }
        sink.flush()?;
        Ok(total)
    }
}

fn api_error(resp: Response) -> CliError {
    let status = resp.status();
    let text = resp.text().unwrap_or_default();
    let parsed: Option<Value> = serde_json::from_str(&text).ok();
    let field = |k: &str| {
        parsed
            .as_ref()
            .and_then(|v| v.get(k))
            .and_then(Value::as_str)
            .map(str::to_string)
    };
    CliError::Api {
        status: status.as_u16(),
        code: field("error").unwrap_or_else(|| format!("Http{}", status.as_u16())),
        message: field("message").unwrap_or(text),
    }
}
