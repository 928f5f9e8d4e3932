// SPDX-License-Identifier: Apache-2.0

//! `agent run`: serves a local directory to the hub.

use std::io::Write;
use std::sync::Arc;
use std::time::Duration;

use domainhub_relay::{Agent, AgentConfig, LocalShares, RelayError};

use crate::args::AgentArgs;
use crate::error::{CliError, CliResult};
use crate::profile::DEFAULT_AGENT_PORT;

/// Hub agent endpoint derived from the HTTP server URL.
pub fn default_agent_addr(server: &str) -> String {
    let rest = server.split_once("://").map_or(server, |(_, r)| r);
    let authority = rest.split('/').next().unwrap_or(rest);
    let host = match authority.rsplit_once(':') {
        Some((h, port)) if port.chars().all(|c| c.is_ascii_digit()) => h,
        _ => authority,
    };
    format!("{host}:{DEFAULT_AGENT_PORT}")
}

fn fatal(e: RelayError) -> Option<CliError> {
    match e {
        RelayError::AuthFailed => Some(CliError::Api {
            status: 401,
            code: "AuthFailed".into(),
            message: "the hub rejected the session token; log in again".into(),
        }),
        RelayError::VersionMismatch { .. } => Some(CliError::Api {
            status: 400,
            code: e.code().into(),
            message: e.to_string(),
        }),
        _ => None,
    }
}

pub fn run(
    out: &mut dyn Write,
    server: &str,
    token: Option<String>,
    profile_agent_server: Option<String>,
    args: AgentArgs,
) -> CliResult<()> {
    let token = token.ok_or_else(|| CliError::Api {
        status: 401,
        code: "Unauthenticated".into(),
        message: "not logged in; run `domainhub login` first".into(),
    })?;
    let root = args
        .share
        .canonicalize()
        .map_err(|e| CliError::Local(format!("{}: {e}", args.share.display())))?;
    if !root.is_dir() {
        return Err(CliError::Local(format!(
            "{} is not a directory",
            root.display()
        )));
    }
    let label = match args.label {
        Some(l) => l,
        None => root
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "share".into()),
    };
    let addr = args
        .agent_server
        .or(profile_agent_server)
        .unwrap_or_else(|| default_agent_addr(server));
    let shares = LocalShares::new().with_share(label.clone(), root.clone());
    let agent = Agent::new(
        AgentConfig::new(token, args.agent_id.clone()),
        Arc::new(shares),
    );

    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()?;
    rt.block_on(async {
        let mut backoff = Duration::from_secs(1);
        loop {
            writeln!(
                out,
                "agent {} sharing {label} ({}) via {addr}",
                args.agent_id,
                root.display()
            )?;
            out.flush()?;
            let result = tokio::select! {
                r = agent.run_tcp(&addr) => r,
                _ = tokio::signal::ctrl_c() => return Ok(()),
            };
            match result {
                Ok(()) if args.once => return Ok(()),
                Ok(()) => backoff = Duration::from_secs(1),
                Err(e) => {
                    if let Some(stop) = fatal(e.clone()) {
                        return Err(stop);
                    }
                    if args.once {
                        return Err(CliError::Connection(format!("{addr}: {e}")));
                    }
                    writeln!(
                        out,
                        "connection lost: {e}; retrying in {}s",
                        backoff.as_secs()
                    )?;
                }
            }
            tokio::select! {
                _ = tokio::time::sleep(backoff) => {}
                _ = tokio::signal::ctrl_c() => return Ok(()),
            }
            backoff = (backoff * 2).min(Duration::from_secs(30));
        }
    })
}
