// SPDX-License-Identifier: Apache-2.0

//! Share-relative path validation, applied by both the hub and the agent.
//!
//! Accepted paths are `/`-separated plain segments below the share root.
//! Anything that could step outside it, or that some platform might
//! interpret as such, is refused.

use crate::error::RelayError;

pub const MAX_PATH_LEN: usize = 4096;

/// Splits `rel` into validated segments. The empty string is the share root.
/// A single trailing `/` is tolerated.
pub fn sanitize(rel: &str) -> Result<Vec<String>, RelayError> {
    let reject = |why: &str| Err(RelayError::RemotePathRejected(format!("{why}: {rel:?}")));
    if rel.len() > MAX_PATH_LEN {
        return reject("path too long");
    }
    if rel.is_empty() {
        return Ok(Vec::new());
    }
    if rel.starts_with('/') {
        return reject("absolute path");
    }
    if rel.contains('\\') {
        return reject("backslash");
    }
    if rel.contains(':') {
        return reject("drive or stream separator");
    }
    if rel.chars().any(char::is_control) {
        return reject("control character");
    }
    let trimmed = rel.strip_suffix('/').unwrap_or(rel);
    let mut out = Vec::new();
    for seg in trimmed.split('/') {
        if seg.is_empty() {
            return reject("empty segment");
        }
        if seg == "~" {
            return reject("home reference");
        }
        let lower = seg.to_ascii_lowercase();
        if lower.contains("%2f") || lower.contains("%5c") {
            return reject("encoded separator");
        }
        if lower.replace("%2e", ".").chars().all(|c| c == '.') {
            return reject("dot segment");
        }
        out.push(seg.to_string());
    }
    Ok(out)
}
