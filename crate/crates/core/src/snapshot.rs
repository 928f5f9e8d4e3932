// SPDX-License-Identifier: Apache-2.0

//! Single-file snapshot persistence.
//!
//! The snapshot file is one header line followed by the JSON state:
//!
//! ```text
//! domainhub-snapshot v1 sha256:<hex of body> len:<body bytes>\n
//! <body>
//! ```
//!
//! Attachment bytes are stored content-addressed in a `blobs/` directory next
//! to the snapshot file. Blobs are written before the snapshot and the
//! snapshot itself is written to a temporary file and renamed into place, so
//! a crash at any point leaves the previous snapshot loadable.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::blob::{content_hash, BlobStore};
use crate::clock::Clock;
use crate::registry::{PersistentState, Policy, Registry};

pub const SCHEMA_VERSION: u32 = 1;
const MAGIC: &str = "domainhub-snapshot";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot schema version {found} is not supported (expected {expected})")]
    SchemaVersionMismatch { found: u32, expected: u32 },
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
}

/// A consistent copy of the registry taken under a read lock.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub state: PersistentState,
    pub blobs: BlobStore,
}

impl Registry {
    pub fn capture(&self) -> Snapshot {
        Snapshot {
            state: self.state.clone(),
            blobs: self.blobs.clone(),
        }
    }

    pub fn from_snapshot(
        snapshot: Snapshot,
        clock: Arc<dyn Clock>,
        policy: Policy,
    ) -> Result<Self, SnapshotError> {
        Registry::from_parts(snapshot.state, snapshot.blobs, clock, policy)
            .map_err(SnapshotError::CorruptSnapshot)
    }
}

pub fn blob_dir(snapshot_path: &Path) -> PathBuf {
    snapshot_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join("blobs")
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

fn write_file_synced(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(bytes)?;
    file.sync_all()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fault {
    None,
    BeforeRename,
}

pub fn save_snapshot(snapshot: &Snapshot, path: &Path) -> Result<(), SnapshotError> {
    save_with_fault(snapshot, path, Fault::None)
}

fn save_with_fault(snapshot: &Snapshot, path: &Path, fault: Fault) -> Result<(), SnapshotError> {
    let blobs = blob_dir(path);
    fs::create_dir_all(&blobs)?;
    for (hash, bytes) in snapshot.blobs.iter() {
        let target = blobs.join(hash);
        if target.exists() {
            continue;
        }
        let tmp = tmp_path(&target);
        write_file_synced(&tmp, bytes)?;
        fs::rename(&tmp, &target)?;
    }

    let body = serde_json::to_vec(&snapshot.state)
        .map_err(|e| SnapshotError::CorruptSnapshot(format!("serialize: {e}")))?;
    let digest = hex::encode(Sha256::digest(&body));
    let mut bytes = format!(
        "{MAGIC} v{SCHEMA_VERSION} sha256:{digest} len:{}\n",
        body.len()
    )
    .into_bytes();
    bytes.extend_from_slice(&body);

    let tmp = tmp_path(path);
    write_file_synced(&tmp, &bytes)?;
    if fault == Fault::BeforeRename {
        return Err(SnapshotError::Io(std::io::Error::other("injected crash")));
    }
    fs::rename(&tmp, path)?;
    if let Some(dir) = path.parent() {
        // Persist the rename itself; not every platform allows opening dirs.
        if let Ok(d) = fs::File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<(String, usize), SnapshotError> {
    let corrupt = || SnapshotError::CorruptSnapshot("malformed header".into());
    let mut fields = line.split(' ');
    if fields.next() != Some(MAGIC) {
        return Err(corrupt());
    }
    let version: u32 = fields
        .next()
        .and_then(|v| v.strip_prefix('v'))
        .and_then(|v| v.parse().ok())
        .ok_or_else(corrupt)?;
    if version != SCHEMA_VERSION {
        return Err(SnapshotError::SchemaVersionMismatch {
            found: version,
            expected: SCHEMA_VERSION,
        });
    }
    let digest = fields
        .next()
        .and_then(|d| d.strip_prefix("sha256:"))
        .ok_or_else(corrupt)?;
    let len = fields
        .next()
        .and_then(|l| l.strip_prefix("len:"))
        .and_then(|l| l.parse().ok())
        .ok_or_else(corrupt)?;
    if fields.next().is_some() {
        return Err(corrupt());
    }
    Ok((digest.to_string(), len))
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    let bytes = fs::read(path)?;
    let split = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| SnapshotError::CorruptSnapshot("missing header".into()))?;
    let header = std::str::from_utf8(&bytes[..split])
        .map_err(|_| SnapshotError::CorruptSnapshot("header is not UTF-8".into()))?;
    let (digest, len) = parse_header(header)?;
    let body = &bytes[split + 1..];
    if body.len() != len {
        return Err(SnapshotError::CorruptSnapshot(format!(
            "expected {len} body bytes, found {}",
            body.len()
        )));
    }
    if hex::encode(Sha256::digest(body)) != digest {
        return Err(SnapshotError::CorruptSnapshot("checksum mismatch".into()));
    }
    let state: PersistentState = serde_json::from_slice(body)
        .map_err(|e| SnapshotError::CorruptSnapshot(format!("decode: {e}")))?;

    let dir = blob_dir(path);
    let mut blobs = BlobStore::default();
    for article in state.articles.values() {
        for attachment in &article.attachments {
            if blobs.contains(&attachment.blob) {
                continue;
            }
            let data = fs::read(dir.join(&attachment.blob)).map_err(|e| {
                SnapshotError::CorruptSnapshot(format!("blob {}: {e}", attachment.blob))
            })?;
            if content_hash(&data) != attachment.blob {
                return Err(SnapshotError::CorruptSnapshot(format!(
                    "blob {} does not match its hash",
                    attachment.blob
                )));
            }
            blobs.insert_verified(attachment.blob.clone(), data.into());
        }
    }
    Ok(Snapshot { state, blobs })
}
