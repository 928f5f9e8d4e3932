// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::sync::Arc;

use sha2::{Digest, Sha256};

/// Content-addressed attachment bytes keyed by lowercase hex SHA-256.
#[derive(Clone, Debug, Default)]
pub struct BlobStore {
    blobs: HashMap<String, Arc<[u8]>>,
}

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl BlobStore {
    pub fn put(&mut self, bytes: Vec<u8>) -> String {
        let hash = content_hash(&bytes);
        self.blobs
            .entry(hash.clone())
            .or_insert_with(|| bytes.into());
        hash
    }

    /// Inserts bytes under a hash already verified by the caller.
    pub(crate) fn insert_verified(&mut self, hash: String, bytes: Arc<[u8]>) {
        self.blobs.insert(hash, bytes);
    }

    pub fn get(&self, hash: &str) -> Option<Arc<[u8]>> {
        self.blobs.get(hash).cloned()
    }

    pub fn contains(&self, hash: &str) -> bool {
        self.blobs.contains_key(hash)
    }

    pub fn len(&self) -> usize {
        self.blobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blobs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Arc<[u8]>)> {
        self.blobs.iter().map(|(k, v)| (k.as_str(), v))
    }
}
