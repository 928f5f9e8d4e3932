// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::sync::Arc;

use chrono::Duration;
use parking_lot::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use crate::accounts::{PasswordScheme, SessionToken, Sessions, UserAccount, MIN_PASSWORD_LEN};
use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::ids::UserId;
use crate::registry::Registry;
use crate::snapshot::{save_snapshot, SnapshotError};

/// Shared handle over the registry plus accounts and sessions.
///
/// All mutations go through [`Service::write`], which serializes writers;
/// readers share [`Service::read`]. Password hashing and snapshot file I/O
/// happen outside the lock.
#[derive(Debug)]
pub struct Service {
    registry: RwLock<Registry>,
    sessions: Sessions,
    passwords: Arc<dyn PasswordScheme>,
    clock: Arc<dyn Clock>,
    // Placeholder hash verified for unknown usernames so both login failure
    // paths cost the same.
    decoy_hash: String,
}

impl Service {
    pub fn new(registry: Registry, passwords: Arc<dyn PasswordScheme>) -> Self {
        Self::with_session_ttl(registry, passwords, Duration::hours(24))
    }

    pub fn with_session_ttl(
        registry: Registry,
        passwords: Arc<dyn PasswordScheme>,
        ttl: Duration,
    ) -> Self {
        let clock = registry.clock().clone();
        let decoy_hash = passwords.hash("decoy password");
        Self {
            registry: RwLock::new(registry),
            sessions: Sessions::new(ttl),
            passwords,
            clock,
            decoy_hash,
        }
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Registry> {
        self.registry.read()
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, Registry> {
        self.registry.write()
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn register(&self, username: &str, password: &str) -> Result<UserAccount> {
        if password.chars().count() < MIN_PASSWORD_LEN {
            return Err(Error::WeakPassword(MIN_PASSWORD_LEN));
        }
        self.read().username_available(username)?;
        let hash = self.passwords.hash(password);
        self.write().create_account(username, hash)
    }

    pub fn login(&self, username: &str, password: &str) -> Result<SessionToken> {
        let found = self
            .read()
            .user_by_name(username)
            .map(|u| (u.id, u.password_hash.clone()));
        let ok = match &found {
            Some((_, hash)) if !hash.is_empty() => self.passwords.verify(password, hash),
            _ => {
                self.passwords.verify(password, &self.decoy_hash);
                false
            }
        };
        match found {
            Some((id, _)) if ok => Ok(self.sessions.issue(id, self.clock.as_ref())),
            _ => Err(Error::AuthFailed),
        }
    }

    pub fn authenticate(&self, token: &str) -> Result<UserId> {
        self.sessions.resolve(token, self.clock.as_ref())
    }

    pub fn logout(&self, token: &str) -> bool {
        self.sessions.revoke(token)
    }

    /// Captures under a read lock, then writes without holding it.
    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        let snapshot = self.read().capture();
        save_snapshot(&snapshot, path)
    }
}
