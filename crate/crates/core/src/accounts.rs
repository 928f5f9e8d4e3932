// SPDX-License-Identifier: Apache-2.0

//! User accounts, password hashing and login sessions.

use std::collections::HashMap;
use std::fmt;

use argon2::password_hash::rand_core::OsRng as HashRng;
use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::{Algorithm, Argon2, Params, Version};
use chrono::Duration;
use parking_lot::Mutex;
use rand::rngs::OsRng;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::clock::{Clock, Timestamp};
use crate::error::{Error, Result};
use crate::ids::UserId;
use crate::registry::Registry;

pub const MIN_PASSWORD_LEN: usize = 8;
pub const MAX_USERNAME_LEN: usize = 64;
/// Raw token entropy in bytes (256 bits).
pub const TOKEN_BYTES: usize = 32;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAccount {
    pub id: UserId,
    pub username: String,
    /// PHC-format hash string. Empty for accounts that cannot log in.
    pub password_hash: String,
    pub created_at: Timestamp,
}

impl fmt::Debug for UserAccount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserAccount")
            .field("id", &self.id)
            .field("username", &self.username)
            .field("created_at", &self.created_at)
            .finish_non_exhaustive()
    }
}

/// Seam between account handling and the password hashing algorithm.
pub trait PasswordScheme: Send + Sync + fmt::Debug {
    fn hash(&self, password: &str) -> String;
    fn verify(&self, password: &str, hash: &str) -> bool;
}

/// Argon2id.
#[derive(Debug, Clone, Default)]
pub struct Argon2Scheme {
    params: Params,
}

impl Argon2Scheme {
    /// Cheaper parameters for tests and local fixtures.
    pub fn light() -> Self {
        Self {
            params: Params::new(256, 1, 1, None).expect("valid argon2 params"),
        }
    }

    fn hasher(&self) -> Argon2<'static> {
        Argon2::new(Algorithm::Argon2id, Version::V0x13, self.params.clone())
    }
}

impl PasswordScheme for Argon2Scheme {
    fn hash(&self, password: &str) -> String {
        let salt = SaltString::generate(&mut HashRng);
        self.hasher()
            .hash_password(password.as_bytes(), &salt)
            .expect("argon2 hashing with valid params")
            .to_string()
    }

    fn verify(&self, password: &str, hash: &str) -> bool {
        // Verification reads the parameters embedded in the hash string.
        PasswordHash::new(hash)
            .map(|parsed| {
                Argon2::default()
                    .verify_password(password.as_bytes(), &parsed)
                    .is_ok()
            })
            .unwrap_or(false)
    }
}

pub fn validate_username(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::InvalidUsername("empty"));
    }
    if name.chars().count() > MAX_USERNAME_LEN {
        return Err(Error::InvalidUsername("longer than 64 characters"));
    }
    if !name
        .chars()
        .all(|c| c.is_alphanumeric() || matches!(c, '-' | '_' | '.'))
    {
        return Err(Error::InvalidUsername(
            "only letters, digits, '-', '_' and '.' are allowed",
        ));
    }
    Ok(())
}

impl Registry {
    pub fn user(&self, id: UserId) -> Option<&UserAccount> {
        self.state.users.get(&id)
    }

    pub fn user_by_name(&self, username: &str) -> Option<&UserAccount> {
        self.usernames
            .get(&username.to_lowercase())
            .and_then(|id| self.state.users.get(id))
    }

    pub fn users(&self) -> impl Iterator<Item = &UserAccount> {
        self.state.users.values()
    }

    pub fn username_available(&self, username: &str) -> Result<()> {
        validate_username(username)?;
        if self.usernames.contains_key(&username.to_lowercase()) {
            return Err(Error::UsernameTaken);
        }
        Ok(())
    }

    /// Stores an account with an already computed password hash.
    pub fn create_account(&mut self, username: &str, password_hash: String) -> Result<UserAccount> {
        self.username_available(username)?;
        let account = UserAccount {
            id: self.state.ids.user(),
            username: username.to_string(),
            password_hash,
            created_at: self.clock.now(),
        };
        self.usernames.insert(username.to_lowercase(), account.id);
        self.state.users.insert(account.id, account.clone());
        Ok(account)
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionToken {
    pub token: String,
    pub user: UserId,
    pub expires_at: Timestamp,
}

impl fmt::Debug for SessionToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SessionToken")
            .field("user", &self.user)
            .field("expires_at", &self.expires_at)
            .finish_non_exhaustive()
    }
}

/// Fresh token from the operating system's cryptographic RNG.
pub fn generate_token() -> String {
    let mut raw = [0u8; TOKEN_BYTES];
    OsRng.fill_bytes(&mut raw);
    hex::encode(raw)
}

/// Live login sessions. Not persisted: a restart logs everyone out.
#[derive(Debug)]
pub struct Sessions {
    ttl: Duration,
    tokens: Mutex<HashMap<String, SessionToken>>,
}

impl Sessions {
    pub fn new(ttl: Duration) -> Self {
        Self {
            ttl,
            tokens: Mutex::new(HashMap::new()),
        }
    }

    pub fn issue(&self, user: UserId, clock: &dyn Clock) -> SessionToken {
        let session = SessionToken {
            token: generate_token(),
            user,
            expires_at: clock.now() + self.ttl,
        };
        self.tokens
            .lock()
            .insert(session.token.clone(), session.clone());
        session
    }

    pub fn resolve(&self, token: &str, clock: &dyn Clock) -> Result<UserId> {
        let mut tokens = self.tokens.lock();
        let Some(session) = tokens.get(token) else {
            return Err(Error::Unauthenticated);
        };
        if clock.now() >= session.expires_at {
            tokens.remove(token);
            return Err(Error::Unauthenticated);
        }
        Ok(session.user)
    }

    pub fn revoke(&self, token: &str) -> bool {
        self.tokens.lock().remove(token).is_some()
    }
}

impl Default for Sessions {
    fn default() -> Self {
        Self::new(Duration::hours(24))
    }
}
