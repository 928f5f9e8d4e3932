// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(
            Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl FromStr for $name {
            type Err = std::num::ParseIntError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.parse().map($name)
            }
        }
    };
}

id_type!(
    /// Identifies a directory. Allocated from a monotonic counter that is
    /// persisted with the snapshot, so ids are never reused.
    DirectoryId
);
id_type!(ArticleId);
id_type!(UserId);
id_type!(
    /// Identifies a mount binding.
    BindingId
);

/// Built-in account that owns the root directory. It has no password and
/// cannot log in.
pub const SYSTEM_USER: UserId = UserId(0);

/// Monotonic id allocators. Part of the persistent state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdCounters {
    pub next_user: u64,
    pub next_directory: u64,
    pub next_article: u64,
    pub next_binding: u64,
}

impl Default for IdCounters {
    fn default() -> Self {
        Self {
            next_user: 1,
            next_directory: 1,
            next_article: 1,
            next_binding: 1,
        }
    }
}

impl IdCounters {
    pub fn user(&mut self) -> UserId {
        let id = UserId(self.next_user);
        self.next_user += 1;
        id
    }

    pub fn directory(&mut self) -> DirectoryId {
        let id = DirectoryId(self.next_directory);
        self.next_directory += 1;
        id
    }

    pub fn article(&mut self) -> ArticleId {
        let id = ArticleId(self.next_article);
        self.next_article += 1;
        id
    }

    pub fn binding(&mut self) -> BindingId {
        let id = BindingId(self.next_binding);
        self.next_binding += 1;
        id
    }
}
