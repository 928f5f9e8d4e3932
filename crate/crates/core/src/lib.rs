// SPDX-License-Identifier: Apache-2.0

//! Core of a self-hosted directory service.
//!
//! All content lives in one tree rooted at `ALL`. Any user may create
//! directories where the parent's authorization matrix lets them, own and
//! govern what they create, run a membership group on each directory, and
//! publish articles with attachments. Access decisions are made per
//! directory by a role × right matrix.

pub mod accounts;
pub mod authz;
pub mod blob;
pub mod clock;
pub mod error;
pub mod groups;
pub mod ids;
pub mod mounts;
pub mod par;
pub mod registry;
pub mod search;
pub mod service;
pub mod snapshot;
pub mod tree;

pub use accounts::{Argon2Scheme, PasswordScheme, SessionToken, UserAccount};
pub use authz::{default_matrix, AuthMatrix, GrantSet, Right, Role, RoleSet};
pub use clock::{Clock, ManualClock, SystemClock, Timestamp};
pub use error::{Entity, Error, ErrorClass, Occupancy, Result};
pub use groups::{Decision, GroupState, JoinOutcome, Membership};
pub use ids::{ArticleId, BindingId, DirectoryId, UserId, SYSTEM_USER};
pub use mounts::{Availability, EntryKind, MountBinding, MountTarget, RemoteEntry};
pub use par::Execution;
pub use registry::{PersistentState, Policy, Registry};
pub use search::{parse_query, Query, ReindexScope, SearchHit, SearchMode};
pub use service::Service;
pub use snapshot::{load_snapshot, save_snapshot, Snapshot, SnapshotError};
pub use tree::{
    Article, ArticleDraft, ArticleSummary, Attachment, DirState, Directory, DomainView,
    NavigatorBar, Visibility,
};
