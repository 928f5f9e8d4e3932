// SPDX-License-Identifier: Apache-2.0

//! The in-memory owner of all directory service state.
//!
//! Operations are implemented as `impl Registry` blocks in the module that
//! owns each concern (`tree`, `authz`, `groups`, `search`, `mounts`,
//! `accounts`). Mutations take `&mut self`; wrapping the registry in a
//! read-write lock gives the single-writer, many-reader contract.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::accounts::UserAccount;
use crate::authz::{root_matrix, GrantSet};
use crate::blob::BlobStore;
use crate::clock::{Clock, SystemClock};
use crate::error::{Entity, Error, Result};
use crate::groups::GroupState;
use crate::ids::{ArticleId, BindingId, DirectoryId, IdCounters, UserId, SYSTEM_USER};
use crate::mounts::MountBinding;
use crate::search::SearchIndex;
use crate::tree::{Article, DirState, Directory, Visibility, ROOT_NAME};

/// Tunable behavior.
#[derive(Clone, Debug)]
pub struct Policy {
    /// When true, a blacklisted user holds no role at all on the directory,
    /// not even `AnyUser`. When false they keep `AnyUser`.
    pub blacklist_denies_all: bool,
    /// Per-file attachment cap in bytes.
    pub attachment_limit: usize,
}

impl Default for Policy {
    fn default() -> Self {
        Self {
            blacklist_denies_all: true,
            attachment_limit: 32 * 1024 * 1024,
        }
    }
}

/// Everything that survives a restart. Attachment bytes are kept
/// content-addressed outside this struct.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistentState {
    pub ids: IdCounters,
    pub root: DirectoryId,
    pub users: BTreeMap<UserId, UserAccount>,
    pub directories: BTreeMap<DirectoryId, Directory>,
    pub groups: BTreeMap<DirectoryId, GroupState>,
    pub grants: BTreeMap<DirectoryId, GrantSet>,
    pub articles: BTreeMap<ArticleId, Article>,
    pub mounts: BTreeMap<BindingId, MountBinding>,
}

#[derive(Debug)]
pub struct Registry {
    pub(crate) state: PersistentState,
    pub(crate) children: HashMap<DirectoryId, BTreeSet<DirectoryId>>,
    pub(crate) dir_articles: HashMap<DirectoryId, BTreeSet<ArticleId>>,
    pub(crate) usernames: HashMap<String, UserId>,
    pub(crate) blobs: BlobStore,
    pub(crate) index: SearchIndex,
    pub(crate) clock: Arc<dyn Clock>,
    pub(crate) policy: Policy,
}

impl Default for Registry {
    fn default() -> Self {
        Self::new(Arc::new(SystemClock), Policy::default())
    }
}

impl Registry {
    /// Fresh registry holding only the system account and the root.
    pub fn new(clock: Arc<dyn Clock>, policy: Policy) -> Self {
        let now = clock.now();
        let mut ids = IdCounters::default();
        let root = ids.directory();
        let mut users = BTreeMap::new();
        users.insert(
            SYSTEM_USER,
            UserAccount {
                id: SYSTEM_USER,
                username: "system".into(),
                password_hash: String::new(),
                created_at: now,
            },
        );
        let mut directories = BTreeMap::new();
        directories.insert(
            root,
            Directory {
                id: root,
                name: ROOT_NAME.into(),
                parent: None,
                owner: SYSTEM_USER,
                state: DirState::Active,
                visibility: Visibility::Public,
                matrix: root_matrix(),
                created_at: now,
            },
        );
        let state = PersistentState {
            ids,
            root,
            users,
            directories,
            groups: BTreeMap::new(),
            grants: BTreeMap::new(),
            articles: BTreeMap::new(),
            mounts: BTreeMap::new(),
        };
        Self::from_parts(state, BlobStore::default(), clock, policy)
            .expect("fresh state is consistent")
    }

    /// Rebuilds derived indexes over loaded state and validates it.
    pub fn from_parts(
        state: PersistentState,
        blobs: BlobStore,
        clock: Arc<dyn Clock>,
        policy: Policy,
    ) -> Result<Self, String> {
        let mut registry = Registry {
            state,
            children: HashMap::new(),
            dir_articles: HashMap::new(),
            usernames: HashMap::new(),
            blobs,
            index: SearchIndex::default(),
            clock,
            policy,
        };
        for (id, dir) in &registry.state.directories {
            if let Some(parent) = dir.parent {
                registry.children.entry(parent).or_default().insert(*id);
            }
        }
        for (id, article) in &registry.state.articles {
            registry
                .dir_articles
                .entry(article.directory)
                .or_default()
                .insert(*id);
            for attachment in &article.attachments {
                if !registry.blobs.contains(&attachment.blob) {
                    return Err(format!("missing blob {} for article {id}", attachment.blob));
                }
            }
        }
        for (id, user) in &registry.state.users {
            if registry
                .usernames
                .insert(user.username.to_lowercase(), *id)
                .is_some()
            {
                return Err(format!("duplicate username {:?}", user.username));
            }
        }
        registry.check_invariants()?;
        registry.rebuild_index();
        Ok(registry)
    }

    pub fn state(&self) -> &PersistentState {
        &self.state
    }

    pub fn blobs(&self) -> &BlobStore {
        &self.blobs
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn root(&self) -> DirectoryId {
        self.state.root
    }

    pub(crate) fn dir(&self, id: DirectoryId) -> Result<&Directory> {
        self.state
            .directories
            .get(&id)
            .ok_or(Error::NotFound(Entity::Directory))
    }

    pub(crate) fn dir_mut(&mut self, id: DirectoryId) -> Result<&mut Directory> {
        self.state
            .directories
            .get_mut(&id)
            .ok_or(Error::NotFound(Entity::Directory))
    }

    pub(crate) fn require_owner(&self, dir: DirectoryId, actor: UserId) -> Result<&Directory> {
        let d = self.dir(dir)?;
        if d.owner != actor {
            return Err(Error::NotOwner);
        }
        Ok(d)
    }

    pub(crate) fn require_user(&self, user: UserId) -> Result<&UserAccount> {
        self.state.users.get(&user).ok_or(Error::UserNotFound)
    }

    /// Walks from `id` up to the root, `id` first.
    pub fn ancestry(&self, id: DirectoryId) -> impl Iterator<Item = &Directory> + '_ {
        let mut next = self.state.directories.get(&id);
        std::iter::from_fn(move || {
            let current = next?;
            next = current.parent.and_then(|p| self.state.directories.get(&p));
            Some(current)
        })
    }

    /// No node from `id` up to the root is trashed.
    pub fn is_live(&self, id: DirectoryId) -> bool {
        self.ancestry(id).all(|d| d.state == DirState::Active)
    }

    /// A directory is visible to a viewer unless some trashed node on its
    /// root chain belongs to someone else.
    pub fn is_visible_to(&self, id: DirectoryId, viewer: UserId) -> bool {
        self.ancestry(id)
            .all(|d| d.state == DirState::Active || d.owner == viewer)
    }

    pub(crate) fn require_visible(&self, id: DirectoryId, viewer: UserId) -> Result<&Directory> {
        let d = self.dir(id)?;
        if !self.is_visible_to(id, viewer) {
            return Err(Error::NotFound(Entity::Directory));
        }
        Ok(d)
    }

    /// Structural invariants over the whole state. Returns a description of
    /// the first violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        let dirs = &self.state.directories;
        let roots: Vec<&Directory> = dirs.values().filter(|d| d.parent.is_none()).collect();
        match roots.as_slice() {
            [root] if root.id == self.state.root && root.name == ROOT_NAME => {}
            _ => return Err("there must be exactly one root named ALL".into()),
        }
        for dir in dirs.values() {
            let mut steps = 0;
            let mut cursor = dir;
            while let Some(parent) = cursor.parent {
                steps += 1;
                if steps > dirs.len() {
                    return Err(format!("cycle through directory {}", dir.id));
                }
                cursor = dirs
                    .get(&parent)
                    .ok_or_else(|| format!("directory {} has a dangling parent", cursor.id))?;
            }
            if cursor.id != self.state.root {
                return Err(format!("directory {} does not reach the root", dir.id));
            }
            if dir.parent.is_some() {
                crate::tree::validate_name(&dir.name)
                    .map_err(|e| format!("directory {}: {e}", dir.id))?;
            }
        }
        for (parent, kids) in &self.children {
            let mut seen = BTreeSet::new();
            for kid in kids {
                let name = dirs
                    .get(kid)
                    .ok_or_else(|| format!("child index names missing directory {kid}"))?
                    .name
                    .to_lowercase();
                if !seen.insert(name) {
                    return Err(format!("duplicate sibling names under {parent}"));
                }
            }
        }
        for (dir, group) in &self.state.groups {
            let owner = dirs
                .get(dir)
                .ok_or_else(|| format!("group state for missing directory {dir}"))?
                .owner;
            if group.members.iter().any(|m| group.blacklist.contains(m)) {
                return Err(format!("member is blacklisted on {dir}"));
            }
            if group.pending.iter().any(|(u, _)| group.members.contains(u)) {
                return Err(format!("member has a pending application on {dir}"));
            }
            if group.members.contains(&owner) {
                return Err(format!("owner is a member of {dir}"));
            }
        }
        for (dir, grants) in &self.state.grants {
            if grants.granted_groups.iter().any(|g| !dirs.contains_key(g)) {
                return Err(format!("grant on {dir} names a missing group directory"));
            }
        }
        Ok(())
    }
}
