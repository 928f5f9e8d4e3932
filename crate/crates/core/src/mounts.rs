// SPDX-License-Identifier: Apache-2.0

//! Bindings that attach a user's agent-local share to a directory.
//!
//! Only the durable side lives here. Live agent sessions and the relaying of
//! listings and file bytes belong to the relay crate.

use serde::{Deserialize, Serialize};

use crate::authz::Right;
use crate::clock::Timestamp;
use crate::error::{Entity, Error, Result};
use crate::ids::{BindingId, DirectoryId, UserId};
use crate::registry::Registry;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MountBinding {
    pub id: BindingId,
    pub directory: DirectoryId,
    pub account: UserId,
    pub agent_id: String,
    /// Share label as announced by the agent.
    pub share_path: String,
    pub created_at: Timestamp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntryKind {
    File,
    Dir,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Availability {
    Live,
    Unavailable,
}

/// One line of a mounted listing. Entries are namespaced by the binding
/// label, so `(label, name)` is unique within a response.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteEntry {
    pub binding: BindingId,
    pub label: String,
    pub name: String,
    pub kind: EntryKind,
    pub size: u64,
    pub modified: Option<Timestamp>,
    pub availability: Availability,
}

impl RemoteEntry {
    /// Placeholder emitted for a binding whose agent is not reachable.
    pub fn unavailable(target: &MountTarget) -> Self {
        Self {
            binding: target.binding.id,
            label: target.label.clone(),
            name: target.label.clone(),
            kind: EntryKind::Dir,
            size: 0,
            modified: None,
            availability: Availability::Unavailable,
        }
    }
}

/// A binding resolved for relaying, with its display label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MountTarget {
    pub binding: MountBinding,
    pub label: String,
}

fn validate_token(s: &str, what: &'static str) -> Result<()> {
    if s.trim().is_empty() || s.trim() != s || s.chars().any(char::is_control) {
        Err(Error::InvalidSharePath(what))
    } else {
        Ok(())
    }
}

impl Registry {
    pub fn bind_mount(
        &mut self,
        dir: DirectoryId,
        actor: UserId,
        agent_id: &str,
        share_path: &str,
    ) -> Result<MountBinding> {
        self.require_visible(dir, actor)?;
        self.require_right(actor, dir, Right::Publish)?;
        validate_token(agent_id, "agent id must be non-empty text")?;
        validate_token(share_path, "share label must be non-empty text")?;
        let duplicate = self.state.mounts.values().any(|m| {
            m.directory == dir
                && m.account == actor
                && m.agent_id == agent_id
                && m.share_path == share_path
        });
        if duplicate {
            return Err(Error::DuplicateBinding);
        }
        let binding = MountBinding {
            id: self.state.ids.binding(),
            directory: dir,
            account: actor,
            agent_id: agent_id.to_string(),
            share_path: share_path.to_string(),
            created_at: self.clock.now(),
        };
        self.state.mounts.insert(binding.id, binding.clone());
        Ok(binding)
    }

    /// The binding's creator or the directory owner may unbind.
    pub fn unbind_mount(&mut self, binding: BindingId, actor: UserId) -> Result<()> {
        let b = self
            .state
            .mounts
            .get(&binding)
            .ok_or(Error::NotFound(Entity::Binding))?;
        let dir_owner = self.dir(b.directory)?.owner;
        if b.account != actor && dir_owner != actor {
            return Err(Error::NotOwner);
        }
        self.state.mounts.remove(&binding);
        Ok(())
    }

    pub fn mount_label(&self, binding: &MountBinding) -> String {
        let account = self
            .state
            .users
            .get(&binding.account)
            .map_or_else(|| binding.account.to_string(), |u| u.username.clone());
        format!("{account}:{}", binding.share_path)
    }

    fn target(&self, binding: &MountBinding) -> MountTarget {
        MountTarget {
            binding: binding.clone(),
            label: self.mount_label(binding),
        }
    }

    pub fn mounts_on(&self, dir: DirectoryId) -> Vec<&MountBinding> {
        self.state
            .mounts
            .values()
            .filter(|m| m.directory == dir)
            .collect()
    }

    /// Bindings whose listings `viewer` may see under `dir`.
    pub fn mount_targets(&self, dir: DirectoryId, viewer: UserId) -> Result<Vec<MountTarget>> {
        self.require_visible(dir, viewer)?;
        self.require_right(viewer, dir, Right::Read)?;
        Ok(self
            .mounts_on(dir)
            .into_iter()
            .map(|b| self.target(b))
            .collect())
    }

    pub fn mount_for_fetch(&self, binding: BindingId, viewer: UserId) -> Result<MountTarget> {
        let b = self
            .state
            .mounts
            .get(&binding)
            .ok_or(Error::NotFound(Entity::Binding))?;
        self.require_visible(b.directory, viewer)?;
        self.require_right(viewer, b.directory, Right::Read)?;
        Ok(self.target(b))
    }
}
