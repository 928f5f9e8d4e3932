// SPDX-License-Identifier: Apache-2.0

//! Group membership attached to each directory.
//!
//! Public directories admit anyone who joins; private ones queue an
//! application for the owner to permit or refuse. The owner is never a
//! member of their own group.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ids::{DirectoryId, UserId};
use crate::registry::Registry;
use crate::tree::Visibility;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupState {
    pub members: BTreeSet<UserId>,
    /// FIFO, oldest application first.
    pub pending: Vec<(UserId, Timestamp)>,
    pub blacklist: BTreeSet<UserId>,
}

impl GroupState {
    pub fn is_pending(&self, user: UserId) -> bool {
        self.pending.iter().any(|(u, _)| *u == user)
    }

    fn drop_pending(&mut self, user: UserId) -> bool {
        let before = self.pending.len();
        self.pending.retain(|(u, _)| *u != user);
        self.pending.len() != before
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JoinOutcome {
    Joined,
    ApplicationPending,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Permit,
    Refuse,
}

/// A user's relation to a directory's group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Owner,
    Member,
    Pending,
    Blacklisted,
    None,
}

impl Registry {
    pub fn group(&self, dir: DirectoryId) -> Result<GroupState> {
        self.dir(dir)?;
        Ok(self.state.groups.get(&dir).cloned().unwrap_or_default())
    }

    /// Full group state, for the directory owner only.
    pub fn group_for(&self, dir: DirectoryId, actor: UserId) -> Result<GroupState> {
        self.require_owner(dir, actor)?;
        self.group(dir)
    }

    pub fn membership(&self, dir: DirectoryId, user: UserId) -> Result<Membership> {
        let owner = self.dir(dir)?.owner;
        if owner == user {
            return Ok(Membership::Owner);
        }
        let Some(group) = self.state.groups.get(&dir) else {
            return Ok(Membership::None);
        };
        Ok(if group.blacklist.contains(&user) {
            Membership::Blacklisted
        } else if group.members.contains(&user) {
            Membership::Member
        } else if group.is_pending(user) {
            Membership::Pending
        } else {
            Membership::None
        })
    }

    pub fn set_visibility(&mut self, dir: DirectoryId, actor: UserId, v: Visibility) -> Result<()> {
        self.require_owner(dir, actor)?;
        self.dir_mut(dir)?.visibility = v;
        Ok(())
    }

    pub fn join(&mut self, dir: DirectoryId, user: UserId) -> Result<JoinOutcome> {
        let d = self.dir(dir)?;
        let (owner, visibility) = (d.owner, d.visibility);
        if !self.is_live(dir) {
            return Err(Error::TrashedDirectory);
        }
        if owner == user {
            return Err(Error::OwnerExempt);
        }
        self.require_user(user)?;
        let now = self.clock.now();
        let group = self.state.groups.entry(dir).or_default();
        if group.blacklist.contains(&user) {
            return Err(Error::Blacklisted);
        }
        if group.members.contains(&user) {
            return Err(Error::AlreadyMember);
        }
        if group.is_pending(user) {
            return Err(Error::AlreadyPending);
        }
        Ok(match visibility {
            Visibility::Public => {
                group.members.insert(user);
                JoinOutcome::Joined
            }
            Visibility::Private => {
                group.pending.push((user, now));
                JoinOutcome::ApplicationPending
            }
        })
    }

    pub fn review_application(
        &mut self,
        dir: DirectoryId,
        actor: UserId,
        applicant: UserId,
        decision: Decision,
    ) -> Result<()> {
        self.require_owner(dir, actor)?;
        let group = self.state.groups.entry(dir).or_default();
        if !group.drop_pending(applicant) {
            return Err(Error::NoSuchApplication);
        }
        if decision == Decision::Permit {
            group.members.insert(applicant);
        }
        Ok(())
    }

    pub fn remove_member(&mut self, dir: DirectoryId, actor: UserId, user: UserId) -> Result<()> {
        self.require_owner(dir, actor)?;
        let removed = self
            .state
            .groups
            .get_mut(&dir)
            .is_some_and(|g| g.members.remove(&user));
        if !removed {
            return Err(Error::NotMember);
        }
        Ok(())
    }

    pub fn blacklist_user(&mut self, dir: DirectoryId, actor: UserId, user: UserId) -> Result<()> {
        self.require_owner(dir, actor)?;
        self.require_user(user)?;
        if user == actor {
            return Err(Error::OwnerExempt);
        }
        let group = self.state.groups.entry(dir).or_default();
        if !group.blacklist.insert(user) {
            return Err(Error::AlreadyBlacklisted);
        }
        group.members.remove(&user);
        group.drop_pending(user);
        Ok(())
    }

    pub fn unblacklist_user(
        &mut self,
        dir: DirectoryId,
        actor: UserId,
        user: UserId,
    ) -> Result<()> {
        self.require_owner(dir, actor)?;
        let removed = self
            .state
            .groups
            .get_mut(&dir)
            .is_some_and(|g| g.blacklist.remove(&user));
        if !removed {
            return Err(Error::NotBlacklisted);
        }
        Ok(())
    }
}
