// SPDX-License-Identifier: Apache-2.0

//! Per-directory authorization.
//!
//! Every directory carries a 5×4 boolean grid of roles against rights. A
//! user holds a right on a directory iff at least one role they hold toward
//! that directory has the right's cell checked. Administrative operations
//! (matrix edits, grants, group audits, trash and delete) are gated on
//! ownership alone and never consult the grid.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Entity, Error, Result};
use crate::ids::{DirectoryId, UserId};
use crate::registry::Registry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    DirCreator,
    ThisGroup,
    GrantGroup,
    GrantUser,
    AnyUser,
}

impl Role {
    pub const ALL: [Role; 5] = [
        Role::DirCreator,
        Role::ThisGroup,
        Role::GrantGroup,
        Role::GrantUser,
        Role::AnyUser,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Role::DirCreator => "DirCreator",
            Role::ThisGroup => "thisGroup",
            Role::GrantGroup => "grantGroup",
            Role::GrantUser => "grantUser",
            Role::AnyUser => "AnyUser",
        }
    }

    fn index(self) -> u32 {
        self as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Right {
    Publish,
    Read,
    CreateSubDir,
    ShowDir,
}

impl Right {
    pub const ALL: [Right; 4] = [
        Right::Publish,
        Right::Read,
        Right::CreateSubDir,
        Right::ShowDir,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Right::Publish => "Publish",
            Right::Read => "Read",
            Right::CreateSubDir => "CreateSubDir",
            Right::ShowDir => "ShowDir",
        }
    }

    fn index(self) -> u32 {
        self as u32
    }
}

macro_rules! named_enum_traits {
    ($ty:ident, $what:literal) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                $ty::ALL
                    .into_iter()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| format!(concat!("unknown ", $what, " {:?}"), s))
            }
        }

        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.name())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(D::Error::custom)
            }
        }
    };
}

named_enum_traits!(Role, "role");
named_enum_traits!(Right, "right");

/// The set of roles a user holds toward one directory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct RoleSet(u8);

impl RoleSet {
    pub const EMPTY: RoleSet = RoleSet(0);
    pub const ALL: RoleSet = RoleSet(0b1_1111);

    pub fn from_bits(bits: u8) -> Self {
        RoleSet(bits & Self::ALL.0)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, role: Role) -> bool {
        self.0 & (1 << role.index()) != 0
    }

    pub fn insert(&mut self, role: Role) {
        self.0 |= 1 << role.index();
    }

    pub fn remove(&mut self, role: Role) {
        self.0 &= !(1 << role.index());
    }

    pub fn with(mut self, role: Role) -> Self {
        self.insert(role);
        self
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Role> {
        Role::ALL.into_iter().filter(move |r| self.contains(*r))
    }
}

impl FromIterator<Role> for RoleSet {
    fn from_iter<I: IntoIterator<Item = Role>>(iter: I) -> Self {
        iter.into_iter().fold(RoleSet::EMPTY, RoleSet::with)
    }
}

/// Role bit `i` spread to bit `4 * i`, for every 5-bit role set.
const SPREAD: [u32; 32] = {
    let mut table = [0u32; 32];
    let mut set = 0;
    while set < 32 {
        let mut role = 0;
        while role < 5 {
            if set & (1 << role) != 0 {
                table[set] |= 1 << (4 * role);
            }
            role += 1;
        }
        set += 1;
    }
    table
};

/// Boolean grid of roles × rights. Cell `(role, right)` lives at bit
/// `4 * role + right`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct AuthMatrix(u32);

impl AuthMatrix {
    pub const CELLS: usize = 20;
    pub const EMPTY: AuthMatrix = AuthMatrix(0);
    pub const FULL: AuthMatrix = AuthMatrix((1 << 20) - 1);

    pub fn from_bits(bits: u32) -> Self {
        AuthMatrix(bits & Self::FULL.0)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    fn bit(role: Role, right: Right) -> u32 {
        1 << (4 * role.index() + right.index())
    }

    pub fn get(self, role: Role, right: Right) -> bool {
        self.0 & Self::bit(role, right) != 0
    }

    pub fn set(&mut self, role: Role, right: Right, allowed: bool) {
        if allowed {
            self.0 |= Self::bit(role, right);
        } else {
            self.0 &= !Self::bit(role, right);
        }
    }

    pub fn with(mut self, role: Role, right: Right, allowed: bool) -> Self {
        self.set(role, right, allowed);
        self
    }

    /// OR over the held roles of this right's cells.
    pub fn allows(self, roles: RoleSet, right: Right) -> bool {
        (self.0 >> right.index()) & SPREAD[roles.bits() as usize] != 0
    }

    /// Nested `role -> right -> bool` view, the wire representation.
    pub fn to_table(self) -> BTreeMap<&'static str, BTreeMap<&'static str, bool>> {
        Role::ALL
            .into_iter()
            .map(|role| {
                let row = Right::ALL
                    .into_iter()
                    .map(|right| (right.name(), self.get(role, right)))
                    .collect();
                (role.name(), row)
            })
            .collect()
    }

    /// Parses the nested wire form. All 20 cells must be present and no
    /// unknown names are accepted.
    pub fn from_table(table: &HashMap<String, HashMap<String, bool>>) -> Result<Self, String> {
        let mut matrix = AuthMatrix::EMPTY;
        for (role_name, row) in table {
            let role: Role = role_name.parse()?;
            for (right_name, allowed) in row {
                let right: Right = right_name.parse()?;
                matrix.set(role, right, *allowed);
            }
            if row.len() != Right::ALL.len() {
                return Err(format!("role {role_name:?} must list all four rights"));
            }
        }
        if table.len() != Role::ALL.len() {
            return Err("matrix must list all five roles".into());
        }
        Ok(matrix)
    }
}

impl fmt::Debug for AuthMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.to_table()).finish()
    }
}

impl Serialize for AuthMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(Role::ALL.len()))?;
        for role in Role::ALL {
            let row: Vec<(&str, bool)> = Right::ALL
                .into_iter()
                .map(|right| (right.name(), self.get(role, right)))
                .collect();
            map.serialize_entry(role.name(), &OrderedRow(&row))?;
        }
        map.end()
    }
}

struct OrderedRow<'a>(&'a [(&'a str, bool)]);

impl Serialize for OrderedRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for AuthMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let table = HashMap::<String, HashMap<String, bool>>::deserialize(d)?;
        AuthMatrix::from_table(&table).map_err(D::Error::custom)
    }
}

/// Matrix given to every new directory: the owner can do everything, group
/// members can publish, read and see, logged-in users can read and see.
pub fn default_matrix() -> AuthMatrix {
    let mut m = AuthMatrix::EMPTY;
    for right in Right::ALL {
        m.set(Role::DirCreator, right, true);
    }
    m.set(Role::ThisGroup, Right::Publish, true);
    m.set(Role::ThisGroup, Right::Read, true);
    m.set(Role::ThisGroup, Right::ShowDir, true);
    m.set(Role::AnyUser, Right::Read, true);
    m.set(Role::AnyUser, Right::ShowDir, true);
    m
}

/// Root matrix: everyone can see the root and create top-level domains.
pub fn root_matrix() -> AuthMatrix {
    default_matrix().with(Role::AnyUser, Right::CreateSubDir, true)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrantSet {
    pub granted_users: BTreeSet<UserId>,
    pub granted_groups: BTreeSet<DirectoryId>,
}

impl Registry {
    /// Roles `user` holds toward `dir`. The user is assumed authenticated.
    pub fn roles_of(&self, user: UserId, dir: DirectoryId) -> Result<RoleSet> {
        let directory = self.dir(dir)?;
        let group = self.state.groups.get(&dir);
        if group.is_some_and(|g| g.blacklist.contains(&user)) {
            return Ok(if self.policy.blacklist_denies_all {
                RoleSet::EMPTY
            } else {
                RoleSet::EMPTY.with(Role::AnyUser)
            });
        }
        let mut roles = RoleSet::EMPTY.with(Role::AnyUser);
        if directory.owner == user {
            roles.insert(Role::DirCreator);
        }
        if group.is_some_and(|g| g.members.contains(&user)) {
            roles.insert(Role::ThisGroup);
        }
        if let Some(grants) = self.state.grants.get(&dir) {
            if grants.granted_users.contains(&user) {
                roles.insert(Role::GrantUser);
            }
            let in_granted_group = grants.granted_groups.iter().any(|g| {
                self.state
                    .groups
                    .get(g)
                    .is_some_and(|gs| gs.members.contains(&user) && !gs.blacklist.contains(&user))
            });
            if in_granted_group {
                roles.insert(Role::GrantGroup);
            }
        }
        Ok(roles)
    }

    pub fn check_right(&self, user: UserId, dir: DirectoryId, right: Right) -> Result<bool> {
        let roles = self.roles_of(user, dir)?;
        Ok(self.dir(dir)?.matrix.allows(roles, right))
    }

    pub(crate) fn require_right(&self, user: UserId, dir: DirectoryId, right: Right) -> Result<()> {
        if self.check_right(user, dir, right)? {
            Ok(())
        } else {
            Err(Error::PermissionDenied(right))
        }
    }

    pub fn matrix(&self, dir: DirectoryId) -> Result<AuthMatrix> {
        Ok(self.dir(dir)?.matrix)
    }

    pub fn set_matrix(
        &mut self,
        dir: DirectoryId,
        actor: UserId,
        matrix: AuthMatrix,
    ) -> Result<()> {
        self.require_owner(dir, actor)?;
        self.dir_mut(dir)?.matrix = matrix;
        Ok(())
    }

    pub fn grants(&self, dir: DirectoryId) -> Result<GrantSet> {
        self.dir(dir)?;
        Ok(self.state.grants.get(&dir).cloned().unwrap_or_default())
    }

    /// Grant lists, for the directory owner only.
    pub fn grants_for(&self, dir: DirectoryId, actor: UserId) -> Result<GrantSet> {
        self.require_owner(dir, actor)?;
        self.grants(dir)
    }

    pub fn grant_user(&mut self, dir: DirectoryId, actor: UserId, user: UserId) -> Result<()> {
        self.require_owner(dir, actor)?;
        self.require_user(user)?;
        let grants = self.state.grants.entry(dir).or_default();
        if !grants.granted_users.insert(user) {
            return Err(Error::AlreadyGranted);
        }
        Ok(())
    }

    pub fn revoke_user(&mut self, dir: DirectoryId, actor: UserId, user: UserId) -> Result<()> {
        self.require_owner(dir, actor)?;
        self.require_user(user)?;
        let removed = self
            .state
            .grants
            .get_mut(&dir)
            .is_some_and(|g| g.granted_users.remove(&user));
        if !removed {
            return Err(Error::NotGranted);
        }
        Ok(())
    }

    pub fn grant_group(
        &mut self,
        dir: DirectoryId,
        actor: UserId,
        group: DirectoryId,
    ) -> Result<()> {
        self.require_owner(dir, actor)?;
        if !self.state.directories.contains_key(&group) {
            return Err(Error::NotFound(Entity::Directory));
        }
        let grants = self.state.grants.entry(dir).or_default();
        if !grants.granted_groups.insert(group) {
            return Err(Error::AlreadyGranted);
        }
        Ok(())
    }

    pub fn revoke_group(
        &mut self,
        dir: DirectoryId,
        actor: UserId,
        group: DirectoryId,
    ) -> Result<()> {
        self.require_owner(dir, actor)?;
        let removed = self
            .state
            .grants
            .get_mut(&dir)
            .is_some_and(|g| g.granted_groups.remove(&group));
        if !removed {
            return Err(Error::NotGranted);
        }
        Ok(())
    }
}
