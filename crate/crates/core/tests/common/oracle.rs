// SPDX-License-Identifier: Apache-2.0

//! Independent reference implementations used to check the registry.
//!
//! Everything here reads raw persistent state and recomputes answers by
//! brute force. Nothing calls back into the evaluation paths under test.

#![allow(dead_code)]

use std::collections::BTreeSet;

use domainhub_core::{
    AuthMatrix, DirState, DirectoryId, Registry, Right, Role, SearchMode, UserId,
};

/// Cell `(role, right)` of a 20-bit grid in role-major order.
pub fn cell_bit(role_index: usize, right_index: usize) -> u32 {
    1 << (role_index * 4 + right_index)
}

/// Builds a matrix from a role-major bit pattern using only `set`.
pub fn matrix_from_pattern(pattern: u32) -> AuthMatrix {
    let mut m = AuthMatrix::EMPTY;
    for (ri, role) in Role::ALL.into_iter().enumerate() {
        for (ci, right) in Right::ALL.into_iter().enumerate() {
            m.set(role, right, pattern & cell_bit(ri, ci) != 0);
        }
    }
    m
}

/// OR-fold over held roles directly on the bit pattern.
pub fn or_fold(pattern: u32, role_subset: u8, right_index: usize) -> bool {
    let mut granted = false;
    for role_index in 0..5 {
        let holds = role_subset & (1 << role_index) != 0;
        let cell = pattern & cell_bit(role_index, right_index) != 0;
        granted = granted || (holds && cell);
    }
    granted
}

pub fn roles(reg: &Registry, user: UserId, dir: DirectoryId) -> BTreeSet<Role> {
    let st = reg.state();
    let mut out = BTreeSet::new();
    let group = st.groups.get(&dir);
    if group.is_some_and(|g| g.blacklist.contains(&user)) {
        return out;
    }
    out.insert(Role::AnyUser);
    if st.directories[&dir].owner == user {
        out.insert(Role::DirCreator);
    }
    if group.is_some_and(|g| g.members.contains(&user)) {
        out.insert(Role::ThisGroup);
    }
    if let Some(grants) = st.grants.get(&dir) {
        if grants.granted_users.contains(&user) {
            out.insert(Role::GrantUser);
        }
        for g in &grants.granted_groups {
            if let Some(gs) = st.groups.get(g) {
                if gs.members.contains(&user) && !gs.blacklist.contains(&user) {
                    out.insert(Role::GrantGroup);
                }
            }
        }
    }
    out
}

pub fn allowed(reg: &Registry, user: UserId, dir: DirectoryId, right: Right) -> bool {
    let matrix = reg.state().directories[&dir].matrix;
    roles(reg, user, dir)
        .into_iter()
        .any(|role| matrix.get(role, right))
}

pub fn bar_names(reg: &Registry, dir: DirectoryId) -> Vec<String> {
    let dirs = &reg.state().directories;
    let mut names = Vec::new();
    let mut cursor = Some(dir);
    while let Some(id) = cursor {
        let d = &dirs[&id];
        names.push(d.name.clone());
        cursor = d.parent;
    }
    names.reverse();
    names
}

pub fn live(reg: &Registry, dir: DirectoryId) -> bool {
    let dirs = &reg.state().directories;
    let mut cursor = Some(dir);
    while let Some(id) = cursor {
        let d = &dirs[&id];
        if d.state == DirState::Trashed {
            return false;
        }
        cursor = d.parent;
    }
    true
}

/// Every trashed node on the chain is owned by `viewer`.
pub fn visible(reg: &Registry, dir: DirectoryId, viewer: UserId) -> bool {
    let dirs = &reg.state().directories;
    let mut cursor = Some(dir);
    while let Some(id) = cursor {
        let d = &dirs[&id];
        if d.state == DirState::Trashed && d.owner != viewer {
            return false;
        }
        cursor = d.parent;
    }
    true
}

/// Children `viewer` should see in a directory listing.
pub fn listing(reg: &Registry, dir: DirectoryId, viewer: UserId) -> Vec<DirectoryId> {
    reg.state()
        .directories
        .values()
        .filter(|d| d.parent == Some(dir))
        .filter(|d| d.state == DirState::Active && allowed(reg, viewer, d.id, Right::ShowDir))
        .map(|d| d.id)
        .collect()
}

/// Query splitting written out by hand.
pub fn split_terms(raw: &str) -> Option<Vec<String>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return None;
    }
    let mut terms = Vec::new();
    let mut rest = raw;
    loop {
        match rest.find(" and ") {
            Some(at) => {
                terms.push(rest[..at].trim().to_string());
                rest = &rest[at + 5..];
            }
            None => {
                terms.push(rest.trim().to_string());
                break;
            }
        }
    }
    if terms.iter().any(|t| t.is_empty()) {
        return None;
    }
    Some(terms)
}

/// `(bar text, article url)` pairs in result order.
pub type OracleHit = (String, Option<String>);

pub fn search(reg: &Registry, raw: &str, mode: SearchMode, user: UserId) -> Option<Vec<OracleHit>> {
    let terms: Vec<String> = if mode == SearchMode::MyAllDir && raw.trim().is_empty() {
        Vec::new()
    } else {
        split_terms(raw)?
            .into_iter()
            .map(|t| t.to_lowercase())
            .collect()
    };
    let st = reg.state();
    match mode {
        SearchMode::Dir | SearchMode::MyDir | SearchMode::MyAllDir => {
            let mut hits: Vec<(String, DirectoryId)> = Vec::new();
            for d in st.directories.values() {
                if mode != SearchMode::Dir && d.owner != user {
                    continue;
                }
                let text = bar_names(reg, d.id).join(" / ");
                let lower = text.to_lowercase();
                if !terms.iter().all(|t| lower.contains(t.as_str())) {
                    continue;
                }
                if !live(reg, d.id) || !allowed(reg, user, d.id, Right::ShowDir) {
                    continue;
                }
                hits.push((text, d.id));
            }
            hits.sort();
            Some(hits.into_iter().map(|(t, _)| (t, None)).collect())
        }
        SearchMode::Key | SearchMode::MyKey => {
            let mut hits = Vec::new();
            for a in st.articles.values() {
                if mode == SearchMode::MyKey && a.author != user {
                    continue;
                }
                let title = a.title.to_lowercase();
                let abs = a.abstract_text.to_lowercase();
                if !terms
                    .iter()
                    .all(|t| title.contains(t.as_str()) || abs.contains(t.as_str()))
                {
                    continue;
                }
                let dir = a.directory;
                if !live(reg, dir)
                    || !allowed(reg, user, dir, Right::ShowDir)
                    || !allowed(reg, user, dir, Right::Read)
                {
                    continue;
                }
                hits.push((a.published_at, a.id, bar_names(reg, dir).join(" / ")));
            }
            hits.sort_by_key(|h| std::cmp::Reverse((h.0, h.1)));
            Some(
                hits.into_iter()
                    .map(|(_, id, bar)| (bar, Some(format!("/a/{id}"))))
                    .collect(),
            )
        }
    }
}
