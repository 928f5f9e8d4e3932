// SPDX-License-Identifier: Apache-2.0

//! Random operation sequences and whole-state invariant checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use domainhub_core::{
    ArticleDraft, AuthMatrix, Decision, DirectoryId, Query, Registry, Right, SearchMode, UserId,
    Visibility,
};
use rand::seq::SliceRandom;
use rand::Rng;

use super::oracle;

const NAMES: [&str; 10] = [
    "protocol",
    "Protocol",
    "course",
    "net",
    "OS",
    "os",
    "algebra",
    "lab",
    "Course notes",
    "x",
];

fn pick_dir(reg: &Registry, rng: &mut impl Rng) -> DirectoryId {
    let ids: Vec<DirectoryId> = reg.state().directories.keys().copied().collect();
    *ids.choose(rng).unwrap()
}

/// The owner most of the time, so administrative paths get exercised.
fn pick_actor(reg: &Registry, dir: DirectoryId, users: &[UserId], rng: &mut impl Rng) -> UserId {
    let owner = reg.state().directories[&dir].owner;
    if rng.gen_bool(0.7) && owner != domainhub_core::SYSTEM_USER {
        owner
    } else {
        *users.choose(rng).unwrap()
    }
}

/// Applies one random operation; domain errors are expected and ignored.
pub fn random_op(reg: &mut Registry, users: &[UserId], rng: &mut impl Rng) {
    let dir = pick_dir(reg, rng);
    let actor = pick_actor(reg, dir, users, rng);
    let other = *users.choose(rng).unwrap();
    let _ = match rng.gen_range(0..17) {
        0..=3 => {
            let name = NAMES.choose(rng).unwrap();
            reg.create_directory(dir, name, *users.choose(rng).unwrap())
                .map(drop)
        }
        4 => reg.delete_directory(dir, actor),
        5 => reg.trash_directory(dir, actor),
        6 => reg.restore_directory(dir, actor),
        7 => reg.set_matrix(dir, actor, AuthMatrix::from_bits(rng.gen_range(0..1 << 20))),
        8 => {
            let v = if rng.gen_bool(0.5) {
                Visibility::Public
            } else {
                Visibility::Private
            };
            reg.set_visibility(dir, actor, v)
        }
        9 => reg.join(dir, other).map(drop),
        10 => {
            let pending: Vec<UserId> = reg
                .group(dir)
                .map(|g| g.pending.iter().map(|(u, _)| *u).collect())
                .unwrap_or_default();
            let applicant = pending.choose(rng).copied().unwrap_or(other);
            let decision = if rng.gen_bool(0.6) {
                Decision::Permit
            } else {
                Decision::Refuse
            };
            reg.review_application(dir, actor, applicant, decision)
        }
        11 => reg.remove_member(dir, actor, other),
        12 => {
            if rng.gen_bool(0.6) {
                reg.blacklist_user(dir, actor, other)
            } else {
                reg.unblacklist_user(dir, actor, other)
            }
        }
        13 => {
            if rng.gen_bool(0.7) {
                reg.grant_user(dir, actor, other)
            } else {
                reg.revoke_user(dir, actor, other)
            }
        }
        14 => {
            let group = pick_dir(reg, rng);
            if rng.gen_bool(0.7) {
                reg.grant_group(dir, actor, group)
            } else {
                reg.revoke_group(dir, actor, group)
            }
        }
        15 => {
            let n = rng.gen_range(0..1000);
            let draft = ArticleDraft {
                title: format!("{} {n}", NAMES.choose(rng).unwrap()),
                abstract_text: format!("about {}", NAMES.choose(rng).unwrap()),
                body: String::new(),
                attachments: if rng.gen_bool(0.2) {
                    vec![(format!("f{n}.txt"), vec![n as u8; n % 7])]
                } else {
                    Vec::new()
                },
            };
            reg.publish_article(dir, *users.choose(rng).unwrap(), draft)
                .map(drop)
        }
        _ => reg
            .bind_mount(dir, *users.choose(rng).unwrap(), "agent-1", "share")
            .map(drop),
    };
}

/// Checks every structural and visibility invariant against the oracle.
pub fn check_all(reg: &Registry, users: &[UserId]) -> Result<(), String> {
    let st = reg.state();
    let dirs = &st.directories;

    // Acyclicity: every parent walk reaches the root within |dirs| steps.
    for d in dirs.values() {
        let mut cursor = d.parent;
        let mut steps = 0;
        while let Some(p) = cursor {
            steps += 1;
            if steps > dirs.len() {
                return Err(format!("cycle through {}", d.id));
            }
            cursor = dirs.get(&p).ok_or("dangling parent")?.parent;
        }
    }
    let roots: Vec<_> = dirs.values().filter(|d| d.parent.is_none()).collect();
    if roots.len() != 1 || roots[0].name != "ALL" {
        return Err("root must be unique and named ALL".into());
    }

    // Case-insensitive sibling uniqueness.
    let mut seen: BTreeMap<DirectoryId, BTreeSet<String>> = BTreeMap::new();
    for d in dirs.values() {
        if let Some(p) = d.parent {
            if !seen.entry(p).or_default().insert(d.name.to_lowercase()) {
                return Err(format!("duplicate sibling {:?} under {p}", d.name));
            }
        }
    }

    // Group set disjointness.
    for (id, g) in &st.groups {
        let owner = dirs.get(id).ok_or("group for missing directory")?.owner;
        if g.members.intersection(&g.blacklist).next().is_some() {
            return Err(format!("member also blacklisted on {id}"));
        }
        if g.pending.iter().any(|(u, _)| g.members.contains(u)) {
            return Err(format!("member also pending on {id}"));
        }
        let distinct: BTreeSet<UserId> = g.pending.iter().map(|(u, _)| *u).collect();
        if distinct.len() != g.pending.len() {
            return Err(format!("duplicate application on {id}"));
        }
        if g.members.contains(&owner) {
            return Err(format!("owner is member of {id}"));
        }
    }

    // Listings agree with the oracle and never leak hidden nodes.
    for viewer in users {
        for d in dirs.values() {
            let expect_ok = oracle::visible(reg, d.id, *viewer)
                && oracle::allowed(reg, *viewer, d.id, Right::ShowDir);
            match reg.list_children(d.id, *viewer) {
                Ok(children) => {
                    if !expect_ok {
                        return Err(format!("{viewer} listed hidden {}", d.id));
                    }
                    let got: Vec<DirectoryId> = children.iter().map(|c| c.id).collect();
                    if got != oracle::listing(reg, d.id, *viewer) {
                        return Err(format!("listing of {} for {viewer} differs", d.id));
                    }
                    if let Some(c) = children
                        .iter()
                        .find(|c| !oracle::visible(reg, c.id, *viewer))
                    {
                        return Err(format!("trashed subtree node {} leaked", c.id));
                    }
                }
                Err(_) if expect_ok => {
                    return Err(format!("{viewer} denied listing of {}", d.id));
                }
                Err(_) => {}
            }
        }
        // "all" matches every bar, so this is a full directory scan.
        let q = Query::new("all", SearchMode::Dir, *viewer).unwrap();
        let hits = reg.search(&q).map_err(|e| e.to_string())?;
        for h in &hits {
            if !oracle::live(reg, h.bar.target()) {
                return Err(format!("search returned trashed {}", h.bar.target()));
            }
        }
        let got: Vec<String> = hits.iter().map(|h| h.bar.to_string()).collect();
        let want: Vec<String> = oracle::search(reg, "all", SearchMode::Dir, *viewer)
            .unwrap()
            .into_iter()
            .map(|(b, _)| b)
            .collect();
        if got != want {
            return Err(format!("search for {viewer} differs from scan"));
        }
    }
    reg.check_invariants()
}
