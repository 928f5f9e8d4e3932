// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

pub mod ops;
pub mod oracle;

use std::collections::BTreeMap;
use std::sync::Arc;

use domainhub_core::{
    ArticleDraft, DirectoryId, ManualClock, Policy, Registry, Right, Role, UserId,
};

pub const COURSE: &str = "Class(2017-2018-1)ZSTU";
pub const COURSE_SUBDIRS: [&str; 8] = [
    "help",
    "homework",
    "materials",
    "notice",
    "lecture materials",
    "student homework",
    "Exam and Test",
    "lecture notes",
];

pub fn registry() -> Registry {
    Registry::new(Arc::new(ManualClock::default()), Policy::default())
}

pub fn user(reg: &mut Registry, name: &str) -> UserId {
    reg.create_account(name, String::new()).unwrap().id
}

pub fn mkdir(reg: &mut Registry, parent: DirectoryId, name: &str, who: UserId) -> DirectoryId {
    reg.create_directory(parent, name, who).unwrap().id
}

pub fn draft(title: &str, abstract_text: &str) -> ArticleDraft {
    ArticleDraft {
        title: title.into(),
        abstract_text: abstract_text.into(),
        body: format!("body of {title}"),
        attachments: Vec::new(),
    }
}

pub struct Course {
    pub teacher: UserId,
    pub students: Vec<UserId>,
    pub operating_system: DirectoryId,
    pub class: DirectoryId,
    pub subdirs: BTreeMap<&'static str, DirectoryId>,
    pub personal: Vec<DirectoryId>,
}

/// Course tree: ALL / computer / Operating System / Class(...) with the
/// eight standard subdirectories, three students who join "student
/// homework", create their own directories there and publish homework.
pub fn course(reg: &mut Registry) -> Course {
    let teacher = user(reg, "teacher");
    let root = reg.root();
    let computer = mkdir(reg, root, "computer", teacher);
    let operating_system = mkdir(reg, computer, "Operating System", teacher);
    let class = mkdir(reg, operating_system, COURSE, teacher);
    let mut subdirs = BTreeMap::new();
    for name in COURSE_SUBDIRS {
        subdirs.insert(name, mkdir(reg, class, name, teacher));
    }
    let homework_dir = subdirs["student homework"];
    let m = reg
        .matrix(homework_dir)
        .unwrap()
        .with(Role::ThisGroup, Right::CreateSubDir, true);
    reg.set_matrix(homework_dir, teacher, m).unwrap();

    let mut students = Vec::new();
    let mut personal = Vec::new();
    for name in ["stu1", "stu2", "stu3"] {
        let s = user(reg, name);
        reg.join(homework_dir, s).unwrap();
        let own = mkdir(reg, homework_dir, name, s);
        let mut hw = draft(
            "Homework 1",
            &format!("process scheduling answers by {name}"),
        );
        hw.attachments
            .push(("hw1.pdf".into(), format!("%PDF {name}").into_bytes()));
        reg.publish_article(own, s, hw).unwrap();
        students.push(s);
        personal.push(own);
    }
    Course {
        teacher,
        students,
        operating_system,
        class,
        subdirs,
        personal,
    }
}

/// Setup flags for the role-derivation table.
#[derive(Clone, Copy, Debug)]
pub struct RoleCase {
    pub owner: bool,
    pub member: bool,
    pub granted_user: bool,
    pub granted_group_member: bool,
    pub blacklisted: bool,
}

/// Hand-computed expected roles for all 32 setups, as role names. The owner
/// can neither join nor blacklist themselves, so those flags are no-ops for
/// owner rows.
pub const ROLE_TABLE: [(u8, &[&str]); 32] = [
    // bits: owner, member, granted user, granted group member, blacklisted
    (0b00000, &["AnyUser"]),
    (0b00010, &["AnyUser", "grantGroup"]),
    (0b00100, &["AnyUser", "grantUser"]),
    (0b00110, &["AnyUser", "grantUser", "grantGroup"]),
    (0b01000, &["AnyUser", "thisGroup"]),
    (0b01010, &["AnyUser", "thisGroup", "grantGroup"]),
    (0b01100, &["AnyUser", "thisGroup", "grantUser"]),
    (
        0b01110,
        &["AnyUser", "thisGroup", "grantUser", "grantGroup"],
    ),
    (0b10000, &["AnyUser", "DirCreator"]),
    (0b10010, &["AnyUser", "DirCreator", "grantGroup"]),
    (0b10100, &["AnyUser", "DirCreator", "grantUser"]),
    (
        0b10110,
        &["AnyUser", "DirCreator", "grantUser", "grantGroup"],
    ),
    (0b11000, &["AnyUser", "DirCreator"]),
    (0b11010, &["AnyUser", "DirCreator", "grantGroup"]),
    (0b11100, &["AnyUser", "DirCreator", "grantUser"]),
    (
        0b11110,
        &["AnyUser", "DirCreator", "grantUser", "grantGroup"],
    ),
    (0b00001, &[]),
    (0b00011, &[]),
    (0b00101, &[]),
    (0b00111, &[]),
    (0b01001, &[]),
    (0b01011, &[]),
    (0b01101, &[]),
    (0b01111, &[]),
    (0b10001, &["AnyUser", "DirCreator"]),
    (0b10011, &["AnyUser", "DirCreator", "grantGroup"]),
    (0b10101, &["AnyUser", "DirCreator", "grantUser"]),
    (
        0b10111,
        &["AnyUser", "DirCreator", "grantUser", "grantGroup"],
    ),
    (0b11001, &["AnyUser", "DirCreator"]),
    (0b11011, &["AnyUser", "DirCreator", "grantGroup"]),
    (0b11101, &["AnyUser", "DirCreator", "grantUser"]),
    (
        0b11111,
        &["AnyUser", "DirCreator", "grantUser", "grantGroup"],
    ),
];

impl RoleCase {
    pub fn from_bits(bits: u8) -> Self {
        Self {
            owner: bits & 0b10000 != 0,
            member: bits & 0b01000 != 0,
            granted_user: bits & 0b00100 != 0,
            granted_group_member: bits & 0b00010 != 0,
            blacklisted: bits & 0b00001 != 0,
        }
    }
}

/// Builds the case on a fresh registry and returns the subject's roles on
/// the fixture directory, sorted by name.
pub fn derive_roles(case: RoleCase) -> Vec<String> {
    let mut reg = registry();
    let owner = user(&mut reg, "owner");
    let subject = if case.owner {
        owner
    } else {
        user(&mut reg, "subject")
    };
    let root = reg.root();
    let dir = mkdir(&mut reg, root, "fixture", owner);
    let group = mkdir(&mut reg, root, "other-course", owner);
    reg.grant_group(dir, owner, group).unwrap();
    if case.member {
        let r = reg.join(dir, subject);
        assert_eq!(r.is_err(), case.owner);
    }
    if case.granted_user {
        reg.grant_user(dir, owner, subject).unwrap();
    }
    if case.granted_group_member {
        if case.owner {
            // The owner of `dir` cannot join `group` they also own, so use a
            // group owned by someone else.
            let curator = user(&mut reg, "curator");
            let g2 = mkdir(&mut reg, root, "third-course", curator);
            reg.grant_group(dir, owner, g2).unwrap();
            reg.join(g2, subject).unwrap();
        } else {
            reg.join(group, subject).unwrap();
        }
    }
    if case.blacklisted {
        let r = reg.blacklist_user(dir, owner, subject);
        assert_eq!(r.is_err(), case.owner);
    }
    let mut names: Vec<String> = reg
        .roles_of(subject, dir)
        .unwrap()
        .iter()
        .map(|r| r.name().to_string())
        .collect();
    names.sort();
    names
}

pub const VOCAB: [&str; 16] = [
    "protocol",
    "course",
    "Protocols and Implementations",
    "Operating Systems",
    "android",
    "Databases",
    "Algebra",
    "probability theory",
    "English Essentials",
    "notes",
    "lab",
    "Course Materials",
    "homework",
    "net",
    "OS",
    "poem",
];

/// Random tree with matrices, groups, grants, blacklists, trashed nodes and
/// articles. Returns the registry and its non-system users.
pub fn random_corpus(
    rng: &mut impl rand::Rng,
    n_dirs: usize,
    n_articles: usize,
    n_users: usize,
) -> (Registry, Vec<UserId>) {
    use domainhub_core::AuthMatrix;
    let mut reg = registry();
    let users: Vec<UserId> = (0..n_users)
        .map(|i| user(&mut reg, &format!("u{i}")))
        .collect();
    let mut dirs = vec![reg.root()];
    let mut attempts = 0;
    while dirs.len() < n_dirs && attempts < n_dirs * 20 {
        attempts += 1;
        let parent = dirs[rng.gen_range(0..dirs.len())];
        let owner = reg.directory(parent).unwrap().owner;
        let creator = if owner == domainhub_core::SYSTEM_USER {
            users[rng.gen_range(0..users.len())]
        } else {
            owner
        };
        let name = format!(
            "{} {}",
            VOCAB[rng.gen_range(0..VOCAB.len())],
            rng.gen_range(0..100)
        );
        if let Ok(d) = reg.create_directory(parent, &name, creator) {
            dirs.push(d.id);
        }
    }
    for d in dirs.iter().skip(1) {
        let owner = reg.directory(*d).unwrap().owner;
        if rng.gen_bool(0.3) {
            let bits = rng.gen_range(0..1u32 << 20);
            reg.set_matrix(*d, owner, AuthMatrix::from_bits(bits))
                .unwrap();
        }
        for u in &users {
            match rng.gen_range(0..12) {
                0 | 1 => drop(reg.join(*d, *u)),
                2 => drop(reg.grant_user(*d, owner, *u)),
                3 => drop(reg.blacklist_user(*d, owner, *u)),
                _ => {}
            }
        }
        if rng.gen_bool(0.1) {
            let g = dirs[rng.gen_range(0..dirs.len())];
            let _ = reg.grant_group(*d, owner, g);
        }
    }
    let mut published = 0;
    attempts = 0;
    while published < n_articles && attempts < n_articles * 20 {
        attempts += 1;
        let d = dirs[rng.gen_range(0..dirs.len())];
        let author = if rng.gen_bool(0.5) {
            reg.directory(d).unwrap().owner
        } else {
            users[rng.gen_range(0..users.len())]
        };
        let title = format!("{} {}", VOCAB[rng.gen_range(0..VOCAB.len())], published);
        let abs = format!("on {}", VOCAB[rng.gen_range(0..VOCAB.len())]);
        if reg.publish_article(d, author, draft(&title, &abs)).is_ok() {
            published += 1;
        }
    }
    for d in dirs.iter().skip(1) {
        if rng.gen_bool(0.05) {
            let owner = reg.directory(*d).unwrap().owner;
            let _ = reg.trash_directory(*d, owner);
        }
    }
    (reg, users)
}

/// Random raw query of one to three terms drawn from the vocabulary.
pub fn random_query(rng: &mut impl rand::Rng) -> String {
    let n = rng.gen_range(1..=3);
    (0..n)
        .map(|_| {
            let word = VOCAB[rng.gen_range(0..VOCAB.len())].to_lowercase();
            // Random substring so partial matches are exercised.
            let chars: Vec<char> = word.chars().collect();
            let start = rng.gen_range(0..chars.len().min(3));
            let end = rng.gen_range(start + 1..=chars.len());
            let term: String = chars[start..end].iter().collect();
            let term = term.trim().to_string();
            if term.is_empty() || term == "and" || term.contains(" and") || term.contains("and ") {
                "os".to_string()
            } else if rng.gen_bool(0.3) {
                term.to_uppercase()
            } else {
                term
            }
        })
        .collect::<Vec<_>>()
        .join(" and ")
}

/// Renders everything a client could observe into comparable lines.
pub fn observe(reg: &Registry, users: &[UserId]) -> Vec<String> {
    use domainhub_core::{Query, SearchMode};
    let mut out = Vec::new();
    let dirs: Vec<DirectoryId> = reg.state().directories.keys().copied().collect();
    for u in users {
        for d in &dirs {
            out.push(format!("children {u} {d} {:?}", reg.list_children(*d, *u)));
            out.push(format!("articles {u} {d} {:?}", reg.list_articles(*d, *u)));
            out.push(format!("roles {u} {d} {:?}", reg.roles_of(*u, *d)));
            out.push(format!("bar {u} {d} {:?}", reg.navigator_path_for(*d, *u)));
            out.push(format!("mounts {u} {d} {:?}", reg.mount_targets(*d, *u)));
            out.push(format!("membership {u} {d} {:?}", reg.membership(*d, *u)));
        }
        for raw in ["o", "protocol and course", "all", "x"] {
            for mode in SearchMode::ALL {
                let q = Query::new(raw, mode, *u).unwrap();
                out.push(format!("search {u} {raw} {mode} {:?}", reg.search(&q)));
            }
        }
    }
    for a in reg.state().articles.values() {
        for att in &a.attachments {
            let bytes = reg.blobs().get(&att.blob).map(|b| b.to_vec());
            out.push(format!("blob {} {} {:?}", a.id, att.filename, bytes));
        }
    }
    out
}
