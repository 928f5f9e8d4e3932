// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{course, draft, mkdir, oracle, registry, user, COURSE};
use domainhub_core::{
    AuthMatrix, DirState, Entity, Error, Occupancy, Registry, Right, Role, UserId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn course_directory_is_owned_by_teacher() {
    let mut reg = registry();
    let c = course(&mut reg);
    let class = reg.directory(c.class).unwrap();
    assert_eq!(class.name, COURSE);
    assert_eq!(class.owner, c.teacher);
    assert_eq!(class.parent, Some(c.operating_system));
}

#[test]
fn new_directory_defaults() {
    let mut reg = registry();
    let u = user(&mut reg, "u");
    let root = reg.root();
    let d = reg.create_directory(root, "x", u).unwrap();
    assert_eq!(d.state, DirState::Active);
    assert_eq!(d.visibility, domainhub_core::Visibility::Public);
    assert_eq!(d.matrix, domainhub_core::default_matrix());
}

#[test]
fn create_directory_errors() {
    let mut reg = registry();
    let u = user(&mut reg, "u");
    let v = user(&mut reg, "v");
    let root = reg.root();
    assert_eq!(
        reg.create_directory(domainhub_core::DirectoryId(999), "x", u),
        Err(Error::ParentNotFound)
    );
    // Root children may be called ALL until one exists.
    mkdir(&mut reg, root, "ALL", u);
    assert_eq!(
        reg.create_directory(root, "all", v),
        Err(Error::DuplicateName)
    );
    assert_eq!(
        reg.create_directory(root, "a/b", u),
        Err(Error::InvalidName("contains '/'"))
    );
    assert!(matches!(
        reg.create_directory(root, " pad", u),
        Err(Error::InvalidName(_))
    ));
    assert!(matches!(
        reg.create_directory(root, "", u),
        Err(Error::InvalidName(_))
    ));
    assert!(matches!(
        reg.create_directory(root, &"n".repeat(256), u),
        Err(Error::InvalidName(_))
    ));
    assert!(reg.create_directory(root, &"n".repeat(255), u).is_ok());

    let p = mkdir(&mut reg, root, "p", u);
    // Default matrix gives AnyUser no CreateSubDir.
    assert_eq!(
        reg.create_directory(p, "x", v),
        Err(Error::PermissionDenied(Right::CreateSubDir))
    );
    reg.trash_directory(p, u).unwrap();
    assert_eq!(reg.create_directory(p, "x", u), Err(Error::ParentTrashed));
}

#[test]
fn create_permission_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let mut reg = registry();
        let owner = user(&mut reg, "owner");
        let u = user(&mut reg, "u");
        let root = reg.root();
        let p = mkdir(&mut reg, root, "p", owner);
        reg.set_matrix(p, owner, AuthMatrix::from_bits(rng.gen_range(0..1 << 20)))
            .unwrap();
        if rng.gen_bool(0.5) {
            reg.join(p, u).unwrap();
        }
        if rng.gen_bool(0.5) {
            reg.grant_user(p, owner, u).unwrap();
        }
        let expected = oracle::allowed(&reg, u, p, Right::CreateSubDir);
        match reg.create_directory(p, "x", u) {
            Ok(_) => assert!(expected),
            Err(e) => {
                assert!(!expected);
                assert_eq!(e, Error::PermissionDenied(Right::CreateSubDir));
            }
        }
    }
}

#[test]
fn delete_succeeds_only_when_empty() {
    for combo in 0..8u8 {
        let (members, articles, children) = (combo & 1 != 0, combo & 2 != 0, combo & 4 != 0);
        let mut reg = registry();
        let owner = user(&mut reg, "owner");
        let member = user(&mut reg, "member");
        let root = reg.root();
        let d = mkdir(&mut reg, root, "d", owner);
        if members {
            reg.join(d, member).unwrap();
        }
        if articles {
            reg.publish_article(d, owner, draft("a", "")).unwrap();
        }
        if children {
            mkdir(&mut reg, d, "c", owner);
        }
        let result = reg.delete_directory(d, owner);
        if combo == 0 {
            assert_eq!(result, Ok(()));
            assert!(reg.directory(d).is_none());
        } else {
            assert_eq!(
                result,
                Err(Error::NotEmpty(Occupancy {
                    members,
                    articles,
                    children
                }))
            );
            assert!(reg.directory(d).is_some());
        }
    }
}

#[test]
fn delete_gates() {
    let mut reg = registry();
    let owner = user(&mut reg, "owner");
    let other = user(&mut reg, "other");
    let root = reg.root();
    let d = mkdir(&mut reg, root, "d", owner);
    assert_eq!(reg.delete_directory(d, other), Err(Error::NotOwner));
    assert_eq!(
        reg.delete_directory(root, owner),
        Err(Error::RootUndeletable)
    );
    assert_eq!(
        reg.delete_directory(root, domainhub_core::SYSTEM_USER),
        Err(Error::RootUndeletable)
    );
    reg.delete_directory(d, owner).unwrap();
    assert_eq!(
        reg.delete_directory(d, owner),
        Err(Error::NotFound(Entity::Directory))
    );
    // Ids are not reused.
    let again = mkdir(&mut reg, root, "d", owner);
    assert!(again > d);
}

#[test]
fn delete_scrubs_group_grants() {
    let mut reg = registry();
    let owner = user(&mut reg, "owner");
    let root = reg.root();
    let group = mkdir(&mut reg, root, "group", owner);
    let target = mkdir(&mut reg, root, "target", owner);
    reg.grant_group(target, owner, group).unwrap();
    reg.delete_directory(group, owner).unwrap();
    assert!(reg.grants(target).unwrap().granted_groups.is_empty());
    reg.check_invariants().unwrap();
}

#[test]
fn trash_hides_leaf() {
    let mut reg = registry();
    let owner = user(&mut reg, "owner");
    let other = user(&mut reg, "other");
    let root = reg.root();
    let d = mkdir(&mut reg, root, "leaf", owner);
    assert_eq!(reg.trash_directory(d, other), Err(Error::NotOwner));
    reg.trash_directory(d, owner).unwrap();
    assert_eq!(reg.directory(d).unwrap().state, DirState::Trashed);
    assert!(reg.list_children(root, other).unwrap().is_empty());
    assert!(reg.list_children(root, owner).unwrap().is_empty());
    assert_eq!(reg.trash_directory(d, owner), Err(Error::AlreadyTrashed));
    assert_eq!(
        reg.trash_directory(root, owner),
        Err(Error::RootUntrashable)
    );
}

#[test]
fn trash_hides_whole_subtree_from_third_parties() {
    let mut reg = registry();
    let owner = user(&mut reg, "owner");
    let third = user(&mut reg, "third");
    let root = reg.root();
    let a = mkdir(&mut reg, root, "a", owner);
    let mut all = vec![a];
    for i in 0..3 {
        let b = mkdir(&mut reg, a, &format!("b{i}"), owner);
        all.push(b);
        for j in 0..2 {
            all.push(mkdir(&mut reg, b, &format!("c{j}"), owner));
        }
    }
    reg.trash_directory(a, owner).unwrap();
    for n in &all {
        assert_eq!(
            reg.list_children(*n, third),
            Err(Error::NotFound(Entity::Directory)),
            "node {n}"
        );
        assert!(reg.navigator_path_for(*n, third).is_err());
        for d in reg.state().directories.keys() {
            if let Ok(kids) = reg.list_children(*d, third) {
                assert!(kids.iter().all(|k| k.id != *n));
            }
        }
        // The owner can still walk into the trashed subtree.
        assert!(reg.list_children(*n, owner).is_ok());
    }
}

#[test]
fn restore_round_trip_and_errors() {
    let mut reg = registry();
    let owner = user(&mut reg, "owner");
    let other = user(&mut reg, "other");
    let root = reg.root();
    let p = mkdir(&mut reg, root, "p", owner);
    let leaf = mkdir(&mut reg, p, "leaf", owner);
    let before = reg.list_children(p, other).unwrap();
    reg.trash_directory(leaf, owner).unwrap();
    assert_eq!(reg.restore_directory(leaf, other), Err(Error::NotOwner));
    reg.restore_directory(leaf, owner).unwrap();
    assert_eq!(reg.list_children(p, other).unwrap(), before);
    assert_eq!(reg.restore_directory(leaf, owner), Err(Error::NotTrashed));

    reg.trash_directory(leaf, owner).unwrap();
    reg.trash_directory(p, owner).unwrap();
    assert_eq!(
        reg.restore_directory(leaf, owner),
        Err(Error::ParentTrashed)
    );
}

#[test]
fn trashed_names_still_reserved() {
    let mut reg = registry();
    let owner = user(&mut reg, "owner");
    let root = reg.root();
    let d = mkdir(&mut reg, root, "keep", owner);
    reg.trash_directory(d, owner).unwrap();
    assert_eq!(
        reg.create_directory(root, "KEEP", owner),
        Err(Error::DuplicateName)
    );
}

#[test]
fn navigator_paths() {
    let mut reg = registry();
    let u = user(&mut reg, "u");
    let root = reg.root();
    assert_eq!(reg.navigator_path(root).unwrap().to_string(), "ALL");
    let computer = mkdir(&mut reg, root, "computer", u);
    let os = mkdir(&mut reg, computer, "Operating System", u);
    let bar = reg.navigator_path(os).unwrap();
    assert_eq!(
        bar.names().collect::<Vec<_>>(),
        ["ALL", "computer", "Operating System"]
    );
    assert_eq!(bar.segments()[1].id, computer);
    assert_eq!(bar.target(), os);
    assert_eq!(
        reg.navigator_path(domainhub_core::DirectoryId(77)),
        Err(Error::NotFound(Entity::Directory))
    );
}

#[test]
fn navigator_matches_parent_walk_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mut reg = registry();
        let u = user(&mut reg, "u");
        let mut ids = vec![reg.root()];
        while ids.len() < 50 {
            let parent = ids[rng.gen_range(0..ids.len())];
            let name = format!("n{}", rng.gen_range(0..1000));
            if let Ok(d) = reg.create_directory(parent, &name, u) {
                ids.push(d.id);
            }
            // New directories deny AnyUser CreateSubDir, but u owns them all.
        }
        for id in ids {
            let bar: Vec<String> = reg
                .navigator_path(id)
                .unwrap()
                .names()
                .map(str::to_string)
                .collect();
            assert_eq!(bar, oracle::bar_names(&reg, id));
            assert_eq!(bar[0], "ALL");
        }
    }
}

#[test]
fn domain_tool_view_filters_by_show_dir() {
    let mut reg = registry();
    let owner = user(&mut reg, "owner");
    let viewer = user(&mut reg, "viewer");
    let root = reg.root();
    let p = mkdir(&mut reg, root, "p", owner);
    let shown = mkdir(&mut reg, p, "shown", owner);
    let hidden = mkdir(&mut reg, p, "hidden", owner);
    let only_group = AuthMatrix::EMPTY.with(Role::ThisGroup, Right::ShowDir, true);
    reg.set_matrix(hidden, owner, only_group).unwrap();

    let view = reg.domain_tool_view(p, viewer).unwrap();
    assert_eq!(view.directory.id, p);
    assert_eq!(
        view.children.iter().map(|c| c.id).collect::<Vec<_>>(),
        [shown]
    );
    reg.join(hidden, viewer).unwrap();
    assert_eq!(reg.list_children(p, viewer).unwrap().len(), 2);

    reg.set_matrix(p, owner, AuthMatrix::EMPTY).unwrap();
    assert_eq!(
        reg.domain_tool_view(p, viewer),
        Err(Error::PermissionDenied(Right::ShowDir))
    );
}

#[test]
fn listing_matches_oracle_under_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let mut reg = registry();
        let owner = user(&mut reg, "owner");
        let viewers: Vec<UserId> = (0..3).map(|i| user(&mut reg, &format!("v{i}"))).collect();
        let root = reg.root();
        let p = mkdir(&mut reg, root, "p", owner);
        for i in 0..10 {
            let c = mkdir(&mut reg, p, &format!("c{i}"), owner);
            reg.set_matrix(c, owner, AuthMatrix::from_bits(rng.gen_range(0..1 << 20)))
                .unwrap();
            for v in &viewers {
                match rng.gen_range(0..4) {
                    0 => drop(reg.join(c, *v)),
                    1 => drop(reg.grant_user(c, owner, *v)),
                    2 => drop(reg.blacklist_user(c, owner, *v)),
                    _ => {}
                }
            }
        }
        for v in viewers.iter().chain([&owner]) {
            let got: Vec<_> = reg
                .list_children(p, *v)
                .unwrap()
                .iter()
                .map(|d| d.id)
                .collect();
            assert_eq!(got, oracle::listing(&reg, p, *v));
        }
    }
}

#[test]
fn course_listing_for_teacher_and_outsider() {
    let mut reg = registry();
    let c = course(&mut reg);
    let outsider = user(&mut reg, "outsider");
    let empty = reg.list_children(c.subdirs["help"], c.teacher).unwrap();
    assert!(empty.is_empty());
    assert_eq!(reg.list_children(c.class, c.teacher).unwrap().len(), 8);

    let exam = c.subdirs["Exam and Test"];
    let m = reg
        .matrix(exam)
        .unwrap()
        .with(Role::AnyUser, Right::ShowDir, false);
    reg.set_matrix(exam, c.teacher, m).unwrap();
    let seen = reg.list_children(c.class, outsider).unwrap();
    assert_eq!(seen.len(), 7);
    assert!(seen.iter().all(|d| d.name != "Exam and Test"));
    assert_eq!(reg.list_children(c.class, c.teacher).unwrap().len(), 8);
}

#[test]
fn publish_and_list_articles() {
    let mut reg = registry();
    let c = course(&mut reg);
    let own = c.personal[0];
    let list = reg.list_articles(own, c.teacher).unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0].title, "Homework 1");
    assert_eq!(list[0].url, format!("/a/{}", list[0].id));

    let s = c.students[0];
    assert_eq!(
        reg.publish_article(own, s, draft("  ", "")),
        Err(Error::InvalidTitle)
    );
    let t2 = reg.publish_article(own, s, draft("second", "")).unwrap();
    let t3 = reg.publish_article(own, s, draft("third", "")).unwrap();
    let ids: Vec<_> = reg
        .list_articles(own, s)
        .unwrap()
        .iter()
        .map(|a| a.id)
        .collect();
    assert_eq!(ids, [t3.id, t2.id, list[0].id]);

    let empty = reg.list_articles(c.subdirs["help"], c.teacher).unwrap();
    assert!(empty.is_empty());
}

#[test]
fn publish_permission_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let mut reg = registry();
        let owner = user(&mut reg, "owner");
        let u = user(&mut reg, "u");
        let root = reg.root();
        let d = mkdir(&mut reg, root, "d", owner);
        reg.set_matrix(d, owner, AuthMatrix::from_bits(rng.gen_range(0..1 << 20)))
            .unwrap();
        if rng.gen_bool(0.4) {
            reg.join(d, u).unwrap();
        }
        let author = if rng.gen_bool(0.3) { owner } else { u };
        let expected = oracle::allowed(&reg, author, d, Right::Publish);
        match reg.publish_article(d, author, draft("t", "")) {
            Ok(_) => assert!(expected),
            Err(e) => {
                assert!(!expected);
                assert_eq!(e, Error::PermissionDenied(Right::Publish));
            }
        }
    }
}

#[test]
fn reading_requires_read_even_for_author() {
    let mut reg = registry();
    let owner = user(&mut reg, "owner");
    let author = user(&mut reg, "author");
    let root = reg.root();
    let d = mkdir(&mut reg, root, "d", owner);
    let m = AuthMatrix::EMPTY
        .with(Role::AnyUser, Right::Publish, true)
        .with(Role::AnyUser, Right::ShowDir, true)
        .with(Role::DirCreator, Right::Read, true);
    reg.set_matrix(d, owner, m).unwrap();
    let a = reg.publish_article(d, author, draft("mine", "")).unwrap();
    assert_eq!(
        reg.get_article(a.id, author),
        Err(Error::PermissionDenied(Right::Read))
    );
    assert_eq!(
        reg.list_articles(d, author),
        Err(Error::PermissionDenied(Right::Read))
    );
    assert!(reg.get_article(a.id, owner).is_ok());
}

#[test]
fn attachments_round_trip() {
    let mut reg = registry();
    let c = course(&mut reg);
    let anyone = user(&mut reg, "anyone");
    let id = reg.list_articles(c.personal[1], c.teacher).unwrap()[0].id;
    let article = reg.get_article(id, anyone).unwrap();
    assert_eq!(article.attachments.len(), 1);
    let (meta, bytes) = reg.fetch_attachment(id, "hw1.pdf", anyone).unwrap();
    assert_eq!(&*bytes, b"%PDF stu2");
    assert_eq!(meta.size, bytes.len());
    assert_eq!(
        reg.fetch_attachment(id, "other.pdf", anyone).unwrap_err(),
        Error::NotFound(Entity::Attachment)
    );
}

#[test]
fn attachment_validation() {
    let mut reg = registry();
    let u = user(&mut reg, "u");
    let root = reg.root();
    let d = mkdir(&mut reg, root, "d", u);
    let mut dup = draft("t", "");
    dup.attachments = vec![("a".into(), vec![]), ("a".into(), vec![1])];
    assert_eq!(
        reg.publish_article(d, u, dup),
        Err(Error::DuplicateAttachment("a".into()))
    );
    let mut bad = draft("t", "");
    bad.attachments = vec![("../x".into(), vec![])];
    assert!(matches!(
        reg.publish_article(d, u, bad),
        Err(Error::InvalidAttachmentName(_))
    ));

    let mut small = Registry::new(
        std::sync::Arc::new(domainhub_core::ManualClock::default()),
        domainhub_core::Policy {
            attachment_limit: 4,
            ..Default::default()
        },
    );
    let u = user(&mut small, "u");
    let root = small.root();
    let d = mkdir(&mut small, root, "d", u);
    let mut big = draft("t", "");
    big.attachments = vec![("big".into(), vec![0; 5])];
    assert!(matches!(
        small.publish_article(d, u, big),
        Err(Error::AttachmentTooLarge {
            size: 5,
            limit: 4,
            ..
        })
    ));
}

#[test]
fn trashed_directory_rejects_publishing() {
    let mut reg = registry();
    let u = user(&mut reg, "u");
    let root = reg.root();
    let d = mkdir(&mut reg, root, "d", u);
    let child = mkdir(&mut reg, d, "child", u);
    reg.trash_directory(d, u).unwrap();
    assert_eq!(
        reg.publish_article(child, u, draft("t", "")),
        Err(Error::TrashedDirectory)
    );
}

#[test]
fn resolve_path_by_bar_text() {
    let mut reg = registry();
    let c = common::course(&mut reg);
    let stranger = user(&mut reg, "stranger");
    let os = reg
        .resolve_path("ALL / computer / Operating System", stranger)
        .unwrap();
    assert_eq!(os, c.operating_system);
    assert_eq!(
        reg.resolve_path("ALL/Computer/operating system/", stranger)
            .unwrap(),
        os
    );
    assert_eq!(reg.resolve_path("ALL", stranger).unwrap(), reg.root());
    assert!(reg.resolve_path("computer", stranger).is_err());
    assert!(reg.resolve_path("ALL/nope", stranger).is_err());
    reg.trash_directory(os, c.teacher).unwrap();
    assert!(reg
        .resolve_path("ALL/computer/Operating System", stranger)
        .is_err());
    assert_eq!(
        reg.resolve_path("ALL/computer/Operating System", c.teacher)
            .unwrap(),
        os
    );
}
