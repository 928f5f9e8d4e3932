// SPDX-License-Identifier: Apache-2.0

//! The global directory tree and the articles published into it.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::authz::{default_matrix, AuthMatrix, Right};
use crate::clock::Timestamp;
use crate::error::{Entity, Error, Occupancy, Result};
use crate::ids::{ArticleId, DirectoryId, UserId};
use crate::par::{self, Execution};
use crate::registry::Registry;

pub const ROOT_NAME: &str = "ALL";
pub const MAX_NAME_LEN: usize = 255;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirState {
    Active,
    Trashed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Visibility {
    Public,
    Private,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Directory {
    pub id: DirectoryId,
    pub name: String,
    pub parent: Option<DirectoryId>,
    pub owner: UserId,
    pub state: DirState,
    pub visibility: Visibility,
    pub matrix: AuthMatrix,
    pub created_at: Timestamp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub filename: String,
    /// Content hash of the bytes in the blob store.
    pub blob: String,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: ArticleId,
    pub directory: DirectoryId,
    pub author: UserId,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub body: String,
    pub attachments: Vec<Attachment>,
    pub published_at: Timestamp,
}

impl Article {
    pub fn url(&self) -> String {
        article_url(self.id)
    }
}

pub fn article_url(id: ArticleId) -> String {
    format!("/a/{id}")
}

/// Input to [`Registry::publish_article`].
#[derive(Clone, Debug, Default)]
pub struct ArticleDraft {
    pub title: String,
    pub abstract_text: String,
    pub body: String,
    pub attachments: Vec<(String, Vec<u8>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleSummary {
    pub id: ArticleId,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub author: UserId,
    pub url: String,
    pub published_at: Timestamp,
}

impl From<&Article> for ArticleSummary {
    fn from(a: &Article) -> Self {
        Self {
            id: a.id,
            title: a.title.clone(),
            abstract_text: a.abstract_text.clone(),
            author: a.author,
            url: a.url(),
            published_at: a.published_at,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarSegment {
    pub id: DirectoryId,
    pub name: String,
}

/// Root-to-target chain of a directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NavigatorBar(pub Vec<BarSegment>);

impl NavigatorBar {
    pub fn segments(&self) -> &[BarSegment] {
        &self.0
    }

    pub fn target(&self) -> DirectoryId {
        self.0.last().expect("bar is never empty").id
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|s| s.name.as_str())
    }
}

impl fmt::Display for NavigatorBar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, name) in self.names().enumerate() {
            if i > 0 {
                f.write_str(" / ")?;
            }
            f.write_str(name)?;
        }
        Ok(())
    }
}

/// A directory together with the children the viewer may see.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainView {
    pub directory: Directory,
    pub children: Vec<Directory>,
}

pub fn validate_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::InvalidName("empty"));
    }
    if name.trim() != name {
        return Err(Error::InvalidName("leading or trailing whitespace"));
    }
    if name.contains('/') {
        return Err(Error::InvalidName("contains '/'"));
    }
    if name.chars().any(char::is_control) {
        return Err(Error::InvalidName("contains control characters"));
    }
    if name.chars().count() > MAX_NAME_LEN {
        return Err(Error::InvalidName("longer than 255 characters"));
    }
    Ok(())
}

fn validate_attachment_name(name: &str) -> Result<()> {
    let bad = name.is_empty()
        || name == "."
        || name == ".."
        || name.contains(['/', '\\'])
        || name.chars().any(char::is_control);
    if bad {
        Err(Error::InvalidAttachmentName(name.to_string()))
    } else {
        Ok(())
    }
}

impl Registry {
    pub fn directory(&self, id: DirectoryId) -> Option<&Directory> {
        self.state.directories.get(&id)
    }

    pub fn directories(&self) -> impl Iterator<Item = &Directory> {
        self.state.directories.values()
    }

    /// All children, any state, in id order.
    pub fn child_ids(&self, id: DirectoryId) -> impl Iterator<Item = DirectoryId> + '_ {
        self.children.get(&id).into_iter().flatten().copied()
    }

    pub fn article(&self, id: ArticleId) -> Option<&Article> {
        self.state.articles.get(&id)
    }

    pub fn articles(&self) -> impl Iterator<Item = &Article> {
        self.state.articles.values()
    }

    pub fn article_count(&self, dir: DirectoryId) -> usize {
        self.dir_articles.get(&dir).map_or(0, |a| a.len())
    }

    pub fn create_directory(
        &mut self,
        parent: DirectoryId,
        name: &str,
        creator: UserId,
    ) -> Result<Directory> {
        if !self.state.directories.contains_key(&parent) {
            return Err(Error::ParentNotFound);
        }
        if !self.is_live(parent) {
            return Err(Error::ParentTrashed);
        }
        self.require_right(creator, parent, Right::CreateSubDir)?;
        validate_name(name)?;
        let folded = name.to_lowercase();
        let taken = self
            .child_ids(parent)
            .any(|c| self.state.directories[&c].name.to_lowercase() == folded);
        if taken {
            return Err(Error::DuplicateName);
        }
        let id = self.state.ids.directory();
        let dir = Directory {
            id,
            name: name.to_string(),
            parent: Some(parent),
            owner: creator,
            state: DirState::Active,
            visibility: Visibility::Public,
            matrix: default_matrix(),
            created_at: self.clock.now(),
        };
        self.state.directories.insert(id, dir.clone());
        self.children.entry(parent).or_default().insert(id);
        self.index_directory(id);
        Ok(dir)
    }

    /// Which delete preconditions a directory currently violates.
    pub fn occupancy(&self, dir: DirectoryId) -> Occupancy {
        Occupancy {
            members: self
                .state
                .groups
                .get(&dir)
                .is_some_and(|g| !g.members.is_empty()),
            articles: self.article_count(dir) > 0,
            children: self.children.get(&dir).is_some_and(|c| !c.is_empty()),
        }
    }

    pub fn delete_directory(&mut self, dir: DirectoryId, actor: UserId) -> Result<()> {
        let parent = self.dir(dir)?.parent.ok_or(Error::RootUndeletable)?;
        self.require_owner(dir, actor)?;
        let occupancy = self.occupancy(dir);
        if !occupancy.is_empty() {
            return Err(Error::NotEmpty(occupancy));
        }
        self.state.directories.remove(&dir);
        if let Some(siblings) = self.children.get_mut(&parent) {
            siblings.remove(&dir);
        }
        self.children.remove(&dir);
        self.dir_articles.remove(&dir);
        self.state.groups.remove(&dir);
        self.state.grants.remove(&dir);
        for grants in self.state.grants.values_mut() {
            grants.granted_groups.remove(&dir);
        }
        self.state.mounts.retain(|_, m| m.directory != dir);
        self.unindex_directory(dir);
        Ok(())
    }

    pub fn trash_directory(&mut self, dir: DirectoryId, actor: UserId) -> Result<()> {
        if self.dir(dir)?.parent.is_none() {
            return Err(Error::RootUntrashable);
        }
        self.require_owner(dir, actor)?;
        let d = self.dir_mut(dir)?;
        if d.state == DirState::Trashed {
            return Err(Error::AlreadyTrashed);
        }
        d.state = DirState::Trashed;
        Ok(())
    }

    pub fn restore_directory(&mut self, dir: DirectoryId, actor: UserId) -> Result<()> {
        let d = self.require_owner(dir, actor)?;
        if d.state != DirState::Trashed {
            return Err(Error::NotTrashed);
        }
        if let Some(parent) = d.parent {
            if self.dir(parent)?.state == DirState::Trashed {
                return Err(Error::ParentTrashed);
            }
        }
        self.dir_mut(dir)?.state = DirState::Active;
        Ok(())
    }

    pub fn navigator_path(&self, dir: DirectoryId) -> Result<NavigatorBar> {
        self.dir(dir)?;
        let mut segments: Vec<BarSegment> = self
            .ancestry(dir)
            .map(|d| BarSegment {
                id: d.id,
                name: d.name.clone(),
            })
            .collect();
        segments.reverse();
        Ok(NavigatorBar(segments))
    }

    /// Navigator bar as seen by `viewer`; hidden trashed chains are not
    /// resolvable.
    pub fn navigator_path_for(&self, dir: DirectoryId, viewer: UserId) -> Result<NavigatorBar> {
        self.require_visible(dir, viewer)?;
        self.navigator_path(dir)
    }

    /// Looks up a directory by its bar text, e.g. `ALL / computer / OS` or
    /// `ALL/computer/OS`. Matching is exact first, then case-insensitive.
    /// Directories hidden from `viewer` are never matched.
    pub fn resolve_path(&self, path: &str, viewer: UserId) -> Result<DirectoryId> {
        let mut segments = path.split('/').map(str::trim).filter(|s| !s.is_empty());
        if segments.next() != Some(ROOT_NAME) {
            return Err(Error::NotFound(Entity::Directory));
        }
        let mut current = self.root();
        for name in segments {
            let visible = |id: &DirectoryId| self.is_visible_to(*id, viewer);
            let kids: Vec<DirectoryId> = self.child_ids(current).filter(visible).collect();
            let by = |f: &dyn Fn(&str) -> bool| {
                kids.iter()
                    .copied()
                    .find(|id| f(&self.state.directories[id].name))
            };
            current = by(&|n| n == name)
                .or_else(|| by(&|n| n.eq_ignore_ascii_case(name)))
                .ok_or(Error::NotFound(Entity::Directory))?;
        }
        Ok(current)
    }

    pub fn domain_tool_view(&self, dir: DirectoryId, viewer: UserId) -> Result<DomainView> {
        self.domain_tool_view_with(dir, viewer, Execution::default())
    }

    pub fn domain_tool_view_with(
        &self,
        dir: DirectoryId,
        viewer: UserId,
        exec: Execution,
    ) -> Result<DomainView> {
        let directory = self.require_visible(dir, viewer)?.clone();
        self.require_right(viewer, dir, Right::ShowDir)?;
        let kids: Vec<DirectoryId> = self.child_ids(dir).collect();
        let children = par::filter_map(&kids, exec, |id| {
            let child = &self.state.directories[id];
            let shown = child.state == DirState::Active
                && child
                    .matrix
                    .allows(self.roles_of(viewer, *id).ok()?, Right::ShowDir);
            shown.then(|| child.clone())
        });
        Ok(DomainView {
            directory,
            children,
        })
    }

    pub fn list_children(&self, dir: DirectoryId, viewer: UserId) -> Result<Vec<Directory>> {
        Ok(self.domain_tool_view(dir, viewer)?.children)
    }

    pub fn publish_article(
        &mut self,
        dir: DirectoryId,
        author: UserId,
        draft: ArticleDraft,
    ) -> Result<Article> {
        self.dir(dir)?;
        if !self.is_live(dir) {
            return Err(Error::TrashedDirectory);
        }
        self.require_right(author, dir, Right::Publish)?;
        if draft.title.trim().is_empty() {
            return Err(Error::InvalidTitle);
        }
        let limit = self.policy.attachment_limit;
        let mut names = std::collections::HashSet::new();
        for (name, bytes) in &draft.attachments {
            validate_attachment_name(name)?;
            if !names.insert(name.as_str()) {
                return Err(Error::DuplicateAttachment(name.clone()));
            }
            if bytes.len() > limit {
                return Err(Error::AttachmentTooLarge {
                    name: name.clone(),
                    size: bytes.len(),
                    limit,
                });
            }
        }
        let attachments = draft
            .attachments
            .into_iter()
            .map(|(filename, bytes)| {
                let size = bytes.len();
                let blob = self.blobs.put(bytes);
                Attachment {
                    filename,
                    blob,
                    size,
                }
            })
            .collect();
        let id = self.state.ids.article();
        let article = Article {
            id,
            directory: dir,
            author,
            title: draft.title,
            abstract_text: draft.abstract_text,
            body: draft.body,
            attachments,
            published_at: self.clock.now(),
        };
        self.state.articles.insert(id, article.clone());
        self.dir_articles.entry(dir).or_default().insert(id);
        self.index_article(id);
        Ok(article)
    }

    /// Newest first; equal timestamps fall back to descending id.
    pub fn list_articles(&self, dir: DirectoryId, viewer: UserId) -> Result<Vec<ArticleSummary>> {
        self.require_visible(dir, viewer)?;
        self.require_right(viewer, dir, Right::Read)?;
        let mut list: Vec<&Article> = self
            .dir_articles
            .get(&dir)
            .into_iter()
            .flatten()
            .map(|id| &self.state.articles[id])
            .collect();
        list.sort_by_key(|a| std::cmp::Reverse((a.published_at, a.id)));
        Ok(list.into_iter().map(ArticleSummary::from).collect())
    }

    pub fn get_article(&self, id: ArticleId, viewer: UserId) -> Result<Article> {
        let article = self
            .state
            .articles
            .get(&id)
            .ok_or(Error::NotFound(Entity::Article))?;
        self.require_visible(article.directory, viewer)?;
        self.require_right(viewer, article.directory, Right::Read)?;
        Ok(article.clone())
    }

    pub fn fetch_attachment(
        &self,
        id: ArticleId,
        filename: &str,
        viewer: UserId,
    ) -> Result<(Attachment, Arc<[u8]>)> {
        let article = self.get_article(id, viewer)?;
        let attachment = article
            .attachments
            .into_iter()
            .find(|a| a.filename == filename)
            .ok_or(Error::NotFound(Entity::Attachment))?;
        let bytes = self
            .blobs
            .get(&attachment.blob)
            .ok_or(Error::NotFound(Entity::Attachment))?;
        Ok((attachment, bytes))
    }
}
