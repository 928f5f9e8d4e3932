// SPDX-License-Identifier: Apache-2.0

//! Request and response bodies of the HTTP API.

use std::collections::HashMap;

use domainhub_core::{
    Article, BindingId, Directory, DirectoryId, JoinOutcome, Membership, MountBinding,
    NavigatorBar, Right, Role, Timestamp, UserId, Visibility,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Credentials {
    pub username: String,
    pub password: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserView {
    pub id: UserId,
    pub username: String,
    pub created_at: Timestamp,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathQuery {
    pub path: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NameQuery {
    pub name: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CreateDir {
    pub parent: DirectoryId,
    pub name: String,
}

/// What the caller may do in a directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewerInfo {
    pub roles: Vec<Role>,
    pub rights: Vec<Right>,
    pub membership: Membership,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirView {
    #[serde(flatten)]
    pub directory: Directory,
    pub bar: NavigatorBar,
    pub viewer: ViewerInfo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarView {
    pub segments: NavigatorBar,
    /// Names joined with `" / "`.
    pub text: String,
}

/// Role name to right name to allowed.
pub type MatrixTable = HashMap<String, HashMap<String, bool>>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrantAction {
    #[default]
    Grant,
    Revoke,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UserGrant {
    pub user: UserId,
    #[serde(default)]
    pub action: GrantAction,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupGrant {
    pub group: DirectoryId,
    #[serde(default)]
    pub action: GrantAction,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SetVisibility {
    pub visibility: Visibility,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinView {
    pub outcome: JoinOutcome,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Review {
    pub decision: domainhub_core::Decision,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttachmentUpload {
    pub filename: String,
    /// Base64 (standard alphabet).
    pub data: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PublishArticle {
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub attachments: Vec<AttachmentUpload>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleView {
    #[serde(flatten)]
    pub article: Article,
    pub url: String,
    pub bar: NavigatorBar,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchQuery {
    pub q: String,
    #[serde(default = "default_mode")]
    pub mode: String,
}

fn default_mode() -> String {
    "DIR".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BindMount {
    pub agent_id: String,
    pub share: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingView {
    #[serde(flatten)]
    pub binding: MountBinding,
    pub label: String,
    pub live: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct EntriesQuery {
    #[serde(default)]
    pub path: String,
    pub binding: Option<BindingId>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FileQuery {
    #[serde(default)]
    pub path: String,
}
