// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::authz::Right;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// What a `NotFound` refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Entity {
    Directory,
    Article,
    Attachment,
    Binding,
    User,
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entity::Directory => "directory",
            Entity::Article => "article",
            Entity::Attachment => "attachment",
            Entity::Binding => "mount binding",
            Entity::User => "user",
        })
    }
}

/// Which delete preconditions failed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occupancy {
    pub members: bool,
    pub articles: bool,
    pub children: bool,
}

impl Occupancy {
    pub fn is_empty(&self) -> bool {
        !(self.members || self.articles || self.children)
    }
}

impl fmt::Display for Occupancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = [
            (self.members, "members"),
            (self.articles, "articles"),
            (self.children, "children"),
        ]
        .into_iter()
        .filter_map(|(set, name)| set.then_some(name))
        .collect();
        f.write_str(&parts.join("|"))
    }
}

/// HTTP-facing classification of domain errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    BadRequest,
    Unauthorized,
    Forbidden,
    NotFound,
    Conflict,
}

impl ErrorClass {
    pub fn status(self) -> u16 {
        match self {
            ErrorClass::BadRequest => 400,
            ErrorClass::Unauthorized => 401,
            ErrorClass::Forbidden => 403,
            ErrorClass::NotFound => 404,
            ErrorClass::Conflict => 409,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{0} not found")]
    NotFound(Entity),
    #[error("parent directory not found")]
    ParentNotFound,
    #[error("parent directory is trashed")]
    ParentTrashed,
    #[error("permission denied: missing {0} right")]
    PermissionDenied(Right),
    #[error("a sibling with that name already exists")]
    DuplicateName,
    #[error("invalid directory name: {0}")]
    InvalidName(&'static str),
    #[error("only the directory owner may do this")]
    NotOwner,
    #[error("directory is not empty ({0})")]
    NotEmpty(Occupancy),
    #[error("the root directory cannot be deleted")]
    RootUndeletable,
    #[error("the root directory cannot be trashed")]
    RootUntrashable,
    #[error("directory is already trashed")]
    AlreadyTrashed,
    #[error("directory is not trashed")]
    NotTrashed,
    #[error("directory is trashed")]
    TrashedDirectory,
    #[error("article title must not be empty")]
    InvalidTitle,
    #[error("invalid attachment name {0:?}")]
    InvalidAttachmentName(String),
    #[error("duplicate attachment name {0:?}")]
    DuplicateAttachment(String),
    #[error("attachment {name:?} is {size} bytes, limit is {limit}")]
    AttachmentTooLarge {
        name: String,
        size: usize,
        limit: usize,
    },
    #[error("user not found")]
    UserNotFound,
    #[error("already granted")]
    AlreadyGranted,
    #[error("not granted")]
    NotGranted,
    #[error("already a member")]
    AlreadyMember,
    #[error("application already pending")]
    AlreadyPending,
    #[error("user is blacklisted on this directory")]
    Blacklisted,
    #[error("no such application")]
    NoSuchApplication,
    #[error("user is not a member")]
    NotMember,
    #[error("user is already blacklisted")]
    AlreadyBlacklisted,
    #[error("user is not blacklisted")]
    NotBlacklisted,
    #[error("the directory owner cannot be a group member or blacklisted")]
    OwnerExempt,
    #[error("query is empty")]
    EmptyQuery,
    #[error("query contains an empty term")]
    EmptyTerm,
    #[error("unknown search mode {0:?}")]
    InvalidMode(String),
    #[error("identical mount binding already exists")]
    DuplicateBinding,
    #[error("invalid share path: {0}")]
    InvalidSharePath(&'static str),
    #[error("username is taken")]
    UsernameTaken,
    #[error("invalid username: {0}")]
    InvalidUsername(&'static str),
    #[error("password must be at least {0} characters")]
    WeakPassword(usize),
    #[error("authentication failed")]
    AuthFailed,
    #[error("not authenticated")]
    Unauthenticated,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            NotFound(_) | ParentNotFound | UserNotFound | NoSuchApplication => ErrorClass::NotFound,
            PermissionDenied(_) | NotOwner => ErrorClass::Forbidden,
            AuthFailed | Unauthenticated => ErrorClass::Unauthorized,
            InvalidName(_)
            | InvalidTitle
            | InvalidAttachmentName(_)
            | AttachmentTooLarge { .. }
            | EmptyQuery
            | EmptyTerm
            | InvalidMode(_)
            | InvalidSharePath(_)
            | InvalidUsername(_)
            | WeakPassword(_) => ErrorClass::BadRequest,
            ParentTrashed
            | DuplicateName
            | NotEmpty(_)
            | RootUndeletable
            | RootUntrashable
            | AlreadyTrashed
            | NotTrashed
            | TrashedDirectory
            | DuplicateAttachment(_)
            | AlreadyGranted
            | NotGranted
            | AlreadyMember
            | AlreadyPending
            | Blacklisted
            | NotMember
            | AlreadyBlacklisted
            | NotBlacklisted
            | OwnerExempt
            | DuplicateBinding
            | UsernameTaken => ErrorClass::Conflict,
        }
    }

    /// Stable machine-readable code used in API error bodies.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            NotFound(_) => "NotFound",
            ParentNotFound => "ParentNotFound",
            ParentTrashed => "ParentTrashed",
            PermissionDenied(_) => "PermissionDenied",
            DuplicateName => "DuplicateName",
            InvalidName(_) => "InvalidName",
            NotOwner => "NotOwner",
            NotEmpty(_) => "NotEmpty",
            RootUndeletable => "RootUndeletable",
            RootUntrashable => "RootUntrashable",
            AlreadyTrashed => "AlreadyTrashed",
            NotTrashed => "NotTrashed",
            TrashedDirectory => "TrashedDirectory",
            InvalidTitle => "InvalidTitle",
            InvalidAttachmentName(_) => "InvalidAttachmentName",
            DuplicateAttachment(_) => "DuplicateAttachment",
            AttachmentTooLarge { .. } => "AttachmentTooLarge",
            UserNotFound => "UserNotFound",
            AlreadyGranted => "AlreadyGranted",
            NotGranted => "NotGranted",
            AlreadyMember => "AlreadyMember",
            AlreadyPending => "AlreadyPending",
            Blacklisted => "Blacklisted",
            NoSuchApplication => "NoSuchApplication",
            NotMember => "NotMember",
            AlreadyBlacklisted => "AlreadyBlacklisted",
            NotBlacklisted => "NotBlacklisted",
            OwnerExempt => "OwnerExempt",
            EmptyQuery => "EmptyQuery",
            EmptyTerm => "EmptyTerm",
            InvalidMode(_) => "InvalidMode",
            DuplicateBinding => "DuplicateBinding",
            InvalidSharePath(_) => "InvalidSharePath",
            UsernameTaken => "UsernameTaken",
            InvalidUsername(_) => "InvalidUsername",
            WeakPassword(_) => "WeakPassword",
            AuthFailed => "AuthFailed",
            Unauthenticated => "Unauthenticated",
        }
    }
}
