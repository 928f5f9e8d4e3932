// SPDX-License-Identifier: Apache-2.0

//! Which API endpoints each command calls.

/// `(method, path template, variant)`. The variant distinguishes actions
/// that share a path and differ only in the request body.
pub type Endpoint = (&'static str, &'static str, Option<&'static str>);

#[derive(Debug, Clone, Copy)]
pub struct Verb {
    pub name: &'static str,
    pub endpoints: &'static [Endpoint],
}

const fn v(name: &'static str, endpoints: &'static [Endpoint]) -> Verb {
    Verb { name, endpoints }
}

pub const VERBS: &[Verb] = &[
    v("register", &[("POST", "/api/register", None)]),
    v("login", &[("POST", "/api/login", None)]),
    v("logout", &[("POST", "/api/logout", None)]),
    v("whoami", &[("GET", "/api/me", None)]),
    v("user lookup", &[("GET", "/api/users", None)]),
    v("dir resolve", &[("GET", "/api/dirs", None)]),
    v("dir show", &[("GET", "/api/dirs/{id}", None)]),
    v("dir create", &[("POST", "/api/dirs", None)]),
    v("dir ls", &[("GET", "/api/dirs/{id}/children", None)]),
    v("dir bar", &[("GET", "/api/dirs/{id}/bar", None)]),
    v("dir rm", &[("DELETE", "/api/dirs/{id}", None)]),
    v("dir trash", &[("POST", "/api/dirs/{id}/trash", None)]),
    v("dir restore", &[("POST", "/api/dirs/{id}/restore", None)]),
    v(
        "dir matrix",
        &[
            ("GET", "/api/dirs/{id}/matrix", None),
            ("POST", "/api/dirs/{id}/matrix", None),
        ],
    ),
    v(
        "dir grant",
        &[
            ("GET", "/api/dirs/{id}/grants", None),
            ("POST", "/api/dirs/{id}/grants/users", Some("grant")),
            ("POST", "/api/dirs/{id}/grants/users", Some("revoke")),
            ("POST", "/api/dirs/{id}/grants/groups", Some("grant")),
            ("POST", "/api/dirs/{id}/grants/groups", Some("revoke")),
        ],
    ),
    v(
        "dir visibility",
        &[("POST", "/api/dirs/{id}/visibility", None)],
    ),
    v("group join", &[("POST", "/api/dirs/{id}/join", None)]),
    v("group show", &[("GET", "/api/dirs/{id}/group", None)]),
    v(
        "group permit",
        &[("POST", "/api/dirs/{id}/applications/{uid}", Some("permit"))],
    ),
    v(
        "group refuse",
        &[("POST", "/api/dirs/{id}/applications/{uid}", Some("refuse"))],
    ),
    v(
        "group kick",
        &[("DELETE", "/api/dirs/{id}/members/{uid}", None)],
    ),
    v(
        "group blacklist",
        &[
            ("POST", "/api/dirs/{id}/blacklist/{uid}", None),
            ("DELETE", "/api/dirs/{id}/blacklist/{uid}", None),
        ],
    ),
    v(
        "article publish",
        &[("POST", "/api/dirs/{id}/articles", None)],
    ),
    v("article ls", &[("GET", "/api/dirs/{id}/articles", None)]),
    v(
        "article get",
        &[
            ("GET", "/api/a/{article}", None),
            ("GET", "/api/a/{article}/attachments/{name}", None),
        ],
    ),
    v("search", &[("GET", "/api/search", None)]),
    v("mount bind", &[("POST", "/api/dirs/{id}/mounts", None)]),
    v(
        "mount ls",
        &[
            ("GET", "/api/dirs/{id}/mounts", None),
            ("GET", "/api/dirs/{id}/mounts/entries", None),
        ],
    ),
    v(
        "mount fetch",
        &[("GET", "/api/mounts/{binding}/file", None)],
    ),
    v("mount unbind", &[("DELETE", "/api/mounts/{binding}", None)]),
    // Speaks the agent protocol, not HTTP.
    v("agent run", &[]),
];
