// SPDX-License-Identifier: Apache-2.0

//! `domainhub` command-line client.
//!
//! Every API capability is reachable through a command (see [`verbs`]).
//! `agent run` embeds the share agent. [`run`] is the whole program and
//! can be called in-process.

pub mod args;
pub mod client;
pub mod error;
pub mod profile;
pub mod render;
pub mod verbs;

mod agent;

use std::ffi::OsString;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use base64::Engine as _;
use clap::Parser;
use serde_json::{json, Value};

use crate::args::*;
use crate::client::Client;
use crate::error::{CliError, CliResult};
use crate::profile::{Format, Profile};

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code: 0 success, 1 refused by the server or a
/// local failure, 2 usage error, 3 server unreachable.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

struct Ctx<'a> {
    client: Client,
    format: Format,
    profile: Profile,
    profile_path: Option<PathBuf>,
    out: &'a mut dyn Write,
}

type Renderer = fn(&mut dyn Write, &Value) -> io::Result<()>;

impl Ctx<'_> {
    /// JSON lines: arrays one element per line, anything else one line.
    fn emit(&mut self, value: &Value, table: Renderer) -> CliResult<()> {
        match self.format {
            Format::JsonLines => match value {
                Value::Null => {}
                Value::Array(items) => {
                    for item in items {
                        writeln!(self.out, "{item}")?;
                    }
                }
                other => writeln!(self.out, "{other}")?,
            },
            Format::Table => match value {
                Value::Array(items) => {
                    for item in items {
                        table(self.out, item)?;
                    }
                }
                other => table(self.out, other)?,
            },
        }
        Ok(())
    }

    /// Status line for commands without a response body.
    fn done(&mut self, msg: String) -> CliResult<()> {
        if self.format == Format::Table {
            writeln!(self.out, "{msg}")?;
        }
        Ok(())
    }

    fn dir_id(&self, r: &str) -> CliResult<u64> {
        if let Ok(n) = r.parse::<u64>() {
            return Ok(n);
        }
        if r == "ALL" || r.starts_with("ALL/") {
            let v = self.client.get("/api/dirs", &[("path", r.to_string())])?;
            return id_of(&v);
        }
        Err(CliError::usage(format!(
            "{r:?} is neither a directory id nor a path starting with ALL"
        )))
    }

    fn user_id(&self, r: &str) -> CliResult<u64> {
        if let Ok(n) = r.parse::<u64>() {
            return Ok(n);
        }
        id_of(&self.client.get("/api/users", &[("name", r.to_string())])?)
    }

    fn save_profile(&self) -> CliResult<PathBuf> {
        let path = self.profile_path.clone().ok_or_else(|| {
            CliError::Local("no profile location; set DOMAINHUB_CONFIG or --config".into())
        })?;
        self.profile.save(&path)?;
        Ok(path)
    }
}

fn id_of(v: &Value) -> CliResult<u64> {
    v["id"]
        .as_u64()
        .ok_or_else(|| CliError::Connection("response without an id".into()))
}

fn article_id(r: &str) -> CliResult<u64> {
    r.trim_end_matches('/')
        .rsplit('/')
        .next()
        .and_then(|tail| tail.parse().ok())
        .ok_or_else(|| CliError::usage(format!("{r:?} is not an article id or URL")))
}

fn password(given: Option<String>) -> CliResult<String> {
    if let Some(p) = given {
        return Ok(p);
    }
    let mut line = String::new();
    io::stdin().read_line(&mut line)?;
    let p = line.trim_end_matches(['\r', '\n']).to_string();
    if p.is_empty() {
        return Err(CliError::usage(
            "password required (--password or standard input)",
        ));
    }
    Ok(p)
}

fn switch(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Some(true),
        "off" | "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

/// `ROLE:RIGHT=on|off`, names as in the matrix.
fn parse_cell(spec: &str) -> CliResult<(String, String, bool)> {
    use domainhub_core::{Right, Role};
    let bad = || {
        CliError::usage(format!(
            "bad matrix cell {spec:?}; expected ROLE:RIGHT=on|off"
        ))
    };
    let (cell, value) = spec.split_once('=').ok_or_else(bad)?;
    let (role, right) = cell.split_once(':').ok_or_else(bad)?;
    let role: Role = role.trim().parse().map_err(CliError::Usage)?;
    let right: Right = right.trim().parse().map_err(CliError::Usage)?;
    let on = switch(value.trim()).ok_or_else(bad)?;
    Ok((role.name().to_string(), right.name().to_string(), on))
}

fn execute(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    let profile_path = cli.config.clone().or_else(profile::default_path);
    let profile = match &profile_path {
        Some(p) => Profile::load(p)?,
        None => Profile::default(),
    };
    let server = cli
        .server
        .clone()
        .or_else(|| profile.server.clone())
        .unwrap_or_else(|| profile::DEFAULT_SERVER.to_string());
    let token = cli.token.clone().or_else(|| profile.token.clone());
    let format = cli.format.or(profile.format).unwrap_or_default();
    let mut ctx = Ctx {
        client: Client::new(&server, token)?,
        format,
        profile,
        profile_path,
        out,
    };
    dispatch(&mut ctx, cli.command)
}

fn dispatch(ctx: &mut Ctx<'_>, command: Command) -> CliResult<()> {
    match command {
        Command::Register(c) => {
            let body = json!({"username": c.username, "password": password(c.password)?});
            let v = ctx.client.post("/api/register", &body)?;
            ctx.emit(&v, |o, u| {
                writeln!(
                    o,
                    "registered {} (id {})",
                    u["username"].as_str().unwrap_or(""),
                    u["id"]
                )
            })
        }
        Command::Login(c) => {
            let body = json!({"username": c.username, "password": password(c.password)?});
            let v = ctx.client.post("/api/login", &body)?;
            let token = v["token"]
                .as_str()
                .ok_or_else(|| CliError::Connection("login response without a token".into()))?;
            ctx.profile.token = Some(token.to_string());
            ctx.profile.server = Some(ctx.client.base().to_string());
            let path = ctx.save_profile()?;
            // The token itself stays in the profile, out of terminal logs.
            let shown = json!({"user": v["user"], "expires_at": v["expires_at"]});
            match ctx.format {
                Format::JsonLines => ctx.emit(&shown, render::user),
                Format::Table => ctx.done(format!(
                    "logged in as {} until {}; token saved to {}",
                    c.username,
                    v["expires_at"].as_str().unwrap_or("?"),
                    path.display()
                )),
            }
        }
        Command::Logout => {
            let res = ctx.client.post("/api/logout", &Value::Null);
            if ctx.profile.token.take().is_some() {
                ctx.save_profile()?;
            }
            res?;
            ctx.done("logged out".into())
        }
        Command::Whoami => {
            let v = ctx.client.get("/api/me", &[])?;
            ctx.emit(&v, render::user)
        }
        Command::User(UserCmd::Lookup { username }) => {
            let v = ctx.client.get("/api/users", &[("name", username)])?;
            ctx.emit(&v, render::user)
        }
        Command::Dir(cmd) => dir(ctx, cmd),
        Command::Group(cmd) => group(ctx, cmd),
        Command::Article(cmd) => article(ctx, cmd),
        Command::Search(a) => {
            let mode = domainhub_core::SearchMode::from_label(&a.mode)
                .map_err(|e: domainhub_core::Error| CliError::Usage(e.to_string()))?;
            let v = ctx.client.get(
                "/api/search",
                &[("q", a.query), ("mode", mode.wire_name().to_string())],
            )?;
            ctx.emit(&v, render::hit)
        }
        Command::Mount(cmd) => mount(ctx, cmd),
        Command::Agent(AgentCmd::Run(a)) => {
            let server = ctx.client.base().to_string();
            let token = ctx.client.token().map(str::to_string);
            agent::run(ctx.out, &server, token, ctx.profile.agent_server.clone(), a)
        }
    }
}

fn dir(ctx: &mut Ctx<'_>, cmd: DirCmd) -> CliResult<()> {
    match cmd {
        DirCmd::Resolve { path } => {
            let v = ctx.client.get("/api/dirs", &[("path", path)])?;
            ctx.emit(&v, render::dir)
        }
        DirCmd::Show { dir } => {
            let id = ctx.dir_id(&dir)?;
            let v = ctx.client.get(&format!("/api/dirs/{id}"), &[])?;
            ctx.emit(&v, render::dir)
        }
        DirCmd::Create { parent, name } => {
            let parent = ctx.dir_id(&parent)?;
            let v = ctx
                .client
                .post("/api/dirs", &json!({"parent": parent, "name": name}))?;
            ctx.emit(&v, render::dir)
        }
        DirCmd::Ls { dir } => {
            let id = ctx.dir_id(&dir)?;
            let v = ctx.client.get(&format!("/api/dirs/{id}/children"), &[])?;
            ctx.emit(&v, render::children)
        }
        DirCmd::Bar { dir } => {
            let id = ctx.dir_id(&dir)?;
            let v = ctx.client.get(&format!("/api/dirs/{id}/bar"), &[])?;
            ctx.emit(&v, |o, b| {
                writeln!(o, "{}", b["text"].as_str().unwrap_or(""))
            })
        }
        DirCmd::Rm { dir } => {
            let id = ctx.dir_id(&dir)?;
            ctx.client.delete(&format!("/api/dirs/{id}"))?;
            ctx.done(format!("deleted directory {id}"))
        }
        DirCmd::Trash { dir } => {
            let id = ctx.dir_id(&dir)?;
            let v = ctx
                .client
                .post(&format!("/api/dirs/{id}/trash"), &Value::Null)?;
            ctx.emit(&v, render::dir)
        }
        DirCmd::Restore { dir } => {
            let id = ctx.dir_id(&dir)?;
            let v = ctx
                .client
                .post(&format!("/api/dirs/{id}/restore"), &Value::Null)?;
            ctx.emit(&v, render::dir)
        }
        DirCmd::Matrix { dir, set } => {
            let cells = set
                .iter()
                .map(|s| parse_cell(s))
                .collect::<CliResult<Vec<_>>>()?;
            let id = ctx.dir_id(&dir)?;
            let path = format!("/api/dirs/{id}/matrix");
            let mut table = ctx.client.get(&path, &[])?;
            if !cells.is_empty() {
                for (role, right, on) in cells {
                    table[role.as_str()][right.as_str()] = Value::Bool(on);
                }
                table = ctx.client.post(&path, &table)?;
            }
            ctx.emit(&table, render::matrix)
        }
        DirCmd::Grant {
            dir,
            user,
            group,
            revoke,
            list: _,
        } => {
            let id = ctx.dir_id(&dir)?;
            let action = if revoke { "revoke" } else { "grant" };
            let v = if let Some(u) = user {
                let uid = ctx.user_id(&u)?;
                ctx.client.post(
                    &format!("/api/dirs/{id}/grants/users"),
                    &json!({"user": uid, "action": action}),
                )?
            } else if let Some(g) = group {
                let gid = ctx.dir_id(&g)?;
                ctx.client.post(
                    &format!("/api/dirs/{id}/grants/groups"),
                    &json!({"group": gid, "action": action}),
                )?
            } else {
                ctx.client.get(&format!("/api/dirs/{id}/grants"), &[])?
            };
            ctx.emit(&v, render::grants)
        }
        DirCmd::Visibility { dir, value } => {
            let id = ctx.dir_id(&dir)?;
            let vis = match value {
                VisibilityArg::Public => "Public",
                VisibilityArg::Private => "Private",
            };
            let v = ctx.client.post(
                &format!("/api/dirs/{id}/visibility"),
                &json!({"visibility": vis}),
            )?;
            ctx.emit(&v, render::dir)
        }
    }
}

fn group(ctx: &mut Ctx<'_>, cmd: GroupCmd) -> CliResult<()> {
    match cmd {
        GroupCmd::Join { dir } => {
            let id = ctx.dir_id(&dir)?;
            let v = ctx
                .client
                .post(&format!("/api/dirs/{id}/join"), &Value::Null)?;
            ctx.emit(&v, |o, j| match j["outcome"].as_str() {
                Some("Joined") => writeln!(o, "joined"),
                _ => writeln!(o, "application pending"),
            })
        }
        GroupCmd::Show { dir } => {
            let id = ctx.dir_id(&dir)?;
            let v = ctx.client.get(&format!("/api/dirs/{id}/group"), &[])?;
            ctx.emit(&v, render::group)
        }
        GroupCmd::Permit { dir, user } => review(ctx, &dir, &user, "permit"),
        GroupCmd::Refuse { dir, user } => review(ctx, &dir, &user, "refuse"),
        GroupCmd::Kick { dir, user } => {
            let id = ctx.dir_id(&dir)?;
            let uid = ctx.user_id(&user)?;
            ctx.client
                .delete(&format!("/api/dirs/{id}/members/{uid}"))?;
            ctx.done(format!("removed user {uid} from the group"))
        }
        GroupCmd::Blacklist { dir, user, remove } => {
            let id = ctx.dir_id(&dir)?;
            let uid = ctx.user_id(&user)?;
            let path = format!("/api/dirs/{id}/blacklist/{uid}");
            if remove {
                ctx.client.delete(&path)?;
                ctx.done(format!("user {uid} is no longer blacklisted"))
            } else {
                ctx.client.post(&path, &Value::Null)?;
                ctx.done(format!("blacklisted user {uid}"))
            }
        }
    }
}

fn review(ctx: &mut Ctx<'_>, dir: &str, user: &str, decision: &str) -> CliResult<()> {
    let id = ctx.dir_id(dir)?;
    let uid = ctx.user_id(user)?;
    ctx.client.post(
        &format!("/api/dirs/{id}/applications/{uid}"),
        &json!({ "decision": decision }),
    )?;
    let verb = if decision == "permit" {
        "permitted"
    } else {
        "refused"
    };
    ctx.done(format!("{verb} user {uid}"))
}

/// Writes a download to `path`, or raw to the command output when absent.
/// A partial file is removed.
fn download(
    ctx: &mut Ctx<'_>,
    url: &str,
    query: client::Params<'_>,
    path: Option<&PathBuf>,
) -> CliResult<()> {
    let Some(path) = path else {
        ctx.client.download(url, query, ctx.out)?;
        return Ok(());
    };
    let mut file = io::BufWriter::new(std::fs::File::create(path)?);
    let n = match ctx.client.download(url, query, &mut file) {
        Ok(n) => n,
        Err(e) => {
            drop(file);
            let _ = std::fs::remove_file(path);
            return Err(e);
        }
    };
    let shown = json!({"path": path.display().to_string(), "bytes": n});
    ctx.emit(&shown, |o, v| {
        writeln!(
            o,
            "wrote {} bytes to {}",
            v["bytes"],
            v["path"].as_str().unwrap_or("")
        )
    })
}

fn article(ctx: &mut Ctx<'_>, cmd: ArticleCmd) -> CliResult<()> {
    match cmd {
        ArticleCmd::Publish {
            dir,
            title,
            abstract_text,
            body,
            body_file,
            attach,
        } => {
            let body = match body_file {
                Some(p) => std::fs::read_to_string(&p)
                    .map_err(|e| CliError::Local(format!("{}: {e}", p.display())))?,
                None => body,
            };
            let engine = base64::engine::general_purpose::STANDARD;
            let mut attachments = Vec::with_capacity(attach.len());
            for p in &attach {
                let mut bytes = Vec::new();
                std::fs::File::open(p)
                    .and_then(|mut f| f.read_to_end(&mut bytes))
                    .map_err(|e| CliError::Local(format!("{}: {e}", p.display())))?;
                let name = p
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .ok_or_else(|| CliError::usage(format!("{} has no file name", p.display())))?;
                attachments.push(json!({"filename": name, "data": engine.encode(&bytes)}));
            }
            let id = ctx.dir_id(&dir)?;
            let req = json!({
                "title": title,
                "abstract": abstract_text,
                "body": body,
                "attachments": attachments,
            });
            let v = ctx.client.post(&format!("/api/dirs/{id}/articles"), &req)?;
            ctx.emit(&v, |o, a| {
                writeln!(
                    o,
                    "published {} in {}",
                    a["url"].as_str().unwrap_or(""),
                    render::bar_text(&a["bar"])
                )
            })
        }
        ArticleCmd::Ls { dir } => {
            let id = ctx.dir_id(&dir)?;
            let v = ctx.client.get(&format!("/api/dirs/{id}/articles"), &[])?;
            ctx.emit(&v, render::article_summary)
        }
        ArticleCmd::Get {
            article,
            attachment,
            out,
        } => {
            let id = article_id(&article)?;
            match attachment {
                None => {
                    let v = ctx.client.get(&format!("/api/a/{id}"), &[])?;
                    ctx.emit(&v, render::article)
                }
                Some(name) => {
                    let url = format!("/api/a/{id}/attachments/{}", encode_segment(&name));
                    download(ctx, &url, &[], out.as_ref())
                }
            }
        }
    }
}

/// Percent-encodes one URL path segment.
fn encode_segment(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

fn mount(ctx: &mut Ctx<'_>, cmd: MountCmd) -> CliResult<()> {
    match cmd {
        MountCmd::Bind {
            dir,
            share,
            agent_id,
        } => {
            let id = ctx.dir_id(&dir)?;
            let v = ctx.client.post(
                &format!("/api/dirs/{id}/mounts"),
                &json!({"agent_id": agent_id, "share": share}),
            )?;
            ctx.emit(&v, render::binding)
        }
        MountCmd::Ls {
            dir,
            path,
            binding,
            bindings,
        } => {
            let id = ctx.dir_id(&dir)?;
            if bindings {
                let v = ctx.client.get(&format!("/api/dirs/{id}/mounts"), &[])?;
                return ctx.emit(&v, render::binding);
            }
            let mut query = vec![("path", path)];
            if let Some(b) = binding {
                query.push(("binding", b.to_string()));
            }
            let v = ctx
                .client
                .get(&format!("/api/dirs/{id}/mounts/entries"), &query)?;
            ctx.emit(&v, render::entry)
        }
        MountCmd::Fetch { binding, path, out } => download(
            ctx,
            &format!("/api/mounts/{binding}/file"),
            &[("path", path)],
            out.as_ref(),
        ),
        MountCmd::Unbind { binding } => {
            ctx.client.delete(&format!("/api/mounts/{binding}"))?;
            ctx.done(format!("removed binding {binding}"))
        }
    }
}
