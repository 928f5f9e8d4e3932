// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::profile::Format;

#[derive(Debug, Parser)]
#[command(name = "domainhub", version, about = "Client for a domainhub server")]
pub struct Cli {
    /// Server base URL, e.g. http://127.0.0.1:8080
    #[arg(long, global = true, env = "DOMAINHUB_SERVER")]
    pub server: Option<String>,
    /// Session token; overrides the one saved by `login`
    #[arg(long, global = true, env = "DOMAINHUB_TOKEN", hide_env_values = true)]
    pub token: Option<String>,
    /// Profile file holding server, token and defaults
    #[arg(long, global = true, env = "DOMAINHUB_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an account
    Register(Credentials),
    /// Log in and save the session token to the profile
    Login(Credentials),
    /// End the session and forget the saved token
    Logout,
    /// Show the logged-in account
    Whoami,
    #[command(subcommand)]
    User(UserCmd),
    #[command(subcommand)]
    Dir(DirCmd),
    #[command(subcommand)]
    Group(GroupCmd),
    #[command(subcommand)]
    Article(ArticleCmd),
    /// Search directories or articles
    Search(SearchArgs),
    #[command(subcommand)]
    Mount(MountCmd),
    #[command(subcommand)]
    Agent(AgentCmd),
}

#[derive(Debug, Args)]
pub struct Credentials {
    pub username: String,
    /// Read from standard input when omitted
    #[arg(long, env = "DOMAINHUB_PASSWORD", hide_env_values = true)]
    pub password: Option<String>,
}

/// Accounts
#[derive(Debug, Subcommand)]
pub enum UserCmd {
    /// Look up an account by username
    Lookup { username: String },
}

/// Directories. DIR is an id or a path such as "ALL/computer".
#[derive(Debug, Subcommand)]
pub enum DirCmd {
    /// Find a directory by path
    Resolve { path: String },
    /// Show a directory and what you may do in it
    Show { dir: String },
    /// Create a subdirectory
    Create { parent: String, name: String },
    /// List visible subdirectories
    Ls {
        #[arg(default_value = "ALL")]
        dir: String,
    },
    /// Print the navigator bar
    Bar { dir: String },
    /// Delete a directory (owner only)
    Rm { dir: String },
    /// Move a directory to the trash
    Trash { dir: String },
    /// Bring a directory back from the trash
    Restore { dir: String },
    /// Show or change the authorization matrix
    Matrix {
        dir: String,
        /// ROLE:RIGHT=on|off, repeatable
        #[arg(long = "set", value_name = "ROLE:RIGHT=on|off")]
        set: Vec<String>,
    },
    /// List, grant or revoke user and group grants
    #[command(group(ArgGroup::new("target").required(true).args(["user", "group", "list"])))]
    Grant {
        dir: String,
        #[arg(long)]
        user: Option<String>,
        /// Directory whose members are granted
        #[arg(long)]
        group: Option<String>,
        #[arg(long, conflicts_with = "list")]
        revoke: bool,
        #[arg(long)]
        list: bool,
    },
    /// Make a directory public or private
    Visibility { dir: String, value: VisibilityArg },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VisibilityArg {
    Public,
    Private,
}

/// Directory groups
#[derive(Debug, Subcommand)]
pub enum GroupCmd {
    /// Join, or apply to join, a directory's group
    Join { dir: String },
    /// Show members, pending applications and the blacklist
    Show { dir: String },
    /// Accept a pending application
    Permit { dir: String, user: String },
    /// Reject a pending application
    Refuse { dir: String, user: String },
    /// Remove a member
    Kick { dir: String, user: String },
    /// Blacklist a user, or lift the blacklist with --remove
    Blacklist {
        dir: String,
        user: String,
        #[arg(long)]
        remove: bool,
    },
}

/// Articles
#[derive(Debug, Subcommand)]
pub enum ArticleCmd {
    /// Publish an article with optional attachments
    Publish {
        dir: String,
        #[arg(long)]
        title: String,
        #[arg(long = "abstract", default_value = "")]
        abstract_text: String,
        #[arg(long, default_value = "", conflicts_with = "body_file")]
        body: String,
        #[arg(long)]
        body_file: Option<PathBuf>,
        /// File to attach, repeatable
        #[arg(long = "attach")]
        attach: Vec<PathBuf>,
    },
    /// List articles in a directory
    Ls { dir: String },
    /// Show an article, or download one attachment
    Get {
        /// Article id or URL
        article: String,
        #[arg(long)]
        attachment: Option<String>,
        /// Output file for --attachment (default: standard output)
        #[arg(long, short = 'o', requires = "attachment")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    pub query: String,
    /// DIR, KEY, MY_DIR, MY_KEY or MY_ALL_DIR
    #[arg(long, default_value = "DIR")]
    pub mode: String,
}

/// Remote shares mounted into directories
#[derive(Debug, Subcommand)]
pub enum MountCmd {
    /// Bind one of your agent's shares into a directory
    Bind {
        dir: String,
        #[arg(long)]
        share: String,
        #[arg(long, default_value = "default")]
        agent_id: String,
    },
    /// List mounted entries, or the bindings themselves
    Ls {
        dir: String,
        /// Path inside the shares
        #[arg(long, default_value = "")]
        path: String,
        /// Only this binding
        #[arg(long)]
        binding: Option<u64>,
        #[arg(long, conflicts_with_all = ["path", "binding"])]
        bindings: bool,
    },
    /// Download a file through a binding
    Fetch {
        binding: u64,
        path: String,
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
    /// Remove a binding
    Unbind { binding: u64 },
}

/// The share agent
#[derive(Debug, Subcommand)]
pub enum AgentCmd {
    /// Serve a local directory to the hub until interrupted
    Run(AgentArgs),
}

#[derive(Debug, Args)]
pub struct AgentArgs {
    /// Local directory to share
    #[arg(long)]
    pub share: PathBuf,
    /// Label announced for the share (default: the directory name)
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, default_value = "default")]
    pub agent_id: String,
    /// Hub agent endpoint host:port (default: server host, port 8081)
    #[arg(long, env = "DOMAINHUB_AGENT_SERVER")]
    pub agent_server: Option<String>,
    /// Exit when the first connection ends instead of reconnecting
    #[arg(long)]
    pub once: bool,
}
