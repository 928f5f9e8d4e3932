// SPDX-License-Identifier: Apache-2.0

//! Relay between the directory service and user agents.
//!
//! Agents sit behind NAT, so they dial out to the [`Hub`] and keep one
//! framed stream open. Listings and file fetches for mounted shares travel
//! over that stream as correlated request/response messages.

pub mod agent;
pub mod error;
pub mod hub;
pub mod path;
pub mod protocol;
mod task;

pub use agent::{Agent, AgentConfig, AgentConnection, LocalShares, ReadOutcome, ShareFs};
pub use error::RelayError;
pub use hub::{Authenticator, Hub, RelayConfig, SessionInfo, Transfer};
pub use path::sanitize;
