// SPDX-License-Identifier: Apache-2.0

//! HTTP+JSON API over the directory service, plus the listener agents dial
//! into.

pub mod api;
pub mod app;
pub mod dto;
pub mod error;

pub use api::{router, AppState, Route, ROUTES};
pub use app::{start, RunningServer, ServerConfig};
pub use error::ApiError;
