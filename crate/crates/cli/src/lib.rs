//! Command-line and HTTP front ends for the slice analysis engine.

pub mod api;
pub mod cli;
pub mod http;

pub use api::{execute, handle_request, Envelope, Request};
pub use cli::run_command;
