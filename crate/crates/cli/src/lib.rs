//! Command-line pipeline and read-only JSON API for link controversy reports.

pub mod commands;
pub mod server;
pub mod transport;
