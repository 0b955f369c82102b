//! Library side of the `psl` command: report files and the HTTP explorer API.

pub mod report;
pub mod server;
