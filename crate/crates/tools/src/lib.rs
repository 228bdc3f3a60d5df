//! Offline and client-side tooling: dataset ingestion and rasterization,
//! training and evaluation, trace replay against a live server, reports.

pub mod config;
mod error;
pub mod preprocess;
pub mod replay;
pub mod report;
pub mod trace;
pub mod train;

pub use error::ToolError;
