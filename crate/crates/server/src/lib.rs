//! HTTP service, persistence and command-line tooling for the post-editing
//! workbench.
//!
//! - [`store`]: project state and the events that change it.
//! - [`journal`]: durable event journal with snapshots.
//! - [`workbench`]: the facade both the API and the CLI go through.
//! - [`api`]: axum router.
//! - [`report`]: analysis reports over downloaded logs.

pub mod api;
pub mod error;
pub mod journal;
pub mod report;
pub mod store;
pub mod workbench;

pub use error::{ServiceError, ServiceResult};
pub use store::{PostEdit, SegmentRow};
pub use workbench::Workbench;
