//! Operational transformation and per-document revision history.

mod annotation;
pub mod client;
mod log;
mod operation;

pub use annotation::{transform_annotations, Annotation, AnnotationKind};
pub use client::{ClientDoc, Outgoing};
pub use log::{ClientId, Committed, Revision, RevisionLog, SyncError};
pub use operation::{Component, Operation, OtError};
