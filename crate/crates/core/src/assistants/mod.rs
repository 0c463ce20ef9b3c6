//! Semantic assistants: the built-in demo analyzer, assistant specs with
//! prerequisite checks, and the newline-delimited JSON protocol spoken by
//! external assistant processes.

mod demo;
mod protocol;
mod spec;

pub use demo::{demo_analyze, KEYWORDS};
pub use protocol::{failure_annotation, serve_demo, AnnotationBatch, Request, Response};
pub use spec::{
    assistant_env, builtin_spec, check_prereqs, effective_env, find_executable, spec_for,
    AssistantSpec, Mode, PrereqStatus, Prerequisite, Probe, Report, DEFAULT_DEBOUNCE_MS,
    DEFAULT_TIMEOUT_MS,
};
