//! Presentation server: document hub, analysis pipeline, HTTP and
//! WebSocket front end.

pub mod engine;
pub mod http;
pub mod hub;
pub mod pipeline;
pub mod presentation;
pub mod run;
pub mod testkit;
pub mod wire;

pub use engine::{Engine, Outbound};
pub use hub::{Effect, Hub, Role};
pub use presentation::{load_presentation, LoadError, Presentation, SLIDES_FILE};
pub use run::{start, RunOptions, RunningServer, StartError};
