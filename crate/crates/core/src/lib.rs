pub mod assistants;
pub mod config;
pub mod languages;
pub mod slidedoc;
pub mod snippets;
pub mod sync;
