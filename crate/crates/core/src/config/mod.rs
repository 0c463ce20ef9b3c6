//! `cobra.conf` handling: a HOCON subset parsed into a [`ConfigTree`],
//! resolved against the embedded reference configuration into
//! [`Settings`], and compared with [`diff_settings`] on reload.

mod parse;
mod settings;

pub use parse::{parse_config, parse_config_from, ConfigError, ConfigTree, Node, Scalar};
pub use settings::{
    diff_settings, load_settings, reference, resolve, AssistantOverride, LoadError, ResolveError,
    Resolved, SettingChange, Settings, CONFIG_FILE, REFERENCE_CONF, TRANSITIONS,
};
