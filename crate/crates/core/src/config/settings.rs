use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use super::parse::{parse_config_from, ConfigError, ConfigTree, Node, Scalar};
use crate::languages;

/// The defaults shipped with the server, in configuration syntax.
pub const REFERENCE_CONF: &str = include_str!("reference.conf");

/// File name of a presentation's configuration.
pub const CONFIG_FILE: &str = "cobra.conf";

pub const TRANSITIONS: &[&str] = &["none", "fade", "slide", "convex", "concave", "zoom"];

/// Per-language assistant overrides from `assistants.<language>.*`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AssistantOverride {
    pub command: Option<String>,
    pub debounce_ms: Option<u64>,
    pub timeout_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Settings {
    pub title: String,
    pub language: String,
    pub theme_slides: String,
    pub theme_code: String,
    pub binding_interface: String,
    pub binding_port: u16,
    pub reveal_transition: String,
    pub env: BTreeMap<String, String>,
    pub show_infos: bool,
    pub show_warnings: bool,
    pub assistants: BTreeMap<String, AssistantOverride>,
    pub mathjax: BTreeMap<String, String>,
}

impl Default for Settings {
    fn default() -> Self {
        resolve(&ConfigTree::new("defaults"), &reference())
            .expect("reference.conf resolves")
            .settings
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("`{path}`: expected {expected}, found {found}")]
    TypeMismatch {
        path: String,
        expected: &'static str,
        found: String,
    },
    #[error("`{path}`: {message}")]
    InvalidValue { path: String, message: String },
    #[error("no default for `{path}`")]
    MissingDefault { path: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolved {
    pub settings: Settings,
    /// Unknown keys that were ignored.
    pub warnings: Vec<String>,
}

/// The parsed reference configuration.
pub fn reference() -> ConfigTree {
    parse_config_from(REFERENCE_CONF, "defaults").expect("reference.conf parses")
}

const KNOWN: &[&str] = &[
    "title",
    "language",
    "theme.slides",
    "theme.code",
    "binding.interface",
    "binding.port",
    "reveal.transition",
    "display.infos",
    "display.warnings",
];

struct Reader<'a> {
    tree: &'a ConfigTree,
}

impl Reader<'_> {
    fn scalar(&self, path: &str) -> Result<&Scalar, ResolveError> {
        match self.tree.get(path) {
            Some(Node::Scalar(s)) => Ok(s),
            Some(Node::Object(_)) => Err(ResolveError::TypeMismatch {
                path: path.into(),
                expected: "a value",
                found: "object".into(),
            }),
            None => Err(ResolveError::MissingDefault { path: path.into() }),
        }
    }

    fn string(&self, path: &str) -> Result<String, ResolveError> {
        Ok(scalar_to_string(self.scalar(path)?))
    }

    fn int(&self, path: &str) -> Result<i64, ResolveError> {
        as_int(path, self.scalar(path)?)
    }

    fn bool(&self, path: &str) -> Result<bool, ResolveError> {
        match self.scalar(path)? {
            Scalar::Bool(b) => Ok(*b),
            Scalar::String(s) if s == "true" => Ok(true),
            Scalar::String(s) if s == "false" => Ok(false),
            other => Err(mismatch(path, "boolean", other)),
        }
    }
}

fn mismatch(path: &str, expected: &'static str, found: &Scalar) -> ResolveError {
    ResolveError::TypeMismatch {
        path: path.into(),
        expected,
        found: format!("{} {found}", found.type_name()),
    }
}

fn as_int(path: &str, s: &Scalar) -> Result<i64, ResolveError> {
    match s {
        Scalar::Int(i) => Ok(*i),
        Scalar::String(t) => t.trim().parse().map_err(|_| mismatch(path, "integer", s)),
        other => Err(mismatch(path, "integer", other)),
    }
}

fn scalar_to_string(s: &Scalar) -> String {
    match s {
        Scalar::String(s) => s.clone(),
        Scalar::Int(i) => i.to_string(),
        Scalar::Float(x) => x.to_string(),
        Scalar::Bool(b) => b.to_string(),
    }
}

fn string_map(tree: &ConfigTree, prefix: &str) -> BTreeMap<String, String> {
    tree.leaves()
        .into_iter()
        .filter_map(|(path, v)| {
            let key = path.strip_prefix(prefix)?.strip_prefix('.')?;
            Some((key.to_owned(), scalar_to_string(v)))
        })
        .collect()
}

fn non_negative(path: &str, s: &Scalar) -> Result<u64, ResolveError> {
    let v = as_int(path, s)?;
    u64::try_from(v).map_err(|_| ResolveError::InvalidValue {
        path: path.into(),
        message: format!("must not be negative, got {v}"),
    })
}

/// Overrides `defaults` with `user` path by path and reads typed settings.
pub fn resolve(user: &ConfigTree, defaults: &ConfigTree) -> Result<Resolved, ResolveError> {
    let merged = defaults.merged_with(user);
    let r = Reader { tree: &merged };

    let language = r.string("language")?;
    if !language.is_empty() && languages::lookup(&language).is_none() {
        return Err(ResolveError::InvalidValue {
            path: "language".into(),
            message: format!(
                "unknown language `{language}`; known: {}",
                languages::known_ids().join(", ")
            ),
        });
    }
    let port = r.int("binding.port")?;
    let binding_port = u16::try_from(port)
        .ok()
        .filter(|&p| p >= 1)
        .ok_or_else(|| ResolveError::InvalidValue {
            path: "binding.port".into(),
            message: format!("port must be between 1 and 65535, got {port}"),
        })?;
    let reveal_transition = r.string("reveal.transition")?;
    if !TRANSITIONS.contains(&reveal_transition.as_str()) {
        return Err(ResolveError::InvalidValue {
            path: "reveal.transition".into(),
            message: format!("expected one of {}", TRANSITIONS.join(", ")),
        });
    }

    let mut assistants: BTreeMap<String, AssistantOverride> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (path, value) in merged.leaves() {
        if KNOWN.contains(&path.as_str())
            || path.starts_with("env.")
            || path.starts_with("mathjax.")
        {
            continue;
        }
        if let Some(rest) = path.strip_prefix("assistants.") {
            if let Some((lang, field)) = rest.split_once('.') {
                let entry = assistants.entry(lang.to_owned()).or_default();
                match field {
                    "command" => {
                        entry.command = Some(scalar_to_string(value));
                        continue;
                    }
                    "debounce_ms" => {
                        entry.debounce_ms = Some(non_negative(&path, value)?);
                        continue;
                    }
                    "timeout_ms" => {
                        entry.timeout_ms = Some(non_negative(&path, value)?);
                        continue;
                    }
                    _ => {}
                }
            }
        }
        warnings.push(format!("unknown setting `{path}` ignored"));
    }
    assistants.retain(|_, a| *a != AssistantOverride::default());

    let settings = Settings {
        title: r.string("title")?,
        language,
        theme_slides: r.string("theme.slides")?,
        theme_code: r.string("theme.code")?,
        binding_interface: r.string("binding.interface")?,
        binding_port,
        reveal_transition,
        env: string_map(&merged, "env"),
        show_infos: r.bool("display.infos")?,
        show_warnings: r.bool("display.warnings")?,
        assistants,
        mathjax: string_map(&merged, "mathjax"),
    };
    Ok(Resolved { settings, warnings })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SettingChange {
    pub path: String,
    pub old: String,
    pub new: String,
    /// Whether the running server can apply the change.
    pub hot: bool,
}

fn flatten(s: &Settings) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("title".into(), s.title.clone());
    m.insert("language".into(), s.language.clone());
    m.insert("theme.slides".into(), s.theme_slides.clone());
    m.insert("theme.code".into(), s.theme_code.clone());
    m.insert("binding.interface".into(), s.binding_interface.clone());
    m.insert("binding.port".into(), s.binding_port.to_string());
    m.insert("reveal.transition".into(), s.reveal_transition.clone());
    m.insert("display.infos".into(), s.show_infos.to_string());
    m.insert("display.warnings".into(), s.show_warnings.to_string());
    for (k, v) in &s.env {
        m.insert(format!("env.{k}"), v.clone());
    }
    for (k, v) in &s.mathjax {
        m.insert(format!("mathjax.{k}"), v.clone());
    }
    for (lang, a) in &s.assistants {
        if let Some(c) = &a.command {
            m.insert(format!("assistants.{lang}.command"), c.clone());
        }
        if let Some(d) = a.debounce_ms {
            m.insert(format!("assistants.{lang}.debounce_ms"), d.to_string());
        }
        if let Some(t) = a.timeout_ms {
            m.insert(format!("assistants.{lang}.timeout_ms"), t.to_string());
        }
    }
    m
}

/// Field-by-field comparison. Values present on one side only compare
/// against the empty string.
pub fn diff_settings(old: &Settings, new: &Settings) -> Vec<SettingChange> {
    let a = flatten(old);
    let b = flatten(new);
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .filter_map(|k| {
            let o = a.get(k).cloned().unwrap_or_default();
            let n = b.get(k).cloned().unwrap_or_default();
            (o != n).then(|| SettingChange {
                path: k.clone(),
                old: o,
                new: n,
                hot: k != "binding.interface",
            })
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse {
        path: String,
        #[source]
        source: ConfigError,
    },
    #[error("{path}: {source}")]
    Resolve {
        path: String,
        #[source]
        source: ResolveError,
    },
}

/// Reads `cobra.conf` from `dir` (defaults only when it does not exist).
pub fn load_settings(dir: &Path) -> Result<Resolved, LoadError> {
    let path = dir.join(CONFIG_FILE);
    let display = path.display().to_string();
    let user = match std::fs::read_to_string(&path) {
        Ok(text) => parse_config_from(&text, &display).map_err(|source| LoadError::Parse {
            path: display.clone(),
            source,
        })?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => ConfigTree::new("defaults"),
        Err(source) => {
            return Err(LoadError::Io {
                path: display,
                source,
            })
        }
    };
    resolve(&user, &reference()).map_err(|source| LoadError::Resolve {
        path: display,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn resolve_text(text: &str) -> Result<Resolved, ResolveError> {
        resolve(&parse_config(text).unwrap(), &reference())
    }

    #[test]
    fn defaults() {
        let s = Settings::default();
        assert_eq!(s.binding_interface, "localhost");
        assert_eq!(s.binding_port, 8080);
        assert_eq!(s.title, "Untitled Presentation");
        assert_eq!(s.reveal_transition, "slide");
        assert!(s.show_infos && s.show_warnings);
        assert!(s.env.is_empty());
    }

    #[test]
    fn single_override() {
        let r = resolve_text("binding.port = 9090").unwrap();
        assert_eq!(r.settings.binding_port, 9090);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn non_numeric_port_is_a_type_mismatch() {
        let err = resolve_text("binding.port = \"x\"").unwrap_err();
        assert!(
            matches!(err, ResolveError::TypeMismatch { ref path, .. } if path == "binding.port")
        );
        assert!(resolve_text("binding.port = \"9000\"").is_ok());
    }

    #[test]
    fn invalid_values() {
        assert!(matches!(
            resolve_text("binding.port = 70000"),
            Err(ResolveError::InvalidValue { .. })
        ));
        assert!(matches!(
            resolve_text("language = klingon"),
            Err(ResolveError::InvalidValue { .. })
        ));
        assert!(matches!(
            resolve_text("reveal.transition = spin"),
            Err(ResolveError::InvalidValue { .. })
        ));
    }

    #[test]
    fn env_passes_through_and_unknown_keys_warn() {
        let r = resolve_text("env.isabelle_home = /opt/isabelle\ncolour = red\n").unwrap();
        assert_eq!(r.settings.env["isabelle_home"], "/opt/isabelle");
        assert_eq!(
            r.warnings,
            vec!["unknown setting `colour` ignored".to_string()]
        );
    }

    #[test]
    fn assistant_overrides() {
        let r = resolve_text("assistants.demo { command = \"x --y\", debounce_ms = 50 }").unwrap();
        let a = &r.settings.assistants["demo"];
        assert_eq!(a.command.as_deref(), Some("x --y"));
        assert_eq!(a.debounce_ms, Some(50));
        assert!(resolve_text("assistants.demo.debounce_ms = -1").is_err());
    }

    #[test]
    fn diff() {
        let a = Settings::default();
        assert!(diff_settings(&a, &a).is_empty());
        let mut b = a.clone();
        b.binding_port = 9090;
        assert_eq!(
            diff_settings(&a, &b),
            vec![SettingChange {
                path: "binding.port".into(),
                old: "8080".into(),
                new: "9090".into(),
                hot: true
            }]
        );
        let mut c = a.clone();
        c.binding_interface = "0.0.0.0".into();
        let d = diff_settings(&a, &c);
        assert_eq!(d.len(), 1);
        assert!(!d[0].hot);
    }
}
