use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Settings;
use crate::languages;

pub const DEFAULT_DEBOUNCE_MS: u64 = 200;
pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    Builtin,
    External {
        command: String,
        args: Vec<String>,
        env: BTreeMap<String, String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Probe {
    EnvVar(String),
    Executable(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prerequisite {
    pub name: String,
    pub probe: Probe,
    pub advice: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssistantSpec {
    pub language: String,
    pub mode: Mode,
    pub debounce_ms: u64,
    pub timeout_ms: u64,
    pub prerequisites: Vec<Prerequisite>,
}

fn executable(name: &str, advice: &str) -> Prerequisite {
    Prerequisite {
        name: name.into(),
        probe: Probe::Executable(name.into()),
        advice: advice.into(),
    }
}

fn external(command: &str, args: &[&str]) -> Mode {
    Mode::External {
        command: command.into(),
        args: args.iter().map(|s| s.to_string()).collect(),
        env: BTreeMap::new(),
    }
}

/// The shipped assistant for a language.
pub fn builtin_spec(language: &str) -> Option<AssistantSpec> {
    languages::lookup(language)?;
    let (mode, prerequisites) = match language {
        "isabelle" => (
            external("isabelle", &["cobra_assistant"]),
            vec![
                Prerequisite {
                    name: "ISABELLE_HOME".into(),
                    probe: Probe::EnvVar("ISABELLE_HOME".into()),
                    advice:
                        "set env.isabelle_home in cobra.conf to the Isabelle installation directory"
                            .into(),
                },
                executable(
                    "isabelle",
                    "install Isabelle and put its bin directory on PATH",
                ),
            ],
        ),
        "scala" => (
            external("scalac", &["-Ystop-after:typer", "-cobra-assistant"]),
            vec![executable(
                "scalac",
                "install the Scala compiler and put scalac on PATH",
            )],
        ),
        "haskell" => (
            external("ghc-mod", &["cobra-assistant"]),
            vec![executable(
                "ghc-mod",
                "install ghc-mod (cabal install ghc-mod) and put it on PATH",
            )],
        ),
        _ => (Mode::Builtin, Vec::new()),
    };
    Some(AssistantSpec {
        language: language.into(),
        mode,
        debounce_ms: DEFAULT_DEBOUNCE_MS,
        timeout_ms: DEFAULT_TIMEOUT_MS,
        prerequisites,
    })
}

/// Assistant environment from `env.*` settings, keys uppercased.
pub fn assistant_env(settings: &Settings) -> BTreeMap<String, String> {
    settings
        .env
        .iter()
        .map(|(k, v)| (k.to_uppercase(), v.clone()))
        .collect()
}

/// The spec for `language` after applying `assistants.<language>.*`
/// settings and the `env.*` variables.
pub fn spec_for(language: &str, settings: &Settings) -> Option<AssistantSpec> {
    let mut spec = builtin_spec(language)?;
    if let Some(o) = settings.assistants.get(language) {
        if let Some(cmd) = o.command.as_deref() {
            let mut words = cmd.split_whitespace().map(str::to_owned);
            if let Some(command) = words.next() {
                spec.prerequisites = vec![executable(
                    &command,
                    "check assistants.<language>.command in cobra.conf",
                )];
                spec.mode = Mode::External {
                    command,
                    args: words.collect(),
                    env: BTreeMap::new(),
                };
            }
        }
        if let Some(d) = o.debounce_ms {
            spec.debounce_ms = d;
        }
        if let Some(t) = o.timeout_ms {
            spec.timeout_ms = t;
        }
    }
    if let Mode::External { env, .. } = &mut spec.mode {
        *env = assistant_env(settings);
    }
    Some(spec)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrereqStatus {
    pub name: String,
    pub ok: bool,
    /// Present when the prerequisite is missing.
    pub advice: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub language: String,
    pub statuses: Vec<PrereqStatus>,
    pub ok: bool,
}

#[cfg(unix)]
fn is_executable(path: &Path) -> bool {
    use std::os::unix::fs::PermissionsExt;
    path.metadata()
        .is_ok_and(|m| m.is_file() && m.permissions().mode() & 0o111 != 0)
}

#[cfg(not(unix))]
fn is_executable(path: &Path) -> bool {
    path.is_file()
}

/// Locates `command` the way a shell would, using `PATH` from `env`.
pub fn find_executable(command: &str, env: &BTreeMap<String, String>) -> Option<PathBuf> {
    if command.contains('/') {
        let p = PathBuf::from(command);
        return is_executable(&p).then_some(p);
    }
    let path = env.get("PATH")?;
    std::env::split_paths(path)
        .map(|dir| dir.join(command))
        .find(|candidate| is_executable(candidate))
}

/// Checks every prerequisite against `env` (a full process environment).
pub fn check_prereqs(spec: &AssistantSpec, env: &BTreeMap<String, String>) -> Report {
    let statuses: Vec<PrereqStatus> = spec
        .prerequisites
        .iter()
        .map(|p| {
            let ok = match &p.probe {
                Probe::EnvVar(name) => env.get(name).is_some_and(|v| !v.is_empty()),
                Probe::Executable(cmd) => find_executable(cmd, env).is_some(),
            };
            PrereqStatus {
                name: p.name.clone(),
                ok,
                advice: (!ok).then(|| p.advice.clone()),
            }
        })
        .collect();
    Report {
        language: spec.language.clone(),
        ok: statuses.iter().all(|s| s.ok),
        statuses,
    }
}

/// The current process environment overlaid with the assistant variables.
pub fn effective_env(settings: &Settings) -> BTreeMap<String, String> {
    let mut env: BTreeMap<String, String> = std::env::vars().collect();
    env.extend(assistant_env(settings));
    env
}
