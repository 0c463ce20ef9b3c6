//! Command implementations behind the `cobra` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use cobra_core::assistants::{check_prereqs, effective_env, spec_for, Mode};
use cobra_core::config::{load_settings, Settings, CONFIG_FILE};
use cobra_core::languages;
use cobra_server::{load_presentation, LoadError, StartError, SLIDES_FILE};
use thiserror::Error;

pub const STARTER_CONF: &str = r#"# Settings for this presentation. Every key is optional; the commented
# lines show the defaults. Changes apply while the server is running.

# title = "Untitled Presentation"

# Language of inline <code> elements without a language class.
# language = ""

# theme {
#   slides = white     # white | black
#   code = default     # default | dark
# }

# Where the server listens. "localhost" keeps the audience read-only;
# bind to 0.0.0.0 to let others connect and edit.
# binding {
#   interface = localhost
#   port = 8080
# }

# reveal.transition = slide

# display {
#   infos = true
#   warnings = true
# }

# Environment for the language assistants, e.g.
# env.isabelle_home = "/opt/Isabelle2016"

# Replace a language's assistant command or tune its timing.
# assistants.scala {
#   command = "scalac -Ystop-after:typer -cobra-assistant"
#   debounce_ms = 200
#   timeout_ms = 10000
# }
"#;

pub const STARTER_SLIDES: &str = r#"<section>
  <h1>Untitled Presentation</h1>
  <p>Use the arrow keys to move on; press <kbd>?</kbd> for all keys.</p>
</section>
<section>
  <h2>Live Code</h2>
  <p>Edit the snippet below. Every connected browser sees the change,
  and the next step replaces the question marks.</p>
  <code class="demo">
    val answer = /*(*/???/*|6 * 7)*/
    // TODO: explain why
    def twice(f: Int => Int) = (x: Int) => f(f(x))
  </code>
</section>
"#;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{} already exists", .0.display())]
    AlreadyExists(PathBuf),
    #[error("unknown language `{name}`; known languages: {}", .known.join(", "))]
    UnknownLanguage { name: String, known: Vec<String> },
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Start(#[from] StartError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for problems with the input or environment the user can fix by
    /// changing arguments or files, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::AlreadyExists(_) | CliError::UnknownLanguage { .. } => 2,
            CliError::Load(LoadError::Io { .. }) => 1,
            CliError::Load(_) => 2,
            CliError::Start(
                StartError::AddrInUse { .. } | StartError::Resolve { .. } | StartError::Hub(_),
            ) => 2,
            CliError::Start(StartError::Bind { .. }) => 1,
            CliError::Io { .. } => 1,
        }
    }
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// Creates `<name>/cobra.conf` and `<name>/slides.html`.
pub fn cmd_new(name: &Path) -> Result<PathBuf, CliError> {
    if name.exists() {
        return Err(CliError::AlreadyExists(name.to_path_buf()));
    }
    std::fs::create_dir_all(name).map_err(io(format!("creating {}", name.display())))?;
    for (file, body) in [(CONFIG_FILE, STARTER_CONF), (SLIDES_FILE, STARTER_SLIDES)] {
        let path = name.join(file);
        std::fs::write(&path, body).map_err(io(format!("writing {}", path.display())))?;
    }
    Ok(name.to_path_buf())
}

/// Prints the prerequisite report for `language`. Returns whether every
/// prerequisite is met.
pub fn cmd_configure(language: &str, dir: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    let settings = load_settings(dir)
        .map(|r| r.settings)
        .unwrap_or_else(|_| Settings::default());
    let Some(spec) = spec_for(language, &settings) else {
        return Err(CliError::UnknownLanguage {
            name: language.to_owned(),
            known: languages::known_ids()
                .into_iter()
                .map(str::to_owned)
                .collect(),
        });
    };
    let report = check_prereqs(&spec, &effective_env(&settings));
    let w =
        |out: &mut dyn Write, line: String| writeln!(out, "{line}").map_err(io("writing report"));
    match &spec.mode {
        Mode::Builtin => w(
            out,
            format!("{language}: built-in assistant, nothing to install"),
        )?,
        Mode::External { command, args, .. } => w(
            out,
            format!(
                "{language}: assistant command `{command} {}`",
                args.join(" ")
            ),
        )?,
    }
    for s in &report.statuses {
        let mark = if s.ok { "ok" } else { "missing" };
        w(out, format!("  [{mark}] {}", s.name))?;
        if let Some(advice) = &s.advice {
            w(out, format!("         {advice}"))?;
        }
    }
    w(
        out,
        if report.ok {
            format!("{language} is ready")
        } else {
            format!("{language} is not ready; presentations fall back to the built-in analyzer")
        },
    )?;
    Ok(report.ok)
}

/// Loads the presentation eagerly so input errors surface before binding.
pub fn check_presentation(dir: &Path) -> Result<cobra_server::Presentation, CliError> {
    Ok(load_presentation(dir)?)
}
