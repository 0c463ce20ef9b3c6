use std::path::{Path, PathBuf};

use cobra_core::config::{load_settings, LoadError as SettingsError, Settings};
use cobra_core::slidedoc::{
    collect_code_refs, parse_slides, CodeRefs, Deck, DirSource, SlideError,
};
use thiserror::Error;

pub const SLIDES_FILE: &str = "slides.html";

/// Everything read from a presentation directory at startup. Referenced
/// source files are read here once; afterwards the revision logs own them.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub dir: PathBuf,
    pub deck: Deck,
    pub code: CodeRefs,
    pub settings: Settings,
    /// Ignored configuration keys.
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{} does not contain {SLIDES_FILE}", .0.display())]
    MissingSlides(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Settings(#[from] SettingsError),
    #[error("{path}: {source}")]
    Slides {
        path: String,
        #[source]
        source: SlideError,
    },
}

pub fn load_presentation(dir: &Path) -> Result<Presentation, LoadError> {
    let slides_path = dir.join(SLIDES_FILE);
    let html = match std::fs::read_to_string(&slides_path) {
        Ok(html) => html,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(LoadError::MissingSlides(dir.to_path_buf()))
        }
        Err(source) => {
            return Err(LoadError::Io {
                path: slides_path.display().to_string(),
                source,
            })
        }
    };
    let resolved = load_settings(dir)?;
    let slides_err = |source| LoadError::Slides {
        path: slides_path.display().to_string(),
        source,
    };
    let deck = parse_slides(&html).map_err(slides_err)?;
    let code = collect_code_refs(
        &deck,
        &DirSource(dir.to_path_buf()),
        Some(resolved.settings.language.as_str()),
    )
    .map_err(slides_err)?;
    Ok(Presentation {
        dir: dir.to_path_buf(),
        deck,
        code,
        settings: resolved.settings,
        warnings: resolved.warnings,
    })
}
