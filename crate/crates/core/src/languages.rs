//! Registry of the languages snippets can be written in.

use crate::snippets::LanguageSyntax;

#[derive(Debug, PartialEq, Eq)]
pub struct Language {
    pub id: &'static str,
    pub extensions: &'static [&'static str],
    pub syntax: LanguageSyntax,
}

pub static LANGUAGES: &[Language] = &[
    Language {
        id: "demo",
        extensions: &["demo"],
        syntax: LanguageSyntax::SCALA,
    },
    Language {
        id: "isabelle",
        extensions: &["thy"],
        syntax: LanguageSyntax::ISABELLE,
    },
    Language {
        id: "scala",
        extensions: &["scala", "sc"],
        syntax: LanguageSyntax::SCALA,
    },
    Language {
        id: "haskell",
        extensions: &["hs", "lhs"],
        syntax: LanguageSyntax::HASKELL,
    },
];

pub fn lookup(id: &str) -> Option<&'static Language> {
    LANGUAGES.iter().find(|l| l.id == id)
}

pub fn by_extension(ext: &str) -> Option<&'static Language> {
    LANGUAGES
        .iter()
        .find(|l| l.extensions.iter().any(|e| e.eq_ignore_ascii_case(ext)))
}

/// Language implied by a file name's extension.
pub fn for_path(path: &str) -> Option<&'static Language> {
    let file = path.rsplit('/').next()?;
    let (_, ext) = file.rsplit_once('.')?;
    by_extension(ext)
}

pub fn known_ids() -> Vec<&'static str> {
    LANGUAGES.iter().map(|l| l.id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_lookup() {
        assert_eq!(for_path("src/Seq.thy").unwrap().id, "isabelle");
        assert_eq!(for_path("Main.HS").unwrap().id, "haskell");
        assert!(for_path("README").is_none());
        assert!(for_path("dir.thy/file").is_none());
    }
}
