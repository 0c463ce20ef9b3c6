use std::collections::BTreeMap;
use std::path::PathBuf;

use super::deck::{normalize_path, CodeBlock, CodeSource, Deck};
use super::SlideError;
use crate::languages;
use crate::snippets::{extract_snippets, Selector};

/// Where referenced source files come from.
pub trait SourceProvider {
    fn read(&self, path: &str) -> Option<String>;
}

/// Files below a presentation directory.
pub struct DirSource(pub PathBuf);

impl SourceProvider for DirSource {
    fn read(&self, path: &str) -> Option<String> {
        std::fs::read_to_string(self.0.join(path)).ok()
    }
}

impl SourceProvider for BTreeMap<String, String> {
    fn read(&self, path: &str) -> Option<String> {
        self.get(path).cloned()
    }
}

/// A raw source text shared by one or more views.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Origin {
    /// Equals the id of the view showing the whole origin.
    pub id: String,
    pub path: Option<String>,
    pub language: Option<String>,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeRef {
    pub doc_id: String,
    pub origin: String,
    pub selector: Selector,
    pub language: Option<String>,
    pub classes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CodeRefs {
    pub origins: Vec<Origin>,
    /// One entry per code block, in document order.
    pub refs: Vec<CodeRef>,
}

/// Strips the blank first and last lines that surround inline code and the
/// indentation common to all non-blank lines.
pub fn dedent(text: &str) -> String {
    let mut lines: Vec<&str> = text.split('\n').collect();
    while lines.first().is_some_and(|l| l.trim().is_empty()) {
        lines.remove(0);
    }
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    let indent = lines
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start().len())
        .min()
        .unwrap_or(0);
    lines
        .iter()
        .map(|l| {
            if l.trim().is_empty() {
                ""
            } else {
                l.get(indent..).unwrap_or(l.trim_start())
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn inline_source(block: &CodeBlock) -> String {
    dedent(block.inline_text.as_deref().unwrap_or(""))
}

/// Resolves every code block to an origin text and a view selector.
/// `default_language` applies to inline blocks without a language class.
pub fn collect_code_refs(
    deck: &Deck,
    provider: &dyn SourceProvider,
    default_language: Option<&str>,
) -> Result<CodeRefs, SlideError> {
    let blocks = deck.code_blocks();
    let mut out = CodeRefs::default();
    let default_language = default_language
        .filter(|l| !l.is_empty())
        .map(str::to_owned);

    for block in &blocks {
        let (path, text, language) = match &block.src {
            CodeSource::Snippet(_) => continue,
            CodeSource::Inline => (
                None,
                inline_source(block),
                block.language.clone().or_else(|| default_language.clone()),
            ),
            CodeSource::File(p) => {
                let normalized =
                    normalize_path(p).ok_or_else(|| SlideError::MissingFile { path: p.clone() })?;
                let text = provider
                    .read(&normalized)
                    .ok_or_else(|| SlideError::MissingFile { path: p.clone() })?;
                (Some(normalized), text, block.language.clone())
            }
        };
        if out.origins.iter().any(|o| o.id == block.id) {
            continue;
        }
        out.origins.push(Origin {
            id: block.id.clone(),
            path,
            language,
            text,
        });
    }

    // Snippet name -> origin id.
    let mut defined: BTreeMap<String, String> = BTreeMap::new();
    for origin in &out.origins {
        let Some(lang) = origin.language.as_deref().and_then(languages::lookup) else {
            continue;
        };
        let snippets =
            extract_snippets(&origin.text, &lang.syntax).map_err(|error| SlideError::Snippets {
                origin: origin.id.clone(),
                error,
            })?;
        for s in snippets {
            if defined.insert(s.name.clone(), origin.id.clone()).is_some() {
                return Err(SlideError::AmbiguousSnippet { name: s.name });
            }
        }
    }

    for block in blocks {
        let (origin, selector) = match &block.src {
            CodeSource::Snippet(name) => {
                let origin = defined
                    .get(name)
                    .ok_or_else(|| SlideError::UnresolvedSnippet { name: name.clone() })?;
                (origin.clone(), Selector::Snippet(name.clone()))
            }
            _ => (block.id.clone(), Selector::Whole),
        };
        let language = out
            .origins
            .iter()
            .find(|o| o.id == origin)
            .and_then(|o| o.language.clone());
        out.refs.push(CodeRef {
            doc_id: block.id.clone(),
            origin,
            selector,
            language,
            classes: block.classes.clone(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slidedoc::parse_slides;

    #[test]
    fn dedent_inline_code() {
        let text = "\n    module Example where\n      fibs = 1\n  ";
        assert_eq!(dedent(text), "module Example where\n  fibs = 1");
        assert_eq!(dedent(""), "");
    }

    #[test]
    fn unresolved_snippet() {
        let deck = parse_slides("<section><code src=\"#nope\"></code></section>").unwrap();
        let err = collect_code_refs(&deck, &BTreeMap::new(), None).unwrap_err();
        assert_eq!(
            err,
            SlideError::UnresolvedSnippet {
                name: "nope".into()
            }
        );
    }

    #[test]
    fn missing_file() {
        let deck = parse_slides("<code src=\"a.scala\"></code>").unwrap();
        let err = collect_code_refs(&deck, &BTreeMap::new(), None).unwrap_err();
        assert_eq!(
            err,
            SlideError::MissingFile {
                path: "a.scala".into()
            }
        );
    }

    #[test]
    fn no_code_no_refs() {
        let deck = parse_slides("<section><h1>x</h1></section>").unwrap();
        assert_eq!(
            collect_code_refs(&deck, &BTreeMap::new(), None).unwrap(),
            CodeRefs::default()
        );
    }

    #[test]
    fn inline_markers_define_snippets() {
        let deck = parse_slides(
            "<code class=\"demo hidden\">\n// begin #s\nval x = 1\n// end #s\n</code>\
             <section><code src=\"#s\"></code></section>",
        )
        .unwrap();
        let refs = collect_code_refs(&deck, &BTreeMap::new(), None).unwrap();
        assert_eq!(refs.refs[1].origin, "inline-1");
        assert_eq!(refs.refs[1].language.as_deref(), Some("demo"));
    }
}
