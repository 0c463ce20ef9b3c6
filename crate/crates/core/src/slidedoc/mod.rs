//! The `slides.html` format: a headerless HTML fragment whose top-level
//! `section` elements are slides and whose `code` elements become
//! synchronised documents.
//!
//! [`parse_slides`] builds a [`Deck`], [`collect_code_refs`] resolves code
//! blocks to source origins and snippet views, and [`render_boilerplate`]
//! produces the page served to browsers.

mod deck;
mod math;
mod refs;
mod render;
mod tokenizer;

use thiserror::Error;

use crate::snippets::SnippetError;

pub use deck::{
    normalize_path, parse_slides, CodeBlock, CodeSource, Deck, Element, Loose, Node, Slide,
    BEHAVIOURAL_CLASSES, VOID_ELEMENTS,
};
pub use math::{join_math, split_math, MathSpan, TextSpan};
pub use refs::{collect_code_refs, dedent, CodeRef, CodeRefs, DirSource, Origin, SourceProvider};
pub use render::{
    boot_config, boot_config_with, escape_html, render_boilerplate, render_deck, render_page,
    slides_markup, FragmentVariants, PROTOCOL_VERSION, SLIDES_BEGIN, SLIDES_END,
};
pub use tokenizer::Attr;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SlideError {
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: {message}")]
    Structure {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("no snippet named `{name}` is defined")]
    UnresolvedSnippet { name: String },
    #[error("snippet `{name}` is defined in more than one source")]
    AmbiguousSnippet { name: String },
    #[error("source file `{path}` not found")]
    MissingFile { path: String },
    #[error("in `{origin}`: {error}")]
    Snippets { origin: String, error: SnippetError },
}
