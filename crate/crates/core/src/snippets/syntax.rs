/// Comment tokens of a source language.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LanguageSyntax {
    pub block_open: &'static str,
    pub block_close: &'static str,
    pub line_comment: Option<&'static str>,
    /// Block comments nest (`(* a (* b *) c *)` is a single comment).
    pub nesting: bool,
}

impl LanguageSyntax {
    pub const ISABELLE: LanguageSyntax = LanguageSyntax {
        block_open: "(*",
        block_close: "*)",
        line_comment: None,
        nesting: true,
    };

    pub const SCALA: LanguageSyntax = LanguageSyntax {
        block_open: "/*",
        block_close: "*/",
        line_comment: Some("//"),
        nesting: false,
    };

    pub const HASKELL: LanguageSyntax = LanguageSyntax {
        block_open: "{-",
        block_close: "-}",
        line_comment: Some("--"),
        nesting: true,
    };
}
