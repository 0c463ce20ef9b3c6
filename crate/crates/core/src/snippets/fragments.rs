use std::ops::Range;

use thiserror::Error;

use super::comments::{scan, CommentKind, CommentSpan};
use super::syntax::LanguageSyntax;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FragmentKind {
    /// Two or more variants stepped through during the presentation.
    Staged,
    /// A single live variant that is highlighted when stepped to.
    Selection,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variant {
    pub text: String,
    /// The variant outside comments, i.e. the one the source file means.
    pub live: bool,
    /// Raw character range of `text`.
    pub range: Range<usize>,
}

/// A variant region written as `open-comment live close-comment`, for
/// example `/*(*/???/*|3 * 7)*/` or `/*(???|*/3 * 7/*)*/`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub whole_range: Range<usize>,
    pub open_comment: Range<usize>,
    pub close_comment: Range<usize>,
    pub variants: Vec<Variant>,
    pub kind: FragmentKind,
}

impl Fragment {
    pub fn live_index(&self) -> usize {
        self.variants
            .iter()
            .position(|v| v.live)
            .expect("a fragment always has a live variant")
    }

    pub fn live_range(&self) -> Range<usize> {
        self.variants[self.live_index()].range.clone()
    }

    pub fn variant_texts(&self) -> Vec<&str> {
        self.variants.iter().map(|v| v.text.as_str()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("malformed fragment at offset {offset}: {reason}")]
pub struct MalformedFragment {
    pub offset: usize,
    pub reason: String,
}

enum Role {
    /// `(` followed by zero or more `variant|`.
    Open,
    /// `|variant|...|variant)` or a bare `)`.
    Close,
    /// `|...|`: would start a second live segment.
    Pipe,
    Plain,
}

fn classify(body: &[char]) -> Role {
    match (body.first(), body.last()) {
        (Some('('), _) if body.len() == 1 => Role::Open,
        (Some('('), Some('|')) => Role::Open,
        (Some(')'), _) if body.len() == 1 => Role::Close,
        (Some('|'), Some(')')) => Role::Close,
        (Some('|'), Some('|')) => Role::Pipe,
        _ => Role::Plain,
    }
}

/// Splits `chars[range]` on `|` into variants (all dead).
fn split_variants(chars: &[char], range: Range<usize>) -> Vec<Variant> {
    let mut out = Vec::new();
    let mut start = range.start;
    for i in range.clone() {
        if chars[i] == '|' {
            out.push(dead_variant(chars, start..i));
            start = i + 1;
        }
    }
    out.push(dead_variant(chars, start..range.end));
    out
}

fn dead_variant(chars: &[char], range: Range<usize>) -> Variant {
    Variant {
        text: chars[range.clone()].iter().collect(),
        live: false,
        range,
    }
}

fn build(chars: &[char], open: &CommentSpan, close: &CommentSpan) -> Fragment {
    let mut variants = Vec::new();
    // Opening body is `(` then `v1|v2|...|`; the pipes end each variant.
    let open_body = open.body.clone();
    if open_body.len() > 1 {
        variants.extend(split_variants(
            chars,
            open_body.start + 1..open_body.end - 1,
        ));
    }
    let live = open.range.end..close.range.start;
    variants.push(Variant {
        text: chars[live.clone()].iter().collect(),
        live: true,
        range: live,
    });
    // Closing body is `)` or `|v1|...|vn)`.
    let close_body = close.body.clone();
    if close_body.len() > 1 {
        variants.extend(split_variants(
            chars,
            close_body.start + 1..close_body.end - 1,
        ));
    }
    let kind = if variants.len() >= 2 {
        FragmentKind::Staged
    } else {
        FragmentKind::Selection
    };
    Fragment {
        whole_range: open.range.start..close.range.end,
        open_comment: open.range.clone(),
        close_comment: close.range.clone(),
        variants,
        kind,
    }
}

/// Scans for fragments, collecting malformed constructs instead of
/// stopping at the first one.
pub(crate) fn scan_fragments(
    chars: &[char],
    spans: &[CommentSpan],
) -> (Vec<Fragment>, Vec<MalformedFragment>) {
    let mut fragments = Vec::new();
    let mut errors = Vec::new();
    let mut open: Option<&CommentSpan> = None;
    for span in spans
        .iter()
        .filter(|s| s.kind == CommentKind::Block && s.terminated)
    {
        match classify(&chars[span.body.clone()]) {
            Role::Plain => {}
            Role::Open => {
                if let Some(prev) = open.replace(span) {
                    errors.push(MalformedFragment {
                        offset: prev.range.start,
                        reason: "fragment opened before the previous one was closed".into(),
                    });
                }
            }
            Role::Close => {
                if let Some(o) = open.take() {
                    fragments.push(build(chars, o, span));
                }
            }
            Role::Pipe => {
                if let Some(o) = open.take() {
                    errors.push(MalformedFragment {
                        offset: o.range.start,
                        reason: "fragment has two live segments".into(),
                    });
                }
            }
        }
    }
    if let Some(o) = open {
        errors.push(MalformedFragment {
            offset: o.range.start,
            reason: "unclosed fragment".into(),
        });
    }
    (fragments, errors)
}

/// Parses every variant fragment of `text`.
pub fn parse_fragments(
    text: &str,
    syntax: &LanguageSyntax,
) -> Result<Vec<Fragment>, MalformedFragment> {
    let chars: Vec<char> = text.chars().collect();
    let comments = scan(&chars, syntax);
    let (fragments, mut errors) = scan_fragments(&chars, &comments.spans);
    if errors.is_empty() {
        Ok(fragments)
    } else {
        errors.sort_by_key(|e| e.offset);
        Err(errors.remove(0))
    }
}
