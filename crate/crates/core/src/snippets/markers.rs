use std::collections::BTreeMap;
use std::ops::Range;

use thiserror::Error;

use super::comments::{scan, CommentSpan};
use super::syntax::LanguageSyntax;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkerKind {
    Begin,
    End,
}

/// A `begin #id` / `end #id` comment and the source line holding it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marker {
    pub kind: MarkerKind,
    pub name: String,
    pub comment: Range<usize>,
    /// Whole line including its terminating newline.
    pub line: Range<usize>,
}

/// A named region of a source text, delimited by marker lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnippetDef {
    pub name: String,
    /// First character after the begin marker's line.
    pub begin_offset: usize,
    /// The newline ending the last content line, i.e. the character just
    /// before the end marker's line. Exclusive, so the snippet text carries
    /// no trailing line break.
    pub end_offset: usize,
}

impl SnippetDef {
    pub fn range(&self) -> Range<usize> {
        self.begin_offset..self.end_offset
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SnippetError {
    #[error("snippet `{id}` is opened but never closed")]
    UnmatchedBegin { id: String },
    #[error("snippet `{id}` is closed without being opened")]
    UnmatchedEnd { id: String },
    #[error("snippet `{id}` is defined more than once")]
    DuplicateName { id: String },
}

fn parse_marker_body(body: &str) -> Option<(MarkerKind, String)> {
    let body = body.trim();
    let body = body.strip_prefix('*').unwrap_or(body);
    let mut words = body.split_whitespace();
    let kind = match words.next()? {
        "begin" => MarkerKind::Begin,
        "end" => MarkerKind::End,
        _ => return None,
    };
    let name = words.next()?.strip_prefix('#')?;
    if name.is_empty() || words.next().is_some() {
        return None;
    }
    Some((kind, name.to_owned()))
}

pub(crate) fn line_around(chars: &[char], range: &Range<usize>) -> Range<usize> {
    let start = chars[..range.start]
        .iter()
        .rposition(|&c| c == '\n')
        .map_or(0, |p| p + 1);
    let end = chars[range.end.min(chars.len())..]
        .iter()
        .position(|&c| c == '\n')
        .map_or(chars.len(), |p| range.end + p + 1);
    start..end
}

pub(crate) fn markers_in(chars: &[char], spans: &[CommentSpan]) -> Vec<Marker> {
    spans
        .iter()
        .filter(|s| s.terminated)
        .filter_map(|span| {
            let body: String = chars[span.body.clone()].iter().collect();
            let (kind, name) = parse_marker_body(&body)?;
            Some(Marker {
                kind,
                name,
                comment: span.range.clone(),
                line: line_around(chars, &span.range),
            })
        })
        .collect()
}

/// All marker comments of `text` in document order.
pub fn find_markers(text: &str, syntax: &LanguageSyntax) -> Vec<Marker> {
    let chars: Vec<char> = text.chars().collect();
    let scan = scan(&chars, syntax);
    markers_in(&chars, &scan.spans)
}

pub(crate) fn pair_markers(markers: &[Marker]) -> Result<Vec<SnippetDef>, SnippetError> {
    let mut open: BTreeMap<&str, &Marker> = BTreeMap::new();
    let mut seen: Vec<&str> = Vec::new();
    let mut out = Vec::new();
    for m in markers {
        match m.kind {
            MarkerKind::Begin => {
                if open.contains_key(m.name.as_str()) || seen.contains(&m.name.as_str()) {
                    return Err(SnippetError::DuplicateName { id: m.name.clone() });
                }
                open.insert(&m.name, m);
            }
            MarkerKind::End => {
                let Some(begin) = open.remove(m.name.as_str()) else {
                    return Err(SnippetError::UnmatchedEnd { id: m.name.clone() });
                };
                seen.push(&m.name);
                let begin_offset = begin.line.end;
                out.push(SnippetDef {
                    name: m.name.clone(),
                    begin_offset,
                    end_offset: m.line.start.saturating_sub(1).max(begin_offset),
                });
            }
        }
    }
    if let Some(first) = open.values().min_by_key(|m| m.comment.start) {
        return Err(SnippetError::UnmatchedBegin {
            id: first.name.clone(),
        });
    }
    out.sort_by_key(|s| (s.begin_offset, s.end_offset));
    Ok(out)
}

/// Extracts every snippet defined by marker comments. Snippets of different
/// names may overlap or interleave freely.
pub fn extract_snippets(
    text: &str,
    syntax: &LanguageSyntax,
) -> Result<Vec<SnippetDef>, SnippetError> {
    pair_markers(&find_markers(text, syntax))
}
