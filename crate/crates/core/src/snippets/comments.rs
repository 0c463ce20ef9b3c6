use std::ops::Range;

use super::syntax::LanguageSyntax;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommentKind {
    Block,
    Line,
}

/// A comment in character offsets. `body` excludes the comment tokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommentSpan {
    pub range: Range<usize>,
    pub body: Range<usize>,
    pub kind: CommentKind,
    pub terminated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScanDiagnostic {
    UnterminatedComment { offset: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommentScan {
    pub spans: Vec<CommentSpan>,
    pub diagnostics: Vec<ScanDiagnostic>,
}

/// Finds the maximal comment spans of `text`, skipping double-quoted string
/// literals. Offsets are in characters.
pub fn comment_spans(text: &str, syntax: &LanguageSyntax) -> CommentScan {
    let chars: Vec<char> = text.chars().collect();
    scan(&chars, syntax)
}

fn starts_with(chars: &[char], at: usize, token: &str) -> bool {
    token
        .chars()
        .enumerate()
        .all(|(k, c)| chars.get(at + k) == Some(&c))
}

pub(crate) fn scan(chars: &[char], syntax: &LanguageSyntax) -> CommentScan {
    let open_len = syntax.block_open.chars().count();
    let close_len = syntax.block_close.chars().count();
    let mut out = CommentScan::default();
    let n = chars.len();
    let mut i = 0;
    while i < n {
        if starts_with(chars, i, syntax.block_open) {
            let start = i;
            let mut depth = 1;
            let mut j = i + open_len;
            let mut end = None;
            while j < n {
                // `(*)` inside a comment is a body character followed by the
                // closing token, not a nested opening.
                if syntax.nesting
                    && starts_with(chars, j, syntax.block_open)
                    && starts_with(chars, j + open_len - 1, syntax.block_close)
                {
                    j += 1;
                } else if starts_with(chars, j, syntax.block_close) {
                    depth -= 1;
                    j += close_len;
                    if depth == 0 {
                        end = Some(j);
                        break;
                    }
                } else if syntax.nesting && starts_with(chars, j, syntax.block_open) {
                    depth += 1;
                    j += open_len;
                } else {
                    j += 1;
                }
            }
            match end {
                Some(end) => {
                    out.spans.push(CommentSpan {
                        range: start..end,
                        body: start + open_len..end - close_len,
                        kind: CommentKind::Block,
                        terminated: true,
                    });
                    i = end;
                }
                None => {
                    out.diagnostics
                        .push(ScanDiagnostic::UnterminatedComment { offset: start });
                    out.spans.push(CommentSpan {
                        range: start..n,
                        body: (start + open_len).min(n)..n,
                        kind: CommentKind::Block,
                        terminated: false,
                    });
                    i = n;
                }
            }
        } else if syntax
            .line_comment
            .is_some_and(|token| starts_with(chars, i, token))
        {
            let token_len = syntax.line_comment.unwrap_or_default().chars().count();
            let end = chars[i..]
                .iter()
                .position(|&c| c == '\n')
                .map_or(n, |p| i + p);
            out.spans.push(CommentSpan {
                range: i..end,
                body: i + token_len..end,
                kind: CommentKind::Line,
                terminated: true,
            });
            i = end;
        } else if chars[i] == '"' {
            i = skip_string(chars, i);
        } else {
            i += 1;
        }
    }
    out
}

/// Index just past the string literal starting at `start`.
pub(crate) fn skip_string(chars: &[char], start: usize) -> usize {
    let mut j = start + 1;
    while j < chars.len() {
        match chars[j] {
            '\\' => j += 2,
            '"' => return j + 1,
            _ => j += 1,
        }
    }
    chars.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranges(text: &str, syntax: &LanguageSyntax) -> Vec<Range<usize>> {
        comment_spans(text, syntax)
            .spans
            .into_iter()
            .map(|s| s.range)
            .collect()
    }

    #[test]
    fn isabelle_comments_nest() {
        let text = "(* a (* b *) c *)";
        assert_eq!(ranges(text, &LanguageSyntax::ISABELLE), vec![0..17]);
    }

    #[test]
    fn scala_comments_are_separate() {
        let text = "/* a */ x /* b */";
        assert_eq!(ranges(text, &LanguageSyntax::SCALA), vec![0..7, 10..17]);
    }

    #[test]
    fn strings_hide_comment_tokens() {
        let text = r#""/*" /* c */"#;
        assert_eq!(ranges(text, &LanguageSyntax::SCALA), vec![5..12]);
        let escaped = r#""a\"/*" x"#;
        assert!(ranges(escaped, &LanguageSyntax::SCALA).is_empty());
    }

    #[test]
    fn fragment_scaffolding_in_isabelle() {
        let text = "(*(*)A(*)*)";
        let scan = comment_spans(text, &LanguageSyntax::ISABELLE);
        assert!(scan.diagnostics.is_empty());
        let spans: Vec<_> = scan
            .spans
            .iter()
            .map(|s| (s.range.clone(), s.body.clone()))
            .collect();
        assert_eq!(spans, vec![(0..5, 2..3), (6..11, 8..9)]);
    }

    #[test]
    fn line_comments_stop_at_newline() {
        let text = "x -- note\ny";
        let scan = comment_spans(text, &LanguageSyntax::HASKELL);
        assert_eq!(scan.spans[0].range, 2..9);
        assert_eq!(scan.spans[0].kind, CommentKind::Line);
    }

    #[test]
    fn unterminated_comment_is_reported() {
        let scan = comment_spans("a /* b", &LanguageSyntax::SCALA);
        assert_eq!(
            scan.diagnostics,
            vec![ScanDiagnostic::UnterminatedComment { offset: 2 }]
        );
        assert_eq!(scan.spans[0].range, 2..6);
        assert!(!scan.spans[0].terminated);
    }

    #[test]
    fn offsets_are_characters() {
        let text = "λ (* μ *)";
        assert_eq!(ranges(text, &LanguageSyntax::ISABELLE), vec![2..9]);
    }
}
