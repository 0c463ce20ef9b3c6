use crate::snippets::{comment_spans, LanguageSyntax};
use crate::sync::Annotation;

pub const KEYWORDS: &[&str] = &[
    "lemma", "fun", "datatype", "val", "module", "where", "by", "apply", "done", "oops",
];

const SYMBOL_CHARS: &str = "!#$%&*+-./:<=>?@^|~\\";

fn skip_string(chars: &[char], start: usize) -> usize {
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

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn todo_warnings(chars: &[char], body: std::ops::Range<usize>, out: &mut Vec<Annotation>) {
    let mut i = body.start;
    while i + 4 <= body.end {
        let bounded_left = i == body.start || !is_word_char(chars[i - 1]);
        let bounded_right = i + 4 == body.end || !is_word_char(chars[i + 4]);
        if chars[i..i + 4] == ['T', 'O', 'D', 'O'] && bounded_left && bounded_right {
            out.push(Annotation::warning(i, i + 4, "TODO"));
            i += 4;
        } else {
            i += 1;
        }
    }
}

/// The built-in assistant: keyword, number, string and comment tokens,
/// holes, unbalanced brackets and TODO markers. Output is sorted.
///
/// A closing bracket that does not match the innermost open bracket is
/// reported and leaves the open bracket in place.
pub fn demo_analyze(text: &str, syntax: &LanguageSyntax) -> Vec<Annotation> {
    let chars: Vec<char> = text.chars().collect();
    let comments = comment_spans(text, syntax).spans;
    let mut out = Vec::new();
    let mut brackets: Vec<(char, usize)> = Vec::new();
    let mut next_comment = comments.iter().peekable();
    let mut i = 0;
    while i < chars.len() {
        if let Some(c) = next_comment.next_if(|c| c.range.start == i) {
            out.push(Annotation::token(c.range.start, c.range.end, "comment"));
            todo_warnings(&chars, c.body.clone(), &mut out);
            i = c.range.end;
            continue;
        }
        let c = chars[i];
        let start = i;
        if c == '"' {
            i = skip_string(&chars, i);
            out.push(Annotation::token(start, i, "string"));
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push(Annotation::token(start, i, "number"));
        } else if is_word_char(c) {
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if KEYWORDS.contains(&word.as_str()) {
                out.push(Annotation::token(start, i, "keyword"));
            } else if word == "undefined" {
                out.push(Annotation::info(start, i, "hole"));
            }
        } else if SYMBOL_CHARS.contains(c) {
            // Stop at the start of a comment so `???/*` still ends the run.
            while i < chars.len()
                && SYMBOL_CHARS.contains(chars[i])
                && next_comment.peek().is_none_or(|n| n.range.start != i)
            {
                i += 1;
            }
            if chars[start..i] == ['?', '?', '?'] {
                out.push(Annotation::info(start, i, "hole"));
            }
        } else {
            match c {
                '(' | '[' | '{' => brackets.push((c, i)),
                ')' | ']' | '}' => {
                    let open = match c {
                        ')' => '(',
                        ']' => '[',
                        _ => '{',
                    };
                    if brackets.last().is_some_and(|&(b, _)| b == open) {
                        brackets.pop();
                    } else {
                        out.push(Annotation::error(i, i + 1, "unbalanced bracket"));
                    }
                }
                _ => {}
            }
            i += 1;
        }
    }
    for (_, pos) in brackets {
        out.push(Annotation::error(pos, pos + 1, "unbalanced bracket"));
    }
    out.sort();
    out
}
