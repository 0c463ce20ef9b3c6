use serde::Serialize;

/// TeX between dollar signs, delimiters stripped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MathSpan {
    pub tex: String,
    /// `$$...$$` rather than `$...$`.
    pub display: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TextSpan {
    Text(String),
    Math(MathSpan),
}

/// Position just past the closing delimiter of TeX starting at `from`, or
/// `None`. A backslash always consumes the next character; a `$` that is
/// not the closing delimiter ends the attempt.
fn closing(chars: &[char], from: usize, display: bool) -> Option<(usize, usize)> {
    let mut k = from;
    while k < chars.len() {
        match chars[k] {
            '\\' => k += 2,
            '$' => {
                if k == from {
                    return None;
                }
                if !display {
                    return Some((k, k + 1));
                }
                return (chars.get(k + 1) == Some(&'$')).then_some((k, k + 2));
            }
            _ => k += 1,
        }
    }
    None
}

/// Splits text into plain and math spans. `\$` is a literal dollar;
/// a `$` without a non-empty partner stays literal.
pub fn split_math(text: &str) -> Vec<TextSpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut plain = String::new();
    let mut i = 0;
    let flush = |plain: &mut String, out: &mut Vec<TextSpan>| {
        if !plain.is_empty() {
            out.push(TextSpan::Text(std::mem::take(plain)));
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' && chars.get(i + 1) == Some(&'$') {
            plain.push('$');
            i += 2;
            continue;
        }
        if c == '$' {
            let display = chars.get(i + 1) == Some(&'$');
            let found = display
                .then(|| closing(&chars, i + 2, true).map(|r| (r, i + 2, true)))
                .flatten()
                .or_else(|| closing(&chars, i + 1, false).map(|r| (r, i + 1, false)));
            if let Some(((end, next), start, display)) = found {
                flush(&mut plain, &mut out);
                out.push(TextSpan::Math(MathSpan {
                    tex: chars[start..end].iter().collect(),
                    display,
                }));
                i = next;
                continue;
            }
        }
        plain.push(c);
        i += 1;
    }
    flush(&mut plain, &mut out);
    out
}

/// Inverse of [`split_math`] for rendering: dollars in plain text are
/// escaped, math regains its delimiters.
pub fn join_math(spans: &[TextSpan]) -> String {
    let mut s = String::new();
    for span in spans {
        match span {
            TextSpan::Text(t) => s.push_str(&t.replace('$', "\\$")),
            TextSpan::Math(m) if m.display => {
                s.push_str("$$");
                s.push_str(&m.tex);
                s.push_str("$$");
            }
            TextSpan::Math(m) => {
                s.push('$');
                s.push_str(&m.tex);
                s.push('$');
            }
        }
    }
    s
}
