//! Randomized checks for comment scanning, fragments and projections.

use cobra_core::snippets::{
    comment_spans, map_raw_edit, parse_fragments, LanguageSyntax, Selector, SourceDocument,
};
use cobra_core::sync::Operation;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Straightforward state machine for non-nesting `/* */` and `//` comments
/// with double-quoted strings. Returns (start, end) character pairs.
fn scala_comment_oracle(text: &str) -> Vec<(usize, usize)> {
    #[derive(PartialEq)]
    enum St {
        Code,
        Str,
        StrEsc,
        Block(usize),
        Line(usize),
    }
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut st = St::Code;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        st = match st {
            St::Code => match (c, next) {
                ('"', _) => St::Str,
                ('/', Some('*')) => {
                    i += 1;
                    St::Block(i - 1)
                }
                ('/', Some('/')) => St::Line(i),
                _ => St::Code,
            },
            St::Str => match c {
                '\\' => St::StrEsc,
                '"' => St::Code,
                _ => St::Str,
            },
            St::StrEsc => St::Str,
            St::Block(s) => {
                if c == '*' && next == Some('/') {
                    i += 1;
                    out.push((s, i + 1));
                    St::Code
                } else {
                    St::Block(s)
                }
            }
            St::Line(s) => {
                if c == '\n' {
                    out.push((s, i));
                    St::Code
                } else {
                    St::Line(s)
                }
            }
        };
        i += 1;
    }
    match st {
        St::Block(s) | St::Line(s) => out.push((s, chars.len())),
        _ => {}
    }
    out
}

#[test]
fn scala_comment_spans_match_state_machine() {
    let alphabet = ['/', '*', '"', '\\', 'a', '\n', ' '];
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..20_000 {
        let len = rng.gen_range(0..14);
        let text: String = (0..len)
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
            .collect();
        let got: Vec<(usize, usize)> = comment_spans(&text, &LanguageSyntax::SCALA)
            .spans
            .iter()
            .map(|s| (s.range.start, s.range.end))
            .collect();
        assert_eq!(got, scala_comment_oracle(&text), "text {text:?}");
    }
}

#[test]
fn both_paper_fragment_forms_give_the_same_sequence() {
    let live_first =
        parse_fragments("val x = /*(*/???/*|3 * 7)*/", &LanguageSyntax::SCALA).unwrap();
    let live_last = parse_fragments("val x = /*(???|*/3 * 7/*)*/", &LanguageSyntax::SCALA).unwrap();
    assert_eq!(live_first[0].variant_texts(), vec!["???", "3 * 7"]);
    assert_eq!(live_first[0].variant_texts(), live_last[0].variant_texts());
}

const WORDS: &[&str] = &["val", "x", "=", "1", "foo", "(", ")", "bar", "???"];

fn random_line(rng: &mut StdRng) -> String {
    let n = rng.gen_range(0..5);
    let mut words: Vec<String> = (0..n)
        .map(|_| WORDS[rng.gen_range(0..WORDS.len())].to_string())
        .collect();
    if rng.gen_bool(0.3) {
        let (a, b) = (
            WORDS[rng.gen_range(0..WORDS.len())],
            WORDS[rng.gen_range(0..WORDS.len())],
        );
        words.push(if rng.gen_bool(0.5) {
            format!("/*(*/{a}/*|{b})*/")
        } else {
            format!("/*({a}|*/{b}/*)*/")
        });
    }
    words.join(" ")
}

/// A document with three snippets whose marker lines are placed randomly,
/// so they nest, overlap or interleave.
fn random_document(rng: &mut StdRng) -> String {
    let lines = rng.gen_range(6..14);
    let mut body: Vec<String> = (0..lines).map(|_| random_line(rng)).collect();
    for name in ["a", "b", "c"] {
        let begin = rng.gen_range(0..body.len());
        let end = rng.gen_range(begin + 1..=body.len());
        body.insert(end, format!("// end #{name}"));
        body.insert(begin, format!("/* begin #{name} */"));
    }
    body.join("\n") + "\n"
}

fn random_view_edit(rng: &mut StdRng, len: usize) -> Operation {
    let alphabet = ['x', 'y', ' ', '1', '\n', '(', '/', '*'];
    let mut op = Operation::new();
    let mut left = len;
    while left > 0 || rng.gen_bool(0.2) {
        match rng.gen_range(0..4) {
            0 | 1 if left > 0 => {
                let n = rng.gen_range(1..=left);
                op.retain(n);
                left -= n;
            }
            2 => {
                let n = rng.gen_range(1..4);
                let s: String = (0..n)
                    .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
                    .collect();
                op.insert(&s);
            }
            _ if left > 0 => {
                let n = rng.gen_range(1..=left.min(3));
                op.delete(n);
                left -= n;
            }
            _ => {
                op.insert("z");
                break;
            }
        }
    }
    op
}

#[test]
fn accepted_view_edits_keep_every_view_consistent() {
    let mut rng = StdRng::seed_from_u64(42);
    let selectors = [
        Selector::Whole,
        Selector::Snippet("a".into()),
        Selector::Snippet("b".into()),
        Selector::Snippet("c".into()),
    ];
    let mut accepted = 0;
    let mut mapped_exactly = 0;
    let mut other_views = 0;
    for _ in 0..300 {
        let mut doc =
            SourceDocument::new(random_document(&mut rng), Some(LanguageSyntax::SCALA)).unwrap();
        for _ in 0..8 {
            let state = Default::default();
            let sel = &selectors[rng.gen_range(0..selectors.len())];
            let before: Vec<_> = selectors
                .iter()
                .map(|s| doc.project(s, &state).unwrap())
                .collect();
            let view = doc.project(sel, &state).unwrap();
            let op = random_view_edit(&mut rng, view.view_len());
            let Ok(edit) = doc.edit_through_view(sel, &state, &op) else {
                continue;
            };
            accepted += 1;
            assert_eq!(
                edit.projection.view_text,
                op.apply(&view.view_text).unwrap()
            );
            for (s, old) in selectors.iter().zip(&before) {
                let fresh = edit.document.project(s, &state).unwrap();
                // Overlap consistency: the raw edit read through any other
                // view yields that view's fresh projection.
                if s != sel {
                    other_views += 1;
                    let delta = map_raw_edit(old, &edit.raw_op).unwrap();
                    if delta.apply(&old.view_text).unwrap() == fresh.view_text {
                        mapped_exactly += 1;
                    }
                }
                let region: String = edit.document.text().chars().collect::<Vec<_>>()
                    [fresh.region()]
                .iter()
                .collect();
                assert!(fresh.view_text.chars().count() <= region.chars().count());
            }
            doc = edit.document;
        }
    }
    assert!(accepted > 600, "only {accepted} edits accepted");
    eprintln!("accepted {accepted}, exact raw-to-view mappings {mapped_exactly}/{other_views}");
    assert!(mapped_exactly * 100 >= other_views * 95);
}
