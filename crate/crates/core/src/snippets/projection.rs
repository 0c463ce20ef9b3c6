use std::collections::BTreeMap;
use std::ops::Range;

use super::comments::scan;
use super::fragments::{scan_fragments, Fragment, FragmentKind};
use super::markers::{markers_in, SnippetDef};
use super::syntax::LanguageSyntax;

/// Active variant per fragment, keyed by the fragment's index within the
/// projected region. Missing entries mean "show the live variant".
pub type FragmentState = BTreeMap<usize, usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HiddenKind {
    Marker,
    Scaffolding,
    InactiveVariant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiddenRange {
    pub range: Range<usize>,
    pub kind: HiddenKind,
}

/// A contiguous run of raw characters shown in the view.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Segment {
    pub raw_start: usize,
    pub view_start: usize,
    pub len: usize,
    /// Part of the active variant of a fragment.
    pub variant: bool,
}

impl Segment {
    fn raw_end(&self) -> usize {
        self.raw_start + self.len
    }

    fn view_end(&self) -> usize {
        self.view_start + self.len
    }
}

/// A fragment as seen from one projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentView {
    pub kind: FragmentKind,
    pub variants: Vec<String>,
    pub live: usize,
    pub active: usize,
    /// Raw range of the whole construct.
    pub raw_range: Range<usize>,
}

/// The presentation view of a document region plus the map back to raw
/// offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub view_text: String,
    pub hidden_ranges: Vec<HiddenRange>,
    pub fragments: Vec<FragmentView>,
    pub(crate) segments: Vec<Segment>,
    pub(crate) region: Range<usize>,
    pub(crate) raw_len: usize,
    view_len: usize,
}

impl Projection {
    pub fn view_len(&self) -> usize {
        self.view_len
    }

    pub fn raw_len(&self) -> usize {
        self.raw_len
    }

    pub fn region(&self) -> Range<usize> {
        self.region.clone()
    }

    /// Active variant index of every fragment in the region.
    pub fn fragment_state(&self) -> FragmentState {
        self.fragments
            .iter()
            .enumerate()
            .map(|(i, f)| (i, f.active))
            .collect()
    }

    /// Raw offset of the view character at `view_offset`.
    pub fn to_raw(&self, view_offset: usize) -> Option<usize> {
        if view_offset >= self.view_len {
            return None;
        }
        let idx = self
            .segments
            .partition_point(|s| s.view_end() <= view_offset);
        let seg = self.segments[idx..].iter().find(|s| s.len > 0)?;
        Some(seg.raw_start + (view_offset - seg.view_start))
    }

    /// View offset of the raw character at `raw_offset`, if it is visible.
    pub fn to_view(&self, raw_offset: usize) -> Option<usize> {
        self.segments
            .iter()
            .find(|s| s.raw_start <= raw_offset && raw_offset < s.raw_end())
            .map(|s| s.view_start + (raw_offset - s.raw_start))
    }

    /// Raw position receiving text inserted at `view_offset`.
    ///
    /// Insertions touching an active variant go inside it; otherwise they
    /// attach to the next visible character.
    pub(crate) fn insertion_point(&self, view_offset: usize) -> usize {
        let touching = self
            .segments
            .iter()
            .filter(|s| s.view_start <= view_offset && view_offset <= s.view_end());
        let mut best: Option<&Segment> = None;
        for s in touching {
            best = match best {
                None => Some(s),
                Some(b) if s.variant && !b.variant => Some(s),
                Some(b) if s.variant == b.variant && !b.variant => Some(s),
                keep => keep,
            };
        }
        match best {
            Some(s) => s.raw_start + (view_offset - s.view_start),
            None => self.region.start,
        }
    }

    /// View position at which text inserted at raw `raw_offset` would show,
    /// or `None` when the position is hidden.
    pub(crate) fn view_insertion_point(&self, raw_offset: usize) -> Option<usize> {
        self.segments
            .iter()
            .find(|s| s.raw_start <= raw_offset && raw_offset <= s.raw_end())
            .map(|s| s.view_start + (raw_offset - s.raw_start))
    }

    /// Whether a marker line lies strictly between two raw offsets.
    pub(crate) fn marker_between(&self, lo: usize, hi: usize) -> bool {
        self.hidden_ranges
            .iter()
            .any(|h| h.kind == HiddenKind::Marker && h.range.start >= lo && h.range.end <= hi)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cell {
    Plain,
    Variant,
    Hidden(HiddenKind),
}

fn intersects(a: &Range<usize>, b: &Range<usize>) -> bool {
    a.start < b.end && b.start < a.end
}

/// Projects `text` (or the region of `snippet`) into its presentation view.
///
/// With `strip_markers`, whole marker lines vanish. Fragments lying entirely
/// inside the region lose their comment scaffolding and show the variant
/// chosen by `fragment_state`. Fragments cut by the region boundary or by a
/// marker line are shown verbatim.
pub fn project(
    text: &str,
    syntax: Option<&LanguageSyntax>,
    snippet: Option<&SnippetDef>,
    fragment_state: &FragmentState,
    strip_markers: bool,
) -> Projection {
    let chars: Vec<char> = text.chars().collect();
    let region = snippet.map_or(0..chars.len(), |s| s.range());
    let mut cells = vec![Cell::Plain; region.len()];
    let mut mark = |range: &Range<usize>, cell: Cell| {
        for i in range.start.max(region.start)..range.end.min(region.end) {
            cells[i - region.start] = cell;
        }
    };

    let mut fragments = Vec::new();
    let mut empty_variants = Vec::new();
    if let Some(syntax) = syntax {
        let comments = scan(&chars, syntax);
        let markers = markers_in(&chars, &comments.spans);
        if strip_markers {
            for m in &markers {
                mark(&m.line, Cell::Hidden(HiddenKind::Marker));
            }
        }
        let (all, _) = scan_fragments(&chars, &comments.spans);
        let eligible = all.into_iter().filter(|f: &Fragment| {
            f.whole_range.start >= region.start
                && f.whole_range.end <= region.end
                && !markers.iter().any(|m| intersects(&m.line, &f.whole_range))
        });
        for fragment in eligible {
            let index = fragments.len();
            let live = fragment.live_index();
            let active = fragment_state
                .get(&index)
                .copied()
                .filter(|&a| a < fragment.variants.len())
                .unwrap_or(live);
            mark(
                &fragment.open_comment,
                Cell::Hidden(HiddenKind::Scaffolding),
            );
            mark(
                &fragment.close_comment,
                Cell::Hidden(HiddenKind::Scaffolding),
            );
            if active != live {
                mark(
                    &fragment.live_range(),
                    Cell::Hidden(HiddenKind::InactiveVariant),
                );
            }
            let shown = fragment.variants[active].range.clone();
            if shown.is_empty() {
                empty_variants.push(shown.start);
            }
            mark(&shown, Cell::Variant);
            fragments.push(FragmentView {
                kind: fragment.kind,
                variants: fragment.variants.iter().map(|v| v.text.clone()).collect(),
                live,
                active,
                raw_range: fragment.whole_range.clone(),
            });
        }
    }

    let mut view_text = String::new();
    let mut segments: Vec<Segment> = Vec::new();
    let mut hidden_ranges: Vec<HiddenRange> = Vec::new();
    let mut view_len = 0;
    let mut empties = empty_variants.into_iter().peekable();
    for (offset, cell) in cells.iter().enumerate() {
        let raw = region.start + offset;
        while empties.peek().is_some_and(|&p| p <= raw) {
            let p = empties.next().unwrap_or(raw);
            segments.push(Segment {
                raw_start: p,
                view_start: view_len,
                len: 0,
                variant: true,
            });
        }
        match *cell {
            Cell::Hidden(kind) => match hidden_ranges.last_mut() {
                Some(h) if h.kind == kind && h.range.end == raw => h.range.end += 1,
                _ => hidden_ranges.push(HiddenRange {
                    range: raw..raw + 1,
                    kind,
                }),
            },
            visible => {
                let variant = visible == Cell::Variant;
                view_text.push(chars[raw]);
                match segments.last_mut() {
                    Some(s) if s.variant == variant && s.raw_end() == raw && s.len > 0 => {
                        s.len += 1
                    }
                    _ => segments.push(Segment {
                        raw_start: raw,
                        view_start: view_len,
                        len: 1,
                        variant,
                    }),
                }
                view_len += 1;
            }
        }
    }
    for p in empties {
        segments.push(Segment {
            raw_start: p,
            view_start: view_len,
            len: 0,
            variant: true,
        });
    }
    if segments.is_empty() {
        segments.push(Segment {
            raw_start: region.start,
            view_start: 0,
            len: 0,
            variant: false,
        });
    }

    Projection {
        view_text,
        hidden_ranges,
        fragments,
        segments,
        region,
        raw_len: chars.len(),
        view_len,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snippets::extract_snippets;

    #[test]
    fn identity_projection_of_a_snippet() {
        let text = "head\n// begin #s\nbody text\n// end #s\ntail";
        let snippets = extract_snippets(text, &LanguageSyntax::SCALA).unwrap();
        let p = project(
            text,
            Some(&LanguageSyntax::SCALA),
            Some(&snippets[0]),
            &FragmentState::new(),
            true,
        );
        assert_eq!(p.view_text, "body text");
        let begin = snippets[0].begin_offset;
        for v in 0..p.view_len() {
            assert_eq!(p.to_raw(v), Some(begin + v));
        }
        assert_eq!(p.to_raw(p.view_len()), None);
    }

    #[test]
    fn markers_are_stripped_from_whole_view() {
        let text = "a\n(** begin #x *)\nb\n(** end #x *)\nc";
        let p = project(
            text,
            Some(&LanguageSyntax::ISABELLE),
            None,
            &FragmentState::new(),
            true,
        );
        assert_eq!(p.view_text, "a\nb\nc");
        assert!(!p.view_text.contains("begin #"));
        let kept = project(
            text,
            Some(&LanguageSyntax::ISABELLE),
            None,
            &FragmentState::new(),
            false,
        );
        assert_eq!(kept.view_text, text);
    }

    #[test]
    fn fragment_variants_are_spliced() {
        let text = "val x = /*(*/???/*|3 * 7)*/\n";
        let syntax = Some(&LanguageSyntax::SCALA);
        let live = project(text, syntax, None, &FragmentState::new(), true);
        assert_eq!(live.view_text, "val x = ???\n");
        let mut state = FragmentState::new();
        state.insert(0, 1);
        let stepped = project(text, syntax, None, &state, true);
        assert_eq!(stepped.view_text, "val x = 3 * 7\n");
        // The shown variant maps into its comment.
        let seven = text.find('3').unwrap();
        assert_eq!(stepped.to_raw(8), Some(seven));
        assert_eq!(stepped.fragments[0].active, 1);
    }

    #[test]
    fn out_of_range_state_falls_back_to_live() {
        let text = "/*(a|*/b/*)*/";
        let mut state = FragmentState::new();
        state.insert(0, 7);
        state.insert(3, 0);
        let p = project(text, Some(&LanguageSyntax::SCALA), None, &state, true);
        assert_eq!(p.view_text, "b");
    }

    #[test]
    fn to_raw_is_strictly_increasing() {
        let text = "x /*(a|*/bb/*|c)*/ y\n// begin #q\nz\n// end #q\n";
        let mut state = FragmentState::new();
        for active in 0..3 {
            state.insert(0, active);
            let p = project(text, Some(&LanguageSyntax::SCALA), None, &state, true);
            let raws: Vec<usize> = (0..p.view_len()).map(|v| p.to_raw(v).unwrap()).collect();
            assert!(raws.windows(2).all(|w| w[0] < w[1]), "{raws:?}");
            let rebuilt: String = raws.iter().map(|&r| text.chars().nth(r).unwrap()).collect();
            assert_eq!(rebuilt, p.view_text);
        }
    }

    #[test]
    fn fragment_cut_by_region_is_verbatim() {
        let text = "/*(*/a\n// begin #s\nb/*|c)*/\n// end #s\n";
        let snippets = extract_snippets(text, &LanguageSyntax::SCALA).unwrap();
        let p = project(
            text,
            Some(&LanguageSyntax::SCALA),
            Some(&snippets[0]),
            &FragmentState::new(),
            true,
        );
        assert_eq!(p.view_text, "b/*|c)*/");
        assert!(p.fragments.is_empty());
    }

    #[test]
    fn no_syntax_means_identity() {
        let p = project("a /* b */", None, None, &FragmentState::new(), true);
        assert_eq!(p.view_text, "a /* b */");
    }
}
