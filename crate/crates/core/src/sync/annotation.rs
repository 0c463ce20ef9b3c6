use serde::{Deserialize, Serialize};

use super::operation::{char_len, Component, Operation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationKind {
    Error,
    Warning,
    Info,
    /// Semantic token class; the class name lives in [`Annotation::class`].
    Token,
}

impl AnnotationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnnotationKind::Error => "error",
            AnnotationKind::Warning => "warning",
            AnnotationKind::Info => "info",
            AnnotationKind::Token => "token",
        }
    }
}

/// A ranged semantic fact about a document revision.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Annotation {
    pub start: usize,
    pub end: usize,
    pub kind: AnnotationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Annotation {
    pub fn token(start: usize, end: usize, class: &str) -> Self {
        Self {
            start,
            end,
            kind: AnnotationKind::Token,
            class: Some(class.to_owned()),
            message: None,
        }
    }

    pub fn error(start: usize, end: usize, message: impl Into<String>) -> Self {
        Self::with_message(AnnotationKind::Error, start, end, message)
    }

    pub fn warning(start: usize, end: usize, message: impl Into<String>) -> Self {
        Self::with_message(AnnotationKind::Warning, start, end, message)
    }

    pub fn info(start: usize, end: usize, message: impl Into<String>) -> Self {
        Self::with_message(AnnotationKind::Info, start, end, message)
    }

    fn with_message(
        kind: AnnotationKind,
        start: usize,
        end: usize,
        message: impl Into<String>,
    ) -> Self {
        Self {
            start,
            end,
            kind,
            class: None,
            message: Some(message.into()),
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Where a position ends up after an operation, and whether the character
/// at that position survived.
struct PositionMap {
    /// `(old_offset, new_offset_before_inserts, inserted_here, deleted)` runs.
    runs: Vec<Run>,
}

#[derive(Clone, Copy)]
enum Run {
    Retain { old: usize, new: usize, len: usize },
    Insert { old: usize, new: usize, len: usize },
    Delete { old: usize, new: usize, len: usize },
}

impl PositionMap {
    fn new(op: &Operation) -> Self {
        let mut runs = Vec::with_capacity(op.components().len());
        let (mut old, mut new) = (0, 0);
        for c in op.components() {
            match c {
                Component::Retain(n) => {
                    runs.push(Run::Retain { old, new, len: *n });
                    old += n;
                    new += n;
                }
                Component::Insert(s) => {
                    let len = char_len(s);
                    runs.push(Run::Insert { old, new, len });
                    new += len;
                }
                Component::Delete(n) => {
                    runs.push(Run::Delete { old, new, len: *n });
                    old += n;
                }
            }
        }
        Self { runs }
    }

    /// New offset of `pos`. Text inserted exactly at `pos` lands before the
    /// mapped position when `after_inserts` is set.
    fn map(&self, pos: usize, after_inserts: bool) -> usize {
        let mut result = 0;
        for run in &self.runs {
            match *run {
                Run::Retain { old, new, len } => {
                    if pos < old + len {
                        return new + pos.saturating_sub(old);
                    }
                    result = new + len;
                }
                Run::Insert { old, new, len } => {
                    if old > pos || (old == pos && !after_inserts) {
                        return result.max(new);
                    }
                    result = new + len;
                }
                Run::Delete { old, new, len } => {
                    if pos < old + len {
                        return new;
                    }
                    result = new;
                }
            }
        }
        result
    }

    /// True when every character of `start..end` is deleted.
    fn all_deleted(&self, start: usize, end: usize) -> bool {
        let mut covered = 0;
        for run in &self.runs {
            if let Run::Delete { old, len, .. } = *run {
                let lo = old.max(start);
                let hi = (old + len).min(end);
                if hi > lo {
                    covered += hi - lo;
                }
            }
        }
        covered == end - start
    }
}

/// Moves annotations across an operation.
///
/// Ranges shift with edits before them; an insertion strictly inside a range
/// grows it, insertions at either boundary stay outside. A non-empty range
/// whose characters were all deleted is dropped.
pub fn transform_annotations(annotations: &[Annotation], op: &Operation) -> Vec<Annotation> {
    if op.is_identity() {
        return annotations.to_vec();
    }
    let map = PositionMap::new(op);
    annotations
        .iter()
        .filter(|a| a.is_empty() || !map.all_deleted(a.start, a.end))
        .map(|a| {
            let start = map.map(a.start, true);
            let end = if a.is_empty() {
                start
            } else {
                map.map(a.end, false).max(start)
            };
            Annotation {
                start,
                end,
                ..a.clone()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn insert_at(len: usize, at: usize, s: &str) -> Operation {
        let mut op = Operation::new();
        op.retain(at).insert(s).retain(len - at);
        op
    }

    fn delete_range(len: usize, start: usize, end: usize) -> Operation {
        let mut op = Operation::new();
        op.retain(start).delete(end - start).retain(len - end);
        op
    }

    #[test]
    fn identity_keeps_annotations() {
        let anns = vec![
            Annotation::error(1, 3, "x"),
            Annotation::token(0, 1, "keyword"),
        ];
        assert_eq!(transform_annotations(&anns, &Operation::identity(10)), anns);
    }

    #[test]
    fn insert_before_shifts() {
        let anns = vec![Annotation::token(5, 7, "keyword")];
        let out = transform_annotations(&anns, &insert_at(10, 1, "ab"));
        assert_eq!((out[0].start, out[0].end), (7, 9));
    }

    #[test]
    fn insert_inside_grows_and_boundaries_stay_outside() {
        let anns = vec![Annotation::error(2, 5, "e")];
        let inside = transform_annotations(&anns, &insert_at(8, 3, "xyz"));
        assert_eq!((inside[0].start, inside[0].end), (2, 8));
        let at_start = transform_annotations(&anns, &insert_at(8, 2, "x"));
        assert_eq!((at_start[0].start, at_start[0].end), (3, 6));
        let at_end = transform_annotations(&anns, &insert_at(8, 5, "x"));
        assert_eq!((at_end[0].start, at_end[0].end), (2, 5));
    }

    #[test]
    fn fully_deleted_range_is_dropped() {
        let anns = vec![Annotation::error(2, 4, "e"), Annotation::info(6, 7, "i")];
        let out = transform_annotations(&anns, &delete_range(8, 1, 5));
        assert_eq!(out.len(), 1);
        assert_eq!((out[0].start, out[0].end), (2, 3));
    }

    #[test]
    fn partially_deleted_range_shrinks() {
        let anns = vec![Annotation::error(2, 6, "e")];
        let out = transform_annotations(&anns, &delete_range(8, 4, 7));
        assert_eq!((out[0].start, out[0].end), (2, 4));
        let out = transform_annotations(&anns, &delete_range(8, 0, 3));
        assert_eq!((out[0].start, out[0].end), (0, 3));
    }

    #[test]
    fn empty_range_follows_position() {
        let anns = vec![Annotation::info(3, 3, "caret")];
        let out = transform_annotations(&anns, &delete_range(5, 1, 4));
        assert_eq!((out[0].start, out[0].end), (1, 1));
    }
}
