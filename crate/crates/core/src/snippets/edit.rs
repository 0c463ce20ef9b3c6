use thiserror::Error;

use super::markers::{extract_snippets, SnippetDef, SnippetError};
use super::projection::{project, FragmentState, Projection};
use super::syntax::LanguageSyntax;
use crate::sync::{Component, Operation, OtError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EditRejected {
    #[error("edit does not apply to the view: {0}")]
    Ot(#[from] OtError),
    #[error("deletion would cross a snippet marker")]
    CrossesMarker,
    #[error("edit would change the snippet structure: {0}")]
    BreaksSnippets(String),
    #[error("edit would change how the view is projected")]
    ChangesProjection,
}

enum RawEdit {
    Insert(String),
    Delete,
}

/// Translates an edit of `proj.view_text` into the raw-document edit with
/// the same visible effect.
pub fn map_view_edit(proj: &Projection, view_op: &Operation) -> Result<Operation, EditRejected> {
    if view_op.base_len() != proj.view_len() {
        return Err(OtError::LengthMismatch {
            expected: proj.view_len(),
            found: view_op.base_len(),
        }
        .into());
    }
    let mut edits: Vec<(usize, RawEdit)> = Vec::new();
    let mut view = 0;
    for c in view_op.components() {
        match c {
            Component::Retain(n) => view += n,
            Component::Insert(s) => {
                edits.push((proj.insertion_point(view), RawEdit::Insert(s.clone())))
            }
            Component::Delete(n) => {
                let mut previous: Option<usize> = None;
                for v in view..view + n {
                    let raw = proj
                        .to_raw(v)
                        .expect("delete within the view maps to a raw character");
                    if let Some(prev) = previous {
                        if proj.marker_between(prev + 1, raw) {
                            return Err(EditRejected::CrossesMarker);
                        }
                    }
                    previous = Some(raw);
                    edits.push((raw, RawEdit::Delete));
                }
                view += n;
            }
        }
    }
    // Stable: an insertion at p stays ahead of the deletion of character p.
    edits.sort_by_key(|(pos, edit)| (*pos, matches!(edit, RawEdit::Delete)));
    let mut raw_op = Operation::new();
    let mut cursor = 0;
    for (pos, edit) in edits {
        raw_op.retain(pos - cursor);
        cursor = pos;
        match edit {
            RawEdit::Insert(s) => {
                raw_op.insert(&s);
            }
            RawEdit::Delete => {
                raw_op.delete(1);
                cursor += 1;
            }
        }
    }
    raw_op.retain(proj.raw_len() - cursor);
    Ok(raw_op)
}

/// Best-effort translation of a raw edit into an edit of the view. Changes
/// to hidden text are dropped. The result always applies to
/// `proj.view_text` but may differ from a fresh projection when the edit
/// alters comment structure; callers verify.
pub fn map_raw_edit(proj: &Projection, raw_op: &Operation) -> Result<Operation, OtError> {
    if raw_op.base_len() != proj.raw_len() {
        return Err(OtError::LengthMismatch {
            expected: proj.raw_len(),
            found: raw_op.base_len(),
        });
    }
    let mut view_op = Operation::new();
    let mut view_cursor = 0;
    let mut raw = 0;
    for c in raw_op.components() {
        match c {
            Component::Retain(n) => raw += n,
            Component::Insert(s) => {
                if let Some(v) = proj.view_insertion_point(raw) {
                    view_op.retain(v - view_cursor);
                    view_op.insert(s);
                    view_cursor = v;
                }
            }
            Component::Delete(n) => {
                for r in raw..raw + n {
                    if let Some(v) = proj.to_view(r) {
                        view_op.retain(v - view_cursor);
                        view_op.delete(1);
                        view_cursor = v + 1;
                    }
                }
                raw += n;
            }
        }
    }
    view_op.retain(proj.view_len() - view_cursor);
    Ok(view_op)
}

/// What part of a document a view shows.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selector {
    Whole,
    Snippet(String),
}

/// A raw source text together with its snippet structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceDocument {
    text: String,
    syntax: Option<LanguageSyntax>,
    snippets: Vec<SnippetDef>,
}

/// Outcome of an accepted view edit.
#[derive(Clone, Debug)]
pub struct ViewEdit {
    pub raw_op: Operation,
    pub document: SourceDocument,
    pub projection: Projection,
}

impl SourceDocument {
    pub fn new(
        text: impl Into<String>,
        syntax: Option<LanguageSyntax>,
    ) -> Result<Self, SnippetError> {
        let text = text.into();
        let snippets = match &syntax {
            Some(s) => extract_snippets(&text, s)?,
            None => Vec::new(),
        };
        Ok(Self {
            text,
            syntax,
            snippets,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn syntax(&self) -> Option<&LanguageSyntax> {
        self.syntax.as_ref()
    }

    pub fn snippets(&self) -> &[SnippetDef] {
        &self.snippets
    }

    pub fn snippet(&self, name: &str) -> Option<&SnippetDef> {
        self.snippets.iter().find(|s| s.name == name)
    }

    /// `None` when the selector names a snippet this document lacks.
    pub fn project(&self, selector: &Selector, state: &FragmentState) -> Option<Projection> {
        let snippet = match selector {
            Selector::Whole => None,
            Selector::Snippet(name) => Some(self.snippet(name)?),
        };
        Some(project(
            &self.text,
            self.syntax.as_ref(),
            snippet,
            state,
            true,
        ))
    }

    /// Applies a raw edit. Fails when the new text has broken markers.
    pub fn apply(&self, raw_op: &Operation) -> Result<SourceDocument, EditRejected> {
        let text = raw_op.apply(&self.text)?;
        let doc = SourceDocument::new(text, self.syntax)
            .map_err(|e| EditRejected::BreaksSnippets(e.to_string()))?;
        let names = |d: &SourceDocument| {
            let mut n: Vec<String> = d.snippets.iter().map(|s| s.name.clone()).collect();
            n.sort();
            n
        };
        if names(&doc) != names(self) {
            return Err(EditRejected::BreaksSnippets("snippet set changed".into()));
        }
        Ok(doc)
    }

    /// Edits the document through a view. The edit is accepted only if the
    /// re-projected view equals the edited view text, so views never drift
    /// from the raw document.
    pub fn edit_through_view(
        &self,
        selector: &Selector,
        state: &FragmentState,
        view_op: &Operation,
    ) -> Result<ViewEdit, EditRejected> {
        let proj = self
            .project(selector, state)
            .ok_or_else(|| EditRejected::BreaksSnippets("snippet is missing".into()))?;
        let expected = view_op.apply(&proj.view_text)?;
        let raw_op = map_view_edit(&proj, view_op)?;
        let document = self.apply(&raw_op)?;
        let projection = document
            .project(selector, state)
            .ok_or_else(|| EditRejected::BreaksSnippets("snippet is missing".into()))?;
        if projection.view_text != expected {
            return Err(EditRejected::ChangesProjection);
        }
        Ok(ViewEdit {
            raw_op,
            document,
            projection,
        })
    }
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

    const SNIPPET_TEXT: &str = "head\n// begin #s\nbody\n// end #s\ntail\n";

    #[test]
    fn insert_at_view_start_lands_at_snippet_begin() {
        let doc = SourceDocument::new(SNIPPET_TEXT, Some(LanguageSyntax::SCALA)).unwrap();
        let sel = Selector::Snippet("s".into());
        let proj = doc.project(&sel, &FragmentState::new()).unwrap();
        let raw = map_view_edit(&proj, &insert_at(proj.view_len(), 0, "x")).unwrap();
        let begin = doc.snippet("s").unwrap().begin_offset;
        assert_eq!(raw.components()[0], Component::Retain(begin));
        assert_eq!(raw.components()[1], Component::Insert("x".into()));
    }

    #[test]
    fn deleting_live_variant_keeps_comments() {
        let text = "val x = /*(*/???/*|3 * 7)*/\n";
        let doc = SourceDocument::new(text, Some(LanguageSyntax::SCALA)).unwrap();
        let state = FragmentState::new();
        let proj = doc.project(&Selector::Whole, &state).unwrap();
        let op = delete_range(proj.view_len(), 8, 11);
        let edit = doc
            .edit_through_view(&Selector::Whole, &state, &op)
            .unwrap();
        assert_eq!(edit.document.text(), "val x = /*(*//*|3 * 7)*/\n");
        assert_eq!(edit.projection.view_text, "val x = \n");
    }

    #[test]
    fn typing_inside_an_inactive_variant_edits_the_comment() {
        let text = "val x = /*(*/???/*|3 * 7)*/\n";
        let doc = SourceDocument::new(text, Some(LanguageSyntax::SCALA)).unwrap();
        let mut state = FragmentState::new();
        state.insert(0, 1);
        let proj = doc.project(&Selector::Whole, &state).unwrap();
        assert_eq!(proj.view_text, "val x = 3 * 7\n");
        let op = insert_at(proj.view_len(), 13, " + 1");
        let edit = doc
            .edit_through_view(&Selector::Whole, &state, &op)
            .unwrap();
        assert_eq!(edit.document.text(), "val x = /*(*/???/*|3 * 7 + 1)*/\n");
    }

    #[test]
    fn delete_across_marker_is_rejected() {
        let text = "a\n// begin #s\nb\n// end #s\n";
        let doc = SourceDocument::new(text, Some(LanguageSyntax::SCALA)).unwrap();
        let proj = doc
            .project(&Selector::Whole, &FragmentState::new())
            .unwrap();
        assert_eq!(proj.view_text, "a\nb\n");
        let err = map_view_edit(&proj, &delete_range(4, 0, 3)).unwrap_err();
        assert_eq!(err, EditRejected::CrossesMarker);
    }

    #[test]
    fn edit_creating_new_syntax_is_rejected() {
        let text = "x\n// begin #s\ny\n// end #s\n";
        let doc = SourceDocument::new(text, Some(LanguageSyntax::SCALA)).unwrap();
        let state = FragmentState::new();
        // Joining the line before a marker would swallow text into it.
        let err = doc
            .edit_through_view(&Selector::Whole, &state, &delete_range(4, 1, 2))
            .unwrap_err();
        assert_eq!(err, EditRejected::ChangesProjection);
        // Opening a fragment changes what the view shows.
        let err = doc
            .edit_through_view(&Selector::Whole, &state, &insert_at(4, 0, "/*(*/a/*)*/"))
            .unwrap_err();
        assert_eq!(err, EditRejected::ChangesProjection);
    }

    #[test]
    fn raw_edits_map_into_overlapping_views() {
        let text = "// begin #a\n1\n// begin #b\n2\n// end #a\n3\n// end #b\n";
        let doc = SourceDocument::new(text, Some(LanguageSyntax::SCALA)).unwrap();
        let state = FragmentState::new();
        let a = Selector::Snippet("a".into());
        let b = Selector::Snippet("b".into());
        let pa = doc.project(&a, &state).unwrap();
        let pb = doc.project(&b, &state).unwrap();
        assert_eq!(pa.view_text, "1\n2");
        assert_eq!(pb.view_text, "2\n3");
        let edit = doc
            .edit_through_view(&a, &state, &insert_at(3, 2, "two="))
            .unwrap();
        let delta_b = map_raw_edit(&pb, &edit.raw_op).unwrap();
        let new_b = edit.document.project(&b, &state).unwrap();
        assert_eq!(delta_b.apply(&pb.view_text).unwrap(), new_b.view_text);
        assert_eq!(new_b.view_text, "two=2\n3");
    }
}
