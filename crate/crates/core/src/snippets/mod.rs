//! Snippet markers, variant fragments and the projection of raw source
//! text into presentation views.

mod comments;
mod edit;
mod fragments;
mod markers;
mod projection;
mod syntax;

pub use comments::{comment_spans, CommentKind, CommentScan, CommentSpan, ScanDiagnostic};
pub use edit::{map_raw_edit, map_view_edit, EditRejected, Selector, SourceDocument, ViewEdit};
pub use fragments::{parse_fragments, Fragment, FragmentKind, MalformedFragment, Variant};
pub use markers::{extract_snippets, find_markers, Marker, MarkerKind, SnippetDef, SnippetError};
pub use projection::{project, FragmentState, FragmentView, HiddenKind, HiddenRange, Projection};
pub use syntax::LanguageSyntax;
