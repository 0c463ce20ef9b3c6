//! Session and document state, as a synchronous state machine.
//!
//! Every code block id is a *view*: the projection of an *origin* (a source
//! file or inline code element) through a selector. Views keep their own
//! revision logs so clients edit plain text; the hub translates view edits
//! into origin edits and re-derives every other view of the same origin.

use std::collections::{BTreeMap, BTreeSet};

use cobra_core::assistants::AnnotationBatch;
use cobra_core::config::{diff_settings, SettingChange, Settings};
use cobra_core::languages;
use cobra_core::slidedoc::{CodeRefs, FragmentVariants, PROTOCOL_VERSION};
use cobra_core::snippets::{map_raw_edit, FragmentState, Projection, Selector, SourceDocument};
use cobra_core::sync::{transform_annotations, Annotation, ClientId, Operation, RevisionLog};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::wire::WireMessage;

pub mod codes {
    pub const DOC_NOT_FOUND: &str = "doc-not-found";
    pub const EDIT_REJECTED: &str = "edit-rejected";
    pub const FORBIDDEN: &str = "forbidden";
    pub const VERSION_MISMATCH: &str = "version-mismatch";
    pub const BAD_REQUEST: &str = "bad-request";
    pub const HELLO_REQUIRED: &str = "hello-required";
    pub const DECODE_ERROR: &str = "decode-error";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Presenter,
    Viewer,
}

/// Work requested from the assistant pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisJob {
    pub doc_id: String,
    pub seq: u64,
    pub text: String,
    pub language: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Effect {
    Send(ClientId, WireMessage),
    Analyze(AnalysisJob),
    Close(ClientId),
}

#[derive(Debug, Error)]
pub enum HubError {
    #[error("in `{origin}`: {error}")]
    Origin { origin: String, error: String },
    #[error("code reference to unknown origin `{0}`")]
    UnknownOrigin(String),
}

struct OriginState {
    doc: SourceDocument,
    log: RevisionLog,
    language: Option<String>,
    views: Vec<String>,
}

struct ViewState {
    origin: String,
    selector: Selector,
    fragments: FragmentState,
    projection: Projection,
    log: RevisionLog,
    /// Annotations valid for the head revision.
    annotations: Vec<Annotation>,
    /// Revision the stored annotations were computed for.
    analyzed_seq: Option<u64>,
}

struct Session {
    role: Role,
    hello: bool,
    open: BTreeSet<String>,
}

pub struct Hub {
    settings: Settings,
    digest: String,
    origins: BTreeMap<String, OriginState>,
    views: BTreeMap<String, ViewState>,
    doc_order: Vec<String>,
    sessions: BTreeMap<ClientId, Session>,
    next_client: u64,
}

/// Short stable fingerprint of the settings.
pub fn settings_digest(settings: &Settings) -> String {
    let json = serde_json::to_vec(settings).expect("settings serialize");
    let hash = Sha256::digest(&json);
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn send(to: ClientId, msg: WireMessage) -> Effect {
    Effect::Send(to, msg)
}

impl Hub {
    pub fn new(settings: Settings, code: &CodeRefs) -> Result<Self, HubError> {
        let mut origins = BTreeMap::new();
        for o in &code.origins {
            let syntax = o
                .language
                .as_deref()
                .and_then(languages::lookup)
                .map(|l| l.syntax);
            let doc =
                SourceDocument::new(o.text.clone(), syntax).map_err(|e| HubError::Origin {
                    origin: o.id.clone(),
                    error: e.to_string(),
                })?;
            origins.insert(
                o.id.clone(),
                OriginState {
                    log: RevisionLog::new(o.id.clone(), o.text.clone()),
                    doc,
                    language: o.language.clone(),
                    views: Vec::new(),
                },
            );
        }
        let mut views = BTreeMap::new();
        let mut doc_order = Vec::new();
        for r in &code.refs {
            if views.contains_key(&r.doc_id) {
                continue;
            }
            let origin = origins
                .get_mut(&r.origin)
                .ok_or_else(|| HubError::UnknownOrigin(r.origin.clone()))?;
            let fragments = FragmentState::new();
            let projection =
                origin
                    .doc
                    .project(&r.selector, &fragments)
                    .ok_or_else(|| HubError::Origin {
                        origin: r.origin.clone(),
                        error: format!("no view for {:?}", r.selector),
                    })?;
            origin.views.push(r.doc_id.clone());
            doc_order.push(r.doc_id.clone());
            views.insert(
                r.doc_id.clone(),
                ViewState {
                    origin: r.origin.clone(),
                    selector: r.selector.clone(),
                    fragments,
                    log: RevisionLog::new(r.doc_id.clone(), projection.view_text.clone()),
                    projection,
                    annotations: Vec::new(),
                    analyzed_seq: None,
                },
            );
        }
        Ok(Self {
            digest: settings_digest(&settings),
            settings,
            origins,
            views,
            doc_order,
            sessions: BTreeMap::new(),
            next_client: 1,
        })
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_order
    }

    pub fn view_text(&self, doc_id: &str) -> Option<&str> {
        self.views.get(doc_id).map(|v| v.log.text())
    }

    pub fn view_seq(&self, doc_id: &str) -> Option<u64> {
        self.views.get(doc_id).map(|v| v.log.latest_seq())
    }

    pub fn view_annotations(&self, doc_id: &str) -> Option<&[Annotation]> {
        self.views.get(doc_id).map(|v| v.annotations.as_slice())
    }

    /// Fresh projection of the view from its origin's current text.
    pub fn reprojected(&self, doc_id: &str) -> Option<String> {
        let v = self.views.get(doc_id)?;
        let o = &self.origins[&v.origin];
        Some(o.doc.project(&v.selector, &v.fragments)?.view_text)
    }

    /// Variant counts of the fragments currently visible in each view.
    pub fn fragment_variants(&self) -> FragmentVariants {
        self.views
            .iter()
            .map(|(id, v)| {
                (
                    id.clone(),
                    v.projection
                        .fragments
                        .iter()
                        .map(|f| f.variants.len())
                        .collect(),
                )
            })
            .collect()
    }

    pub fn origin_of(&self, doc_id: &str) -> Option<&str> {
        self.views.get(doc_id).map(|v| v.origin.as_str())
    }

    pub fn origin_text(&self, origin: &str) -> Option<&str> {
        self.origins.get(origin).map(|o| o.doc.text())
    }

    pub fn origin_seq(&self, origin: &str) -> Option<u64> {
        self.origins.get(origin).map(|o| o.log.latest_seq())
    }

    pub fn language_of(&self, doc_id: &str) -> Option<&str> {
        let v = self.views.get(doc_id)?;
        self.origins[&v.origin].language.as_deref()
    }

    pub fn connect(&mut self, role: Role) -> ClientId {
        let id = ClientId(self.next_client);
        self.next_client += 1;
        self.sessions.insert(
            id,
            Session {
                role,
                hello: false,
                open: BTreeSet::new(),
            },
        );
        id
    }

    pub fn disconnect(&mut self, client: ClientId) {
        self.sessions.remove(&client);
    }

    pub fn session_count(&self) -> usize {
        self.sessions.len()
    }

    /// Analysis jobs for every view with a language, e.g. at startup.
    pub fn analyze_all(&self) -> Vec<Effect> {
        self.doc_order
            .iter()
            .filter_map(|d| self.analysis(d))
            .collect()
    }

    fn analysis(&self, doc_id: &str) -> Option<Effect> {
        let v = self.views.get(doc_id)?;
        let language = self.origins[&v.origin].language.clone()?;
        Some(Effect::Analyze(AnalysisJob {
            doc_id: doc_id.to_owned(),
            seq: v.log.latest_seq(),
            text: v.log.text().to_owned(),
            language,
        }))
    }

    fn subscribers(&self, doc_id: &str) -> Vec<ClientId> {
        self.sessions
            .iter()
            .filter(|(_, s)| s.open.contains(doc_id))
            .map(|(id, _)| *id)
            .collect()
    }

    fn doc_state(&self, doc_id: &str) -> WireMessage {
        let v = &self.views[doc_id];
        WireMessage::DocState {
            doc_id: doc_id.to_owned(),
            seq: v.log.latest_seq(),
            text: v.log.text().to_owned(),
        }
    }

    pub fn route(&mut self, client: ClientId, msg: WireMessage) -> Vec<Effect> {
        let Some(session) = self.sessions.get_mut(&client) else {
            return Vec::new();
        };
        if !session.hello {
            return match msg {
                WireMessage::ClientHello { protocol_version } if protocol_version == PROTOCOL_VERSION as u64 => {
                    session.hello = true;
                    vec![send(
                        client,
                        WireMessage::ServerHello {
                            settings_digest: self.digest.clone(),
                            docs: self.doc_order.clone(),
                        },
                    )]
                }
                WireMessage::ClientHello { protocol_version } => vec![
                    send(
                        client,
                        WireMessage::error(
                            codes::VERSION_MISMATCH,
                            format!("server speaks protocol {PROTOCOL_VERSION}, client sent {protocol_version}"),
                        ),
                    ),
                    Effect::Close(client),
                ],
                _ => vec![send(
                    client,
                    WireMessage::error(codes::HELLO_REQUIRED, "send ClientHello first"),
                )],
            };
        }
        match msg {
            WireMessage::OpenDoc { doc_id } => self.open(client, doc_id),
            WireMessage::Edit {
                doc_id,
                parent_seq,
                op,
            } => self.edit(client, doc_id, parent_seq, op),
            WireMessage::FragmentStep {
                doc_id,
                fragment_index,
                variant_index,
            } => self.step(client, doc_id, fragment_index, variant_index),
            WireMessage::ClientHello { .. } => vec![send(
                client,
                WireMessage::error(codes::BAD_REQUEST, "duplicate ClientHello"),
            )],
            other => vec![send(
                client,
                WireMessage::error(
                    codes::BAD_REQUEST,
                    format!("message tag {} is sent by the server only", other.tag()),
                ),
            )],
        }
    }

    fn not_found(client: ClientId, doc_id: &str) -> Vec<Effect> {
        vec![send(
            client,
            WireMessage::error(codes::DOC_NOT_FOUND, format!("no document `{doc_id}`")),
        )]
    }

    fn open(&mut self, client: ClientId, doc_id: String) -> Vec<Effect> {
        if !self.views.contains_key(&doc_id) {
            return Self::not_found(client, &doc_id);
        }
        self.sessions
            .get_mut(&client)
            .unwrap()
            .open
            .insert(doc_id.clone());
        self.snapshot(client, &doc_id)
    }

    /// Current text, followed by the stored annotations if there are any.
    fn snapshot(&self, client: ClientId, doc_id: &str) -> Vec<Effect> {
        let v = &self.views[doc_id];
        let mut out = vec![send(client, self.doc_state(doc_id))];
        if v.analyzed_seq.is_some() {
            out.push(send(
                client,
                WireMessage::Annotations {
                    doc_id: doc_id.to_owned(),
                    seq: v.log.latest_seq(),
                    batch: v.annotations.clone(),
                },
            ));
        }
        out
    }

    fn reject(
        &self,
        client: ClientId,
        doc_id: &str,
        reason: impl std::fmt::Display,
    ) -> Vec<Effect> {
        let mut out = vec![send(
            client,
            WireMessage::error(codes::EDIT_REJECTED, format!("{doc_id}: {reason}")),
        )];
        out.extend(self.snapshot(client, doc_id));
        out
    }

    fn edit(
        &mut self,
        client: ClientId,
        doc_id: String,
        parent_seq: u64,
        op: Operation,
    ) -> Vec<Effect> {
        let Some(view) = self.views.get(&doc_id) else {
            return Self::not_found(client, &doc_id);
        };
        if !self.sessions[&client].open.contains(&doc_id) {
            return vec![send(
                client,
                WireMessage::error(
                    codes::BAD_REQUEST,
                    format!("document `{doc_id}` is not open"),
                ),
            )];
        }
        let rebased = match view.log.rebase(parent_seq, &op) {
            Ok(op) => op,
            Err(e) => return self.reject(client, &doc_id, e),
        };
        let origin = &self.origins[&view.origin];
        let edit = match origin
            .doc
            .edit_through_view(&view.selector, &view.fragments, &rebased)
        {
            Ok(edit) => edit,
            Err(e) => return self.reject(client, &doc_id, e),
        };
        let origin_id = view.origin.clone();
        let origin = self.origins.get_mut(&origin_id).unwrap();
        origin
            .log
            .commit(client, edit.raw_op.clone())
            .expect("raw edit applies to the origin head");
        origin.doc = edit.document;
        let raw_op = edit.raw_op;
        let mut fresh = Some(edit.projection);
        let view_ids = origin.views.clone();
        let mut out = Vec::new();
        for vid in view_ids {
            let own = vid == doc_id;
            let (delta, projection) = if own {
                (rebased.clone(), fresh.take().unwrap())
            } else {
                let v = &self.views[&vid];
                let projection = self.origins[&origin_id]
                    .doc
                    .project(&v.selector, &v.fragments)
                    .expect("snippet names are preserved by accepted edits");
                let delta = map_raw_edit(&v.projection, &raw_op)
                    .ok()
                    .filter(|d| {
                        d.apply(&v.projection.view_text).ok().as_deref()
                            == Some(&projection.view_text)
                    })
                    .unwrap_or_else(|| {
                        Operation::diff(&v.projection.view_text, &projection.view_text)
                    });
                (delta, projection)
            };
            if !own && delta.is_identity() {
                self.views.get_mut(&vid).unwrap().projection = projection;
                continue;
            }
            out.extend(self.commit_view(&vid, client, delta, projection, own));
        }
        out
    }

    /// Appends a revision to a view and notifies its subscribers. The
    /// author gets an Ack when `acked`, RemoteEdit otherwise.
    fn commit_view(
        &mut self,
        doc_id: &str,
        author: ClientId,
        delta: Operation,
        projection: Projection,
        acked: bool,
    ) -> Vec<Effect> {
        let v = self.views.get_mut(doc_id).unwrap();
        let seq = v
            .log
            .commit(author, delta.clone())
            .expect("view delta applies to the view head");
        debug_assert_eq!(v.log.text(), projection.view_text);
        v.projection = projection;
        v.annotations = transform_annotations(&v.annotations, &delta);
        let mut out = Vec::new();
        for sub in self.subscribers(doc_id) {
            let msg = if acked && sub == author {
                WireMessage::Ack {
                    doc_id: doc_id.to_owned(),
                    seq,
                }
            } else {
                WireMessage::RemoteEdit {
                    doc_id: doc_id.to_owned(),
                    seq,
                    op: delta.clone(),
                    author: author.0,
                }
            };
            out.push(send(sub, msg));
        }
        if acked && !self.sessions[&author].open.contains(doc_id) {
            out.push(send(
                author,
                WireMessage::Ack {
                    doc_id: doc_id.to_owned(),
                    seq,
                },
            ));
        }
        out.extend(self.analysis(doc_id));
        out
    }

    fn step(
        &mut self,
        client: ClientId,
        doc_id: String,
        fragment: u64,
        variant: u64,
    ) -> Vec<Effect> {
        if self.sessions[&client].role != Role::Presenter {
            return vec![send(
                client,
                WireMessage::error(codes::FORBIDDEN, "only the presenter can step fragments"),
            )];
        }
        let Some(view) = self.views.get(&doc_id) else {
            return Self::not_found(client, &doc_id);
        };
        let valid = view
            .projection
            .fragments
            .get(fragment as usize)
            .is_some_and(|f| (variant as usize) < f.variants.len());
        if !valid {
            return vec![send(
                client,
                WireMessage::error(
                    codes::BAD_REQUEST,
                    format!("`{doc_id}` has no fragment {fragment} with variant {variant}"),
                ),
            )];
        }
        let mut fragments = view.fragments.clone();
        fragments.insert(fragment as usize, variant as usize);
        let projection = self.origins[&view.origin]
            .doc
            .project(&view.selector, &fragments)
            .expect("view exists");
        let delta = Operation::diff(&view.projection.view_text, &projection.view_text);
        let mut out = Vec::new();
        let v = self.views.get_mut(&doc_id).unwrap();
        v.fragments = fragments;
        if delta.is_identity() {
            v.projection = projection;
        } else {
            out.extend(self.commit_view(&doc_id, client, delta, projection, false));
        }
        for (&id, s) in &self.sessions {
            if id != client && s.hello {
                out.push(send(
                    id,
                    WireMessage::FragmentStep {
                        doc_id: doc_id.clone(),
                        fragment_index: fragment,
                        variant_index: variant,
                    },
                ));
            }
        }
        out
    }

    /// Stores an assistant batch after bringing it to the head revision.
    /// Batches older than the stored one are discarded.
    pub fn annotations_ready(&mut self, batch: AnnotationBatch) -> Vec<Effect> {
        let Some(v) = self.views.get_mut(&batch.doc_id) else {
            return Vec::new();
        };
        if batch.for_seq > v.log.latest_seq() || v.analyzed_seq.is_some_and(|s| s > batch.for_seq) {
            return Vec::new();
        }
        let Ok(to_head) = v.log.composed_since(batch.for_seq) else {
            return Vec::new();
        };
        v.annotations = transform_annotations(&batch.annotations, &to_head);
        v.analyzed_seq = Some(batch.for_seq);
        let msg = WireMessage::Annotations {
            doc_id: batch.doc_id.clone(),
            seq: v.log.latest_seq(),
            batch: v.annotations.clone(),
        };
        self.subscribers(&batch.doc_id)
            .into_iter()
            .map(|c| send(c, msg.clone()))
            .collect()
    }

    /// Adopts new settings; returns the changes and their broadcast.
    pub fn update_settings(&mut self, settings: Settings) -> (Vec<SettingChange>, Vec<Effect>) {
        let changes = diff_settings(&self.settings, &settings);
        if changes.is_empty() {
            return (changes, Vec::new());
        }
        self.settings = settings;
        self.digest = settings_digest(&self.settings);
        let effects = self
            .sessions
            .iter()
            .filter(|(_, s)| s.hello)
            .map(|(&id, _)| {
                send(
                    id,
                    WireMessage::SettingsChanged {
                        changes: changes.clone(),
                    },
                )
            })
            .collect();
        (changes, effects)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cobra_core::slidedoc::{CodeRef, Origin};

    fn one_doc(text: &str, language: &str) -> CodeRefs {
        CodeRefs {
            origins: vec![Origin {
                id: "inline-1".into(),
                path: None,
                language: Some(language.into()),
                text: text.into(),
            }],
            refs: vec![CodeRef {
                doc_id: "inline-1".into(),
                origin: "inline-1".into(),
                selector: Selector::Whole,
                language: Some(language.into()),
                classes: vec![],
            }],
        }
    }

    fn hello(hub: &mut Hub, role: Role) -> ClientId {
        let c = hub.connect(role);
        hub.route(
            c,
            WireMessage::ClientHello {
                protocol_version: 1,
            },
        );
        c
    }

    fn sent_to(effects: &[Effect], client: ClientId) -> Vec<&WireMessage> {
        effects
            .iter()
            .filter_map(|e| match e {
                Effect::Send(c, m) if *c == client => Some(m),
                _ => None,
            })
            .collect()
    }

    fn insert(len: usize, at: usize, s: &str) -> Operation {
        let mut op = Operation::new();
        op.retain(at).insert(s).retain(len - at);
        op
    }

    #[test]
    fn hello_is_required_and_versioned() {
        let mut hub = Hub::new(Settings::default(), &one_doc("x", "demo")).unwrap();
        let c = hub.connect(Role::Viewer);
        let e = hub.route(
            c,
            WireMessage::OpenDoc {
                doc_id: "inline-1".into(),
            },
        );
        assert!(
            matches!(sent_to(&e, c)[0], WireMessage::Error { code, .. } if code == codes::HELLO_REQUIRED)
        );
        let e = hub.route(
            c,
            WireMessage::ClientHello {
                protocol_version: 2,
            },
        );
        assert!(
            matches!(sent_to(&e, c)[0], WireMessage::Error { code, .. } if code == codes::VERSION_MISMATCH)
        );
        assert!(e.contains(&Effect::Close(c)));
        let e = hub.route(
            c,
            WireMessage::ClientHello {
                protocol_version: 1,
            },
        );
        assert!(
            matches!(sent_to(&e, c)[0], WireMessage::ServerHello { docs, .. } if docs == &["inline-1"])
        );
    }

    #[test]
    fn unknown_doc() {
        let mut hub = Hub::new(Settings::default(), &one_doc("x", "demo")).unwrap();
        let c = hello(&mut hub, Role::Viewer);
        let e = hub.route(
            c,
            WireMessage::OpenDoc {
                doc_id: "nope".into(),
            },
        );
        assert!(
            matches!(sent_to(&e, c)[0], WireMessage::Error { code, .. } if code == codes::DOC_NOT_FOUND)
        );
    }

    #[test]
    fn stale_edit_is_transformed_for_the_presenter() {
        let mut hub = Hub::new(Settings::default(), &one_doc("abc", "demo")).unwrap();
        let p = hello(&mut hub, Role::Presenter);
        let v = hello(&mut hub, Role::Viewer);
        for c in [p, v] {
            hub.route(
                c,
                WireMessage::OpenDoc {
                    doc_id: "inline-1".into(),
                },
            );
        }
        let e1 = hub.route(
            p,
            WireMessage::Edit {
                doc_id: "inline-1".into(),
                parent_seq: 0,
                op: insert(3, 0, "X"),
            },
        );
        assert_eq!(
            sent_to(&e1, p),
            vec![&WireMessage::Ack {
                doc_id: "inline-1".into(),
                seq: 1
            }]
        );
        // The viewer edits revision 0 concurrently.
        let e2 = hub.route(
            v,
            WireMessage::Edit {
                doc_id: "inline-1".into(),
                parent_seq: 0,
                op: insert(3, 3, "Y"),
            },
        );
        let to_p = sent_to(&e2, p);
        let WireMessage::RemoteEdit {
            seq: 2, op, author, ..
        } = to_p[0]
        else {
            panic!("{to_p:?}")
        };
        assert_eq!(*author, v.0);
        assert_eq!(op.apply("Xabc").unwrap(), "XabcY");
        assert_eq!(hub.view_text("inline-1"), Some("XabcY"));
    }

    #[test]
    fn viewer_cannot_step() {
        let mut hub = Hub::new(
            Settings::default(),
            &one_doc("val x = /*(*/???/*|3 * 7)*/", "scala"),
        )
        .unwrap();
        let v = hello(&mut hub, Role::Viewer);
        let e = hub.route(
            v,
            WireMessage::FragmentStep {
                doc_id: "inline-1".into(),
                fragment_index: 0,
                variant_index: 1,
            },
        );
        assert!(
            matches!(sent_to(&e, v)[0], WireMessage::Error { code, .. } if code == codes::FORBIDDEN)
        );
    }

    #[test]
    fn presenter_steps_a_fragment() {
        let mut hub = Hub::new(
            Settings::default(),
            &one_doc("val x = /*(*/???/*|3 * 7)*/", "scala"),
        )
        .unwrap();
        let p = hello(&mut hub, Role::Presenter);
        let v = hello(&mut hub, Role::Viewer);
        for c in [p, v] {
            hub.route(
                c,
                WireMessage::OpenDoc {
                    doc_id: "inline-1".into(),
                },
            );
        }
        assert_eq!(hub.view_text("inline-1"), Some("val x = ???"));
        let e = hub.route(
            p,
            WireMessage::FragmentStep {
                doc_id: "inline-1".into(),
                fragment_index: 0,
                variant_index: 1,
            },
        );
        assert_eq!(hub.view_text("inline-1"), Some("val x = 3 * 7"));
        assert!(matches!(
            sent_to(&e, p)[0],
            WireMessage::RemoteEdit { seq: 1, .. }
        ));
        let to_v = sent_to(&e, v);
        assert!(matches!(to_v[0], WireMessage::RemoteEdit { .. }));
        assert!(matches!(
            to_v[1],
            WireMessage::FragmentStep {
                variant_index: 1,
                ..
            }
        ));
        // The raw source is untouched by stepping.
        assert_eq!(
            hub.origin_text("inline-1"),
            Some("val x = /*(*/???/*|3 * 7)*/")
        );
    }

    #[test]
    fn rejected_edit_resyncs() {
        let text = "a\n// begin #s\nb\n// end #s\n";
        let mut code = one_doc(text, "scala");
        code.refs[0].doc_id = "file-x".into();
        let mut hub = Hub::new(Settings::default(), &code).unwrap();
        let c = hello(&mut hub, Role::Presenter);
        hub.route(
            c,
            WireMessage::OpenDoc {
                doc_id: "file-x".into(),
            },
        );
        let mut op = Operation::new();
        op.retain(1).delete(1).retain(2);
        let e = hub.route(
            c,
            WireMessage::Edit {
                doc_id: "file-x".into(),
                parent_seq: 0,
                op,
            },
        );
        let msgs = sent_to(&e, c);
        assert!(matches!(msgs[0], WireMessage::Error { code, .. } if code == codes::EDIT_REJECTED));
        assert!(matches!(msgs[1], WireMessage::DocState { seq: 0, .. }));
    }
}
