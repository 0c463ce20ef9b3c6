//! Simulation helpers: random protocol messages and in-memory clients that
//! talk to an [`Engine`] without a network in between.

use std::collections::BTreeMap;

use cobra_core::config::SettingChange;
use cobra_core::sync::{Annotation, AnnotationKind, ClientDoc, ClientId, Operation};
use rand::seq::SliceRandom;
use rand::Rng;
use tokio::sync::mpsc::UnboundedReceiver;

use crate::engine::{Engine, Outbound};
use crate::hub::Role;
use crate::wire::WireMessage;

const ALPHABET: &[&str] = &[
    "a", "b", "x", "y", " ", "\n", "(", ")", "[", "]", "1", "?", "é", "λ", "𝔸", "\"", "val ",
];

pub fn random_string<R: Rng>(rng: &mut R, max_pieces: usize) -> String {
    let n = rng.gen_range(0..=max_pieces);
    (0..n).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

/// A random operation applicable to `text`.
pub fn random_operation<R: Rng>(rng: &mut R, text: &str) -> Operation {
    let len = text.chars().count();
    let mut op = Operation::new();
    let mut pos = 0;
    while pos < len {
        let remaining = len - pos;
        match rng.gen_range(0..4) {
            0 => {
                op.insert(&random_string(rng, 3));
            }
            1 => {
                let n = rng.gen_range(1..=remaining.min(4));
                op.delete(n);
                pos += n;
            }
            _ => {
                let n = rng.gen_range(1..=remaining);
                op.retain(n);
                pos += n;
            }
        }
    }
    if rng.gen_bool(0.3) {
        op.insert(&random_string(rng, 3));
    }
    op
}

/// A random edit that touches a single place, as typing does.
pub fn random_keystroke<R: Rng>(rng: &mut R, text: &str) -> Operation {
    let len = text.chars().count();
    let at = rng.gen_range(0..=len);
    let mut op = Operation::new();
    op.retain(at);
    if at < len && rng.gen_bool(0.3) {
        let n = rng.gen_range(1..=(len - at).min(3));
        op.delete(n).retain(len - at - n);
    } else {
        op.insert(&random_string(rng, 2).replace('\n', " "))
            .retain(len - at);
    }
    op
}

fn random_u64<R: Rng>(rng: &mut R) -> u64 {
    match rng.gen_range(0..4) {
        0 => rng.gen_range(0..128),
        1 => rng.gen_range(0..1 << 14),
        2 => rng.gen(),
        _ => u64::MAX,
    }
}

fn random_annotation<R: Rng>(rng: &mut R) -> Annotation {
    let start = rng.gen_range(0..10_000usize);
    let kind = *[
        AnnotationKind::Error,
        AnnotationKind::Warning,
        AnnotationKind::Info,
        AnnotationKind::Token,
    ]
    .choose(rng)
    .unwrap();
    Annotation {
        start,
        end: start + rng.gen_range(0..100usize),
        kind,
        class: rng.gen_bool(0.5).then(|| random_string(rng, 3)),
        message: rng.gen_bool(0.5).then(|| random_string(rng, 6)),
    }
}

/// A random message of any kind, with every field drawn at random.
pub fn random_message<R: Rng>(rng: &mut R) -> WireMessage {
    let text = random_string(rng, 12);
    let doc_id = random_string(rng, 4);
    match rng.gen_range(0..11) {
        0 => WireMessage::ClientHello {
            protocol_version: random_u64(rng),
        },
        1 => WireMessage::ServerHello {
            settings_digest: random_string(rng, 8),
            docs: (0..rng.gen_range(0..5))
                .map(|_| random_string(rng, 4))
                .collect(),
        },
        2 => WireMessage::OpenDoc { doc_id },
        3 => WireMessage::DocState {
            doc_id,
            seq: random_u64(rng),
            text,
        },
        4 => WireMessage::Edit {
            doc_id,
            parent_seq: random_u64(rng),
            op: random_operation(rng, &text),
        },
        5 => WireMessage::Ack {
            doc_id,
            seq: random_u64(rng),
        },
        6 => WireMessage::RemoteEdit {
            doc_id,
            seq: random_u64(rng),
            op: random_operation(rng, &text),
            author: random_u64(rng),
        },
        7 => WireMessage::Annotations {
            doc_id,
            seq: random_u64(rng),
            batch: (0..rng.gen_range(0..6))
                .map(|_| random_annotation(rng))
                .collect(),
        },
        8 => WireMessage::FragmentStep {
            doc_id,
            fragment_index: random_u64(rng),
            variant_index: random_u64(rng),
        },
        9 => WireMessage::SettingsChanged {
            changes: (0..rng.gen_range(0..4))
                .map(|_| SettingChange {
                    path: random_string(rng, 3),
                    old: random_string(rng, 3),
                    new: random_string(rng, 3),
                    hot: rng.gen(),
                })
                .collect(),
        },
        _ => WireMessage::Error {
            code: random_string(rng, 3),
            message: text,
        },
    }
}

/// An in-memory protocol client.
pub struct SimClient {
    pub id: ClientId,
    pub role: Role,
    pub docs: BTreeMap<String, ClientDoc>,
    /// Error replies received, as (code, message).
    pub errors: Vec<(String, String)>,
    pub doc_list: Vec<String>,
    pub closed: bool,
    /// Revision numbers seen per document, in arrival order.
    pub seqs: BTreeMap<String, Vec<u64>>,
    rx: UnboundedReceiver<Outbound>,
}

impl SimClient {
    /// Connects and sends ClientHello; call [`SimClient::pump`] to read
    /// the reply.
    pub fn connect(engine: &Engine, role: Role) -> Self {
        let (id, rx) = engine.connect(role);
        engine.handle(
            id,
            WireMessage::ClientHello {
                protocol_version: 1,
            },
        );
        Self {
            id,
            role,
            docs: BTreeMap::new(),
            errors: Vec::new(),
            doc_list: Vec::new(),
            closed: false,
            seqs: BTreeMap::new(),
            rx,
        }
    }

    pub fn open(&mut self, engine: &Engine, doc_id: &str) {
        engine.handle(
            self.id,
            WireMessage::OpenDoc {
                doc_id: doc_id.to_owned(),
            },
        );
        self.pump(engine);
    }

    pub fn text(&self, doc_id: &str) -> Option<&str> {
        self.docs.get(doc_id).map(|d| d.text())
    }

    /// Applies a local edit and sends it if nothing is in flight.
    pub fn edit(&mut self, engine: &Engine, doc_id: &str, op: Operation) {
        let doc = self.docs.get_mut(doc_id).expect("document is open");
        if let Some(out) = doc.local_edit(op).expect("edit applies to the local text") {
            engine.handle(
                self.id,
                WireMessage::Edit {
                    doc_id: doc_id.to_owned(),
                    parent_seq: out.parent_seq,
                    op: out.op,
                },
            );
        }
    }

    /// Handles every queued message; returns how many there were.
    pub fn pump(&mut self, engine: &Engine) -> usize {
        let mut n = 0;
        while let Ok(out) = self.rx.try_recv() {
            n += 1;
            match out {
                Outbound::Close => self.closed = true,
                Outbound::Message(msg) => self.receive(engine, msg),
            }
        }
        n
    }

    fn receive(&mut self, engine: &Engine, msg: WireMessage) {
        match msg {
            WireMessage::ServerHello { docs, .. } => self.doc_list = docs,
            WireMessage::DocState { doc_id, seq, text } => {
                self.docs
                    .entry(doc_id)
                    .and_modify(|d| d.reset(seq, text.clone()))
                    .or_insert_with(|| ClientDoc::new(seq, text));
            }
            WireMessage::Ack { doc_id, seq } => {
                self.seqs.entry(doc_id.clone()).or_default().push(seq);
                let doc = self
                    .docs
                    .get_mut(&doc_id)
                    .expect("ack for an open document");
                if let Some(out) = doc.on_ack(seq).expect("acks arrive in order") {
                    engine.handle(
                        self.id,
                        WireMessage::Edit {
                            doc_id,
                            parent_seq: out.parent_seq,
                            op: out.op,
                        },
                    );
                }
            }
            WireMessage::RemoteEdit {
                doc_id, seq, op, ..
            } => {
                self.seqs.entry(doc_id.clone()).or_default().push(seq);
                let doc = self
                    .docs
                    .get_mut(&doc_id)
                    .expect("edit for an open document");
                doc.on_remote(seq, &op)
                    .expect("remote edits arrive in order");
            }
            WireMessage::Annotations { doc_id, seq, batch } => {
                if let Some(doc) = self.docs.get_mut(&doc_id) {
                    doc.on_annotations(seq, batch);
                }
            }
            WireMessage::Error { code, message } => self.errors.push((code, message)),
            WireMessage::FragmentStep { .. } | WireMessage::SettingsChanged { .. } => {}
            other => panic!("client received a client-only message: {other:?}"),
        }
    }
}

/// Delivers messages until no client has anything queued and the analysis
/// pipeline is idle.
pub async fn quiesce(engine: &Engine, clients: &mut [SimClient]) {
    loop {
        let mut moved = 0;
        for c in clients.iter_mut() {
            moved += c.pump(engine);
        }
        if moved == 0 {
            engine.idle().await;
            if clients.iter_mut().map(|c| c.pump(engine)).sum::<usize>() == 0 {
                return;
            }
        }
    }
}
