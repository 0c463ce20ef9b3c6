//! Binary message encoding for the `/ws` endpoint.
//!
//! Every message is a one-byte tag followed by its fields in declaration
//! order. Integers are unsigned LEB128 varints, strings a varint byte
//! length plus UTF-8, lists a varint count plus elements, booleans and
//! option flags a single 0/1 byte. An operation is a component count, then
//! per component a kind byte (0 retain, 1 insert, 2 delete) followed by a
//! varint or a string.

use cobra_core::config::SettingChange;
use cobra_core::sync::{Annotation, AnnotationKind, Component, Operation};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WireMessage {
    ClientHello {
        protocol_version: u64,
    },
    ServerHello {
        settings_digest: String,
        docs: Vec<String>,
    },
    OpenDoc {
        doc_id: String,
    },
    DocState {
        doc_id: String,
        seq: u64,
        text: String,
    },
    Edit {
        doc_id: String,
        parent_seq: u64,
        op: Operation,
    },
    Ack {
        doc_id: String,
        seq: u64,
    },
    RemoteEdit {
        doc_id: String,
        seq: u64,
        op: Operation,
        author: u64,
    },
    Annotations {
        doc_id: String,
        seq: u64,
        batch: Vec<Annotation>,
    },
    FragmentStep {
        doc_id: String,
        fragment_index: u64,
        variant_index: u64,
    },
    SettingsChanged {
        changes: Vec<SettingChange>,
    },
    Error {
        code: String,
        message: String,
    },
}

impl WireMessage {
    pub fn tag(&self) -> u8 {
        match self {
            WireMessage::ClientHello { .. } => 0,
            WireMessage::ServerHello { .. } => 1,
            WireMessage::OpenDoc { .. } => 2,
            WireMessage::DocState { .. } => 3,
            WireMessage::Edit { .. } => 4,
            WireMessage::Ack { .. } => 5,
            WireMessage::RemoteEdit { .. } => 6,
            WireMessage::Annotations { .. } => 7,
            WireMessage::FragmentStep { .. } => 8,
            WireMessage::SettingsChanged { .. } => 9,
            WireMessage::Error { .. } => 10,
        }
    }

    pub fn error(code: &str, message: impl Into<String>) -> Self {
        WireMessage::Error {
            code: code.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("cannot decode message at byte {offset}: {reason}")]
pub struct DecodeError {
    pub offset: usize,
    pub reason: String,
}

struct Writer(Vec<u8>);

impl Writer {
    fn varint(&mut self, mut v: u64) {
        loop {
            let byte = (v & 0x7f) as u8;
            v >>= 7;
            if v == 0 {
                self.0.push(byte);
                return;
            }
            self.0.push(byte | 0x80);
        }
    }

    fn usize(&mut self, v: usize) {
        self.varint(v as u64);
    }

    fn string(&mut self, s: &str) {
        self.usize(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }

    fn bool(&mut self, b: bool) {
        self.0.push(b as u8);
    }

    fn opt_string(&mut self, s: Option<&str>) {
        match s {
            Some(s) => {
                self.0.push(1);
                self.string(s);
            }
            None => self.0.push(0),
        }
    }

    fn op(&mut self, op: &Operation) {
        self.usize(op.components().len());
        for c in op.components() {
            match c {
                Component::Retain(n) => {
                    self.0.push(0);
                    self.usize(*n);
                }
                Component::Insert(s) => {
                    self.0.push(1);
                    self.string(s);
                }
                Component::Delete(n) => {
                    self.0.push(2);
                    self.usize(*n);
                }
            }
        }
    }

    fn annotation(&mut self, a: &Annotation) {
        self.usize(a.start);
        self.usize(a.end);
        self.0.push(match a.kind {
            AnnotationKind::Error => 0,
            AnnotationKind::Warning => 1,
            AnnotationKind::Info => 2,
            AnnotationKind::Token => 3,
        });
        self.opt_string(a.class.as_deref());
        self.opt_string(a.message.as_deref());
    }
}

pub fn encode(msg: &WireMessage) -> Vec<u8> {
    let mut w = Writer(vec![msg.tag()]);
    match msg {
        WireMessage::ClientHello { protocol_version } => w.varint(*protocol_version),
        WireMessage::ServerHello {
            settings_digest,
            docs,
        } => {
            w.string(settings_digest);
            w.usize(docs.len());
            docs.iter().for_each(|d| w.string(d));
        }
        WireMessage::OpenDoc { doc_id } => w.string(doc_id),
        WireMessage::DocState { doc_id, seq, text } => {
            w.string(doc_id);
            w.varint(*seq);
            w.string(text);
        }
        WireMessage::Edit {
            doc_id,
            parent_seq,
            op,
        } => {
            w.string(doc_id);
            w.varint(*parent_seq);
            w.op(op);
        }
        WireMessage::Ack { doc_id, seq } => {
            w.string(doc_id);
            w.varint(*seq);
        }
        WireMessage::RemoteEdit {
            doc_id,
            seq,
            op,
            author,
        } => {
            w.string(doc_id);
            w.varint(*seq);
            w.op(op);
            w.varint(*author);
        }
        WireMessage::Annotations { doc_id, seq, batch } => {
            w.string(doc_id);
            w.varint(*seq);
            w.usize(batch.len());
            batch.iter().for_each(|a| w.annotation(a));
        }
        WireMessage::FragmentStep {
            doc_id,
            fragment_index,
            variant_index,
        } => {
            w.string(doc_id);
            w.varint(*fragment_index);
            w.varint(*variant_index);
        }
        WireMessage::SettingsChanged { changes } => {
            w.usize(changes.len());
            for c in changes {
                w.string(&c.path);
                w.string(&c.old);
                w.string(&c.new);
                w.bool(c.hot);
            }
        }
        WireMessage::Error { code, message } => {
            w.string(code);
            w.string(message);
        }
    }
    w.0
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn fail<T>(&self, reason: impl Into<String>) -> Result<T, DecodeError> {
        Err(DecodeError {
            offset: self.pos,
            reason: reason.into(),
        })
    }

    fn byte(&mut self) -> Result<u8, DecodeError> {
        match self.bytes.get(self.pos) {
            Some(&b) => {
                self.pos += 1;
                Ok(b)
            }
            None => self.fail("unexpected end of message"),
        }
    }

    fn varint(&mut self) -> Result<u64, DecodeError> {
        let start = self.pos;
        let mut value: u64 = 0;
        for i in 0..10 {
            let b = self.byte()?;
            let bits = u64::from(b & 0x7f);
            if i == 9 && bits > 1 {
                self.pos = start;
                return self.fail("varint overflows 64 bits");
            }
            value |= bits << (7 * i);
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        self.pos = start;
        self.fail("varint longer than 10 bytes")
    }

    fn usize(&mut self) -> Result<usize, DecodeError> {
        let v = self.varint()?;
        usize::try_from(v).or_else(|_| self.fail("integer too large"))
    }

    /// A count of items that each take at least one byte.
    fn count(&mut self) -> Result<usize, DecodeError> {
        let n = self.usize()?;
        if n > self.bytes.len() - self.pos {
            return self.fail(format!("count {n} exceeds remaining bytes"));
        }
        Ok(n)
    }

    fn string(&mut self) -> Result<String, DecodeError> {
        let len = self.usize()?;
        let start = self.pos;
        let Some(end) = start.checked_add(len).filter(|&e| e <= self.bytes.len()) else {
            return self.fail("string runs past the end of the message");
        };
        let s = std::str::from_utf8(&self.bytes[start..end]).or_else(|e| {
            self.pos = start + e.valid_up_to();
            self.fail("invalid UTF-8")
        })?;
        self.pos = end;
        Ok(s.to_owned())
    }

    fn bool(&mut self) -> Result<bool, DecodeError> {
        match self.byte()? {
            0 => Ok(false),
            1 => Ok(true),
            b => {
                self.pos -= 1;
                self.fail(format!("invalid boolean byte {b}"))
            }
        }
    }

    fn opt_string(&mut self) -> Result<Option<String>, DecodeError> {
        Ok(if self.bool()? {
            Some(self.string()?)
        } else {
            None
        })
    }

    fn op(&mut self) -> Result<Operation, DecodeError> {
        let n = self.count()?;
        let mut components = Vec::with_capacity(n);
        for _ in 0..n {
            let at = self.pos;
            components.push(match self.byte()? {
                0 => Component::Retain(self.usize()?),
                1 => Component::Insert(self.string()?),
                2 => Component::Delete(self.usize()?),
                k => {
                    self.pos = at;
                    return self.fail(format!("invalid operation component kind {k}"));
                }
            });
        }
        let op = Operation::from_components(components.iter().cloned());
        if op.components() != components.as_slice() {
            return self.fail("operation is not in normal form");
        }
        Ok(op)
    }

    fn annotation(&mut self) -> Result<Annotation, DecodeError> {
        let start = self.usize()?;
        let end = self.usize()?;
        let at = self.pos;
        let kind = match self.byte()? {
            0 => AnnotationKind::Error,
            1 => AnnotationKind::Warning,
            2 => AnnotationKind::Info,
            3 => AnnotationKind::Token,
            k => {
                self.pos = at;
                return self.fail(format!("invalid annotation kind {k}"));
            }
        };
        if start > end {
            return self.fail("annotation ends before it starts");
        }
        Ok(Annotation {
            start,
            end,
            kind,
            class: self.opt_string()?,
            message: self.opt_string()?,
        })
    }
}

pub fn decode(bytes: &[u8]) -> Result<WireMessage, DecodeError> {
    let mut r = Reader { bytes, pos: 0 };
    let tag = r.byte()?;
    let msg = match tag {
        0 => WireMessage::ClientHello {
            protocol_version: r.varint()?,
        },
        1 => {
            let settings_digest = r.string()?;
            let n = r.count()?;
            let docs = (0..n).map(|_| r.string()).collect::<Result<_, _>>()?;
            WireMessage::ServerHello {
                settings_digest,
                docs,
            }
        }
        2 => WireMessage::OpenDoc {
            doc_id: r.string()?,
        },
        3 => WireMessage::DocState {
            doc_id: r.string()?,
            seq: r.varint()?,
            text: r.string()?,
        },
        4 => WireMessage::Edit {
            doc_id: r.string()?,
            parent_seq: r.varint()?,
            op: r.op()?,
        },
        5 => WireMessage::Ack {
            doc_id: r.string()?,
            seq: r.varint()?,
        },
        6 => WireMessage::RemoteEdit {
            doc_id: r.string()?,
            seq: r.varint()?,
            op: r.op()?,
            author: r.varint()?,
        },
        7 => {
            let doc_id = r.string()?;
            let seq = r.varint()?;
            let n = r.count()?;
            let batch = (0..n).map(|_| r.annotation()).collect::<Result<_, _>>()?;
            WireMessage::Annotations { doc_id, seq, batch }
        }
        8 => WireMessage::FragmentStep {
            doc_id: r.string()?,
            fragment_index: r.varint()?,
            variant_index: r.varint()?,
        },
        9 => {
            let n = r.count()?;
            let changes = (0..n)
                .map(|_| {
                    Ok(SettingChange {
                        path: r.string()?,
                        old: r.string()?,
                        new: r.string()?,
                        hot: r.bool()?,
                    })
                })
                .collect::<Result<_, DecodeError>>()?;
            WireMessage::SettingsChanged { changes }
        }
        10 => WireMessage::Error {
            code: r.string()?,
            message: r.string()?,
        },
        t => {
            r.pos = 0;
            return r.fail(format!("unknown message tag {t}"));
        }
    };
    if r.pos != bytes.len() {
        return r.fail("trailing bytes after message");
    }
    Ok(msg)
}
