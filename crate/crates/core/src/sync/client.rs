//! Client half of the synchronization protocol.
//!
//! A client has at most one operation in flight. Edits made while waiting
//! for the acknowledgment are composed into a buffer and sent once the
//! in-flight operation is acknowledged.

use super::annotation::{transform_annotations, Annotation};
use super::log::SyncError;
use super::operation::{Operation, OtError};

/// An operation the client must send to the server.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outgoing {
    pub parent_seq: u64,
    pub op: Operation,
}

#[derive(Clone, Debug)]
pub struct ClientDoc {
    text: String,
    seq: u64,
    outstanding: Option<Operation>,
    buffer: Option<Operation>,
    /// Annotations valid for the server text at `seq`.
    annotations: Vec<Annotation>,
}

impl ClientDoc {
    pub fn new(seq: u64, text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            seq,
            outstanding: None,
            buffer: None,
            annotations: Vec::new(),
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    /// Annotations mapped onto the local text, through pending edits.
    pub fn local_annotations(&self) -> Vec<Annotation> {
        let mut anns = self.annotations.clone();
        for op in self.outstanding.iter().chain(&self.buffer) {
            anns = transform_annotations(&anns, op);
        }
        anns
    }

    pub fn is_synchronized(&self) -> bool {
        self.outstanding.is_none() && self.buffer.is_none()
    }

    /// Applies a local edit; returns the message to send, if any.
    pub fn local_edit(&mut self, op: Operation) -> Result<Option<Outgoing>, OtError> {
        self.text = op.apply(&self.text)?;
        if self.outstanding.is_none() {
            self.outstanding = Some(op.clone());
            return Ok(Some(Outgoing {
                parent_seq: self.seq,
                op,
            }));
        }
        self.buffer = Some(match self.buffer.take() {
            None => op,
            Some(buffer) => buffer.compose(&op)?,
        });
        Ok(None)
    }

    /// The server committed our in-flight operation as revision `seq`.
    pub fn on_ack(&mut self, seq: u64) -> Result<Option<Outgoing>, SyncError> {
        self.expect_next(seq)?;
        let acked = self.outstanding.take();
        if let Some(acked) = acked {
            self.annotations = transform_annotations(&self.annotations, &acked);
        }
        self.seq = seq;
        Ok(self.buffer.take().map(|op| {
            self.outstanding = Some(op.clone());
            Outgoing {
                parent_seq: seq,
                op,
            }
        }))
    }

    /// Another participant's revision `seq` arrived.
    pub fn on_remote(&mut self, seq: u64, op: &Operation) -> Result<(), SyncError> {
        self.expect_next(seq)?;
        self.annotations = transform_annotations(&self.annotations, op);
        let mut incoming = op.clone();
        if let Some(outstanding) = self.outstanding.take() {
            let (ours, theirs) = outstanding.transform(&incoming)?;
            self.outstanding = Some(ours);
            incoming = theirs;
        }
        if let Some(buffer) = self.buffer.take() {
            let (ours, theirs) = buffer.transform(&incoming)?;
            self.buffer = Some(ours);
            incoming = theirs;
        }
        self.text = incoming.apply(&self.text)?;
        self.seq = seq;
        Ok(())
    }

    /// Annotations computed by the server for revision `seq`.
    pub fn on_annotations(&mut self, seq: u64, annotations: Vec<Annotation>) {
        if seq == self.seq {
            self.annotations = annotations;
        }
    }

    /// Drops local state and adopts the server's text.
    pub fn reset(&mut self, seq: u64, text: impl Into<String>) {
        self.text = text.into();
        self.seq = seq;
        self.outstanding = None;
        self.buffer = None;
        self.annotations.clear();
    }

    fn expect_next(&self, seq: u64) -> Result<(), SyncError> {
        if seq != self.seq + 1 {
            return Err(SyncError::UnknownRevision {
                parent: seq,
                latest: self.seq,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sync::{ClientId, RevisionLog};

    fn insert_at(len: usize, at: usize, s: &str) -> Operation {
        let mut op = Operation::new();
        op.retain(at).insert(s).retain(len - at);
        op
    }

    #[test]
    fn buffered_edits_are_sent_after_ack() {
        let mut server = RevisionLog::new("d", "ab");
        let mut client = ClientDoc::new(0, "ab");
        let first = client.local_edit(insert_at(2, 0, "x")).unwrap().unwrap();
        assert!(client.local_edit(insert_at(3, 3, "y")).unwrap().is_none());
        let c1 = server
            .receive(ClientId(1), first.parent_seq, &first.op)
            .unwrap();
        let second = client.on_ack(c1.seq).unwrap().unwrap();
        assert_eq!(second.parent_seq, 1);
        let c2 = server
            .receive(ClientId(1), second.parent_seq, &second.op)
            .unwrap();
        assert!(client.on_ack(c2.seq).unwrap().is_none());
        assert!(client.is_synchronized());
        assert_eq!(client.text(), server.text());
        assert_eq!(server.text(), "xaby");
    }

    #[test]
    fn out_of_order_revision_is_an_error() {
        let mut client = ClientDoc::new(3, "");
        assert!(client.on_remote(5, &Operation::new()).is_err());
        assert!(client.on_ack(4).is_ok());
    }
}
