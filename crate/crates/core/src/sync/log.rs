use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::operation::{char_len, Operation, OtError};

/// Server-assigned session identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClientId(pub u64);

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "client-{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Revision {
    pub seq: u64,
    pub author: ClientId,
    pub op: Operation,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SyncError {
    #[error("parent revision {parent} is newer than the latest revision {latest}")]
    UnknownRevision { parent: u64, latest: u64 },
    #[error("parent revision {parent} is no longer retained")]
    StaleParent { parent: u64 },
    #[error(transparent)]
    Ot(#[from] OtError),
}

/// Result of accepting a client operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Committed {
    pub seq: u64,
    /// The operation as applied to the head text; this is what other
    /// participants receive.
    pub op: Operation,
}

/// Append-only history of one document. Revision `k` (1-based) applies to
/// the text produced by revision `k - 1`; revision 0 is the initial text.
#[derive(Clone, Debug)]
pub struct RevisionLog {
    doc_id: String,
    initial_text: String,
    text: String,
    len: usize,
    revisions: Vec<Revision>,
}

impl RevisionLog {
    pub fn new(doc_id: impl Into<String>, initial_text: impl Into<String>) -> Self {
        let initial_text = initial_text.into();
        Self {
            doc_id: doc_id.into(),
            len: char_len(&initial_text),
            text: initial_text.clone(),
            initial_text,
            revisions: Vec::new(),
        }
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn initial_text(&self) -> &str {
        &self.initial_text
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Length of the head text in characters.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn latest_seq(&self) -> u64 {
        self.revisions.len() as u64
    }

    pub fn revisions(&self) -> &[Revision] {
        &self.revisions
    }

    /// Revisions committed after `seq`.
    pub fn since(&self, seq: u64) -> Result<&[Revision], SyncError> {
        let latest = self.latest_seq();
        if seq > latest {
            return Err(SyncError::UnknownRevision {
                parent: seq,
                latest,
            });
        }
        Ok(&self.revisions[seq as usize..])
    }

    /// Transforms `op`, written against revision `parent_seq`, so that it
    /// applies to the head text. Nothing is committed.
    pub fn rebase(&self, parent_seq: u64, op: &Operation) -> Result<Operation, SyncError> {
        let mut op = op.clone();
        for rev in self.since(parent_seq)? {
            let (rebased, _) = op.transform(&rev.op)?;
            op = rebased;
        }
        if op.base_len() != self.len {
            return Err(OtError::LengthMismatch {
                expected: self.len,
                found: op.base_len(),
            }
            .into());
        }
        Ok(op)
    }

    /// Appends an operation that already applies to the head text.
    pub fn commit(&mut self, author: ClientId, op: Operation) -> Result<u64, SyncError> {
        self.text = op.apply(&self.text)?;
        self.len = op.target_len();
        let seq = self.latest_seq() + 1;
        self.revisions.push(Revision { seq, author, op });
        Ok(seq)
    }

    /// Rebases a concurrent operation onto the head and commits it.
    pub fn receive(
        &mut self,
        author: ClientId,
        parent_seq: u64,
        op: &Operation,
    ) -> Result<Committed, SyncError> {
        let op = self.rebase(parent_seq, op)?;
        let seq = self.commit(author, op.clone())?;
        Ok(Committed { seq, op })
    }

    /// Composition of every revision after `seq`, i.e. the operation from the
    /// text at `seq` to the head text.
    pub fn composed_since(&self, seq: u64) -> Result<Operation, SyncError> {
        let revs = self.since(seq)?;
        let mut acc: Option<Operation> = None;
        for rev in revs {
            acc = Some(match acc {
                None => rev.op.clone(),
                Some(prev) => prev.compose(&rev.op)?,
            });
        }
        Ok(acc.unwrap_or_else(|| Operation::identity(self.len)))
    }

    /// Text as of revision `seq`, replayed from the initial text.
    pub fn text_at(&self, seq: u64) -> Result<String, SyncError> {
        let latest = self.latest_seq();
        if seq > latest {
            return Err(SyncError::UnknownRevision {
                parent: seq,
                latest,
            });
        }
        let mut text = self.initial_text.clone();
        for rev in &self.revisions[..seq as usize] {
            text = rev.op.apply(&text)?;
        }
        Ok(text)
    }
}
