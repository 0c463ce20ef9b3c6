//! Retain/insert/delete operations over plain text.
//!
//! Lengths and offsets are counted in Unicode scalar values (`char`s), never
//! in bytes, so that positions agree with every client regardless of its
//! native string encoding.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// One step of an [`Operation`], applied at the current cursor position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Component {
    /// Copy `n` characters unchanged.
    Retain(usize),
    /// Insert the given (non-empty) text.
    Insert(String),
    /// Skip `n` characters of the input.
    Delete(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OtError {
    #[error("length mismatch: expected {expected} characters, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

/// A normalized sequence of components.
///
/// Adjacent components never share a kind, and an insert always precedes an
/// adjacent delete, so two operations with the same component list compare
/// equal.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Operation {
    components: Vec<Component>,
    base_len: usize,
    target_len: usize,
}

pub(crate) fn char_len(s: &str) -> usize {
    s.chars().count()
}

impl Operation {
    pub fn new() -> Self {
        Self::default()
    }

    /// The no-op over a text of `len` characters.
    pub fn identity(len: usize) -> Self {
        let mut op = Self::new();
        op.retain(len);
        op
    }

    pub fn from_components<I: IntoIterator<Item = Component>>(components: I) -> Self {
        let mut op = Self::new();
        for c in components {
            op.push(c);
        }
        op
    }

    pub fn push(&mut self, component: Component) -> &mut Self {
        match component {
            Component::Retain(n) => self.retain(n),
            Component::Insert(s) => self.insert(&s),
            Component::Delete(n) => self.delete(n),
        }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn is_identity(&self) -> bool {
        self.components
            .iter()
            .all(|c| matches!(c, Component::Retain(_)))
    }

    pub fn retain(&mut self, n: usize) -> &mut Self {
        if n == 0 {
            return self;
        }
        self.base_len += n;
        self.target_len += n;
        if let Some(Component::Retain(last)) = self.components.last_mut() {
            *last += n;
        } else {
            self.components.push(Component::Retain(n));
        }
        self
    }

    pub fn delete(&mut self, n: usize) -> &mut Self {
        if n == 0 {
            return self;
        }
        self.base_len += n;
        if let Some(Component::Delete(last)) = self.components.last_mut() {
            *last += n;
        } else {
            self.components.push(Component::Delete(n));
        }
        self
    }

    pub fn insert(&mut self, s: &str) -> &mut Self {
        if s.is_empty() {
            return self;
        }
        self.target_len += char_len(s);
        let len = self.components.len();
        match self.components.as_mut_slice() {
            [.., Component::Insert(last)] => last.push_str(s),
            [.., Component::Insert(prev), Component::Delete(_)] => prev.push_str(s),
            [.., Component::Delete(_)] => {
                self.components
                    .insert(len - 1, Component::Insert(s.to_owned()));
            }
            _ => self.components.push(Component::Insert(s.to_owned())),
        }
        self
    }

    fn check_base(&self, len: usize) -> Result<(), OtError> {
        if self.base_len != len {
            return Err(OtError::LengthMismatch {
                expected: self.base_len,
                found: len,
            });
        }
        Ok(())
    }

    pub fn apply(&self, text: &str) -> Result<String, OtError> {
        self.check_base(char_len(text))?;
        let mut out = String::with_capacity(text.len());
        let mut chars = text.chars();
        for c in &self.components {
            match c {
                Component::Retain(n) => out.extend(chars.by_ref().take(*n)),
                Component::Insert(s) => out.push_str(s),
                Component::Delete(n) => {
                    chars.by_ref().take(*n).for_each(drop);
                }
            }
        }
        Ok(out)
    }

    /// Merges `self` followed by `other` into a single operation.
    pub fn compose(&self, other: &Operation) -> Result<Operation, OtError> {
        if self.target_len != other.base_len {
            return Err(OtError::LengthMismatch {
                expected: self.target_len,
                found: other.base_len,
            });
        }
        let mut out = Operation::new();
        let mut first = self.components.iter().cloned();
        let mut second = other.components.iter().cloned();
        let mut a = first.next();
        let mut b = second.next();
        loop {
            match (a.take(), b.take()) {
                (None, None) => break,
                (Some(Component::Delete(n)), rest) => {
                    out.delete(n);
                    a = first.next();
                    b = rest;
                }
                (rest, Some(Component::Insert(s))) => {
                    out.insert(&s);
                    a = rest;
                    b = second.next();
                }
                (None, _) | (_, None) => unreachable!("lengths were checked"),
                (Some(Component::Retain(i)), Some(Component::Retain(j))) => {
                    let n = i.min(j);
                    out.retain(n);
                    a = rest_retain(i, n).or_else(|| first.next());
                    b = rest_retain(j, n).or_else(|| second.next());
                }
                (Some(Component::Insert(s)), Some(Component::Delete(j))) => {
                    let len = char_len(&s);
                    match len.cmp(&j) {
                        Ordering::Less => {
                            a = first.next();
                            b = Some(Component::Delete(j - len));
                        }
                        Ordering::Equal => {
                            a = first.next();
                            b = second.next();
                        }
                        Ordering::Greater => {
                            a = Some(Component::Insert(s.chars().skip(j).collect()));
                            b = second.next();
                        }
                    }
                }
                (Some(Component::Insert(s)), Some(Component::Retain(j))) => {
                    let len = char_len(&s);
                    match len.cmp(&j) {
                        Ordering::Less => {
                            out.insert(&s);
                            a = first.next();
                            b = Some(Component::Retain(j - len));
                        }
                        Ordering::Equal => {
                            out.insert(&s);
                            a = first.next();
                            b = second.next();
                        }
                        Ordering::Greater => {
                            let head: String = s.chars().take(j).collect();
                            out.insert(&head);
                            a = Some(Component::Insert(s.chars().skip(j).collect()));
                            b = second.next();
                        }
                    }
                }
                (Some(Component::Retain(i)), Some(Component::Delete(j))) => {
                    let n = i.min(j);
                    out.delete(n);
                    a = rest_retain(i, n).or_else(|| first.next());
                    b = if j > n {
                        Some(Component::Delete(j - n))
                    } else {
                        second.next()
                    };
                }
            }
        }
        Ok(out)
    }

    /// Transforms two concurrent operations over the same base text.
    ///
    /// Returns `(a', b')` such that `b' ∘ a` and `a' ∘ b` produce the same
    /// text. When both insert at the same position, `self`'s insertion comes
    /// first.
    pub fn transform(&self, other: &Operation) -> Result<(Operation, Operation), OtError> {
        if self.base_len != other.base_len {
            return Err(OtError::LengthMismatch {
                expected: self.base_len,
                found: other.base_len,
            });
        }
        let mut a_prime = Operation::new();
        let mut b_prime = Operation::new();
        let mut first = self.components.iter().cloned();
        let mut second = other.components.iter().cloned();
        let mut a = first.next();
        let mut b = second.next();
        loop {
            match (a.take(), b.take()) {
                (None, None) => break,
                (Some(Component::Insert(s)), rest) => {
                    b_prime.retain(char_len(&s));
                    a_prime.insert(&s);
                    a = first.next();
                    b = rest;
                }
                (rest, Some(Component::Insert(s))) => {
                    a_prime.retain(char_len(&s));
                    b_prime.insert(&s);
                    a = rest;
                    b = second.next();
                }
                (None, _) | (_, None) => unreachable!("lengths were checked"),
                (Some(Component::Retain(i)), Some(Component::Retain(j))) => {
                    let n = i.min(j);
                    a_prime.retain(n);
                    b_prime.retain(n);
                    a = rest_retain(i, n).or_else(|| first.next());
                    b = rest_retain(j, n).or_else(|| second.next());
                }
                (Some(Component::Delete(i)), Some(Component::Delete(j))) => {
                    let n = i.min(j);
                    a = rest_delete(i, n).or_else(|| first.next());
                    b = rest_delete(j, n).or_else(|| second.next());
                }
                (Some(Component::Delete(i)), Some(Component::Retain(j))) => {
                    let n = i.min(j);
                    a_prime.delete(n);
                    a = rest_delete(i, n).or_else(|| first.next());
                    b = rest_retain(j, n).or_else(|| second.next());
                }
                (Some(Component::Retain(i)), Some(Component::Delete(j))) => {
                    let n = i.min(j);
                    b_prime.delete(n);
                    a = rest_retain(i, n).or_else(|| first.next());
                    b = rest_delete(j, n).or_else(|| second.next());
                }
            }
        }
        Ok((a_prime, b_prime))
    }

    /// Smallest operation turning `old` into `new`: common prefix and suffix
    /// are retained, the middle is replaced.
    pub fn diff(old: &str, new: &str) -> Operation {
        let old: Vec<char> = old.chars().collect();
        let new: Vec<char> = new.chars().collect();
        let prefix = old.iter().zip(&new).take_while(|(a, b)| a == b).count();
        let max_suffix = old.len().min(new.len()) - prefix;
        let suffix = old
            .iter()
            .rev()
            .zip(new.iter().rev())
            .take(max_suffix)
            .take_while(|(a, b)| a == b)
            .count();
        let mut op = Operation::new();
        op.retain(prefix);
        let inserted: String = new[prefix..new.len() - suffix].iter().collect();
        op.insert(&inserted);
        op.delete(old.len() - suffix - prefix);
        op.retain(suffix);
        op
    }
}

fn rest_retain(total: usize, used: usize) -> Option<Component> {
    (total > used).then(|| Component::Retain(total - used))
}

fn rest_delete(total: usize, used: usize) -> Option<Component> {
    (total > used).then(|| Component::Delete(total - used))
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match c {
                Component::Retain(n) => write!(f, "retain {n}")?,
                Component::Insert(s) => write!(f, "insert {s:?}")?,
                Component::Delete(n) => write!(f, "delete {n}")?,
            }
        }
        f.write_str("]")
    }
}
