use cobra_core::sync::{client::ClientDoc, ClientId, Component, Operation, RevisionLog};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Splice-based reference: turns the component list into explicit
/// `(position, deleted, inserted)` edits on the original text and applies
/// them right to left on a character vector.
fn splice_oracle(text: &str, components: &[Component]) -> String {
    let mut edits = Vec::new();
    let mut pos = 0;
    for c in components {
        match c {
            Component::Retain(n) => pos += n,
            Component::Delete(n) => {
                edits.push((pos, *n, String::new()));
                pos += n;
            }
            Component::Insert(s) => edits.push((pos, 0, s.clone())),
        }
    }
    let mut chars: Vec<char> = text.chars().collect();
    for (at, deleted, inserted) in edits.into_iter().rev() {
        chars.splice(at..at + deleted, inserted.chars());
    }
    chars.into_iter().collect()
}

fn random_text(rng: &mut StdRng, max: usize) -> String {
    let len = rng.gen_range(0..=max);
    (0..len)
        .map(|_| ['a', 'b', 'c'][rng.gen_range(0..3)])
        .collect()
}

fn random_op(rng: &mut StdRng, len: usize) -> Operation {
    let mut op = Operation::new();
    let mut left = len;
    while left > 0 {
        let n = rng.gen_range(1..=left);
        match rng.gen_range(0..3) {
            0 => {
                op.retain(n);
                left -= n;
            }
            1 => {
                op.delete(n);
                left -= n;
            }
            _ => {
                op.insert(&random_text(rng, 3));
            }
        }
    }
    if rng.gen_bool(0.3) {
        op.insert(&random_text(rng, 3));
    }
    op
}

fn is_normal(op: &Operation) -> bool {
    op.components().windows(2).all(|w| {
        std::mem::discriminant(&w[0]) != std::mem::discriminant(&w[1])
            && !matches!(w, [Component::Delete(_), Component::Insert(_)])
    }) && op.components().iter().all(|c| match c {
        Component::Retain(n) | Component::Delete(n) => *n > 0,
        Component::Insert(s) => !s.is_empty(),
    })
}

#[test]
fn apply_matches_splice_oracle() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..20_000 {
        let text = random_text(&mut rng, 8);
        let op = random_op(&mut rng, text.chars().count());
        assert_eq!(
            op.apply(&text).unwrap(),
            splice_oracle(&text, op.components())
        );
    }
}

#[test]
fn compose_matches_sequential_apply() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..20_000 {
        let text = random_text(&mut rng, 8);
        let a = random_op(&mut rng, text.chars().count());
        let b = random_op(&mut rng, a.target_len());
        let ab = a.compose(&b).unwrap();
        let sequential = splice_oracle(&splice_oracle(&text, a.components()), b.components());
        assert_eq!(ab.apply(&text).unwrap(), sequential);
        assert!(is_normal(&ab), "{ab}");
    }
}

#[test]
fn compose_is_associative() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..10_000 {
        let len = rng.gen_range(0..=8);
        let a = random_op(&mut rng, len);
        let b = random_op(&mut rng, a.target_len());
        let c = random_op(&mut rng, b.target_len());
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        assert_eq!(left, right, "a={a} b={b} c={c}");
    }
}

#[test]
fn transform_satisfies_tp1() {
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..20_000 {
        let text = random_text(&mut rng, 8);
        let len = text.chars().count();
        let a = random_op(&mut rng, len);
        let b = random_op(&mut rng, len);
        let (a2, b2) = a.transform(&b).unwrap();
        assert!(is_normal(&a2) && is_normal(&b2));
        let left = b2.apply(&a.apply(&text).unwrap()).unwrap();
        let right = a2.apply(&b.apply(&text).unwrap()).unwrap();
        assert_eq!(left, right, "text={text:?} a={a} b={b}");
    }
}

#[test]
fn diff_is_minimal_on_prefix_and_suffix() {
    let mut rng = StdRng::seed_from_u64(19);
    for _ in 0..5_000 {
        let old = random_text(&mut rng, 10);
        let new = random_text(&mut rng, 10);
        let d = Operation::diff(&old, &new);
        assert_eq!(d.apply(&old).unwrap(), new);
        assert!(is_normal(&d));
    }
}

/// N clients edit one document through the one-outstanding-operation scheme
/// with randomly interleaved delivery.
#[test]
fn clients_converge_under_random_interleavings() {
    for seed in 0..40 {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(2..=5);
        let mut server = RevisionLog::new("doc", "abc");
        let mut clients: Vec<ClientDoc> = (0..n).map(|_| ClientDoc::new(0, "abc")).collect();
        // Per-client FIFO queues in both directions.
        let mut up: Vec<Vec<(u64, Operation)>> = vec![Vec::new(); n];
        let mut down: Vec<Vec<(u64, Option<Operation>)>> = vec![Vec::new(); n];
        let mut edits = 0;
        loop {
            let pending = up.iter().any(|q| !q.is_empty()) || down.iter().any(|q| !q.is_empty());
            if edits >= 60 && !pending {
                break;
            }
            let i = rng.gen_range(0..n);
            match rng.gen_range(0..3) {
                0 if edits < 60 => {
                    let op = random_op(&mut rng, clients[i].text().chars().count());
                    edits += 1;
                    if let Some(out) = clients[i].local_edit(op).unwrap() {
                        up[i].push((out.parent_seq, out.op));
                    }
                }
                1 if !up[i].is_empty() => {
                    let (parent, op) = up[i].remove(0);
                    let committed = server.receive(ClientId(i as u64), parent, &op).unwrap();
                    for (j, queue) in down.iter_mut().enumerate() {
                        let payload = (j != i).then(|| committed.op.clone());
                        queue.push((committed.seq, payload));
                    }
                }
                _ if !down[i].is_empty() => {
                    let (seq, payload) = down[i].remove(0);
                    match payload {
                        None => {
                            if let Some(out) = clients[i].on_ack(seq).unwrap() {
                                up[i].push((out.parent_seq, out.op));
                            }
                        }
                        Some(op) => clients[i].on_remote(seq, &op).unwrap(),
                    }
                }
                _ => {}
            }
        }
        for c in &clients {
            assert!(c.is_synchronized());
            assert_eq!(c.text(), server.text(), "seed {seed}");
        }
    }
}

fn arb_text() -> impl Strategy<Value = String> {
    "[abc]{0,8}"
}

fn arb_op_for(len: usize) -> impl Strategy<Value = Operation> {
    proptest::collection::vec((0u8..3, 1usize..4, "[xyz]{1,3}"), 0..8).prop_map(move |parts| {
        let mut op = Operation::new();
        let mut left = len;
        for (kind, n, s) in parts {
            match kind {
                0 => {
                    let n = n.min(left);
                    op.retain(n);
                    left -= n;
                }
                1 => {
                    let n = n.min(left);
                    op.delete(n);
                    left -= n;
                }
                _ => {
                    op.insert(&s);
                }
            }
        }
        op.retain(left);
        op
    })
}

proptest! {
    #[test]
    fn transform_against_identity_is_neutral(text in arb_text()) {
        let len = text.chars().count();
        let id = Operation::identity(len);
        let (a, b) = id.transform(&id).unwrap();
        prop_assert!(a.is_identity() && b.is_identity());
    }

    #[test]
    fn produced_operations_are_normalized(
        (text, a, b) in arb_text().prop_flat_map(|t| {
            let len = t.chars().count();
            (Just(t), arb_op_for(len), arb_op_for(len))
        })
    ) {
        prop_assert!(is_normal(&a) && is_normal(&b));
        let (a2, b2) = a.transform(&b).unwrap();
        prop_assert!(is_normal(&a2) && is_normal(&b2));
        prop_assert_eq!(
            b2.apply(&a.apply(&text).unwrap()).unwrap(),
            a2.apply(&b.apply(&text).unwrap()).unwrap()
        );
    }
}
