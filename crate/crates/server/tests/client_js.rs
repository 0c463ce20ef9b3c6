//! Runs the embedded browser client's codec and OT functions under node
//! against vectors produced by the Rust implementation. Skipped when node
//! is not installed.

use std::process::Command;

use cobra_core::sync::{Annotation, AnnotationKind, Component, Operation};
use cobra_server::testkit::{random_message, random_operation, random_string};
use cobra_server::wire::{encode, WireMessage};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

const HARNESS: &str = r#"
const fs = require("fs");
const assert = require("assert");
const boot = '{"protocol_version":1,"docs":[],"show_infos":true,"show_warnings":true}';
const noop = () => {};
const el = { textContent: boot, style: {}, classList: { toggle: noop } };
globalThis.window = globalThis;
globalThis.document = {
  readyState: "complete",
  getElementById: () => el,
  querySelectorAll: () => [],
  addEventListener: noop,
  createElement: () => el,
  body: { appendChild: noop },
};
globalThis.location = { hash: "", protocol: "http:", host: "test" };
globalThis.history = { replaceState: noop };
globalThis.WebSocket = function () {};
eval(fs.readFileSync(process.argv[2], "utf8"));
const c = window.cobra;
const v = JSON.parse(fs.readFileSync(process.argv[3], "utf8"));
const plain = (x) => JSON.parse(JSON.stringify(x));
for (const t of v.ot) {
  assert.deepStrictEqual(c.apply(t.a, t.text), t.after_a);
  assert.deepStrictEqual(plain(c.transform(t.a, t.b)), t.transformed);
  assert.deepStrictEqual(plain(c.compose(t.a, t.c)), t.composed);
  assert.deepStrictEqual(plain(c.diff(t.text, t.after_a)), t.diff);
}
for (const w of v.decode) {
  assert.deepStrictEqual(plain(c.decode(Buffer.from(w.bytes, "hex"))), w.message);
}
for (const w of v.encode) {
  assert.strictEqual(Buffer.from(c.encode(w.message)).toString("hex"), w.bytes);
}
console.log("ok " + v.ot.length + " " + v.decode.length + " " + v.encode.length);
"#;

fn op_json(op: &Operation) -> Value {
    Value::Array(
        op.components()
            .iter()
            .map(|c| match c {
                Component::Retain(n) => json!({ "r": n }),
                Component::Insert(s) => json!({ "i": s }),
                Component::Delete(n) => json!({ "d": n }),
            })
            .collect(),
    )
}

fn annotation_json(a: &Annotation) -> Value {
    let kind = match a.kind {
        AnnotationKind::Error => "error",
        AnnotationKind::Warning => "warning",
        AnnotationKind::Info => "info",
        AnnotationKind::Token => "token",
    };
    let mut v = json!({ "start": a.start, "end": a.end, "kind": kind });
    if let Some(c) = &a.class {
        v["class"] = json!(c);
    }
    if let Some(m) = &a.message {
        v["message"] = json!(m);
    }
    v
}

/// The client's JSON shape of a message, or `None` for messages the
/// client never receives.
fn message_json(m: &WireMessage) -> Option<Value> {
    Some(match m {
        WireMessage::ServerHello {
            settings_digest,
            docs,
        } => {
            json!({ "type": "ServerHello", "settings_digest": settings_digest, "docs": docs })
        }
        WireMessage::DocState { doc_id, seq, text } => {
            json!({ "type": "DocState", "doc_id": doc_id, "seq": seq, "text": text })
        }
        WireMessage::Ack { doc_id, seq } => json!({ "type": "Ack", "doc_id": doc_id, "seq": seq }),
        WireMessage::RemoteEdit {
            doc_id,
            seq,
            op,
            author,
        } => {
            json!({ "type": "RemoteEdit", "doc_id": doc_id, "seq": seq, "op": op_json(op), "author": author })
        }
        WireMessage::Annotations { doc_id, seq, batch } => json!({
            "type": "Annotations", "doc_id": doc_id, "seq": seq,
            "batch": batch.iter().map(annotation_json).collect::<Vec<_>>(),
        }),
        WireMessage::FragmentStep {
            doc_id,
            fragment_index,
            variant_index,
        } => json!({
            "type": "FragmentStep", "doc_id": doc_id,
            "fragment_index": fragment_index, "variant_index": variant_index,
        }),
        WireMessage::SettingsChanged { changes } => json!({
            "type": "SettingsChanged",
            "changes": changes.iter().map(|c| json!({ "path": c.path, "old": c.old, "new": c.new, "hot": c.hot })).collect::<Vec<_>>(),
        }),
        WireMessage::Error { code, message } => {
            json!({ "type": "Error", "code": code, "message": message })
        }
        _ => return None,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// JavaScript numbers are exact below 2^53.
fn small(m: &WireMessage) -> bool {
    let limit = 1u64 << 53;
    match m {
        WireMessage::ClientHello {
            protocol_version: n,
        } => *n < limit,
        WireMessage::DocState { seq, .. }
        | WireMessage::Ack { seq, .. }
        | WireMessage::Annotations { seq, .. } => *seq < limit,
        WireMessage::RemoteEdit { seq, author, .. } => *seq < limit && *author < limit,
        WireMessage::Edit { parent_seq, .. } => *parent_seq < limit,
        WireMessage::FragmentStep {
            fragment_index,
            variant_index,
            ..
        } => *fragment_index < limit && *variant_index < limit,
        _ => true,
    }
}

#[test]
fn browser_client_matches_the_server() {
    if Command::new("node").arg("--version").output().is_err() {
        eprintln!("node not found; skipping the client vector check");
        return;
    }
    let mut rng = StdRng::seed_from_u64(99);
    let mut ot = Vec::new();
    for _ in 0..500 {
        let text = random_string(&mut rng, 10);
        let a = random_operation(&mut rng, &text);
        let b = random_operation(&mut rng, &text);
        let after_a = a.apply(&text).unwrap();
        let c = random_operation(&mut rng, &after_a);
        let (a1, b1) = a.transform(&b).unwrap();
        ot.push(json!({
            "text": text, "a": op_json(&a), "b": op_json(&b), "c": op_json(&c),
            "after_a": after_a,
            "transformed": [op_json(&a1), op_json(&b1)],
            "composed": op_json(&a.compose(&c).unwrap()),
            "diff": op_json(&Operation::diff(&text, &after_a)),
        }));
    }
    let mut decode = Vec::new();
    let mut encode_vectors = Vec::new();
    while decode.len() < 400 || encode_vectors.len() < 200 {
        let m = random_message(&mut rng);
        if !small(&m) {
            continue;
        }
        let bytes = hex(&encode(&m));
        match (&m, message_json(&m)) {
            (_, Some(v)) => decode.push(json!({ "bytes": bytes, "message": v })),
            (WireMessage::ClientHello { protocol_version }, None) => encode_vectors.push(json!({
                "bytes": bytes, "message": { "type": "ClientHello", "protocol_version": protocol_version },
            })),
            (WireMessage::OpenDoc { doc_id }, None) => encode_vectors.push(json!({
                "bytes": bytes, "message": { "type": "OpenDoc", "doc_id": doc_id },
            })),
            (WireMessage::Edit { doc_id, parent_seq, op }, None) => encode_vectors.push(json!({
                "bytes": bytes,
                "message": { "type": "Edit", "doc_id": doc_id, "parent_seq": parent_seq, "op": op_json(op) },
            })),
            _ => {}
        }
        if rng.gen_bool(0.05) {
            if let WireMessage::FragmentStep { .. } = &m {
                encode_vectors
                    .push(json!({ "bytes": bytes, "message": message_json(&m).unwrap() }));
            }
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let harness = dir.path().join("harness.js");
    let vectors = dir.path().join("vectors.json");
    std::fs::write(&harness, HARNESS).unwrap();
    std::fs::write(
        &vectors,
        serde_json::to_string(&json!({ "ot": ot, "decode": decode, "encode": encode_vectors }))
            .unwrap(),
    )
    .unwrap();
    let script = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/cobra.js");
    let out = Command::new("node")
        .arg(&harness)
        .arg(script)
        .arg(&vectors)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "node failed:\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    eprintln!("{stdout}");
    assert!(stdout.starts_with("ok"));
}
