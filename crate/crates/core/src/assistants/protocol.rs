use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::demo::demo_analyze;
use crate::snippets::LanguageSyntax;
use crate::sync::Annotation;

/// One analysis request, written as a single JSON line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub doc: String,
    pub text: String,
}

/// The reply to the request with the same id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub id: u64,
    pub annotations: Vec<Annotation>,
}

/// Batch of annotations computed for one revision of a document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationBatch {
    pub doc_id: String,
    pub for_seq: u64,
    pub annotations: Vec<Annotation>,
}

/// The single annotation reported when an assistant fails.
pub fn failure_annotation(text: &str, message: impl Into<String>) -> Annotation {
    Annotation::error(0, text.chars().count(), message)
}

/// Serves the demo assistant over newline-delimited JSON until `input`
/// ends. Malformed lines are reported on `errors` and skipped.
pub fn serve_demo(
    input: impl BufRead,
    mut output: impl Write,
    mut errors: impl Write,
    syntax: &LanguageSyntax,
) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Request>(&line) {
            Ok(req) => {
                let resp = Response {
                    id: req.id,
                    annotations: demo_analyze(&req.text, syntax),
                };
                serde_json::to_writer(&mut output, &resp)?;
                output.write_all(b"\n")?;
                output.flush()?;
            }
            Err(e) => writeln!(errors, "ignoring malformed request: {e}")?,
        }
    }
    Ok(())
}
