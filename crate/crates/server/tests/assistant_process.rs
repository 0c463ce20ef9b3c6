//! The pipeline against a real child process: a shell script speaking the
//! line protocol and logging every request it receives.

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use cobra_core::assistants::{demo_analyze, AnnotationBatch};
use cobra_core::config::{AssistantOverride, Settings};
use cobra_core::snippets::LanguageSyntax;
use cobra_core::sync::AnnotationKind;
use cobra_server::hub::AnalysisJob;
use cobra_server::pipeline::Pipeline;

const SCRIPT: &str = r#"while IFS= read -r line; do
  printf '%s\n' "$line" >> "$LOG"
  case "$line" in
    *crash*) exit 1 ;;
    *hang*) sleep 5 ;;
  esac
  id=$(printf '%s' "$line" | sed 's/^{"id":\([0-9]*\).*/\1/')
  printf '{"id":%s,"annotations":[{"start":0,"end":1,"kind":"info","message":"seen"}]}\n' "$id"
done
"#;

struct Fixture {
    _dir: tempfile::TempDir,
    log: PathBuf,
    settings: Settings,
}

fn fixture(command: Option<String>, timeout_ms: Option<u64>) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("assistant.sh");
    std::fs::write(&script, SCRIPT).unwrap();
    let log = dir.path().join("requests.log");
    let mut settings = Settings::default();
    settings.env.insert("log".into(), log.display().to_string());
    settings.assistants.insert(
        "demo".into(),
        AssistantOverride {
            command: Some(command.unwrap_or_else(|| format!("/bin/sh {}", script.display()))),
            debounce_ms: Some(80),
            timeout_ms,
        },
    );
    Fixture {
        _dir: dir,
        log,
        settings,
    }
}

fn requests(log: &Path) -> Vec<String> {
    std::fs::read_to_string(log)
        .unwrap_or_default()
        .lines()
        .map(str::to_owned)
        .collect()
}

fn job(seq: u64, text: &str) -> AnalysisJob {
    AnalysisJob {
        doc_id: "d".into(),
        seq,
        text: text.into(),
        language: "demo".into(),
    }
}

fn collecting() -> (
    cobra_server::pipeline::Sink,
    Arc<Mutex<Vec<AnnotationBatch>>>,
) {
    let got = Arc::new(Mutex::new(Vec::new()));
    let g = got.clone();
    (Arc::new(move |b| g.lock().unwrap().push(b)), got)
}

#[tokio::test]
async fn rapid_jobs_invoke_the_assistant_once() {
    let f = fixture(None, None);
    let (sink, got) = collecting();
    let p = Pipeline::start(f.settings.clone(), sink);
    p.submit(job(1, "first"));
    p.submit(job(2, "second"));
    p.pending().idle().await;
    let reqs = requests(&f.log);
    assert_eq!(reqs.len(), 1, "{reqs:?}");
    assert!(reqs[0].contains("\"text\":\"second\""));
    let got = got.lock().unwrap();
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].for_seq, 2);
    assert_eq!(got[0].annotations[0].message.as_deref(), Some("seen"));
}

#[tokio::test]
async fn a_crashed_assistant_reports_failure_and_restarts() {
    let f = fixture(None, None);
    let (sink, got) = collecting();
    let p = Pipeline::start(f.settings.clone(), sink);
    p.submit(job(1, "crash now"));
    p.pending().idle().await;
    p.submit(job(2, "fine"));
    p.pending().idle().await;
    let got = got.lock().unwrap();
    assert_eq!(got.len(), 2);
    let failure = &got[0].annotations;
    assert_eq!(failure.len(), 1);
    assert_eq!(failure[0].kind, AnnotationKind::Error);
    assert_eq!((failure[0].start, failure[0].end), (0, "crash now".len()));
    assert_eq!(got[1].annotations[0].message.as_deref(), Some("seen"));
    assert_eq!(requests(&f.log).len(), 2);
}

#[tokio::test]
async fn a_hung_assistant_times_out() {
    let f = fixture(None, Some(300));
    let (sink, got) = collecting();
    let p = Pipeline::start(f.settings.clone(), sink);
    p.submit(job(1, "hang"));
    p.pending().idle().await;
    p.submit(job(2, "ok"));
    p.pending().idle().await;
    let got = got.lock().unwrap();
    assert!(got[0].annotations[0]
        .message
        .as_deref()
        .unwrap()
        .contains("timed out"));
    assert_eq!(got[1].annotations[0].message.as_deref(), Some("seen"));
}

#[tokio::test]
async fn missing_prerequisites_fall_back_to_the_builtin_analyzer() {
    let f = fixture(Some("/nonexistent/assistant --flag".into()), None);
    let (sink, got) = collecting();
    let p = Pipeline::start(f.settings.clone(), sink);
    p.submit(job(1, "val x = (1"));
    p.pending().idle().await;
    let got = got.lock().unwrap();
    assert_eq!(
        got[0].annotations,
        demo_analyze("val x = (1", &LanguageSyntax::SCALA)
    );
}
