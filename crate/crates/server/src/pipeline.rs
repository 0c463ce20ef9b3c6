//! Debounced analysis jobs, dispatched to one worker per language.
//!
//! A worker either runs the built-in analyzer or talks to a long-lived
//! external process over newline-delimited JSON. A crashed or hung process
//! yields a single failure annotation and is restarted for the next job.

use std::collections::HashMap;
use std::process::Stdio;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use cobra_core::assistants::{
    check_prereqs, demo_analyze, effective_env, failure_annotation, spec_for, AnnotationBatch,
    AssistantSpec, Mode, Request, Response,
};
use cobra_core::config::Settings;
use cobra_core::languages;
use cobra_core::snippets::LanguageSyntax;
use cobra_core::sync::Annotation;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::process::{Child, ChildStdin, ChildStdout, Command};
use tokio::sync::{mpsc, Notify};
use tokio::time::{sleep_until, Instant};
use tracing::{debug, warn};

use crate::hub::AnalysisJob;

pub type Sink = Arc<dyn Fn(AnnotationBatch) + Send + Sync>;

/// Counts jobs that have been submitted but not yet delivered or dropped.
#[derive(Default)]
pub struct Pending {
    count: AtomicUsize,
    notify: Notify,
}

impl Pending {
    fn add(&self) {
        self.count.fetch_add(1, Ordering::SeqCst);
    }

    fn done(&self) {
        if self.count.fetch_sub(1, Ordering::SeqCst) == 1 {
            self.notify.notify_waiters();
        }
    }

    pub fn count(&self) -> usize {
        self.count.load(Ordering::SeqCst)
    }

    /// Resolves once no job is outstanding.
    pub async fn idle(&self) {
        loop {
            let notified = self.notify.notified();
            tokio::pin!(notified);
            notified.as_mut().enable();
            if self.count() == 0 {
                return;
            }
            notified.await;
        }
    }
}

enum Cmd {
    Job(AnalysisJob),
    Reconfigure(Settings),
}

#[derive(Clone)]
pub struct Pipeline {
    tx: mpsc::UnboundedSender<Cmd>,
    pending: Arc<Pending>,
}

struct Shared {
    sink: Sink,
    pending: Arc<Pending>,
}

impl Pipeline {
    /// Starts the dispatcher on the current tokio runtime.
    pub fn start(settings: Settings, sink: Sink) -> Self {
        let pending = Arc::new(Pending::default());
        let (tx, rx) = mpsc::unbounded_channel();
        let shared = Arc::new(Shared {
            sink,
            pending: pending.clone(),
        });
        tokio::spawn(dispatch(rx, settings, shared));
        Self { tx, pending }
    }

    pub fn submit(&self, job: AnalysisJob) {
        self.pending.add();
        if self.tx.send(Cmd::Job(job)).is_err() {
            self.pending.done();
        }
    }

    /// Applies new assistant settings. Running workers are replaced.
    pub fn reconfigure(&self, settings: Settings) {
        let _ = self.tx.send(Cmd::Reconfigure(settings));
    }

    pub fn pending(&self) -> &Arc<Pending> {
        &self.pending
    }
}

async fn dispatch(
    mut rx: mpsc::UnboundedReceiver<Cmd>,
    mut settings: Settings,
    shared: Arc<Shared>,
) {
    let mut queued: HashMap<String, (Instant, AssistantSpec, AnalysisJob)> = HashMap::new();
    let mut workers: HashMap<String, mpsc::UnboundedSender<AnalysisJob>> = HashMap::new();
    loop {
        let next = queued.values().map(|(due, ..)| *due).min();
        tokio::select! {
            cmd = rx.recv() => match cmd {
                None => break,
                Some(Cmd::Reconfigure(s)) => {
                    settings = s;
                    workers.clear();
                }
                Some(Cmd::Job(job)) => {
                    let Some(spec) = spec_for(&job.language, &settings) else {
                        debug!(language = %job.language, "no assistant for language");
                        shared.pending.done();
                        continue;
                    };
                    let due = Instant::now() + Duration::from_millis(spec.debounce_ms);
                    if queued.insert(job.doc_id.clone(), (due, spec, job)).is_some() {
                        shared.pending.done();
                    }
                }
            },
            _ = sleep_until(next.unwrap_or_else(Instant::now)), if next.is_some() => {
                let now = Instant::now();
                let due: Vec<String> = queued
                    .iter()
                    .filter(|(_, (d, ..))| *d <= now)
                    .map(|(k, _)| k.clone())
                    .collect();
                for doc in due {
                    let (_, spec, job) = queued.remove(&doc).unwrap();
                    let worker = workers
                        .entry(spec.language.clone())
                        .or_insert_with(|| spawn_worker(spec, &settings, shared.clone()));
                    if let Err(e) = worker.send(job) {
                        drop(e);
                        shared.pending.done();
                    }
                }
            }
        }
    }
    for _ in queued {
        shared.pending.done();
    }
}

fn spawn_worker(
    spec: AssistantSpec,
    settings: &Settings,
    shared: Arc<Shared>,
) -> mpsc::UnboundedSender<AnalysisJob> {
    let (tx, rx) = mpsc::unbounded_channel();
    let syntax = languages::lookup(&spec.language)
        .map(|l| l.syntax)
        .unwrap_or(LanguageSyntax::SCALA);
    let env = effective_env(settings);
    let analyzer = match &spec.mode {
        Mode::Builtin => Analyzer::Builtin(syntax),
        Mode::External { .. } => {
            let report = check_prereqs(&spec, &env);
            if report.ok {
                Analyzer::External(Box::new(External::new(spec.clone(), env)))
            } else {
                for s in report.statuses.iter().filter(|s| !s.ok) {
                    warn!(
                        language = %spec.language,
                        missing = %s.name,
                        advice = s.advice.as_deref().unwrap_or(""),
                        "assistant prerequisite missing, using the built-in analyzer"
                    );
                }
                Analyzer::Builtin(syntax)
            }
        }
    };
    tokio::spawn(work(rx, analyzer, shared));
    tx
}

async fn work(
    mut rx: mpsc::UnboundedReceiver<AnalysisJob>,
    mut analyzer: Analyzer,
    shared: Arc<Shared>,
) {
    while let Some(mut job) = rx.recv().await {
        // Skip revisions that already have a newer job queued behind them.
        while let Ok(newer) = rx.try_recv() {
            if newer.doc_id == job.doc_id {
                shared.pending.done();
                job = newer;
            } else {
                run_one(&mut analyzer, job, &shared).await;
                job = newer;
            }
        }
        run_one(&mut analyzer, job, &shared).await;
    }
}

async fn run_one(analyzer: &mut Analyzer, job: AnalysisJob, shared: &Shared) {
    let annotations = analyzer.analyze(&job).await;
    (shared.sink)(AnnotationBatch {
        doc_id: job.doc_id,
        for_seq: job.seq,
        annotations,
    });
    shared.pending.done();
}

enum Analyzer {
    Builtin(LanguageSyntax),
    External(Box<External>),
}

impl Analyzer {
    async fn analyze(&mut self, job: &AnalysisJob) -> Vec<Annotation> {
        match self {
            Analyzer::Builtin(syntax) => demo_analyze(&job.text, syntax),
            Analyzer::External(ext) => ext.analyze(job).await,
        }
    }
}

struct Process {
    _child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

struct External {
    spec: AssistantSpec,
    env: std::collections::BTreeMap<String, String>,
    process: Option<Process>,
    next_id: u64,
}

impl External {
    fn new(spec: AssistantSpec, env: std::collections::BTreeMap<String, String>) -> Self {
        Self {
            spec,
            env,
            process: None,
            next_id: 1,
        }
    }

    fn spawn(&self) -> std::io::Result<Process> {
        let Mode::External { command, args, .. } = &self.spec.mode else {
            unreachable!("external analyzer with a builtin spec")
        };
        let mut child = Command::new(command)
            .args(args)
            .env_clear()
            .envs(&self.env)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .kill_on_drop(true)
            .spawn()?;
        Ok(Process {
            stdin: child.stdin.take().expect("piped stdin"),
            stdout: BufReader::new(child.stdout.take().expect("piped stdout")),
            _child: child,
        })
    }

    async fn analyze(&mut self, job: &AnalysisJob) -> Vec<Annotation> {
        let id = self.next_id;
        self.next_id += 1;
        let timeout = Duration::from_millis(self.spec.timeout_ms);
        match tokio::time::timeout(timeout, self.exchange(id, job)).await {
            Ok(Ok(annotations)) => annotations,
            Ok(Err(e)) => {
                warn!(language = %self.spec.language, error = %e, "assistant failed; restarting it on the next job");
                self.process = None;
                vec![failure_annotation(
                    &job.text,
                    format!("assistant failed: {e}"),
                )]
            }
            Err(_) => {
                warn!(language = %self.spec.language, "assistant timed out; restarting it on the next job");
                self.process = None;
                vec![failure_annotation(
                    &job.text,
                    format!("assistant timed out after {} ms", self.spec.timeout_ms),
                )]
            }
        }
    }

    async fn exchange(&mut self, id: u64, job: &AnalysisJob) -> std::io::Result<Vec<Annotation>> {
        if self.process.is_none() {
            self.process = Some(self.spawn()?);
        }
        let p = self.process.as_mut().unwrap();
        let mut line = serde_json::to_string(&Request {
            id,
            doc: job.doc_id.clone(),
            text: job.text.clone(),
        })?;
        line.push('\n');
        p.stdin.write_all(line.as_bytes()).await?;
        p.stdin.flush().await?;
        loop {
            let mut reply = String::new();
            if p.stdout.read_line(&mut reply).await? == 0 {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::UnexpectedEof,
                    "assistant exited",
                ));
            }
            match serde_json::from_str::<Response>(&reply) {
                Ok(r) if r.id == id => return Ok(r.annotations),
                Ok(r) => debug!(id = r.id, "discarding stale assistant response"),
                Err(e) => {
                    return Err(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("malformed response: {e}"),
                    ))
                }
            }
        }
    }
}
