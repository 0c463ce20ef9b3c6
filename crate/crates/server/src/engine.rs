//! Async shell around the hub: per-client outboxes and the analysis
//! pipeline. Effects are delivered while the hub lock is held, so every
//! client observes revisions in commit order.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, Weak};

use cobra_core::config::{SettingChange, Settings};
use cobra_core::sync::ClientId;
use tokio::sync::mpsc;

use crate::hub::{Effect, Hub, Role};
use crate::pipeline::Pipeline;
use crate::wire::WireMessage;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outbound {
    Message(WireMessage),
    Close,
}

struct Inner {
    hub: Mutex<Hub>,
    outboxes: Mutex<HashMap<ClientId, mpsc::UnboundedSender<Outbound>>>,
    pipeline: Pipeline,
}

#[derive(Clone)]
pub struct Engine {
    inner: Arc<Inner>,
}

impl Inner {
    fn apply(&self, effects: Vec<Effect>) {
        let mut outboxes = self.outboxes.lock().unwrap();
        for effect in effects {
            match effect {
                Effect::Send(to, msg) => {
                    if let Some(tx) = outboxes.get(&to) {
                        let _ = tx.send(Outbound::Message(msg));
                    }
                }
                Effect::Close(to) => {
                    if let Some(tx) = outboxes.remove(&to) {
                        let _ = tx.send(Outbound::Close);
                    }
                }
                Effect::Analyze(job) => self.pipeline.submit(job),
            }
        }
    }
}

impl Engine {
    /// Must be called inside a tokio runtime. Schedules analysis of every
    /// document right away.
    pub fn new(hub: Hub) -> Self {
        let settings = hub.settings().clone();
        let inner = Arc::new_cyclic(|weak: &Weak<Inner>| {
            let weak = weak.clone();
            let pipeline = Pipeline::start(
                settings,
                Arc::new(move |batch| {
                    if let Some(inner) = weak.upgrade() {
                        let mut hub = inner.hub.lock().unwrap();
                        let effects = hub.annotations_ready(batch);
                        inner.apply(effects);
                    }
                }),
            );
            Inner {
                hub: Mutex::new(hub),
                outboxes: Mutex::new(HashMap::new()),
                pipeline,
            }
        });
        let engine = Self { inner };
        {
            let hub = engine.inner.hub.lock().unwrap();
            engine.inner.apply(hub.analyze_all());
        }
        engine
    }

    pub fn connect(&self, role: Role) -> (ClientId, mpsc::UnboundedReceiver<Outbound>) {
        let (tx, rx) = mpsc::unbounded_channel();
        let mut hub = self.inner.hub.lock().unwrap();
        let id = hub.connect(role);
        self.inner.outboxes.lock().unwrap().insert(id, tx);
        (id, rx)
    }

    pub fn handle(&self, client: ClientId, msg: WireMessage) {
        let mut hub = self.inner.hub.lock().unwrap();
        let effects = hub.route(client, msg);
        self.inner.apply(effects);
    }

    /// Queues a message for one client without going through the hub.
    pub fn reply(&self, client: ClientId, msg: WireMessage) {
        let _hub = self.inner.hub.lock().unwrap();
        self.inner.apply(vec![Effect::Send(client, msg)]);
    }

    pub fn disconnect(&self, client: ClientId) {
        let mut hub = self.inner.hub.lock().unwrap();
        hub.disconnect(client);
        self.inner.outboxes.lock().unwrap().remove(&client);
    }

    pub fn update_settings(&self, settings: Settings) -> Vec<SettingChange> {
        let mut hub = self.inner.hub.lock().unwrap();
        let (changes, effects) = hub.update_settings(settings.clone());
        if !changes.is_empty() {
            self.inner.pipeline.reconfigure(settings);
            self.inner.apply(effects);
        }
        changes
    }

    pub fn settings(&self) -> Settings {
        self.with_hub(|h| h.settings().clone())
    }

    pub fn with_hub<R>(&self, f: impl FnOnce(&Hub) -> R) -> R {
        f(&self.inner.hub.lock().unwrap())
    }

    /// Resolves when no analysis job is queued or running.
    pub async fn idle(&self) {
        self.inner.pipeline.pending().idle().await
    }
}
