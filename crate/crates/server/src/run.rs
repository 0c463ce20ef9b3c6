use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime};

use cobra_core::config::{load_settings, Settings, CONFIG_FILE};
use thiserror::Error;
use tokio::net::{lookup_host, TcpListener};
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tracing::{info, warn};

use crate::engine::Engine;
use crate::http::{router, AppState};
use crate::hub::{Hub, HubError};
use crate::presentation::Presentation;

pub const WATCH_INTERVAL: Duration = Duration::from_millis(500);

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides `binding.port`; 0 picks a free port.
    pub port: Option<u16>,
    /// Overrides `binding.interface`.
    pub interface: Option<String>,
    /// Poll `cobra.conf` and apply changes while running.
    pub watch: bool,
}

#[derive(Debug, Error)]
pub enum StartError {
    #[error("address in use: {addr}")]
    AddrInUse { addr: String },
    #[error("cannot resolve interface `{interface}`: {source}")]
    Resolve {
        interface: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Hub(#[from] HubError),
}

/// Binds `interface:port`, trying resolved addresses IPv4 first.
pub async fn bind(interface: &str, port: u16) -> Result<TcpListener, StartError> {
    let display = format!("{interface}:{port}");
    let mut addrs: Vec<SocketAddr> = lookup_host((interface, port))
        .await
        .map_err(|source| StartError::Resolve {
            interface: interface.to_owned(),
            source,
        })?
        .collect();
    addrs.sort_by_key(|a| !a.is_ipv4());
    let mut last = None;
    for addr in addrs {
        match TcpListener::bind(addr).await {
            Ok(l) => return Ok(l),
            Err(e) => last = Some(e),
        }
    }
    Err(match last {
        Some(e) if e.kind() == std::io::ErrorKind::AddrInUse => {
            StartError::AddrInUse { addr: display }
        }
        Some(source) => StartError::Bind {
            addr: display,
            source,
        },
        None => StartError::Resolve {
            interface: interface.to_owned(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no addresses"),
        },
    })
}

struct Listening {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    tasks: Vec<JoinHandle<()>>,
}

struct Shared {
    state: AppState,
    listening: Mutex<Listening>,
}

impl Shared {
    fn serve(&self, listener: TcpListener) -> std::io::Result<()> {
        let addr = listener.local_addr()?;
        let (stop_tx, stop_rx) = oneshot::channel::<()>();
        let app = router(self.state.clone()).into_make_service_with_connect_info::<SocketAddr>();
        let task = tokio::spawn(async move {
            let server = axum::serve(listener, app).with_graceful_shutdown(async move {
                let _ = stop_rx.await;
            });
            if let Err(e) = server.await {
                warn!(error = %e, "http server stopped");
            }
        });
        let mut l = self.listening.lock().unwrap();
        if let Some(old) = l.stop.replace(stop_tx) {
            // Open connections stay up; only accepting stops.
            let _ = old.send(());
        }
        l.addr = addr;
        l.tasks.push(task);
        Ok(())
    }
}

/// A server accepting connections in the background.
pub struct RunningServer {
    shared: Arc<Shared>,
    watcher: Option<JoinHandle<()>>,
}

impl RunningServer {
    pub fn local_addr(&self) -> SocketAddr {
        self.shared.listening.lock().unwrap().addr
    }

    pub fn url(&self) -> String {
        format!("http://{}/", self.local_addr())
    }

    pub fn engine(&self) -> &Engine {
        &self.shared.state.engine
    }

    pub async fn shutdown(self) {
        if let Some(w) = &self.watcher {
            w.abort();
        }
        let tasks = {
            let mut l = self.shared.listening.lock().unwrap();
            if let Some(stop) = l.stop.take() {
                let _ = stop.send(());
            }
            std::mem::take(&mut l.tasks)
        };
        for t in tasks {
            t.abort();
            let _ = t.await;
        }
    }
}

fn apply_overrides(settings: &mut Settings, opts: &RunOptions) {
    if let Some(p) = opts.port.filter(|p| *p != 0) {
        settings.binding_port = p;
    }
    if let Some(i) = &opts.interface {
        settings.binding_interface = i.clone();
    }
}

/// Starts serving `presentation`. Must be called inside a tokio runtime.
pub async fn start(
    presentation: Presentation,
    opts: RunOptions,
) -> Result<RunningServer, StartError> {
    let mut settings = presentation.settings.clone();
    apply_overrides(&mut settings, &opts);
    let port = opts.port.unwrap_or(settings.binding_port);
    let listener = bind(&settings.binding_interface, port).await?;
    let hub = Hub::new(settings.clone(), &presentation.code)?;
    let engine = Engine::new(hub);
    let shared = Arc::new(Shared {
        state: AppState {
            engine,
            deck: Arc::new(presentation.deck),
            root: Arc::new(presentation.dir.clone()),
        },
        listening: Mutex::new(Listening {
            addr: listener.local_addr().map_err(|source| StartError::Bind {
                addr: format!("{}:{port}", settings.binding_interface),
                source,
            })?,
            stop: None,
            tasks: Vec::new(),
        }),
    });
    shared.serve(listener).map_err(|source| StartError::Bind {
        addr: format!("{}:{port}", settings.binding_interface),
        source,
    })?;
    let watcher = opts
        .watch
        .then(|| tokio::spawn(watch(presentation.dir, opts, shared.clone())));
    Ok(RunningServer { shared, watcher })
}

fn modified(path: &std::path::Path) -> Option<SystemTime> {
    std::fs::metadata(path).and_then(|m| m.modified()).ok()
}

/// Polls `cobra.conf` and pushes changes to every session. A changed port
/// is rebound in place; a changed interface only takes effect on restart.
async fn watch(dir: PathBuf, opts: RunOptions, shared: Arc<Shared>) {
    let path = dir.join(CONFIG_FILE);
    let mut last = modified(&path);
    let mut ticker = tokio::time::interval(WATCH_INTERVAL);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        ticker.tick().await;
        let now = modified(&path);
        if now == last {
            continue;
        }
        last = now;
        let resolved = match load_settings(&dir) {
            Ok(r) => r,
            Err(e) => {
                warn!(error = %e, "keeping the previous settings");
                continue;
            }
        };
        for w in &resolved.warnings {
            warn!("{w}");
        }
        let mut settings = resolved.settings;
        apply_overrides(&mut settings, &opts);
        if opts.port == Some(0) {
            settings.binding_port = shared.state.engine.settings().binding_port;
        }
        let changes = shared.state.engine.update_settings(settings.clone());
        for change in &changes {
            info!(path = %change.path, old = %change.old, new = %change.new, "setting changed");
            if !change.hot {
                warn!(path = %change.path, "this setting can not be switched while cobra is running; restart to apply it");
            }
        }
        if changes.iter().any(|c| c.path == "binding.port") {
            let interface = shared.state.engine.settings().binding_interface;
            let current = shared.listening.lock().unwrap().addr;
            match bind(&current.ip().to_string(), settings.binding_port).await {
                Ok(listener) => {
                    if let Err(e) = shared.serve(listener) {
                        warn!(error = %e, "could not switch port");
                    } else {
                        info!(addr = %shared.listening.lock().unwrap().addr, %interface, "now listening");
                    }
                }
                Err(e) => warn!(error = %e, "could not switch port; still serving on {current}"),
            }
        }
    }
}
