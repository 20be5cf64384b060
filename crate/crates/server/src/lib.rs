//! HTTP service for collaborative ontology projects: a JSON API, a
//! per-project event stream and webhook delivery.

pub mod api;
pub mod auth;
pub mod cli;
pub mod error;
pub mod events;
pub mod registry;
pub mod webhooks;

use std::future::Future;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use ontoforge_core::collab::RetryPolicy;
use ontoforge_core::ids::Env;
use ontoforge_core::project::ProjectError;
use tokio::net::TcpListener;

use crate::auth::Credentials;
use crate::registry::Registry;
use crate::webhooks::Dispatcher;

#[derive(Clone)]
pub struct AppState {
    pub registry: Arc<Registry>,
    pub credentials: Arc<Credentials>,
}

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub bind: IpAddr,
    /// 0 picks a free port.
    pub port: u16,
    pub data_dir: PathBuf,
    pub credentials: Credentials,
    /// Origin used in deep links; defaults to `http://<bound address>`.
    pub public_url: Option<String>,
    pub retry: RetryPolicy,
    pub webhook_timeout: Duration,
}

impl ServerConfig {
    pub fn new(data_dir: impl Into<PathBuf>, credentials: Credentials) -> Self {
        ServerConfig {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 0,
            data_dir: data_dir.into(),
            credentials,
            public_url: None,
            retry: RetryPolicy::default(),
            webhook_timeout: Duration::from_secs(10),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StartError {
    #[error("cannot bind: {0}")]
    Bind(#[from] std::io::Error),
    #[error("cannot load projects: {0}")]
    Load(#[from] ProjectError),
}

/// A bound, loaded server that has not started accepting yet.
pub struct Server {
    pub addr: SocketAddr,
    pub state: AppState,
    listener: TcpListener,
}

impl Server {
    /// Binds and loads the data directory. Must run inside a Tokio runtime.
    pub async fn bind(config: ServerConfig) -> Result<Server, StartError> {
        let listener = TcpListener::bind((config.bind, config.port)).await?;
        let addr = listener.local_addr()?;
        let public_url = config.public_url.unwrap_or_else(|| format!("http://{addr}"));
        let dispatcher = Dispatcher::spawn(config.retry, config.webhook_timeout);
        let registry = Registry::open(&config.data_dir, Env::system(), &public_url, dispatcher)?;
        let state = AppState { registry: Arc::new(registry), credentials: Arc::new(config.credentials) };
        Ok(Server { addr, state, listener })
    }

    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
        axum::serve(self.listener, api::router(self.state)).with_graceful_shutdown(shutdown).await
    }

    /// Serves on a background task.
    pub fn spawn(self) -> (SocketAddr, AppState, tokio::task::JoinHandle<std::io::Result<()>>) {
        let (addr, state) = (self.addr, self.state.clone());
        let task = tokio::spawn(self.run(std::future::pending()));
        (addr, state, task)
    }
}
