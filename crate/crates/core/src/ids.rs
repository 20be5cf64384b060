//! Identifier newtypes plus the injectable clock and id source.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($($(#[$meta:meta])* $name:ident),* $(,)?) => {$(
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Self {
                $name(value.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(value: &str) -> Self {
                $name(value.to_owned())
            }
        }
    )*};
}

string_id!(UserId, ProjectId, OntologyId, ThreadId, CommentId, TagId, WebhookId);

/// Milliseconds since the Unix epoch, UTC.
pub type Timestamp = i64;

pub trait Clock: Send + Sync {
    fn now_ms(&self) -> Timestamp;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> Timestamp {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as i64).unwrap_or(0)
    }
}

/// Starts at a fixed instant and advances by `step` on every read.
#[derive(Debug)]
pub struct SteppingClock {
    next: AtomicU64,
    step: u64,
}

impl SteppingClock {
    pub fn new(start: Timestamp, step: u64) -> Self {
        SteppingClock { next: AtomicU64::new(start as u64), step }
    }
}

impl Clock for SteppingClock {
    fn now_ms(&self) -> Timestamp {
        self.next.fetch_add(self.step, Ordering::SeqCst) as i64
    }
}

/// Source of fresh opaque identifiers (project ids, thread ids, minted IRI local names).
pub trait IdSource: Send + Sync {
    fn fresh(&self) -> String;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct UuidSource;

impl IdSource for UuidSource {
    fn fresh(&self) -> String {
        uuid::Uuid::new_v4().to_string()
    }
}

/// Deterministic ids: `<prefix>1`, `<prefix>2`, ...
#[derive(Debug)]
pub struct SequentialIds {
    prefix: String,
    counter: AtomicU64,
}

impl SequentialIds {
    pub fn new(prefix: impl Into<String>) -> Self {
        SequentialIds { prefix: prefix.into(), counter: AtomicU64::new(0) }
    }
}

impl IdSource for SequentialIds {
    fn fresh(&self) -> String {
        format!("{}{}", self.prefix, self.counter.fetch_add(1, Ordering::SeqCst) + 1)
    }
}

/// Clock and id source handed to mutating operations.
#[derive(Clone)]
pub struct Env {
    pub clock: Arc<dyn Clock>,
    pub ids: Arc<dyn IdSource>,
}

impl Env {
    pub fn system() -> Self {
        Env { clock: Arc::new(SystemClock), ids: Arc::new(UuidSource) }
    }

    pub fn deterministic() -> Self {
        Env { clock: Arc::new(SteppingClock::new(1_700_000_000_000, 1000)), ids: Arc::new(SequentialIds::new("id")) }
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now_ms()
    }

    pub fn fresh(&self) -> String {
        self.ids.fresh()
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Env").finish_non_exhaustive()
    }
}
