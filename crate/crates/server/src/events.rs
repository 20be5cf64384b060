//! Per-project server-sent event stream.

use std::collections::VecDeque;
use std::convert::Infallible;
use std::sync::Arc;

use axum::response::sse::{Event, KeepAlive, Sse};
use futures::stream::{self, Stream};
use ontoforge_core::collab::{EventKind, ProjectEvent};
use tokio::sync::broadcast::error::RecvError;
use tokio::sync::broadcast::Receiver;

use crate::registry::ProjectHandle;

pub fn kind_name(kind: EventKind) -> &'static str {
    match kind {
        EventKind::CommentPosted => "CommentPosted",
        EventKind::ThreadStatusChanged => "ThreadStatusChanged",
        EventKind::RevisionAppended => "RevisionAppended",
    }
}

pub fn frame(event: &ProjectEvent) -> Event {
    let data = serde_json::to_string(&event.envelope()).expect("envelope serializes");
    let frame = Event::default().event(kind_name(event.kind)).data(data);
    match event.revision_number {
        Some(n) => frame.id(n.to_string()),
        None => frame,
    }
}

struct Cursor {
    replay: VecDeque<ProjectEvent>,
    live: Receiver<ProjectEvent>,
    /// Highest revision already sent; live duplicates at or below it are skipped.
    sent: u64,
}

/// Revisions after `since` first, then live events. The subscription is
/// taken before the replay is read so nothing committed in between is lost.
pub fn stream(handle: &Arc<ProjectHandle>, since: Option<u64>) -> impl Stream<Item = Result<Event, Infallible>> {
    let live = handle.subscribe();
    let project = handle.snapshot();
    let since = since.unwrap_or(project.log().head_number());
    let replay: VecDeque<ProjectEvent> =
        project.log().revisions().iter().filter(|r| r.number > since).map(|r| project.revision_event(r)).collect();
    let cursor = Cursor { replay, live, sent: since };
    stream::unfold(cursor, |mut c| async move {
        if let Some(event) = c.replay.pop_front() {
            c.sent = c.sent.max(event.revision_number.unwrap_or(0));
            return Some((Ok(frame(&event)), c));
        }
        loop {
            match c.live.recv().await {
                Ok(event) => {
                    if let Some(n) = event.revision_number {
                        if n <= c.sent {
                            continue;
                        }
                        c.sent = n;
                    }
                    return Some((Ok(frame(&event)), c));
                }
                Err(RecvError::Lagged(missed)) => log::warn!("event subscriber lagged by {missed} events"),
                Err(RecvError::Closed) => return None,
            }
        }
    })
}

pub fn sse(handle: &Arc<ProjectHandle>, since: Option<u64>) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    Sse::new(stream(handle, since)).keep_alive(KeepAlive::default())
}
