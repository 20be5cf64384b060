//! Asynchronous webhook delivery with retries.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use ontoforge_core::collab::{DeliveryStatus, RetryPolicy, WebhookDelivery};
use ontoforge_core::ids::WebhookId;
use tokio::sync::mpsc;

/// Latest delivery status per webhook of one project.
pub type StatusBoard = Arc<Mutex<HashMap<WebhookId, DeliveryStatus>>>;

struct Job {
    delivery: WebhookDelivery,
    board: StatusBoard,
}

/// Queues deliveries; each one is retried on its own task so a slow
/// endpoint never holds up the others.
#[derive(Clone)]
pub struct Dispatcher {
    tx: mpsc::UnboundedSender<Job>,
}

impl Dispatcher {
    /// Must be called inside a Tokio runtime.
    pub fn spawn(policy: RetryPolicy, timeout: Duration) -> Dispatcher {
        let client = reqwest::Client::builder().timeout(timeout).build().expect("http client");
        let (tx, mut rx) = mpsc::unbounded_channel::<Job>();
        tokio::spawn(async move {
            while let Some(job) = rx.recv().await {
                let client = client.clone();
                let policy = policy.clone();
                tokio::spawn(async move {
                    job.board.lock().unwrap().insert(job.delivery.webhook.clone(), DeliveryStatus::Pending);
                    let status = deliver(&client, &policy, &job.delivery).await;
                    match &status {
                        DeliveryStatus::Failed { error, .. } => {
                            log::warn!("webhook {} gave up: {error}", job.delivery.webhook)
                        }
                        _ => log::debug!("webhook {} delivered", job.delivery.webhook),
                    }
                    job.board.lock().unwrap().insert(job.delivery.webhook.clone(), status);
                });
            }
        });
        Dispatcher { tx }
    }

    pub fn enqueue(&self, delivery: WebhookDelivery, board: &StatusBoard) {
        let _ = self.tx.send(Job { delivery, board: board.clone() });
    }
}

/// POSTs the payload until a 2xx answer or the policy runs out.
pub async fn deliver(client: &reqwest::Client, policy: &RetryPolicy, delivery: &WebhookDelivery) -> DeliveryStatus {
    let mut error = String::new();
    for attempt in 1..=policy.max_attempts() {
        let wait = policy.delay_before(attempt).unwrap_or_default();
        if !wait.is_zero() {
            tokio::time::sleep(wait).await;
        }
        let sent = client
            .post(delivery.url.as_str())
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(delivery.payload.clone())
            .send()
            .await;
        match sent {
            Ok(r) if r.status().is_success() => return DeliveryStatus::Delivered { attempts: attempt },
            Ok(r) => error = format!("HTTP {}", r.status()),
            Err(e) => error = e.to_string(),
        }
    }
    DeliveryStatus::Failed { attempts: policy.max_attempts(), error }
}
