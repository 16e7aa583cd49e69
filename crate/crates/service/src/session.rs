use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex as StdMutex, RwLock};

use serde::{Deserialize, Serialize};
use taa_core::graph::{FrontierPair, GraphExport};
use taa_core::learner::LearnerSnapshot;
use taa_core::semantics::{Configuration, Scene};
use taa_harness::{EventKind, Trainer};
use tokio::sync::{broadcast, Mutex, OwnedMutexGuard};

/// A numbered event as sent over the WebSocket: `{seq, type, payload}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// What `GET /sessions/{id}/state` returns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    #[serde(flatten)]
    pub learner: LearnerSnapshot,
    pub episode: u64,
    pub current: Configuration,
    pub scene: Scene,
    pub converged_sentences: usize,
}

impl StateView {
    pub fn of(trainer: &Trainer) -> Self {
        StateView {
            learner: trainer.learner.snapshot(),
            episode: trainer.episode(),
            current: trainer.current(),
            scene: trainer.scene().clone(),
            converged_sentences: trainer.grounding.converged_count(),
        }
    }
}

/// What `GET /sessions/{id}/graph` returns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphView {
    #[serde(flatten)]
    pub discovered: GraphExport,
    pub frontier: Vec<FrontierPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full: Option<GraphExport>,
}

impl GraphView {
    pub fn of(trainer: &Trainer, full: bool) -> Self {
        let graph = trainer.graph();
        GraphView {
            discovered: graph.export_subset(&trainer.learner.discovered),
            frontier: graph.frontier_pairs(&trainer.learner.discovered),
            full: full.then(|| graph.export()),
        }
    }
}

/// One live learner. The trainer mutex is the single-writer lock; the event log and the
/// broadcast channel carry every event ever emitted, numbered from 0.
pub struct Session {
    trainer: Arc<Mutex<Trainer>>,
    log: StdMutex<Vec<Event>>,
    sender: broadcast::Sender<Event>,
}

pub type SessionGuard = OwnedMutexGuard<Trainer>;

impl Session {
    pub fn new(trainer: Trainer) -> Arc<Self> {
        let (sender, _) = broadcast::channel(4096);
        let session =
            Arc::new(Session { trainer: Arc::new(Mutex::new(trainer)), log: StdMutex::new(Vec::new()), sender });
        if let Ok(mut t) = session.trainer.clone().try_lock_owned() {
            session.publish(&mut t);
        }
        session
    }

    /// Exclusive access, or `None` when another request holds the session.
    pub fn try_writer(&self) -> Option<SessionGuard> {
        self.trainer.clone().try_lock_owned().ok()
    }

    pub async fn reader(&self) -> SessionGuard {
        self.trainer.clone().lock_owned().await
    }

    /// Numbers the trainer's buffered events, appends them to the log and broadcasts them.
    pub fn publish(&self, trainer: &mut Trainer) {
        let mut log = self.log.lock().expect("event log poisoned");
        for kind in trainer.drain_events() {
            let event = Event { seq: log.len() as u64, kind };
            log.push(event.clone());
            let _ = self.sender.send(event);
        }
    }

    /// Events with `seq >= from` plus a receiver for everything after them.
    pub fn subscribe(&self, from: u64) -> (Vec<Event>, broadcast::Receiver<Event>) {
        let log = self.log.lock().expect("event log poisoned");
        let receiver = self.sender.subscribe();
        (log.iter().skip(from as usize).cloned().collect(), receiver)
    }
}

#[derive(Default)]
pub struct Sessions {
    map: RwLock<HashMap<String, Arc<Session>>>,
    next: AtomicU64,
}

impl Sessions {
    pub fn insert(&self, session: Arc<Session>) -> String {
        let n = self.next.fetch_add(1, Ordering::Relaxed);
        let id = format!("s{:08x}", (n as u32).wrapping_mul(0x9e37_79b9));
        self.map.write().expect("session map poisoned").insert(id.clone(), session);
        id
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        self.map.read().expect("session map poisoned").get(id).cloned()
    }

    pub fn remove(&self, id: &str) -> Option<Arc<Session>> {
        self.map.write().expect("session map poisoned").remove(id)
    }
}
