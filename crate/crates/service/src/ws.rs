use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::response::Response;
use futures::{SinkExt, StreamExt};
use serde::Deserialize;
use tokio::sync::broadcast::error::RecvError;

use crate::api::ApiError;
use crate::session::Event;
use crate::AppState;

#[derive(Deserialize)]
pub struct EventsQuery {
    /// First sequence number to replay; the full log by default.
    #[serde(default)]
    since: u64,
}

pub async fn events(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<EventsQuery>,
    upgrade: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let session = state.sessions.get(&id).ok_or_else(ApiError::not_found)?;
    Ok(upgrade.on_upgrade(move |socket| async move {
        let (backlog, receiver) = session.subscribe(q.since);
        drop(session);
        stream(socket, backlog, receiver).await
    }))
}

async fn stream(socket: WebSocket, backlog: Vec<Event>, mut receiver: tokio::sync::broadcast::Receiver<Event>) {
    let (mut tx, mut rx) = socket.split();
    let mut next = backlog.first().map_or(0, |e| e.seq);
    for event in backlog {
        next = event.seq + 1;
        if send(&mut tx, &event).await.is_err() {
            return;
        }
    }
    loop {
        tokio::select! {
            incoming = rx.next() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                _ => {}
            },
            event = receiver.recv() => match event {
                Ok(event) if event.seq < next => {}
                Ok(event) => {
                    next = event.seq + 1;
                    if send(&mut tx, &event).await.is_err() {
                        return;
                    }
                }
                Err(RecvError::Lagged(n)) => {
                    log::warn!("websocket subscriber lagged by {n} events; closing");
                    let _ = tx.send(Message::Close(None)).await;
                    return;
                }
                Err(RecvError::Closed) => {
                    let _ = tx.send(Message::Close(None)).await;
                    return;
                }
            },
        }
    }
}

async fn send<S>(tx: &mut S, event: &Event) -> Result<(), axum::Error>
where
    S: SinkExt<Message, Error = axum::Error> + Unpin,
{
    let text = serde_json::to_string(event).expect("events serialize");
    tx.send(Message::Text(text.into())).await
}
