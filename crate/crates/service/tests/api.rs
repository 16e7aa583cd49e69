use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use taa_core::semantics::Configuration;
use taa_harness::{run_training, ExperimentConfig, StepMode, Trainer};
use taa_service::{router, AppState, StateView};
use tower::ServiceExt;

async fn call(state: &AppState, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_owned())))
        .unwrap();
    let response = router(state.clone()).oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn create(state: &AppState, config: Value) -> String {
    let (status, body) = call(state, Method::POST, "/sessions", Some(&config.to_string())).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["id"].as_str().unwrap().to_owned()
}

async fn episodes(state: &AppState, id: &str, mode: &str, count: usize) -> (StatusCode, Value) {
    let body = json!({ "mode": mode, "count": count }).to_string();
    call(state, Method::POST, &format!("/sessions/{id}/episodes"), Some(&body)).await
}

#[tokio::test]
async fn session_lifecycle() {
    let state = AppState::default();
    let a = create(&state, json!({ "seed": 1 })).await;
    let b = create(&state, json!({ "seed": 1 })).await;
    assert_ne!(a, b);

    let (status, body) = call(&state, Method::POST, "/sessions", Some(r#"{"episodes": 0}"#)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["field"], "episodes");
    let (status, _) = call(&state, Method::POST, "/sessions", Some("{nope")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, fresh) = call(&state, Method::GET, &format!("/sessions/{a}/state"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fresh["discovered"].as_array().unwrap().len(), 1);
    assert_eq!(fresh["discovered"][0], fresh["current"]);

    let (status, body) = episodes(&state, &a, "scheduled", 0).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["episodes"].as_array().unwrap().len(), 0);
    let (_, after) = call(&state, Method::GET, &format!("/sessions/{a}/state"), None).await;
    assert_eq!(after, fresh);

    let (status, _) = call(&state, Method::DELETE, &format!("/sessions/{a}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    for (method, path) in [
        (Method::GET, "state"),
        (Method::GET, "graph"),
        (Method::POST, "episodes"),
        (Method::POST, "scene"),
        (Method::POST, "hme/propose"),
    ] {
        let (status, _) = call(&state, method, &format!("/sessions/{a}/{path}"), Some("{}")).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{path}");
    }
    let (status, _) = call(&state, Method::DELETE, &format!("/sessions/{a}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn social_episodes_until_everything_is_known() {
    let state = AppState::default();
    let id = create(&state, json!({ "seed": 4, "beta": 1.0, "competence": { "p0": 1.0, "p_max": 1.0, "tau": 1.0 } })).await;
    let (status, body) = episodes(&state, &id, "scheduled", 5).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body["episodes"].as_array().unwrap().iter().all(|r| r["mode"] == "social"));
    assert_eq!(body["social_episodes"], 5);

    episodes(&state, &id, "social", 100).await;
    let (status, body) = episodes(&state, &id, "social", 3).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["social_episodes"], 0);
    assert_eq!(body["reason"], "space fully discovered");

    let (_, graph) = call(&state, Method::GET, &format!("/sessions/{id}/graph"), None).await;
    assert_eq!(graph["nodes"].as_array().unwrap().len(), 26);
    assert!(graph["frontier"].as_array().unwrap().is_empty());
    assert!(graph.get("full").is_none());
    let (_, full) = call(&state, Method::GET, &format!("/sessions/{id}/graph?full=true"), None).await;
    assert_eq!(full["full"]["edges"].as_array().unwrap().len(), 75);

    let (_, proposal) = call(&state, Method::POST, &format!("/sessions/{id}/hme/propose"), Some("{}")).await;
    assert!(proposal["pair"].is_null());
}

#[tokio::test]
async fn hme_proposals() {
    let state = AppState::default();
    let id = create(&state, json!({ "seed": 8, "beta": 0.0 })).await;
    let (status, body) = call(&state, Method::POST, &format!("/sessions/{id}/hme/propose"), Some("{}")).await;
    assert_eq!(status, StatusCode::OK);
    let pair = body["pair"].clone();
    let (_, s) = call(&state, Method::GET, &format!("/sessions/{id}/state"), None).await;
    assert_eq!(pair["frontier"], s["current"]);
    assert!(body.get("episode").is_none());

    let accept = json!({ "accept": true, "pair": pair }).to_string();
    let (status, body) = call(&state, Method::POST, &format!("/sessions/{id}/hme/propose"), Some(&accept)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["episode"]["mode"], "social");

    let bogus = json!({ "pair": { "frontier": "000000000", "beyond": "111111111" } }).to_string();
    let (status, _) = call(&state, Method::POST, &format!("/sessions/{id}/hme/propose"), Some(&bogus)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn scenes() {
    let state = AppState::default();
    let id = create(&state, json!({ "seed": 2 })).await;
    let uri = format!("/sessions/{id}/scene");
    let (status, body) =
        call(&state, Method::POST, &uri, Some(r#"{"intervention": {"kind": "pre_stacked", "k": 2}}"#)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let (_, s) = call(&state, Method::GET, &format!("/sessions/{id}/state"), None).await;
    let current: Configuration = serde_json::from_value(s["current"].clone()).unwrap();
    assert!((3..9).any(|i| current.get_index(i)), "{current}");

    let twice = r#"{"scene": {"structures": [{"single": 0}, {"single": 0}, {"single": 2}], "clusters": [[0], [1], [2]]}}"#;
    let (status, body) = call(&state, Method::POST, &uri, Some(twice)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("more than once"), "{body}");

    let far = r#"{"intervention": {"kind": "near_goal", "goal": "000100000", "distance": 1}}"#;
    let (status, _) = call(&state, Method::POST, &uri, Some(far)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let stack = r#"{"scene": {"structures": [{"stack": [1, 0]}, {"single": 2}], "clusters": [[0], [1]]}}"#;
    let (status, body) = call(&state, Method::POST, &uri, Some(stack)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["configuration"], "100100000");

    let (status, _) = call(&state, Method::POST, &uri, Some("{}")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

/// Feeds oracle examples for one sentence into the session's grounding table until it converges.
async fn converge(state: &AppState, id: &str, text: &str) {
    let session = state.sessions.get(id).unwrap();
    let mut t = session.reader().await;
    let sentence = t.inventory().get(text).unwrap().clone();
    let graph = t.graph().clone();
    let index = graph.world().index_of(sentence.transformation.predicate);
    for &before in graph.nodes() {
        for after in graph.neighbors(&before).unwrap() {
            if before.get_index(index) != sentence.transformation.target
                && after.get_index(index) == sentence.transformation.target
            {
                t.grounding.induce(&before, text, &after).unwrap();
            }
        }
    }
    assert!(t.grounding.is_converged(text));
}

#[tokio::test]
async fn instructions() {
    let state = AppState::default();
    let id = create(&state, json!({ "seed": 3, "beta": 1.0, "competence": { "p0": 1.0, "p_max": 1.0, "tau": 1.0 } })).await;
    let uri = format!("/sessions/{id}/instruction");
    let leaf = json!({ "expression": { "op": "leaf", "sentence": "get red above green" } }).to_string();

    let (status, body) = call(&state, Method::POST, &uri, Some(&leaf)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "not yet grounded");

    let typo = json!({ "expression": { "op": "leaf", "sentence": "get red abov green" } }).to_string();
    let (status, body) = call(&state, Method::POST, &uri, Some(&typo)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["nearest"].as_array().unwrap().iter().any(|s| s == "get red above green"), "{body}");

    let (status, _) = call(&state, Method::POST, &uri, Some(r#"{"expression": {"op": "xor"}}"#)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    converge(&state, &id, "get red above green").await;
    let not = json!({ "expression": { "op": "not", "children": [{ "op": "leaf", "sentence": "get red above green" }] } })
        .to_string();
    let (status, body) = call(&state, Method::POST, &uri, Some(&not)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["success"], false);
    assert_eq!(body["reason"], "no compatible goal");

    episodes(&state, &id, "social", 60).await;
    let (status, body) = call(&state, Method::POST, &uri, Some(&leaf)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["success"], true);
    let current: Configuration = serde_json::from_value(body["state"]["current"].clone()).unwrap();
    assert_eq!(current.to_string().chars().nth(3), Some('1'), "above(red,green) holds in {current}");
}

#[tokio::test]
async fn busy_sessions_answer_409() {
    let state = AppState::default();
    let id = create(&state, json!({ "seed": 5 })).await;
    let session = state.sessions.get(&id).unwrap();
    let guard = session.try_writer().unwrap();
    let (status, _) = episodes(&state, &id, "scheduled", 1).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&state, Method::POST, &format!("/sessions/{id}/scene"), Some(r#"{"intervention": {"kind": "random_scatter"}}"#)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    drop(guard);
    let (status, _) = episodes(&state, &id, "scheduled", 1).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn overlapping_steps_never_interleave() {
    let state = AppState::default();
    let id = create(&state, json!({ "seed": 6 })).await;
    let requests: Vec<_> = (0..4)
        .map(|_| {
            let (state, id) = (state.clone(), id.clone());
            tokio::spawn(async move { episodes(&state, &id, "scheduled", 300).await })
        })
        .collect();
    let mut ran = 0;
    for r in requests {
        let (status, body) = r.await.unwrap();
        match status {
            StatusCode::OK => {
                let records = body["episodes"].as_array().unwrap();
                let first = records[0]["episode"].as_u64().unwrap();
                assert!(records.iter().enumerate().all(|(i, r)| r["episode"].as_u64() == Some(first + i as u64)));
                ran += records.len();
            }
            StatusCode::CONFLICT => {}
            other => panic!("unexpected {other}"),
        }
    }
    let (_, s) = call(&state, Method::GET, &format!("/sessions/{id}/state"), None).await;
    assert_eq!(s["episode"].as_u64().unwrap() as usize, ran);
    assert!(ran >= 300);
}

#[tokio::test]
async fn rest_session_equals_offline_run() {
    let config = ExperimentConfig { seed: 2024, beta: 0.3, ..Default::default() };
    let state = AppState::default();
    let id = create(&state, serde_json::to_value(&config).unwrap()).await;
    for _ in 0..4 {
        let (status, _) = episodes(&state, &id, "scheduled", 25).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (_, rest) = call(&state, Method::GET, &format!("/sessions/{id}/state"), None).await;

    let mut offline = Trainer::new(config.clone()).unwrap();
    for _ in 0..100 {
        offline.step(StepMode::Scheduled).unwrap();
    }
    assert_eq!(rest, serde_json::to_value(StateView::of(&offline)).unwrap());

    let harness = run_training(&ExperimentConfig { episodes: 100, ..config }).unwrap();
    assert_eq!(rest, serde_json::to_value(StateView::of(&harness.trainer)).unwrap());
}
