//! Endpoint behaviour outside the main evolution loop: error bodies, paging
//! and model upload.

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use evoshade::http::router;
use evoshade::{Service, Store};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const TRIANGLE: &str = r#"{"name":"tri","positions":[0,0,0,1,0,0,0,1,0],"indices":[0,1,2]}"#;

fn app() -> (tempfile::TempDir, Arc<Service>, Router) {
    let dir = tempfile::tempdir().unwrap();
    let service = Arc::new(Service::new(Arc::new(Store::open(dir.path()).unwrap())));
    let app = router(Arc::clone(&service));
    (dir, service, app)
}

async fn call(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, Vec<u8>) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    (status, response.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn call_json(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

#[tokio::test]
async fn errors_use_the_common_body() {
    let (_dir, _svc, app) = app();
    let (status, body) = call_json(&app, "GET", "/api/sessions/nope/candidates", "").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "not_found");
    assert!(body["error"]["message"].is_string());

    let (status, body) = call_json(&app, "POST", "/api/sessions", r#"{"seed": "x"}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "validation");

    let (status, body) =
        call_json(&app, "POST", "/api/sessions", r#"{"config": {"population_size": 0}}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");

    let (_, view) = call_json(&app, "POST", "/api/sessions", "").await;
    let session = view["session_id"].as_str().unwrap();
    let uri = format!("/api/sessions/{session}/step");
    let (status, body) = call_json(&app, "POST", &uri, r#"{"selected": []}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "validation");
    let (status, _) = call_json(&app, "POST", &uri, r#"{"selected": ["c99-0"]}"#).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let save = format!("/api/sessions/{session}/save");
    let cid = view["candidates"][0]["candidate_id"].as_str().unwrap();
    let (status, _) = call_json(&app, "POST", &save, &json!({"candidate_id": cid, "name": " "}).to_string()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let inject = format!("/api/sessions/{session}/inject");
    let (status, _) = call_json(&app, "POST", &inject, r#"{"transformation_id": "missing"}"#).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn transformations_are_listed_newest_first() {
    let (_dir, _svc, app) = app();
    let (_, view) = call_json(&app, "POST", "/api/sessions", r#"{"seed": 3}"#).await;
    let session = view["session_id"].as_str().unwrap();
    let save = format!("/api/sessions/{session}/save");
    let mut ids = Vec::new();
    for (i, name) in ["first", "second", "third"].iter().enumerate() {
        let cid = view["candidates"][i]["candidate_id"].as_str().unwrap();
        let (status, body) =
            call_json(&app, "POST", &save, &json!({"candidate_id": cid, "name": name}).to_string()).await;
        assert_eq!(status, StatusCode::CREATED);
        ids.push(body["transformation_id"].as_str().unwrap().to_string());
    }
    let (status, page) = call_json(&app, "GET", "/api/transformations?offset=0&limit=2", "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(page["total"], 3);
    let items = page["items"].as_array().unwrap();
    assert_eq!(items.len(), 2);
    assert_eq!(items[0]["id"], ids[2].as_str());
    assert_eq!(items[1]["name"], "second");

    let (_, rest) = call_json(&app, "GET", "/api/transformations?offset=2", "").await;
    assert_eq!(rest["items"][0]["name"], "first");
    assert_eq!(rest["items"][0]["expression"], view["candidates"][0]["expression"]);
}

#[tokio::test]
async fn models_round_trip_byte_for_byte() {
    let (_dir, _svc, app) = app();
    let (status, body) = call_json(&app, "POST", "/api/models", TRIANGLE).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    let id = body["model_id"].as_str().unwrap();

    let (status, bytes) = call(&app, "GET", &format!("/api/models/{id}"), "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(bytes, TRIANGLE.as_bytes());

    let (_, page) = call_json(&app, "GET", "/api/models", "").await;
    assert_eq!(page["total"], 1);
    assert_eq!(page["items"][0]["vertex_count"], 3);
    assert_eq!(page["items"][0]["triangle_count"], 1);

    let (status, body) = call_json(&app, "POST", "/api/models", r#"{"name":"bad","positions":[0,0],"indices":[]}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "validation");
    let (status, _) = call_json(&app, "GET", "/api/models/unknown", "").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
