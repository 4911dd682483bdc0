use std::time::Duration;

use alpaga_core::testkit::{generate_game, mutex_game, oracle_solve, solver_corpus};
use alpaga_core::{parse_game, solve_game, CpreKind, SolveOptions};
use alpaga_server::{app, solution_json, Config};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const EXAMPLE: &str = "ALPHABET : a\nSTATES : 1, 2,3\nINIT : 1\nSAFE : 1,2,3\nTARGET : 2\nTRANS :\n1, 1 , a\n1,2, a\n2, 3, a\n3, 3,a\nOBS :\n1:1\n2:1\n3:0\n";

fn flipped() -> String {
    EXAMPLE.replace("1:1\n", "1:0\n")
}

async fn call(router: &Router, method: &str, uri: &str, body: impl Into<Body>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.into())
        .unwrap();
    let resp = router.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn upload(router: &Router, text: &str) -> String {
    let (status, v) = call(router, "POST", "/games", text.to_string()).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn upload_reports_summary() {
    let router = app(Config::default());
    let (status, v) = call(&router, "POST", "/games", EXAMPLE).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["locations"], json!(["1", "2", "3"]));
    assert_eq!(v["actions"], json!(["a"]));
    assert_eq!(v["observations"][0], json!({ "id": "o1", "members": ["1"], "priority": 1 }));
    assert_eq!(v["warnings"], json!([]));
    assert_eq!(v["id"].as_str().unwrap().len(), 32);
}

#[tokio::test]
async fn upload_errors() {
    let router = app(Config { max_body_bytes: 256, ..Config::default() });
    let broken = EXAMPLE.replace("3:0", "3:zero");
    let (status, v) = call(&router, "POST", "/games", broken).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["line"], json!(14));
    assert!(v["message"].as_str().unwrap().contains("zero"));

    let (status, _) = call(&router, "POST", "/games", "x".repeat(1000)).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);

    let partial = "ALPHABET : a, b\nSTATES : 1\nINIT : 1\nTRANS :\n1, 1, a\nOBS :\n1 : 0\n";
    let (status, v) = call(&router, "POST", "/games?totalize=false", partial).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["message"].as_str().unwrap().contains("not total"));
    let (status, v) = call(&router, "POST", "/games", partial).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["warnings"], json!(["added transition 1, SINK, b"]));
}

#[tokio::test]
async fn solve_example_and_unknown_ids() {
    let router = app(Config::default());
    let id = upload(&router, EXAMPLE).await;
    let (status, v) = call(&router, "POST", &format!("/games/{id}/solve"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["winning"], json!(false));

    let (status, v) = call(&router, "GET", &format!("/games/{id}"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["solve"]["status"], json!("done"));

    let (status, _) = call(&router, "POST", "/games/nope/solve", Body::empty()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&router, "POST", &format!("/games/{id}/solve?cpre=magic"), Body::empty()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&router, "POST", &format!("/games/{id}/sessions"), Body::empty()).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn results_equal_direct_solver_output() {
    let router = app(Config::default());
    for seed in 0..30 {
        let g = generate_game(&solver_corpus(seed));
        let text = g.render();
        let id = upload(&router, &text).await;
        for (name, cpre) in [("symbolic", CpreKind::Symbolic), ("enumerative", CpreKind::Enumerative)] {
            for simplify in [true, false] {
                let uri = format!("/games/{id}/solve?cpre={name}&simplify={simplify}");
                let (status, mut v) = call(&router, "POST", &uri, Body::empty()).await;
                assert_eq!(status, StatusCode::OK);
                let parsed = parse_game(&text, true).unwrap().game;
                let direct = solve_game(&parsed, SolveOptions { cpre, simplify, ..Default::default() }).unwrap();
                let mut expected = solution_json(&direct);
                v["stats"] = Value::Null;
                expected["stats"] = Value::Null;
                assert_eq!(v, expected, "seed {seed}");
                assert_eq!(v["winning"], json!(oracle_solve(&parsed).unwrap()));
            }
        }
    }
}

#[tokio::test]
async fn session_walkthrough() {
    let router = app(Config::default());
    let id = upload(&router, &flipped()).await;
    let (status, _) = call(&router, "POST", &format!("/games/{id}/sessions"), Body::empty()).await;
    assert_eq!(status, StatusCode::CONFLICT);
    call(&router, "POST", &format!("/games/{id}/solve"), Body::empty()).await;

    let (status, v) = call(&router, "POST", &format!("/games/{id}/sessions"), json!({ "seed": 5 }).to_string()).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["knowledge"], json!(["1"]));
    assert_eq!(v["action"], json!("a"));
    assert_eq!(v["compatible"], json!(["o1", "o2"]));
    assert_eq!(v["status"], json!("running"));
    assert_eq!(v["seed"], json!(5));
    let sid = v["id"].as_str().unwrap().to_string();
    let step = format!("/sessions/{sid}/step");

    let (status, _) = call(&router, "POST", &step, json!({ "observation": "o3" }).to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (_, unchanged) = call(&router, "GET", &format!("/sessions/{sid}"), Body::empty()).await;
    assert_eq!(unchanged["history"], json!([]));

    let (_, v) = call(&router, "POST", &step, json!({ "observation": "o1" }).to_string()).await;
    assert_eq!(v["knowledge"], json!(["1"]));
    let (_, v) = call(&router, "POST", &step, json!({ "observation": "o2" }).to_string()).await;
    assert_eq!(v["knowledge"], json!(["2"]));
    assert_eq!(v["status"], json!("won"));
    assert_eq!(v["history"].as_array().unwrap().len(), 2);
    assert_eq!(v["history"][1], json!({ "action": "a", "observation": "o2", "knowledge": ["2"] }));

    let (status, _) = call(&router, "POST", &step, json!({ "random": true }).to_string()).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&router, "POST", "/sessions/nope/step", json!({ "random": true }).to_string()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn random_steps_depend_only_on_seed() {
    let router = app(Config::default());
    let id = upload(&router, &flipped()).await;
    call(&router, "POST", &format!("/games/{id}/solve"), Body::empty()).await;
    let mut traces = Vec::new();
    for _ in 0..2 {
        let (_, v) = call(&router, "POST", &format!("/games/{id}/sessions"), json!({ "seed": 11 }).to_string()).await;
        let sid = v["id"].as_str().unwrap().to_string();
        let mut last = v;
        for _ in 0..8 {
            if last["status"] != json!("running") {
                break;
            }
            let (_, v) = call(&router, "POST", &format!("/sessions/{sid}/step"), json!({ "random": true }).to_string()).await;
            last = v;
        }
        traces.push(last["history"].clone());
    }
    assert_eq!(traces[0], traces[1]);
}

#[tokio::test]
async fn slow_solves_return_a_poll_url_and_block_duplicates() {
    let router = app(Config { solve_timeout: Duration::from_millis(1), ..Config::default() });
    let id = upload(&router, &mutex_game(&[1, 2, 3, 4, 5, 6, 7, 8]).render()).await;
    let uri = format!("/games/{id}/solve?cpre=enumerative");
    let (status, v) = call(&router, "POST", &uri, Body::empty()).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    assert_eq!(v["poll"], json!(format!("/games/{id}")));
    let (status, _) = call(&router, "POST", &uri, Body::empty()).await;
    assert_eq!(status, StatusCode::CONFLICT);
    loop {
        let (_, v) = call(&router, "GET", &format!("/games/{id}"), Body::empty()).await;
        if v["solve"]["status"] == json!("done") {
            assert_eq!(v["solve"]["result"]["winning"], json!(true));
            break;
        }
        assert_eq!(v["solve"]["status"], json!("running"));
        tokio::time::sleep(Duration::from_millis(100)).await;
    }
}

#[tokio::test]
async fn persisted_games_are_reloaded() {
    let dir = std::env::temp_dir().join(format!("alpaga-api-{}", std::process::id()));
    let cfg = Config { data_dir: Some(dir.clone()), ..Config::default() };
    let id = upload(&app(cfg.clone()), EXAMPLE).await;
    let (status, v) = call(&app(cfg), "GET", &format!("/games/{id}"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["locations"], json!(["1", "2", "3"]));
    std::fs::remove_dir_all(dir).unwrap();
}

#[tokio::test]
async fn static_files_are_served_at_the_root() {
    let dir = std::env::temp_dir().join(format!("alpaga-static-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<p>ui</p>").unwrap();
    let router = app(Config { static_dir: dir.clone(), ..Config::default() });
    let req = Request::builder().uri("/").body(Body::empty()).unwrap();
    let resp = router.oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&bytes[..], b"<p>ui</p>");
    std::fs::remove_dir_all(dir).unwrap();
}
