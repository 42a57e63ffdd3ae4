//! The HTTP service, driven in-process through the router.

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use slicelab_cli::http::router;
use tower::ServiceExt;

async fn call(method: &str, path: &str, body: &str) -> (StatusCode, String, String) {
    call_with(router(None), method, path, body).await
}

async fn call_with(app: axum::Router, method: &str, path: &str, body: &str) -> (StatusCode, String, String) {
    let req = Request::builder()
        .method(method)
        .uri(path)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.oneshot(req).await.unwrap();
    let status = res.status();
    let content_type = res
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, content_type, String::from_utf8(bytes.to_vec()).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("not JSON ({e}): {text}"))
}

#[tokio::test]
async fn health_check() {
    let (status, _, body) = call("GET", "/healthz", "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body.trim(), "ok");
}

#[tokio::test]
async fn negative_eight_is_impossible_under_the_assumption() {
    let (status, content_type, body) = call("POST", "/api/analyze", r#"{"catalog":"8-(2)"}"#).await;
    assert_eq!(status, StatusCode::OK);
    assert!(content_type.starts_with("application/json"));
    let v = json(&body);
    assert_eq!(v["result"]["verdict"]["result"], "impossible");
    assert_eq!(v["input_digest"].as_str().unwrap().len(), 64);

    let (_, _, body) = call("POST", "/api/analyze", r#"{"catalog":"8-(2)","assume_negative_slice":false}"#).await;
    assert_ne!(json(&body)["result"]["verdict"]["result"], "impossible");
}

#[tokio::test]
async fn p_eight_slices_to_a_positive_figure_eight() {
    let (status, _, body) = call("POST", "/api/slice", r#"{"preset":"P-eight","svg":true}"#).await;
    assert_eq!(status, StatusCode::OK);
    let r = &json(&body)["result"];
    assert_eq!(r["classification"]["spec"]["shape"], "eight_plus");
    assert_eq!(r["preset"], "P-eight");
    assert!(r["svg"].as_str().unwrap().starts_with("<svg"));
    assert!(r["area_residuals"].as_array().unwrap().iter().all(|x| x.as_f64().unwrap() < 1e-3));
}

#[tokio::test]
async fn presets_are_listed() {
    let (status, _, body) = call("GET", "/api/presets", "").await;
    assert_eq!(status, StatusCode::OK);
    let listed = body.matches("\"P-").count();
    assert!(listed >= 4, "{body}");
    for name in ["P-eight", "P-sum", "P-cat", "P-merge"] {
        assert!(body.contains(name), "{name} missing");
    }
}

#[tokio::test]
async fn input_errors_map_to_status_codes() {
    let cases = [
        ("/api/analyze", "{not json", StatusCode::BAD_REQUEST, "invalid_input"),
        ("/api/analyze", r#"{"catalog":"8+(1"}"#, StatusCode::BAD_REQUEST, "syntax"),
        ("/api/analyze", r#"{"catalog":"8+(1)","bogus":1}"#, StatusCode::BAD_REQUEST, "invalid_input"),
        ("/api/slice", r#"{"preset":"P-nothing"}"#, StatusCode::NOT_FOUND, "not_found"),
        ("/api/slice", r#"{"preset":"P-eight","grid":2}"#, StatusCode::BAD_REQUEST, "invalid_input"),
        ("/api/analyze", r#"{"catalog":"merge(1,2,1)"}"#, StatusCode::UNPROCESSABLE_ENTITY, "constraint"),
        ("/api/analyze", r#"{"catalog":"C(-,+,-;1,1,1)"}"#, StatusCode::UNPROCESSABLE_ENTITY, "non_generic"),
        (
            "/api/slice",
            r#"{"preset":"P-eight","level":-0.37068,"grid":64}"#,
            StatusCode::UNPROCESSABLE_ENTITY,
            "non_generic",
        ),
    ];
    for (path, body, expected, code) in cases {
        let (status, _, text) = call("POST", path, body).await;
        assert_eq!(status, expected, "{body}: {text}");
        let v = json(&text);
        assert_eq!(v["error"]["code"], code, "{body}: {text}");
        assert!(v["version"].is_string());
    }
}

#[tokio::test]
async fn unknown_routes_are_not_found() {
    assert_eq!(call("POST", "/api/frobnicate", "{}").await.0, StatusCode::NOT_FOUND);
    assert_eq!(call("GET", "/nowhere", "").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sweep_streams_lines_then_the_envelope() {
    let (status, content_type, body) =
        call("POST", "/api/sweep", r#"{"preset":"P-eight","steps":6,"grid":96}"#).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(content_type, "application/x-ndjson");
    let lines: Vec<Value> = body.lines().map(json).collect();
    assert_eq!(lines.len(), 7, "{body}");
    let progress = &lines[..6];
    assert!(progress.iter().all(|l| l["level"].is_number() && (l["summary"].is_object() || l["skipped"].is_string())));
    let last = &lines[6];
    let levels: Vec<f64> = last["result"]["levels"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(levels.len(), 6);
    let mut streamed: Vec<f64> = progress.iter().map(|l| l["level"].as_f64().unwrap()).collect();
    streamed.sort_by(f64::total_cmp);
    assert_eq!(streamed, levels);
}

#[tokio::test]
async fn sweep_input_errors_are_not_streamed() {
    let (status, content_type, body) = call("POST", "/api/sweep", r#"{"preset":"P-eight","steps":0}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(content_type.starts_with("application/json"));
    assert_eq!(json(&body)["error"]["code"], "invalid_input");
}

#[tokio::test]
async fn witness_relation_reports_growing_levels() {
    let (status, _, body) = call("POST", "/api/relation", r#"{"preset":"P-eight","levels":[-0.3,-0.2],"grid":128}"#).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let r = &json(&body)["result"];
    assert_eq!(r["verdict"]["result"], "witnessed");
    assert_ne!(r["engine"]["result"], "obstructed");
    assert_ne!(r["classified_engine"]["result"], "obstructed");
}

#[tokio::test]
async fn oracle_agrees_with_the_table() {
    let (status, _, body) = call("POST", "/api/oracle", r#"{"preset":"P-eight","grid":256}"#).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let crossings = json(&body)["result"]["crossings"].as_array().unwrap().clone();
    assert!(!crossings.is_empty());
    for c in crossings {
        assert_eq!(c["offsets_agree"], true, "{c}");
        assert!(c["value_relative_error"].as_f64().unwrap() < 0.02, "{c}");
    }
}

fn mixed_requests() -> Vec<(&'static str, &'static str, String)> {
    vec![
        ("POST", "/api/analyze", r#"{"catalog":"C(+,-,+;1,2,2)"}"#.into()),
        ("POST", "/api/analyze", r#"{"catalog":"8+(1)+8+(3)","svg":true}"#.into()),
        ("POST", "/api/relation", r#"{"bottom":"8+(2)","top":"8+(1)","strict":true}"#.into()),
        ("POST", "/api/slice", r#"{"preset":"P-cat","grid":128}"#.into()),
        ("POST", "/api/analyze", "{broken".into()),
        ("GET", "/api/presets", String::new()),
        ("POST", "/api/sweep", r#"{"preset":"P-sum","steps":4,"grid":64}"#.into()),
    ]
}

#[tokio::test]
async fn responses_do_not_depend_on_request_order() {
    let requests = mixed_requests();
    let app = router(None);
    let mut forward = Vec::new();
    for (m, p, b) in &requests {
        forward.push(call_with(app.clone(), m, p, b).await);
    }
    let mut backward = Vec::new();
    for (m, p, b) in requests.iter().rev() {
        backward.push(call_with(app.clone(), m, p, b).await);
    }
    backward.reverse();
    for (i, (a, b)) in forward.iter().zip(&backward).enumerate() {
        assert_eq!(a.0, b.0, "request {i}");
        if requests[i].1 == "/api/sweep" {
            assert_eq!(a.2.lines().last(), b.2.lines().last(), "request {i}");
        } else {
            assert_eq!(a.2, b.2, "request {i}");
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_match_sequential_ones() {
    let requests = mixed_requests();
    let app = router(None);
    let mut sequential = Vec::new();
    for (m, p, b) in &requests {
        sequential.push(call_with(app.clone(), m, p, b).await);
    }
    let handles: Vec<_> = requests
        .iter()
        .cloned()
        .map(|(m, p, b)| {
            let app = app.clone();
            tokio::spawn(async move { call_with(app, m, p, &b).await })
        })
        .collect();
    for (i, h) in handles.into_iter().enumerate() {
        let got = h.await.unwrap();
        assert_eq!(got.0, sequential[i].0);
        assert_eq!(got.2.lines().last(), sequential[i].2.lines().last(), "request {i}");
    }
}

#[tokio::test]
async fn static_files_are_served_when_configured() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>explorer</html>").unwrap();
    let app = router(Some(dir.path().to_path_buf()));
    let (status, _, body) = call_with(app.clone(), "GET", "/index.html", "").await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.contains("explorer"));
    assert_eq!(call_with(app, "GET", "/healthz", "").await.2.trim(), "ok");
}

#[tokio::test]
async fn serves_over_a_real_socket() {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let server = tokio::spawn(async move { axum::serve(listener, router(None)).await });
    let mut stream = tokio::net::TcpStream::connect(addr).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    stream
        .write_all(b"GET /healthz HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut reply = String::new();
    stream.read_to_string(&mut reply).await.unwrap();
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.ends_with("ok") || reply.trim_end().ends_with("ok"), "{reply}");
    server.abort();
}
