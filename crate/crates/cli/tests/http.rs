use std::process::Command;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use juliart_cli::{router, ServiceConfig};
use tower::ServiceExt;

fn config() -> ServiceConfig {
    ServiceConfig { max_jobs: 2, max_size: 2048 }
}

async fn call(app: axum::Router, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let res = app.oneshot(req).await.unwrap();
    let status = res.status();
    let headers = res.headers().clone();
    let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, body)
}

fn post(json: &str) -> Request<Body> {
    Request::post("/render").header("content-type", "application/json").body(Body::from(json.to_string())).unwrap()
}

fn png_size(bytes: &[u8]) -> (u32, u32) {
    let r = png::Decoder::new(std::io::Cursor::new(bytes)).read_info().unwrap();
    (r.info().width, r.info().height)
}

#[tokio::test]
async fn renders_a_preset() {
    let (status, headers, body) = call(router(config()), post(r#"{"preset":"battle","size":400,"border":0}"#)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers["content-type"], "image/png");
    assert_eq!(headers["x-primitives"], "1000000");
    assert!(headers["server-timing"].to_str().unwrap().contains("evaluate;dur="));
    assert_eq!(png_size(&body), (400, 400));
}

#[tokio::test]
async fn scene_errors_are_422_with_position() {
    let (status, _, body) = call(router(config()), post(r#"{"source":"shape s {}"}"#)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["kind"], "semantic");
    assert!(v["message"].as_str().unwrap().contains("missing startshape"));

    let (status, _, body) = call(router(config()), post(r#"{"source":"startshape s\nshape s {\n SQUARE[x (1 ]\n}"}"#)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!((v["kind"].as_str(), v["line"].as_u64()), (Some("syntax"), Some(3)));
}

#[tokio::test]
async fn invalid_requests_are_400() {
    for body in [
        "not json",
        r#"{}"#,
        r#"{"preset":"basic","source":"x"}"#,
        r#"{"preset":"nope"}"#,
        r#"{"preset":"basic","size":10,"border":5}"#,
        r#"{"preset":"basic","size":100000}"#,
        r#"{"preset":"basic","colour":"red"}"#,
    ] {
        let (status, _, out) = call(router(config()), post(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["kind"], "request");
    }
}

#[tokio::test]
async fn busy_service_returns_503() {
    let app = router(ServiceConfig { max_jobs: 0, max_size: 2048 });
    let (status, _, body) = call(app, post(r#"{"preset":"basic","size":20}"#)).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let v: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["kind"], "busy");
}

#[tokio::test]
async fn concurrent_requests_are_independent() {
    let app = router(ServiceConfig { max_jobs: 4, max_size: 2048 });
    let a = call(app.clone(), post(r#"{"preset":"ragnarok","size":120}"#));
    let b = call(app.clone(), post(r#"{"preset":"leaves","size":120}"#));
    let c = call(app.clone(), post(r#"{"preset":"ragnarok","size":120}"#));
    let (a, b, c) = tokio::join!(a, b, c);
    assert_eq!((a.0, b.0, c.0), (StatusCode::OK, StatusCode::OK, StatusCode::OK));
    assert_eq!(a.2, c.2);
    assert_ne!(a.2, b.2);
}

#[tokio::test]
async fn presets_and_health() {
    let (status, _, body) = call(router(config()), Request::get("/presets").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    let v: Vec<serde_json::Value> = serde_json::from_slice(&body).unwrap();
    assert_eq!(v.len(), 8);
    assert!(v.iter().all(|p| p["source"].as_str().unwrap().contains("startshape")));
    let (status, _, body) = call(router(config()), Request::get("/health").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_slice::<serde_json::Value>(&body).unwrap()["status"], "ok");
    let (status, _, _) = call(router(config()), Request::get("/nope").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn http_and_cli_produce_identical_png() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("scene.cfdg");
    let source = juliart_core::gallery::preset("forest").unwrap().source;
    std::fs::write(&input, source).unwrap();
    let out = dir.path().join("scene.png");
    let status = Command::new(env!("CARGO_BIN_EXE_juliart"))
        .args(["render", "-s", "250", "-b", "4", "-v", "PAJBHA"])
        .arg(&input)
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let req = serde_json::json!({ "source": source, "size": 250, "border": 4, "variation": "PAJBHA" }).to_string();
    let (code, _, body) = call(router(config()), post(&req)).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(body, std::fs::read(out).unwrap());
}
