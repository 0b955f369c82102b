use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use psl_cli::server::{parse_preference, router, Snapshot};
use psl_core::campaign::{run_campaign, CampaignConfig};
use psl_core::psmodel::TrainConfig;
use psl_core::surrogate::GpConfig;
use serde_json::Value;
use tower::ServiceExt;

fn snapshot(problem: &str) -> Arc<Snapshot> {
    let config = CampaignConfig {
        n_iterations: 1,
        batch_size: 2,
        candidate_count: 30,
        train: TrainConfig {
            steps: 30,
            ..TrainConfig::default()
        },
        gp: GpConfig {
            restarts: 1,
            steps: 30,
            ..GpConfig::default()
        },
        ..CampaignConfig::new(problem, 3)
    };
    let outcome = run_campaign(config).unwrap();
    Arc::new(Snapshot::from_checkpoint(&outcome.checkpoint()).unwrap())
}

async fn get(app: axum::Router, uri: &str) -> (StatusCode, Value) {
    let response = app.oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
    let status = response.status();
    let body = to_bytes(response.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&body).unwrap())
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[tokio::test]
async fn health_and_meta() {
    let app = router(snapshot("F1"));
    let (status, body) = get(app.clone(), "/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    let (status, body) = get(app, "/meta").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["problem"], "F1");
    assert_eq!((body["n"].as_u64(), body["m"].as_u64()), (Some(6), Some(2)));
    assert_eq!(floats(&body["bounds"]["lower"]).len(), 6);
    assert_eq!(floats(&body["reference_point"]).len(), 2);
}

#[tokio::test]
async fn solution_payload() {
    let snap = snapshot("F1");
    let app = router(snap.clone());
    let (status, body) = get(app, "/solution?lambda=0.3,0.7").await;
    assert_eq!(status, StatusCode::OK);
    let x = floats(&body["x"]);
    assert_eq!(x.len(), 6);
    assert!(x.iter().zip(&snap.problem.lower_bounds).zip(&snap.problem.upper_bounds).all(|((v, l), h)| l <= v && v <= h));
    assert_eq!(floats(&body["mean"]).len(), 2);
    assert!(floats(&body["std"]).iter().all(|&s| s >= 0.0));
    assert_eq!(floats(&body["lambda"]), vec![0.3, 0.7]);
}

#[tokio::test]
async fn solution_renormalizes() {
    let app = router(snapshot("F1"));
    let (status, body) = get(app, "/solution?lambda=1,3").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(floats(&body["lambda"]), vec![0.25, 0.75]);
}

#[tokio::test]
async fn malformed_preferences_are_rejected() {
    let app = router(snapshot("F1"));
    for uri in [
        "/solution?lambda=-0.3,1.3",
        "/solution?lambda=0.5",
        "/solution?lambda=a,b",
        "/solution?lambda=0,0",
        "/solution",
    ] {
        let (status, body) = get(app.clone(), uri).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert!(body["error"].as_str().is_some_and(|s| !s.is_empty()));
    }
}

#[tokio::test]
async fn front_rows_lie_on_simplex() {
    let app = router(snapshot("F1"));
    let (status, body) = get(app.clone(), "/front?samples=50").await;
    assert_eq!(status, StatusCode::OK);
    let rows = body.as_array().unwrap();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().any(|r| r["non_dominated"] == true));
    for r in rows {
        let lambda = floats(&r["lambda"]);
        assert!((lambda.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(lambda.iter().all(|&w| w >= 0.0));
        assert_eq!(floats(&r["x"]).len(), 6);
    }
    let (again, body2) = get(app.clone(), "/front?samples=50").await;
    assert_eq!(again, StatusCode::OK);
    assert_eq!(body, body2);
    let (status, _) = get(app, "/front?samples=0").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn archive_lists_evaluations() {
    let snap = snapshot("F1");
    let app = router(snap.clone());
    let (status, body) = get(app, "/archive").await;
    assert_eq!(status, StatusCode::OK);
    let rows = body.as_array().unwrap();
    assert_eq!(rows.len(), 12);
    assert_eq!(floats(&rows[0]["x"]), snap.x[0]);
    assert_eq!(floats(&rows[0]["y"]), snap.y[0]);
}

#[tokio::test]
async fn cors_is_permissive() {
    let app = router(snapshot("F1"));
    let response = app
        .oneshot(
            Request::get("/health")
                .header("origin", "http://localhost:5173")
                .body(Body::empty())
                .unwrap(),
        )
        .await
        .unwrap();
    assert_eq!(response.headers().get("access-control-allow-origin").unwrap(), "*");
}

#[tokio::test]
async fn three_objective_session() {
    let app = router(snapshot("DTLZ2"));
    let (status, body) = get(app.clone(), "/solution?lambda=1,0,0").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(floats(&body["mean"]).len(), 3);
    let (status, _) = get(app, "/solution?lambda=0.5,0.5").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[test]
fn preference_parsing() {
    assert_eq!(parse_preference(" 0.2 , 0.8", 2).unwrap().weights(), &[0.2, 0.8]);
    assert!(parse_preference("0.2,inf", 2).is_err());
    assert!(parse_preference("0.2,0.3,0.5", 2).is_err());
}
