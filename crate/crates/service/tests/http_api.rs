use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use hctps_core::{ExperimentRecord, FunctionId, GaConfig, LocalTarget, SearchBox, SubcubeSpec};
use hctps_service::{router, ExperimentView, JobView, OctantView, Service};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn create(app: &Router, body: Value) -> String {
    let (status, v) = call(app, "POST", "/experiments", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

/// Polls a job over HTTP until it settles, checking progress never goes backwards.
async fn poll(app: &Router, job_id: &str) -> JobView {
    let mut last = 0;
    loop {
        let (status, v) = call(app, "GET", &format!("/jobs/{job_id}"), None).await;
        assert_eq!(status, StatusCode::OK);
        let job: JobView = serde_json::from_value(v).unwrap();
        assert!(job.completed >= last, "progress went from {last} to {}", job.completed);
        assert!(job.completed <= job.total);
        last = job.completed;
        if job.state != hctps_service::JobState::Running {
            return job;
        }
        tokio::time::sleep(std::time::Duration::from_millis(5)).await;
    }
}

async fn view(app: &Router, id: &str) -> ExperimentView {
    let (status, v) = call(app, "GET", &format!("/experiments/{id}"), None).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    serde_json::from_value(v).unwrap()
}

fn error_code(v: &Value) -> &str {
    v["error"].as_str().unwrap()
}

#[tokio::test]
async fn create_validates_and_assigns_distinct_ids() {
    let app = router(Service::in_memory());
    let a = create(&app, json!({"fid": "F1", "dim": 30})).await;
    let b = create(&app, json!({"fid": "F1", "dim": 30})).await;
    assert_ne!(a, b);

    let v = view(&app, &a).await;
    assert_eq!(v.record.phases.len(), 0);
    assert_eq!(v.record.status, hctps_core::ExperimentStatus::Running);
    assert_eq!(v.search_cube, SearchBox::cube(-100.0, 100.0, 30).unwrap());
    assert!(v.report.is_none() && v.active_job.is_none());

    let (_, raw) = call(&app, "GET", &format!("/experiments/{a}"), None).await;
    assert_eq!(raw["search_cube"]["lo"][0], json!("-100"));

    let (status, v) = call(&app, "POST", "/experiments", Some(json!({"fid": "F1", "dim": 2}))).await;
    assert_eq!((status, error_code(&v)), (StatusCode::BAD_REQUEST, "invalid_config"));
    let (status, _) = call(&app, "POST", "/experiments", Some(json!({"fid": "F99", "dim": 30}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/experiments", Some(json!({"fid": "F1", "dim": 30, "config": {"population_size": 7}}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, v) = call(&app, "GET", "/experiments/nope", None).await;
    assert_eq!((status, error_code(&v)), (StatusCode::NOT_FOUND, "unknown_experiment"));
    let (status, v) = call(&app, "GET", "/jobs/nope", None).await;
    assert_eq!((status, error_code(&v)), (StatusCode::NOT_FOUND, "unknown_job"));
}

#[tokio::test]
async fn full_lifecycle_on_f1() {
    let app = router(Service::in_memory());
    let id = create(&app, json!({"fid": "F1", "dim": 30, "config": {"seed": 42}})).await;

    let (status, v) = call(&app, "GET", &format!("/experiments/{id}/octants"), None).await;
    assert_eq!((status, error_code(&v)), (StatusCode::CONFLICT, "global_pending"));
    let (status, v) = call(&app, "POST", &format!("/experiments/{id}/satisfied"), None).await;
    assert_eq!((status, error_code(&v)), (StatusCode::CONFLICT, "no_phases"));

    let (status, v) = call(&app, "POST", &format!("/experiments/{id}/global"), Some(json!({"n_runs": 3}))).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let job = poll(&app, v["job_id"].as_str().unwrap()).await;
    assert_eq!((job.total, job.completed, job.phase_index), (3, 3, Some(0)));

    let v = view(&app, &id).await;
    assert_eq!(v.record.phases[0].phase, hctps_core::PhaseKind::Global);
    assert_eq!(v.record.status, hctps_core::ExperimentStatus::AwaitingDecision);
    assert_eq!(v.report.as_ref().unwrap().comparison.hctps, v.record.phases[0].stats);

    let (status, v) = call(&app, "POST", &format!("/experiments/{id}/global"), Some(json!({"n_runs": 3}))).await;
    assert_eq!((status, error_code(&v)), (StatusCode::CONFLICT, "already_ran"));

    let (_, v) = call(&app, "GET", &format!("/experiments/{id}/octants"), None).await;
    let octants: Vec<OctantView> = serde_json::from_value(v).unwrap();
    assert_eq!(octants.len(), 8);
    assert!(octants.iter().all(|o| o.phases.is_empty() && o.best.is_none()));
    let c = |lo: f64, hi: f64| (lo, hi);
    let neg = c(-100.0, 0.0);
    let pos = c(0.0, 100.0);
    let expected = [
        [neg, neg, neg],
        [neg, neg, pos],
        [neg, pos, neg],
        [neg, pos, pos],
        [pos, neg, neg],
        [pos, neg, pos],
        [pos, pos, neg],
        [pos, pos, pos],
    ];
    for (o, want) in octants.iter().zip(expected) {
        assert_eq!(o.octant, SearchBox::from_intervals(&want).unwrap());
    }

    let (status, v) = call(&app, "GET", &format!("/experiments/{id}/preview?octant_index=6&scale_exponent=80"), None).await;
    assert_eq!(status, StatusCode::OK);
    let region: SearchBox<f64> = serde_json::from_value(v["region"].clone()).unwrap();
    let spec = SubcubeSpec::new(6, 80, 30).unwrap();
    assert_eq!(region, spec.region::<f64>().unwrap());
    let step = 100.0 * 0.5f64.powi(80);
    for i in 0..30 {
        let want = if i % 3 == 1 { (-step, 0.0) } else { (0.0, step) };
        assert_eq!(region.interval(i), want);
    }

    let (status, v) = call(
        &app,
        "POST",
        &format!("/experiments/{id}/local"),
        Some(json!({"octant_index": 6, "scale_exponent": 80, "n_runs": 3})),
    )
    .await;
    assert_eq!(status, StatusCode::ACCEPTED, "{v}");
    let job = poll(&app, v["job_id"].as_str().unwrap()).await;
    assert_eq!(job.phase_index, Some(1));

    let (_, v) = call(&app, "GET", &format!("/experiments/{id}/octants"), None).await;
    let octants: Vec<OctantView> = serde_json::from_value(v).unwrap();
    assert_eq!(octants[5].phases.len(), 1);
    assert_eq!(octants[5].phases[0].scale_exponent, 80);
    assert!(octants.iter().enumerate().all(|(i, o)| i == 5 || o.phases.is_empty()));

    let (status, v) = call(&app, "POST", &format!("/experiments/{id}/satisfied"), None).await;
    assert_eq!(status, StatusCode::OK);
    let report: hctps_core::FinalReport = serde_json::from_value(v).unwrap();
    assert_eq!(report.best.phase_index, 1);
    assert!(report.best.value <= 2.2e-37);
    assert_eq!(report.comparison.winning_phase, 1);

    let (status, v) = call(
        &app,
        "POST",
        &format!("/experiments/{id}/local"),
        Some(json!({"octant_index": 6, "scale_exponent": 80, "n_runs": 1})),
    )
    .await;
    assert_eq!((status, error_code(&v)), (StatusCode::CONFLICT, "frozen"));
    let (status, v) = call(&app, "POST", &format!("/experiments/{id}/satisfied"), None).await;
    assert_eq!((status, error_code(&v)), (StatusCode::CONFLICT, "frozen"));
    assert_eq!(view(&app, &id).await.record.status, hctps_core::ExperimentStatus::Satisfied);
}

#[tokio::test]
async fn one_job_per_experiment() {
    let app = router(Service::in_memory());
    // a large budget keeps the first job busy while the others are rejected
    let id = create(&app, json!({"fid": "F12", "dim": 30, "budget_per_dim": 500})).await;
    let (_, v) = call(&app, "POST", &format!("/experiments/{id}/global"), Some(json!({"n_runs": 16}))).await;
    let global = v["job_id"].as_str().unwrap().to_string();

    let (status, v) = call(&app, "POST", &format!("/experiments/{id}/global"), Some(json!({"n_runs": 1}))).await;
    assert_eq!((status, error_code(&v)), (StatusCode::CONFLICT, "already_ran"));
    let local = json!({"octant_index": 1, "n_runs": 8});
    let (status, v) = call(&app, "POST", &format!("/experiments/{id}/local"), Some(local.clone())).await;
    assert_eq!((status, error_code(&v)), (StatusCode::CONFLICT, "global_pending"));
    let (status, v) = call(&app, "POST", &format!("/experiments/{id}/satisfied"), None).await;
    assert_eq!((status, error_code(&v)), (StatusCode::CONFLICT, "job_in_flight"));
    let active = view(&app, &id).await.active_job.expect("job in flight");
    assert_eq!((active.job_id.as_str(), active.total), (global.as_str(), 16));
    poll(&app, &global).await;
    assert!(view(&app, &id).await.active_job.is_none());

    let (_, v) = call(&app, "POST", &format!("/experiments/{id}/local"), Some(local.clone())).await;
    let first = v["job_id"].as_str().unwrap().to_string();
    let (status, v) = call(&app, "POST", &format!("/experiments/{id}/local"), Some(local.clone())).await;
    assert_eq!((status, error_code(&v)), (StatusCode::CONFLICT, "job_in_flight"));
    assert_eq!(view(&app, &id).await.record.status, hctps_core::ExperimentStatus::Running);
    poll(&app, &first).await;

    let v = view(&app, &id).await;
    assert_eq!(v.record.phases.len(), 2);
    assert_eq!(v.record.status, hctps_core::ExperimentStatus::AwaitingDecision);
}

#[tokio::test]
async fn local_request_validation() {
    let app = router(Service::in_memory());
    let id = create(&app, json!({"fid": "F11", "dim": 6})).await;
    let (_, v) = call(&app, "POST", &format!("/experiments/{id}/global"), Some(json!({"n_runs": 1}))).await;
    poll(&app, v["job_id"].as_str().unwrap()).await;
    let url = format!("/experiments/{id}/local");

    let (status, v) = call(&app, "POST", &url, Some(json!({"octant_index": 1, "scale_exponent": 5000, "n_runs": 1}))).await;
    assert_eq!((status, error_code(&v)), (StatusCode::UNPROCESSABLE_ENTITY, "degenerate_box"));
    let (status, _) = call(&app, "GET", &format!("/experiments/{id}/preview?octant_index=1&scale_exponent=5000"), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let both = json!({"octant_index": 1, "box": {"lo": ["0", "0", "0"], "hi": ["1", "1", "1"]}, "n_runs": 1});
    let neither = json!({"scale_exponent": 3, "n_runs": 1});
    let bad_octant = json!({"octant_index": 9, "n_runs": 1});
    let zero_runs = json!({"octant_index": 1, "n_runs": 0});
    let outside = json!({"box": {"lo": ["-200", "0", "0"], "hi": ["1", "1", "1"]}, "n_runs": 1});
    let bad_number = json!({"box": {"lo": ["zero", "0", "0"], "hi": ["1", "1", "1"]}, "n_runs": 1});
    for body in [both, neither, bad_octant, zero_runs, outside, bad_number] {
        let (status, v) = call(&app, "POST", &url, Some(body.clone())).await;
        assert_eq!((status, error_code(&v)), (StatusCode::BAD_REQUEST, "invalid_config"), "{body}");
    }
    let (status, _) = call(&app, "POST", &url, None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(view(&app, &id).await.record.status, hctps_core::ExperimentStatus::AwaitingDecision);

    let custom = json!({"box": {"lo": ["-1", "-2", "-3"], "hi": ["1", "2", "3"]}, "scale_exponent": 1, "n_runs": 2});
    let (status, v) = call(&app, "POST", &url, Some(custom)).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    poll(&app, v["job_id"].as_str().unwrap()).await;
    let v = view(&app, &id).await;
    let region = &v.record.phases[1].region;
    assert_eq!(region.interval(4), (-1.0, 1.0));
    assert!(v.record.phases[1].subcube_spec.is_none());

    // two sequential local runs append in order
    let (_, v) = call(&app, "POST", &url, Some(json!({"octant_index": 8, "n_runs": 1}))).await;
    poll(&app, v["job_id"].as_str().unwrap()).await;
    let v = view(&app, &id).await;
    assert_eq!(v.record.phases.len(), 3);
    assert_eq!(v.record.phases[2].subcube_spec.unwrap().octant_index, 8);
}

#[tokio::test]
async fn phases_match_offline_runs() {
    let app = router(Service::in_memory());
    let config = GaConfig::default().with_seed(7);
    let id = create(&app, json!({"fid": "F4", "dim": 30, "config": config})).await;
    let (_, v) = call(&app, "POST", &format!("/experiments/{id}/global"), Some(json!({"n_runs": 4}))).await;
    poll(&app, v["job_id"].as_str().unwrap()).await;
    let (_, v) = call(
        &app,
        "POST",
        &format!("/experiments/{id}/local"),
        Some(json!({"octant_index": 1, "scale_exponent": 10, "n_runs": 4})),
    )
    .await;
    poll(&app, v["job_id"].as_str().unwrap()).await;
    let online = view(&app, &id).await.record;

    let mut offline = ExperimentRecord::new(id.clone(), FunctionId::F4, 30, config, 50).unwrap();
    offline.run_global(4).unwrap();
    offline.run_local(&LocalTarget::Octant { octant_index: 1, scale_exponent: 10 }, 4).unwrap();

    assert_eq!(online.phases.len(), offline.phases.len());
    for (a, b) in online.phases.iter().zip(&offline.phases) {
        assert_eq!(a.runs, b.runs);
        assert_eq!(a.seed_base, b.seed_base);
        assert!(a.stats.same_values(&b.stats));
    }
}

#[tokio::test]
async fn store_round_trips_across_restarts() {
    let dir = tempfile::tempdir().unwrap();
    let service = Service::open(dir.path()).unwrap();
    let app = router(service.clone());
    let id = create(&app, json!({"fid": "F12", "dim": 3})).await;
    let path = dir.path().join(format!("{id}.hctps.jsonl"));
    assert!(path.exists());

    let (_, v) = call(&app, "POST", &format!("/experiments/{id}/global"), Some(json!({"n_runs": 2}))).await;
    poll(&app, v["job_id"].as_str().unwrap()).await;
    let (_, v) = call(&app, "POST", &format!("/experiments/{id}/local"), Some(json!({"octant_index": 2, "scale_exponent": 40, "n_runs": 2}))).await;
    poll(&app, v["job_id"].as_str().unwrap()).await;
    let before = view(&app, &id).await;
    assert_eq!(hctps_core::persist::load_file(&path).unwrap(), before.record);

    let reopened = router(Service::open(dir.path()).unwrap());
    assert_eq!(view(&reopened, &id).await, before);
    let (status, _) = call(&reopened, "POST", &format!("/experiments/{id}/satisfied"), None).await;
    assert_eq!(status, StatusCode::OK);
    let frozen = hctps_core::persist::load_file(&path).unwrap();
    assert_eq!(frozen.status, hctps_core::ExperimentStatus::Satisfied);

    std::fs::write(dir.path().join("broken.hctps.jsonl"), "{}\n").unwrap();
    assert!(matches!(Service::open(dir.path()), Err(hctps_service::ServiceError::Storage(_))));
}

#[tokio::test]
async fn function_catalog() {
    let app = router(Service::in_memory());
    let (status, v) = call(&app, "GET", "/functions", None).await;
    assert_eq!(status, StatusCode::OK);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 14);
    assert_eq!(rows[0]["id"], json!("F1"));
    assert_eq!(rows[0]["fixture_scale_exponent"], json!(80));
    assert_eq!(rows[0]["fixture_octant"]["lo"], json!(["0", "-100", "0"]));
    assert_eq!(rows[10]["fixture_scale_exponent"], json!(40));
}
