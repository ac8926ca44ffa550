use std::f64::consts::PI;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use phasefold_service::api::{
    DatasetStatus, DetailResponse, FieldValues, GridWindowResponse, PhasesResponse,
    SuggestionResponse, TicksResponse,
};
use phasefold_service::{router, AppState, ServiceConfig};
use serde::de::DeserializeOwned;
use serde_json::Value;
use tower::ServiceExt;

const HOUR: f64 = 3600.0;
const FIXTURE: &str = include_str!("../../core/tests/fixtures/honolulu_style_msl.csv");

fn app() -> Router {
    router(AppState::in_memory(ServiceConfig::default()))
}

async fn send(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "text/csv")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    (status, bytes)
}

async fn get<T: DeserializeOwned>(app: &Router, uri: &str) -> T {
    let (status, body) = send(app, "GET", uri, "").await;
    assert_eq!(
        status,
        StatusCode::OK,
        "{uri}: {}",
        String::from_utf8_lossy(&body)
    );
    serde_json::from_slice(&body).unwrap()
}

async fn status_of(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, body) = send(app, "GET", uri, "").await;
    (status, serde_json::from_slice(&body).unwrap_or(Value::Null))
}

async fn upload(app: &Router, query: &str, body: &str) -> DatasetStatus {
    let (status, bytes) = send(app, "POST", &format!("/datasets{query}"), body).await;
    assert_eq!(
        status,
        StatusCode::CREATED,
        "{}",
        String::from_utf8_lossy(&bytes)
    );
    serde_json::from_slice(&bytes).unwrap()
}

async fn wait_ready(app: &Router, id: &str) -> DatasetStatus {
    let start = Instant::now();
    loop {
        let s: DatasetStatus = get(app, &format!("/datasets/{id}")).await;
        if s.ready {
            assert_eq!(s.progress.done, s.progress.total);
            return s;
        }
        assert!(s.error.is_none(), "{:?}", s.error);
        assert!(
            start.elapsed() < Duration::from_secs(60),
            "dataset never became ready"
        );
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
}

fn delta_train_csv(period: f64, count: usize) -> String {
    let mut out = format!("# t_start=0,t_end={}\ntimestamp\n", period * count as f64);
    for k in 0..count {
        out.push_str(&format!("{}\n", k as f64 * period));
    }
    out
}

async fn ready_fixture(app: &Router) -> String {
    let s = upload(app, "?name=msl", FIXTURE).await;
    wait_ready(app, &s.id).await;
    s.id
}

#[tokio::test]
async fn upload_then_ready_and_listed() {
    let app = app();
    let created = upload(&app, "?name=train", &delta_train_csv(HOUR, 48)).await;
    assert_eq!(created.sample_count, 48);
    assert_eq!(created.name, "train");
    let ready = wait_ready(&app, &created.id).await;
    assert_eq!(ready.t_start, Some(0.0));
    assert_eq!(ready.t_end, Some(48.0 * HOUR));
    let all: Vec<DatasetStatus> = get(&app, "/datasets").await;
    assert_eq!(all.len(), 1);
    assert_eq!(all[0].id, created.id);
}

#[tokio::test]
async fn bad_uploads_are_unprocessable() {
    let app = app();
    let (status, _) = send(&app, "POST", "/datasets", "").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, body) = send(&app, "POST", "/datasets", "timestamp,v\n1,2\nlater,3\n").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["line"], 3);
    let (status, _) = send(
        &app,
        "POST",
        "/datasets?timestamp=time",
        "timestamp,v\n1,2\n",
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    // extent shorter than the ladder lower bound
    let (status, _) = send(&app, "POST", "/datasets", "timestamp\n0\n30\n").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let all: Vec<DatasetStatus> = get(&app, "/datasets").await;
    assert!(all.is_empty());
}

#[tokio::test]
async fn unknown_dataset_is_not_found() {
    let app = app();
    for uri in [
        "/datasets/ds-7",
        "/datasets/ds-7/window?tau=3600",
        "/datasets/ds-7/suggestions?tau=3600",
        "/datasets/ds-7/detail?tau=3600",
        "/datasets/ds-7/phases?tau=3600",
        "/datasets/ds-7/ticks",
    ] {
        assert_eq!(status_of(&app, uri).await.0, StatusCode::NOT_FOUND, "{uri}");
    }
}

#[tokio::test]
async fn window_before_ready_is_conflict() {
    // a very fine ladder keeps the background build busy for a while
    let config = ServiceConfig {
        growth: 1.0005,
        ..ServiceConfig::default()
    };
    let app = router(AppState::in_memory(config));
    let mut csv = String::from("timestamp\n");
    for k in 0..2000 {
        csv.push_str(&format!("{}\n", k as f64 * 1234.5));
    }
    let s = upload(&app, "", &csv).await;
    assert!(!s.ready);
    let (status, _) = status_of(&app, &format!("/datasets/{}/window?tau=3600", s.id)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = status_of(&app, &format!("/datasets/{}/ticks", s.id)).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn window_at_ladder_sample_and_between_samples() {
    let app = app();
    let id = ready_fixture(&app).await;
    let probe: GridWindowResponse =
        get(&app, &format!("/datasets/{id}/window?tau=2h&rows=30")).await;
    let sample = probe
        .rows
        .iter()
        .find(|r| r.provenance == phasefold_core::Provenance::Ladder && r.tau > 2.0 * HOUR)
        .unwrap()
        .tau;
    let on: GridWindowResponse =
        get(&app, &format!("/datasets/{id}/window?tau={sample}&rows=30")).await;
    assert_eq!(on.rows.len(), 61);
    assert_eq!(on.rows[on.center_index].tau, sample);
    assert_eq!(
        on.rows[on.center_index].provenance,
        phasefold_core::Provenance::Ladder
    );
    assert!(on.rows.windows(2).all(|w| w[0].tau < w[1].tau));
    assert_eq!(on.bin_count, 25);

    let between = sample * 1.003;
    let off: GridWindowResponse =
        get(&app, &format!("/datasets/{id}/window?tau={between}&rows=5")).await;
    assert_eq!(
        off.rows[off.center_index].provenance,
        phasefold_core::Provenance::AdHoc
    );
    assert_eq!(off.rows[off.center_index].tau, between);
    assert_eq!(off.rows.len(), 11);

    let lo = off
        .rows
        .iter()
        .flat_map(|r| r.bins.iter().flatten())
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = off
        .rows
        .iter()
        .flat_map(|r| r.bins.iter().flatten())
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!((off.color_min, off.color_max), (Some(lo), Some(hi)));
}

#[tokio::test]
async fn window_with_mean_aggregation() {
    let app = app();
    let s = upload(&app, "?column=msl_m&gt=0.5", FIXTURE).await;
    assert_eq!(s.sample_count, 253);
    assert_eq!(s.origin.as_deref(), Some("msl_m > 0.5"));
    wait_ready(&app, &s.id).await;
    let w: GridWindowResponse = get(
        &app,
        &format!(
            "/datasets/{}/window?tau=12.42h&rows=3&aggregation=mean:msl_m",
            s.id
        ),
    )
    .await;
    assert_eq!(w.aggregation.to_string(), "mean:msl_m");
    for row in &w.rows {
        assert_eq!(row.counts.iter().sum::<u64>(), 253);
        for (b, &c) in row.bins.iter().zip(&row.counts) {
            match b {
                Some(v) => assert!(c > 0 && *v > 0.5),
                None => assert_eq!(c, 0),
            }
        }
    }
    let (status, _) = status_of(
        &app,
        &format!("/datasets/{}/window?tau=12h&aggregation=mean:nope", s.id),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn bad_parameters_are_bad_requests() {
    let app = app();
    let id = ready_fixture(&app).await;
    for uri in [
        format!("/datasets/{id}/window?tau=1s"),
        format!("/datasets/{id}/window?tau=1000d"),
        format!("/datasets/{id}/window?tau=-5"),
        format!("/datasets/{id}/window?tau=soon"),
        format!("/datasets/{id}/window"),
        format!("/datasets/{id}/window?tau=1h&rows=0"),
        format!("/datasets/{id}/window?tau=1h&bins=1"),
        format!("/datasets/{id}/suggestions?tau=1h&measure=magic"),
        format!("/datasets/{id}/ticks?measure=magic"),
        format!("/datasets/{id}/phases?tau=1h&fields=nope"),
        format!("/datasets/{id}/phases?tau=1h&offset=abc"),
    ] {
        let (status, body) = status_of(&app, &uri).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert!(body["error"].is_string());
    }
}

#[tokio::test]
async fn suggestions_from_twice_the_period() {
    let app = app();
    let s = upload(&app, "", &delta_train_csv(HOUR, 48)).await;
    let r: SuggestionResponse =
        get(&app, &format!("/datasets/{}/suggestions?tau=7200", s.id)).await;
    assert_eq!(r.suggestions[0].factor, "1/2");
    assert_eq!(r.suggestions[0].tau, HOUR);
    assert_eq!(r.measure_used, phasefold_core::Measure::VectorStrength);
    assert!(r.suggestions.len() <= 5);
    assert!(r.suggestions.windows(2).all(|w| w[0].score >= w[1].score));
    assert!(r.elapsed_ms >= 0.0);
    assert_eq!(r.suggestions[0].thumbnail.counts.len(), 25);

    let none: SuggestionResponse = get(
        &app,
        &format!("/datasets/{}/suggestions?tau=7200&count=0", s.id),
    )
    .await;
    assert!(none.suggestions.is_empty());
    let (_, raw) = status_of(
        &app,
        &format!("/datasets/{}/suggestions?tau=7200&measure=entropy", s.id),
    )
    .await;
    assert!(raw["elapsed_ms"].is_number());
    assert_eq!(raw["measure_used"], "entropy");
}

#[tokio::test]
async fn detail_matches_window_row_and_respects_cap() {
    let app = app();
    let id = ready_fixture(&app).await;
    let tau = 12.42 * HOUR;
    let d: DetailResponse = get(&app, &format!("/datasets/{id}/detail?tau={tau}")).await;
    let w: GridWindowResponse = get(&app, &format!("/datasets/{id}/window?tau={tau}&rows=1")).await;
    let mut sums = vec![0u64; d.bin_count];
    for row in &d.counts {
        for (s, c) in sums.iter_mut().zip(row) {
            *s += c;
        }
    }
    assert_eq!(sums, w.rows[w.center_index].counts);
    assert_eq!(d.row_count, d.rows.len());

    let (status, body) = status_of(&app, &format!("/datasets/{id}/detail?tau=60")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("cap"));
    let (status, _) = status_of(&app, &format!("/datasets/{id}/detail?tau=1d&max_rows=10")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn phase_offsets_shift_u() {
    let app = app();
    let csv = "timestamp,lat,station\n0,1.5,a\n1000,2.5,b\n2500,3.5,a\n7000,4.5,c\n";
    let s = upload(&app, "", csv).await;
    let a: PhasesResponse = get(
        &app,
        &format!(
            "/datasets/{}/phases?tau=3600&offset=0&fields=lat,station",
            s.id
        ),
    )
    .await;
    let b: PhasesResponse = get(
        &app,
        &format!("/datasets/{}/phases?tau=3600&offset={PI}", s.id),
    )
    .await;
    assert_eq!(a.u.len(), 4);
    for (x, y) in a.u.iter().zip(&b.u) {
        let d = (y - x).rem_euclid(1.0);
        assert!((d - 0.5).abs() < 1e-12, "{x} {y}");
        assert!((0.0..1.0).contains(x) && (0.0..1.0).contains(y));
    }
    assert_eq!(
        a.fields["lat"],
        FieldValues::Numbers(vec![1.5, 2.5, 3.5, 4.5])
    );
    assert_eq!(
        a.fields["station"],
        FieldValues::Labels(vec!["a".into(), "b".into(), "a".into(), "c".into()])
    );
    assert!(b.fields.is_empty());
}

#[tokio::test]
async fn ticks_are_ranked() {
    let app = app();
    let id = ready_fixture(&app).await;
    let t: TicksResponse = get(&app, &format!("/datasets/{id}/ticks?count=7")).await;
    assert_eq!(t.ticks.len(), 7);
    assert_eq!(t.measure, phasefold_core::Measure::Entropy);
    assert!(t.ticks.windows(2).all(|w| w[0].score >= w[1].score));
    let vs: TicksResponse = get(
        &app,
        &format!("/datasets/{id}/ticks?count=3&measure=vector-strength&bins=12"),
    )
    .await;
    assert_eq!(vs.ticks.len(), 3);
    assert_eq!(vs.bin_count, 12);
}

#[tokio::test]
async fn repeated_reads_are_identical() {
    let app = app();
    let id = ready_fixture(&app).await;
    for uri in [
        format!("/datasets/{id}/window?tau=12.5h&rows=10"),
        format!("/datasets/{id}/window?tau=3h&rows=4&bins=10&aggregation=variance:msl_m"),
        format!("/datasets/{id}/ticks?count=5"),
        format!("/datasets/{id}/detail?tau=1d"),
        format!("/datasets/{id}/phases?tau=1d&offset=1&fields=msl_m"),
        format!("/datasets/{id}"),
    ] {
        let first = send(&app, "GET", &uri, "").await;
        let second = send(&app, "GET", &uri, "").await;
        assert_eq!(first.0, StatusCode::OK, "{uri}");
        assert_eq!(first, second, "{uri}");
    }
    let uri = format!("/datasets/{id}/suggestions?tau=1d");
    let (_, mut a) = status_of(&app, &uri).await;
    let (_, mut b) = status_of(&app, &uri).await;
    a.as_object_mut().unwrap().remove("elapsed_ms");
    b.as_object_mut().unwrap().remove("elapsed_ms");
    assert_eq!(a, b);
}

#[tokio::test]
async fn floats_round_trip_exactly() {
    let app = app();
    let csv = "timestamp\n0.1\n1e-3\n12345.678901234567\n99999.99999999999\n";
    let s = upload(&app, "", csv).await;
    let p: PhasesResponse = get(
        &app,
        &format!("/datasets/{}/phases?tau=0.3333333333333333d", s.id),
    )
    .await;
    assert_eq!(
        p.events,
        vec![1e-3, 0.1, 12345.678901234567, 99999.99999999999]
    );
    assert_eq!(p.tau, 0.3333333333333333 * 86_400.0);
}

#[tokio::test]
async fn json_uploads() {
    let app = app();
    let body = r#"[{"timestamp": "2020-01-01T00:00:00Z", "m": {"mag": 4.1}}, {"timestamp": "2020-01-02T00:00:00Z", "m": {"mag": 5.0}}]"#;
    let s = upload(&app, "?name=quakes", body).await;
    assert_eq!(s.attributes, vec!["m.mag"]);
    assert_eq!(s.t_end.unwrap() - s.t_start.unwrap(), 86_400.0);
}

#[tokio::test]
async fn cors_headers_present() {
    let app = app();
    let req = Request::builder()
        .uri("/datasets")
        .header(header::ORIGIN, "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp
        .headers()
        .contains_key(header::ACCESS_CONTROL_ALLOW_ORIGIN));
}

#[tokio::test]
async fn data_dir_persists_catalog_and_grids() {
    let dir = tempfile::tempdir().unwrap();
    let (id, before) = {
        let app = router(AppState::open(ServiceConfig::default(), dir.path()).unwrap());
        let id = ready_fixture(&app).await;
        let w: GridWindowResponse =
            get(&app, &format!("/datasets/{id}/window?tau=1d&rows=3")).await;
        (id, w)
    };
    let grids: Vec<_> = std::fs::read_dir(dir.path().join("grids"))
        .unwrap()
        .collect();
    assert_eq!(grids.len(), 1);
    let app = router(AppState::open(ServiceConfig::default(), dir.path()).unwrap());
    let all: Vec<DatasetStatus> = get(&app, "/datasets").await;
    assert_eq!(all.len(), 1);
    wait_ready(&app, &id).await;
    let after: GridWindowResponse =
        get(&app, &format!("/datasets/{id}/window?tau=1d&rows=3")).await;
    assert_eq!(before, after);
}
