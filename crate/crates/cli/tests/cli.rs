use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn transmode(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transmode")).args(args).current_dir(dir).output().unwrap()
}

fn recorded_day() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/16-12-2014.json")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn activities(path: &Path) -> Vec<String> {
    json(path)["segments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["activity"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.jsonl", "b.jsonl"] {
        let o = transmode(&["simulate", "--preset", "journey2", "--seed", "7", "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(dir.path().join("b.jsonl")).unwrap());
    assert!(dir.path().join("a.jsonl.schedule.json").exists());
}

#[test]
fn simulate_from_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = r#"{"seed": 3, "weight_kg": 70, "legs": [
        {"mode": "walk", "polyline": [[41.40, 2.15], [41.41, 2.15]], "speed_kmh": 5, "environment": "wifi_urban"}]}"#;
    std::fs::write(dir.path().join("s.json"), scenario).unwrap();
    let o = transmode(&["simulate", "s.json", "--out", "t.jsonl"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));

    let o = transmode(&["simulate", "missing.json", "--out", "t.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("missing.json"));

    std::fs::write(dir.path().join("bad.json"), r#"{"seed": 1, "weight_kg": 70, "legs": []}"#).unwrap();
    let o = transmode(&["simulate", "bad.json", "--out", "t.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn walk_day_has_only_walking_and_standing() {
    let dir = tempfile::tempdir().unwrap();
    transmode(&["simulate", "--preset", "journey4", "--seed", "1", "--out", "t.jsonl"], dir.path());
    let o = transmode(&["process", "t.jsonl", "--out", "16-12-2014.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let acts = activities(&dir.path().join("16-12-2014.json"));
    assert!(!acts.is_empty());
    assert!(acts.iter().all(|a| a == "on_foot" || a == "still"), "{acts:?}");
}

#[test]
fn metro_day_yields_l3_and_event_log() {
    let dir = tempfile::tempdir().unwrap();
    transmode(&["simulate", "--preset", "journey2", "--seed", "1", "--out", "t.jsonl"], dir.path());
    let o = transmode(&["process", "t.jsonl", "--out", "day.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let file = json(&dir.path().join("day.json"));
    let metro = file["segments"].as_array().unwrap().iter().find(|s| s["activity"] == "metro").unwrap();
    assert_eq!(metro["line"], "L3");
    let log = std::fs::read_to_string(dir.path().join("day.json.events.jsonl")).unwrap();
    assert!(log.lines().any(|l| l.contains("\"metro_recognized\"")));
}

#[test]
fn bus_day_uses_schedule_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    transmode(&["simulate", "--preset", "journey1", "--seed", "1", "--out", "t.jsonl"], dir.path());
    let o = transmode(
        &["process", "t.jsonl", "--schedule", "t.jsonl.schedule.json", "--out", "day.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let acts = activities(&dir.path().join("day.json"));
    assert_eq!(acts.iter().filter(|a| *a == "bus").count(), 2, "{acts:?}");
    assert_eq!(acts.iter().filter(|a| *a == "vehicle").count(), 1, "{acts:?}");
}

#[test]
fn process_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.jsonl"), "").unwrap();
    let o = transmode(&["process", "empty.jsonl", "--out", "e.json"], dir.path());
    assert!(o.status.success());
    assert_eq!(json(&dir.path().join("e.json")), serde_json::json!({"segments": []}));

    std::fs::write(dir.path().join("bad.jsonl"), "{\"type\":\"act\",\"label\":\"still\",\"t_ms\":0}\nnot json\n").unwrap();
    let o = transmode(&["process", "bad.jsonl", "--out", "b.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.jsonl:2"), "{}", stderr(&o));

    std::fs::write(dir.path().join("cfg.json"), r#"{"window_seconds": 60}"#).unwrap();
    let o = transmode(&["process", "empty.jsonl", "--config", "cfg.json", "--set", "block_radius_m=50", "--out", "c.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::write(dir.path().join("typo.json"), r#"{"window_secs": 60}"#).unwrap();
    let o = transmode(&["process", "empty.jsonl", "--config", "typo.json", "--out", "c.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_of_recorded_day() {
    let dir = tempfile::tempdir().unwrap();
    let day = recorded_day();
    let o = transmode(&["stats", day.to_str().unwrap(), "--weight", "70", "--totals", "totals.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("date,kcal,co2_g"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "16-12-2014");
    let kcal: f64 = row[1].parse().unwrap();
    let co2: f64 = row[2].parse().unwrap();
    assert!((kcal - 2.3 * 70.0 * 142.0 / 3600.0).abs() < 1e-9);
    assert!((co2 - 140.0 * 2270.152587890625 / 1000.0).abs() < 1e-9);
    assert!(std::fs::read_to_string(dir.path().join("totals.json")).unwrap().contains("2014-12-16"));

    let o = transmode(&["stats", day.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--weight"));

    std::fs::write(dir.path().join("empty.json"), r#"{"segments": []}"#).unwrap();
    let o = transmode(&["stats", "empty.json", "--weight", "70"], dir.path());
    assert_eq!(stdout(&o), "date,kcal,co2_g\n,0,0\n");
}

#[test]
fn geojson_export() {
    let dir = tempfile::tempdir().unwrap();
    let day = recorded_day();
    let o = transmode(&["export-geojson", day.to_str().unwrap(), "--out", "g.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let g = json(&dir.path().join("g.json"));
    assert_eq!(g["type"], "FeatureCollection");
    let metro = &g["features"][1];
    assert_eq!(metro["geometry"]["type"], "LineString");
    assert_eq!(metro["properties"]["activity"], "metro");
    assert_eq!(metro["properties"]["line"], "L3");
    // GeoJSON positions are longitude first.
    assert_eq!(metro["geometry"]["coordinates"][0][0], 2.16633743592508);

    let still = r#"{"segments":[{"activity":"still","distance (m)":0,"duration (s)":300,"speed (Km/h)":0,
        "first time":"10:00:00","last time":"10:05:00","location":[41.4,2.15,"10:00:00"]}]}"#;
    std::fs::write(dir.path().join("s.json"), still).unwrap();
    transmode(&["export-geojson", "s.json", "--out", "p.json"], dir.path());
    assert_eq!(json(&dir.path().join("p.json"))["features"][0]["geometry"]["type"], "Point");

    std::fs::write(dir.path().join("e.json"), r#"{"segments":[]}"#).unwrap();
    transmode(&["export-geojson", "e.json", "--out", "q.json"], dir.path());
    assert_eq!(json(&dir.path().join("q.json"))["features"], serde_json::json!([]));
}

#[test]
fn upload_keeps_one_identity() {
    let dir = tempfile::tempdir().unwrap();
    let day = recorded_day();
    let args = ["upload", day.to_str().unwrap(), "--dest", "remote", "--id-file", "id"];
    let o = transmode(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let id = std::fs::read_to_string(dir.path().join("id")).unwrap().trim().to_string();
    assert_eq!(id.len(), 64);
    let stored = dir.path().join("remote").join(&id).join("16-12-2014.json");
    assert_eq!(std::fs::read(&stored).unwrap(), std::fs::read(&day).unwrap());

    assert!(transmode(&args, dir.path()).status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("id")).unwrap().trim(), id);
    assert_eq!(std::fs::read_dir(dir.path().join("remote")).unwrap().count(), 1);
}

#[test]
fn upload_to_unreachable_url_fails() {
    let dir = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let url = format!("http://127.0.0.1:{port}");
    let day = recorded_day();
    let o = transmode(&["upload", day.to_str().unwrap(), "--dest", &url, "--id-file", "id"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(transmode(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(transmode(&["simulate", "--preset", "journey9", "--out", "x"], dir.path()).status.code(), Some(1));
    assert_eq!(transmode(&["--help"], dir.path()).status.code(), Some(0));
}
