use std::fs;
use std::path::Path;
use std::process::Command;

use losflow::data::{generate_cohort, write_encounters, CohortConfig};
use losflow::experiments::{
    cmd_capacity_sweep, cmd_fpfn_sweep, cmd_pipeline, cmd_simulate, cmd_summarize, load_config,
    CapacitySweepConfig, FpFnSweepConfig, PipelineConfig, RunOptions, SimulateConfig, SummarizeConfig,
};
use losflow::sim::{load_sim_patients, SimReport};
use serde_json::json;

fn from_json<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> T {
    serde_json::from_value(v).unwrap()
}

fn small_cohort(n: usize) -> serde_json::Value {
    json!({"source": "cohort", "cohort": {"n_patients": n}})
}

fn read_report(path: &Path) -> SimReport {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn external_perfect_scores_give_unit_f1() {
    let dir = tempfile::tempdir().unwrap();
    let table = generate_cohort(&CohortConfig {
        n_patients: 250,
        seed: 3,
        ..CohortConfig::default()
    })
    .unwrap();
    let data = dir.path().join("enc.csv");
    write_encounters(&table, fs::File::create(&data).unwrap()).unwrap();
    let mut scores = String::from("encounter_id,score\n");
    for r in &table.records {
        scores.push_str(&format!("{},{}\n", r.encounter_id, if r.los_hours > 72.0 { 1 } else { 0 }));
    }
    let score_path = dir.path().join("scores.csv");
    fs::write(&score_path, scores).unwrap();
    let cfg: PipelineConfig = from_json(json!({
        "data": {"source": "encounters", "path": data},
        "trainers": [{"name": "oracle", "trainer": {"model": {"kind": "external", "path": score_path}}}],
        "k": 5
    }));
    let out = cmd_pipeline(&cfg, &RunOptions::new(dir.path().join("out"))).unwrap();
    let cv = &out.models["oracle"];
    assert_eq!(cv.folds.len(), 5);
    for f in &cv.folds {
        assert_eq!(f.report.f1_ls, 1.0);
        assert_eq!(f.report.f1_weighted, 1.0);
        assert_eq!(f.auc, 1.0);
    }
    assert!(out.tests.is_empty());
    for name in ["cv_oracle.json", "roc_oracle.csv", "pr_oracle.csv", "feature_ranking.csv", "tests.json"] {
        assert!(dir.path().join("out").join(name).exists(), "{name} missing");
    }
}

#[test]
fn single_grid_point_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = json!({"gw_capacity": 25, "ssu_capacity": 4});
    let sim: SimulateConfig = from_json(json!({
        "seed": 8, "data": small_cohort(600), "replications": 2,
        "classifier": {"kind": "confusion_noise", "fp_rate": 0.1, "fn_rate": 0.2},
        "scenario": scenario
    }));
    let sweep: CapacitySweepConfig = from_json(json!({
        "seed": 8, "data": small_cohort(600), "replications": 2,
        "classifiers": [{"name": "noisy", "classifier": {"kind": "confusion_noise", "fp_rate": 0.1, "fn_rate": 0.2}}],
        "grid": [{"gw": 25, "ssu": 4}],
        "scenario": scenario
    }));
    cmd_simulate(&sim, &RunOptions::new(dir.path().join("sim"))).unwrap();
    let rows = cmd_capacity_sweep(&sweep, &RunOptions::new(dir.path().join("sweep"))).unwrap();
    for rep in 0..2 {
        let report = read_report(&dir.path().join(format!("sim/report_rep{rep:03}.json")));
        for (metric, value) in report.metrics() {
            let row = rows.iter().find(|r| r.replication == rep && r.metric == metric).unwrap();
            assert_eq!(row.value, value, "{metric} rep {rep}");
        }
    }
}

#[test]
fn zero_noise_pair_matches_perfect_classifier() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = json!({"gw_capacity": 20, "ssu_capacity": 3});
    let fpfn: FpFnSweepConfig = from_json(json!({
        "seed": 4, "data": small_cohort(500), "replications": 3,
        "pairs": [{"fp_rate": 0.0, "fn_rate": 0.0}], "scenario": scenario
    }));
    let perfect: CapacitySweepConfig = from_json(json!({
        "seed": 4, "data": small_cohort(500), "replications": 3,
        "classifiers": [{"name": "perfect", "classifier": {"kind": "perfect"}}],
        "grid": [{"gw": 20, "ssu": 3}], "scenario": scenario
    }));
    let a = cmd_fpfn_sweep(&fpfn, &RunOptions::new(dir.path().join("a"))).unwrap();
    let b = cmd_capacity_sweep(&perfect, &RunOptions::new(dir.path().join("b"))).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.replication, x.metric, x.value), (y.replication, y.metric, y.value));
    }
}

#[test]
fn sweep_rows_follow_grid_classifier_replication_metric_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: CapacitySweepConfig = from_json(json!({
        "data": small_cohort(200), "replications": 2,
        "classifiers": [
            {"name": "b", "classifier": {"kind": "perfect"}},
            {"name": "a", "classifier": {"kind": "random"}}
        ],
        "grid": [{"gw": 10, "ssu": 2}, {"gw": "infinite", "ssu": 0}]
    }));
    let rows = cmd_capacity_sweep(&cfg, &RunOptions::new(dir.path())).unwrap();
    let keys: Vec<(String, String, String, usize)> = rows
        .iter()
        .map(|r| (r.key[0].clone(), r.key[1].clone(), r.key[2].clone(), r.replication))
        .collect();
    let mut expected = Vec::new();
    for (gw, ssu) in [("10", "2"), ("inf", "0")] {
        for c in ["b", "a"] {
            for rep in 0..2 {
                expected.push((gw.to_string(), ssu.to_string(), c.to_string(), rep));
            }
        }
    }
    let mut dedup = keys.clone();
    dedup.dedup();
    assert_eq!(dedup, expected);
    let block = rows.len() / expected.len();
    for chunk in rows.chunks(block) {
        let names: Vec<&str> = chunk.iter().map(|r| r.metric).collect();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        assert_eq!(names, sorted);
    }
    let csv = fs::read_to_string(dir.path().join("capacity_sweep.csv")).unwrap();
    assert!(csv.starts_with("gw_cap,ssu_cap,classifier,replication,metric,value\n"));
    assert_eq!(csv.lines().count(), rows.len() + 1);
}

#[test]
fn half_noise_counts_follow_binomials() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: SimulateConfig = from_json(json!({
        "seed": 12, "data": small_cohort(3000), "replications": 4,
        "classifier": {"kind": "confusion_noise", "fp_rate": 0.5, "fn_rate": 0.5},
        "scenario": {"gw_capacity": "infinite", "ssu_capacity": "infinite"}
    }));
    cmd_simulate(&cfg, &RunOptions::new(dir.path())).unwrap();
    for rep in 0..4 {
        let patients =
            load_sim_patients(fs::File::open(dir.path().join(format!("patients_rep{rep:03}.csv"))).unwrap()).unwrap();
        let n_ls = patients.iter().filter(|p| p.true_label.is_ls()).count() as f64;
        let n_ss = patients.len() as f64 - n_ls;
        let r = read_report(&dir.path().join(format!("report_rep{rep:03}.json")));
        assert!((r.ls_misclassified as f64 - n_ls / 2.0).abs() <= 3.0 * (n_ls / 4.0).sqrt());
        assert!((r.ss_misclassified as f64 - n_ss / 2.0).abs() <= 3.0 * (n_ss / 4.0).sqrt());
        assert_eq!(r.avg_wait_gw, None);
    }
}

#[test]
fn capacitated_report_uses_table_row_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: SimulateConfig = from_json(json!({
        "data": small_cohort(400),
        "classifier": {"kind": "trained", "trainer": {
            "model": {"kind": "logistic"}, "threshold": {"rule": "precision", "value": 0.8}}},
        "scenario": {"gw_capacity": 70, "ssu_capacity": 10}
    }));
    cmd_simulate(&cfg, &RunOptions::new(dir.path())).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report_rep000.json")).unwrap()).unwrap();
    let rows = [
        "total sterilization count",
        "GW sterilization count",
        "SSU sterilization count",
        "WA sterilization count",
        "avg. wait time for GW bed (hr)",
        "avg. LS patient time in GW (hr)",
        "avg. LS patient time in SSU (hr)",
        "avg. SS patient time in GW (hr)",
        "avg. SS patient time in SSU (hr)",
        "max. # of patients in GW",
        "max. # of patients in SSU",
        "max. # of patients in WA",
        "avg. # of patients in GW",
        "avg. # of patients in SSU",
        "avg. # of patients in WA",
        "GW ≥ 90% utilization rate",
        "SSU ≥ 90% utilization rate",
        "LS misclassification count",
        "SS misclassification count",
    ];
    for row in rows {
        assert!(v.get(row).is_some(), "missing `{row}`");
    }
    // Only the held-out 30% of encounters is simulated.
    assert_eq!(v["patients"], json!(120));
}

#[test]
fn summarize_flags_missing_and_constant_features() {
    let dir = tempfile::tempdir().unwrap();
    let csv = "encounter_id,patient_hash,triage_time,admit_decision_time,los_hours,empty,flat,ward\n\
               e1,p1,0,1,10,,5,a\n\
               e2,p2,1,2,100,,5,b\n\
               e3,p3,2,3,80,,5,a\n";
    let path = dir.path().join("enc.csv");
    fs::write(&path, csv).unwrap();
    let cfg: SummarizeConfig = from_json(json!({"data": {"source": "encounters", "path": path}}));
    let summary = cmd_summarize(&cfg, &RunOptions::new(dir.path().join("out"))).unwrap();
    let get = |n: &str| summary.iter().find(|s| s.feature == n).unwrap();
    assert_eq!(get("empty").missing_ratio, 1.0);
    assert_eq!(get("flat").std, Some(0.0));
    assert_eq!(get("ward").categories, vec![("a".to_string(), 2), ("b".to_string(), 1)]);
    let balance = fs::read_to_string(dir.path().join("out/label_balance.csv")).unwrap();
    assert!(balance.contains("LS,2,"), "{balance}");

    let cohort: SummarizeConfig = from_json(json!({"seed": 2, "data": small_cohort(4000)}));
    cmd_summarize(&cohort, &RunOptions::new(dir.path().join("cohort"))).unwrap();
    let text = fs::read_to_string(dir.path().join("cohort/label_balance.csv")).unwrap();
    let ls: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((ls - 0.67).abs() < 0.03, "LS fraction {ls}");
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_losflow")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str, body: &str| {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        path.to_string_lossy().into_owned()
    };
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let unknown = p("unknown.json", r#"{"classifier":{"kind":"perfect"},"replicates":3}"#);
    let (code, err) = run_cli(&["simulate", "--config", &unknown, "--out", out]);
    assert_eq!(code, 2);
    assert!(err.contains("replicates"), "{err}");

    let nested = p("nested.json", r#"{"classifier":{"kind":"perfect"},"scenario":{"gw_capacity":-1,"ssu_capacity":1}}"#);
    let (code, err) = run_cli(&["simulate", "--config", &nested, "--out", out]);
    assert_eq!(code, 2);
    assert!(err.contains("scenario.gw_capacity"), "{err}");

    let version = p("version.json", r#"{"schema_version":9,"classifier":{"kind":"perfect"}}"#);
    assert_eq!(run_cli(&["simulate", "--config", &version, "--out", out]).0, 2);

    assert_eq!(run_cli(&["simulate", "--out", out]).0, 2);

    let missing = p(
        "missing.json",
        r#"{"data":{"source":"encounters","path":"/nonexistent/enc.csv"},"classifier":{"kind":"perfect"}}"#,
    );
    assert_eq!(run_cli(&["simulate", "--config", &missing, "--out", out]).0, 3);

    let bad_rows = p("bad.csv", "encounter_id,arrival_time,los_hours,true_label,predicted_label\ne1,0,-5,LS,LS\n");
    let sim = p(
        "sim.json",
        &format!(r#"{{"data":{{"source":"sim_patients","path":"{bad_rows}"}},"classifier":{{"kind":"given"}}}}"#),
    );
    assert_eq!(run_cli(&["simulate", "--config", &sim, "--out", out]).0, 3);

    let ok = p("ok.json", r#"{"n_patients":50}"#);
    assert_eq!(run_cli(&["generate-cohort", "--config", &ok, "--out", out]).0, 0);
    assert!(Path::new(out).join("cohort.csv").exists());
}

#[test]
fn shipped_configs_parse_and_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    load_config::<PipelineConfig>(&dir.join("pipeline.json")).unwrap().validate().unwrap();
    load_config::<SimulateConfig>(&dir.join("simulate.json")).unwrap().validate().unwrap();
    load_config::<CapacitySweepConfig>(&dir.join("capacity_sweep.json")).unwrap().validate().unwrap();
    load_config::<FpFnSweepConfig>(&dir.join("fpfn_sweep.json")).unwrap().validate().unwrap();
    load_config::<SummarizeConfig>(&dir.join("summarize.json")).unwrap().validate().unwrap();
}
