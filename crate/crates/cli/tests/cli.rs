use std::path::Path;
use std::process::Command;

use ris_sizer_cli::main_with_args;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut full = vec!["ris-sizer"];
    full.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with_args(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn list_usecases_variants() {
    let (code, out, _) = run(&["list-usecases"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 17);

    let (_, out, _) = run(&["list-usecases", "--format", "json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 16);
    assert_eq!(v[6]["name"], "mmW Umi");

    let (_, out, _) = run(&["list-usecases", "--band", "mmW", "--format", "json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let ids: Vec<u64> = v.as_array().unwrap().iter().map(|u| u["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![7, 8, 9, 15, 16]);
}

#[test]
fn sweep_writes_pools_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, err) = run(&["sweep", "--usecase", "7", "--sizes", "20,10", "--out", out]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("UC-7"));
    for f in ["uc7_10x10_pool.csv", "uc7_20x20_pool.csv", "uc7_summary.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("uc7_10x10_pool.csv")).unwrap();
    let prov = ris_sizer_core::report::read_csv_preamble(&csv).unwrap();
    assert_eq!(prov.schema_version, 1);
    assert_eq!(prov.tool_version, env!("CARGO_PKG_VERSION"));
    assert_eq!(prov.config["usecase"]["id"], 7);
    assert!(prov.config.get("workers").is_none() && prov.config.get("out").is_none());
    let data_rows = csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(data_rows, 33600);

    let summary = read_json(&dir.path().join("uc7_summary.json"));
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["realizations"], 33600);
    let sizes = summary["sizes"].as_array().unwrap();
    assert_eq!(sizes[0]["ris_size"], "10x10");
    assert_eq!(sizes[1]["ris_size"], "20x20");
    assert_eq!(summary["sizing"]["thresholds_db"].as_array().unwrap().len(), 4);
}

#[test]
fn json_pool_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, err) = run(&["sweep", "--usecase", "10", "--sizes", "5", "--format", "json", "--out", out]);
    assert_eq!(code, 0, "{err}");
    let doc = read_json(&dir.path().join("uc10_5x5_pool.json"));
    assert_eq!(doc["kind"], "pool");
    assert_eq!(doc["samples"].as_array().unwrap().len(), 2700);
}

#[test]
fn invalid_usecase_is_a_config_error() {
    let (code, _, err) = run(&["sweep", "--usecase", "99"]);
    assert_eq!(code, 2);
    assert!(err.contains("--usecase"), "{err}");
}

#[test]
fn bad_flags_are_config_errors() {
    for args in [
        &["size", "--usecase", "5", "--sizes", "0x4"][..],
        &["size", "--usecase", "5", "--bearings", "-95:0:5"],
        &["size", "--usecase", "5", "--criterion", "median"],
        &["size", "--usecase", "5", "--epsilon", "1.5"],
        &["size", "--usecase", "5", "--phase-states", "zero"],
        &["size", "--usecase", "5", "--bins", "0"],
        &["size", "--usecase", "5", "--workers", "0"],
        &["size"],
        &["replay", "--ple", "7"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, 2, "{args:?}: {err}");
    }
}

#[test]
fn size_reports_not_achievable_and_reuses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["size", "--usecase", "10", "--sizes", "5,10", "--thresholds-db", "5,1000", "--out", out];
    let (code, table, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    assert!(table.contains("NOT_ACHIEVABLE"));
    let first = std::fs::read(dir.path().join("uc10_sizing.json")).unwrap();
    let report: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(report["sizing"]["min_size_per_threshold"][1], "NOT_ACHIEVABLE");
    assert_eq!(report["sizing"]["criterion"], "MEAN_SNR");

    let cache = dir.path().join("cache");
    let entries: Vec<_> = std::fs::read_dir(&cache).unwrap().collect();
    assert_eq!(entries.len(), 2);
    // A second run reads the cache and reproduces the report exactly.
    let (code, _, _) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read(dir.path().join("uc10_sizing.json")).unwrap(), first);
}

#[test]
fn outage_criterion_never_undersizes_mean_snr() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let base = ["size", "--usecase", "16", "--sizes", "5,10,20,40", "--out", out];
    let sizes = |criterion: &str| -> Vec<Value> {
        let mut a = base.to_vec();
        a.extend(["--criterion", criterion]);
        assert_eq!(run(&a).0, 0);
        let r = read_json(&dir.path().join("uc16_sizing.json"));
        r["sizing"]["min_size_per_threshold"].as_array().unwrap().clone()
    };
    let rank = |v: &Value| match v.as_str().unwrap() {
        "NOT_ACHIEVABLE" => usize::MAX,
        s => s.split('x').map(|n| n.parse::<usize>().unwrap()).product(),
    };
    let mean = sizes("mean-snr");
    let outage = sizes("outage");
    for (m, o) in mean.iter().zip(&outage) {
        assert!(rank(o) >= rank(m), "{m} vs {o}");
    }
}

#[test]
fn pdf_with_shared_bins() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, err) = run(&["pdf", "--usecase", "10", "--sizes", "5,10", "--bins", "12", "--out", out]);
    assert_eq!(code, 0, "{err}");
    let r = read_json(&dir.path().join("uc10_pdf.json"));
    let sizes = r["sizes"].as_array().unwrap();
    assert_eq!(sizes[0]["snr_pdf_db"]["edges"], sizes[1]["snr_pdf_db"]["edges"]);
    assert_eq!(sizes[0]["snr_pdf_db"]["counts"].as_array().unwrap().len(), 12);
}

#[test]
fn usecase_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let doc = ris_sizer_core::builtin_usecase(10).unwrap().to_document();
    let path = dir.path().join("uc.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = dir.path().join("out");
    let (code, _, err) = run(&[
        "size",
        "--usecase-file",
        path.to_str().unwrap(),
        "--sizes",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.join("uc100_sizing.json").is_file());

    std::fs::write(&path, r#"{"name": "x"}"#).unwrap();
    let (code, _, _) = run(&["size", "--usecase-file", path.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn replay_bundled_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, err) = run(&["replay", "--out", out]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("replay_curves.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "label,distance_m,snr_db_ple_2,snr_db_ple_1.785");
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 142);
    let stats = read_json(&dir.path().join("replay_stats.json"));
    assert_eq!(stats["measurements_present"], false);
    assert_eq!(stats["curves"].as_array().unwrap().len(), 2);
}

#[test]
fn replay_with_measurements() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("t.csv");
    std::fs::write(
        &traj,
        "# three points\nx_m,y_m,z_m,label,snr_db\n60,10,64,a,20\n90,10,64,b,17\n120,10,64,c,12.5\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let (code, _, err) = run(&["replay", "--trajectory", traj.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let stats = read_json(&out.join("replay_stats.json"));
    assert_eq!(stats["measurements_present"], true);
    let c = &stats["curves"][0]["comparison"];
    assert!(c["bias_db"].is_number() && c["rmse_db"].is_number());
    assert_eq!(c["spearman"], 1.0);

    // A separate measurement file overrides the trajectory column.
    let meas = dir.path().join("m.csv");
    std::fs::write(&meas, "label,snr_db\nc,1\nb,2\na,3\n").unwrap();
    let (code, _, err) = run(&[
        "replay",
        "--trajectory",
        traj.to_str().unwrap(),
        "--measurements",
        meas.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(read_json(&out.join("replay_stats.json"))["curves"][0]["comparison"]["spearman"], 1.0);

    std::fs::write(&meas, "label,snr_db\na,3\n").unwrap();
    let (code, _, _) = run(&["replay", "--trajectory", traj.to_str().unwrap(), "--measurements", meas.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn replay_missing_trajectory_exits_2() {
    let (code, _, err) = run(&["replay", "--trajectory", "/nonexistent/t.csv"]);
    assert_eq!(code, 2);
    assert!(err.contains("--trajectory"));
}

#[test]
fn binary_exit_codes_and_out_env() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_ris-sizer");
    let status = Command::new(bin).args(["sweep", "--usecase", "99"]).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
    let status = Command::new(bin)
        .args(["sweep", "--usecase", "10", "--sizes", "5"])
        .env("RIS_SIZER_OUT", dir.path())
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("uc10_summary.json").is_file());
    let status = Command::new(bin).arg("--version").output().unwrap().status;
    assert_eq!(status.code(), Some(0));
}
