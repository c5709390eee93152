use std::fs;
use std::process::{Command, Output};

use wifi_pathloss::measurements::{parse_capture, LocationRegistry};
use wifi_pathloss::{FitReport, McsDistributionTable, PathLossParams};

fn tmbwifi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmbwifi"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = tmbwifi(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails_with(args: &[&str], code: i32) -> String {
    let out = tmbwifi(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    String::from_utf8(out.stderr).unwrap()
}

#[test]
fn eval_prints_path_loss() {
    assert!(stdout(&["eval", "--model", "tmb", "--d", "10"]).contains("PL=82.428 dB"));
    assert!(stdout(&["eval", "--model", "log-distance", "--d", "1"]).contains("PL=54.120 dB"));
    let line = stdout(&["eval", "--model", "tmb", "--d", "10", "--ptx", "23"]);
    assert!(line.contains("RSSI=-59.428 dBm"), "{line}");
    let line = stdout(&["eval", "--model", "wf", "--d", "11.141", "--walls", "4"]);
    assert!(line.contains("PL=96.694 dB"), "{line}");
}

#[test]
fn eval_overrides_and_param_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    let p = PathLossParams {
        l0_db: 40.0,
        ..Default::default()
    };
    fs::write(&path, p.to_text()).unwrap();
    let line = stdout(&[
        "eval",
        "--model",
        "ld",
        "--d",
        "1",
        "--params",
        path.to_str().unwrap(),
    ]);
    assert!(line.contains("PL=40.000 dB"), "{line}");
    let line = stdout(&["eval", "--model", "ld", "--d", "10", "--gamma", "3"]);
    assert!(line.contains("PL=84.120 dB"), "{line}");
}

#[test]
fn domain_errors_exit_1_naming_the_flag() {
    assert!(fails_with(&["eval", "--model", "tmb", "--d", "0"], 1).contains("--d"));
    assert!(
        fails_with(&["eval", "--model", "tmb", "--d", "5", "--gamma", "-1"], 1).contains("--gamma")
    );
}

#[test]
fn usage_errors_exit_2() {
    assert!(fails_with(&["eval", "--model", "nope", "--d", "5"], 2).contains("--model"));
    assert!(fails_with(&["curve", "--d", "5:1:1"], 2).contains("--d"));
    fails_with(&["curve", "--d", "1:5"], 2);
    fails_with(&["curve", "--d", "1:5:0"], 2);
    fails_with(&["eval", "--model", "tmb", "--d", "5", "--bogus"], 2);
    fails_with(&["predict", "--bw", "20", "--ptx", "23"], 2);
    fails_with(&[], 2);
}

#[test]
fn curve_shape_and_values() {
    let csv = stdout(&["curve", "--models", "tmb,itu", "--d", "1:25:1"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "d_m,tmb,itu");
    assert_eq!(lines.len(), 26);
    assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 3));
    assert_eq!(lines[10], "10.000,82.428,77.287");
}

#[test]
fn curve_at_registry_geometries() {
    let dir = tempfile::tempdir().unwrap();
    let reg = dir.path().join("reg.csv");
    fs::write(&reg, stdout(&["registry-export"])).unwrap();
    let csv = stdout(&[
        "curve",
        "--models",
        "wall-factor",
        "--registry",
        reg.to_str().unwrap(),
    ]);
    assert_eq!(
        csv.lines().next(),
        Some("location_id,d_m,walls,wall-factor")
    );
    assert!(csv.contains("\n10,11.141,4,96.694\n"), "{csv}");
}

#[test]
fn registry_export_round_trips() {
    let csv = stdout(&["registry-export"]);
    assert_eq!(csv.lines().count(), 22);
    assert!(csv.contains("\n17,24.304,2,"));
    let back = LocationRegistry::parse_csv(csv.as_bytes()).unwrap();
    assert_eq!(back.to_csv(), csv);
    assert_eq!(back.to_csv(), LocationRegistry::reference().to_csv());
}

#[test]
fn fit_from_capture_files_matches_synthetic_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cap = dir.path().join("cap.csv");
    let report = dir.path().join("report.txt");
    let trace = dir.path().join("trace.csv");
    stdout(&[
        "ingest",
        "--synthetic",
        "--seed",
        "7",
        "--out",
        cap.to_str().unwrap(),
    ]);
    let parsed = parse_capture(fs::File::open(&cap).unwrap()).unwrap();
    assert!(parsed.rejected.is_empty());
    assert_eq!(parsed.records.len(), 21 * 9 * 85);

    let summary = stdout(&[
        "fit",
        "--captures",
        cap.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(summary.contains("tmb"));
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(text, stdout(&["fit", "--synthetic", "--seed", "7"]));
    let r = FitReport::from_text(&text).unwrap();
    assert_eq!(r.sample_count, 189);
    assert!(text.contains("rmse.tmb = "));
    let trace = fs::read_to_string(&trace).unwrap();
    assert_eq!(trace.lines().count(), 1002);
    assert!(trace.starts_with("k_db_per_wall,rmse_db\n0.00,"));
}

#[test]
fn fit_names_unknown_locations() {
    let dir = tempfile::tempdir().unwrap();
    let cap = dir.path().join("cap.csv");
    let reg = dir.path().join("reg.csv");
    fs::write(
        &cap,
        "timestamp_s,location_id,rssi_dbm,mcs,nss,bw_mhz,ptx_dbm,channel\n0,7,-44.74,7,2,20,23,36\n0,99,-50,7,2,20,23,36\n",
    )
    .unwrap();
    fs::write(
        &reg,
        "location_id,distance_m,walls,floors,height_m\n7,3.0,0,0,0\n",
    )
    .unwrap();
    let err = fails_with(
        &[
            "fit",
            "--captures",
            cap.to_str().unwrap(),
            "--registry",
            reg.to_str().unwrap(),
        ],
        1,
    );
    assert!(err.contains("99"), "{err}");
    assert!(err.contains("aggregation"), "{err}");
}

#[test]
fn fit_attributes_failing_step() {
    let dir = tempfile::tempdir().unwrap();
    let cap = dir.path().join("cap.csv");
    let mut text =
        String::from("timestamp_s,location_id,rssi_dbm,mcs,nss,bw_mhz,ptx_dbm,channel\n");
    for (id, rssi) in [("0", -30.0), ("2", -41.0), ("3", -44.0)] {
        text.push_str(&format!("0,{id},{rssi},7,2,20,23,36\n"));
    }
    fs::write(&cap, text).unwrap();
    let err = fails_with(&["fit", "--captures", cap.to_str().unwrap()], 1);
    assert!(err.contains("wall attenuation"), "{err}");
}

#[test]
fn predict_examples() {
    let text = stdout(&["predict", "--d", "10", "--bw", "20", "--ptx", "23"]);
    assert!(text.contains("RSSI -59.428 dBm, bin [-62, -58]"), "{text}");
    assert!(text.contains("mode MCS 7 / 2SS (71.37%)"), "{text}");
    let text = stdout(&["predict", "--rssi", "-45", "--bw", "20", "--ptx", "23"]);
    assert!(text.contains("MCS 8 / 2SS (99.07%)"), "{text}");
    assert!(fails_with(
        &["predict", "--rssi", "-10", "--bw", "20", "--ptx", "23"],
        1
    )
    .contains("outside"));
}

#[test]
fn predict_reports_borrowed_bins() {
    let text = stdout(&[
        "predict", "--rssi", "-95", "--bw", "80", "--ptx", "23", "--full",
    ]);
    assert!(text.contains("borrowed from bin [-92, -88]"), "{text}");
    assert!(text.contains("mcs,nss,percent\n1,1,100.00\n"), "{text}");
    let csv = stdout(&[
        "predict", "--rssi", "-95", "--bw", "80", "--ptx", "23", "--format", "csv",
    ]);
    assert!(csv.ends_with(",-92\n"), "{csv}");
}

#[test]
fn predict_no_data_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    fs::write(
        &table,
        "rssi_bin_low,bw_mhz,ptx_dbm,mcs,nss,probability,samples\n-47,20,23,8,2,1.0,10\n",
    )
    .unwrap();
    let t = table.to_str().unwrap();
    assert!(
        stdout(&["predict", "--rssi", "-50", "--bw", "20", "--ptx", "23", "--table", t])
            .contains("borrowed")
    );
    assert!(fails_with(
        &["predict", "--rssi", "-80", "--bw", "20", "--ptx", "23", "--table", t],
        1
    )
    .contains("no data"));
}

#[test]
fn mcs_table_csv_round_trips_through_predict() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let csv = stdout(&["mcs-table", "--reference"]);
    fs::write(&table, &csv).unwrap();
    assert_eq!(
        McsDistributionTable::from_csv(csv.as_bytes())
            .unwrap()
            .to_csv(),
        csv
    );
    let args = ["predict", "--d", "1", "--bw", "20", "--ptx", "23"];
    let mut with_table = args.to_vec();
    with_table.extend(["--table", table.to_str().unwrap()]);
    assert_eq!(stdout(&with_table), stdout(&args));
}

#[test]
fn variance_filters_one_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cap = dir.path().join("cap.csv");
    stdout(&["ingest", "--synthetic", "--out", cap.to_str().unwrap()]);
    let c = cap.to_str().unwrap();
    let csv = stdout(&["variance", "--captures", c, "--bw", "20", "--ptx", "23"]);
    assert!(csv.starts_with("kind,location_id,channel,value_db\n"));
    assert_eq!(csv.lines().count(), 22);
    // Per-packet jitter is 1 dB, well inside the 5 dB threshold.
    let out = tmbwifi(&["variance", "--captures", c, "--bw", "20", "--ptx", "23"]);
    assert!(!String::from_utf8_lossy(&out.stderr).contains("above"));
    let out = tmbwifi(&["variance", "--captures", c]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("pool 9 AP configurations"));
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["fit", "--synthetic"][..],
        &["ingest", "--synthetic", "--path-loss"],
        &["curve", "--d", "0.5:30:0.5"],
    ] {
        assert_eq!(stdout(args), stdout(args));
    }
    assert_ne!(
        stdout(&["fit", "--synthetic", "--seed", "1"]),
        stdout(&["fit", "--synthetic", "--seed", "2"])
    );
}
