use std::collections::BTreeMap;

use wifi_pathloss::measurements::*;

fn rec(loc: &str, channel: u16, rssi: f64, t: f64) -> PacketRecord {
    PacketRecord {
        timestamp_s: t,
        location_id: loc.into(),
        rssi_dbm: rssi,
        mcs: 7,
        nss: 2,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        channel,
    }
}

/// Three records per (location, channel) symmetric around the channel mean.
fn frequency_study() -> Vec<PacketRecord> {
    let means = [
        ("7", [-44.74, -43.40, -40.96]),
        ("10", [-78.43, -77.14, -77.84]),
        ("18", [-58.81, -57.91, -59.56]),
    ];
    let mut out = Vec::new();
    for (loc, by_channel) in means {
        for (ch, mean) in [36u16, 40, 44].into_iter().zip(by_channel) {
            for (i, off) in [-0.5, 0.0, 0.5].into_iter().enumerate() {
                out.push(rec(loc, ch, mean + off, i as f64 * 0.01));
            }
        }
    }
    out
}

#[test]
fn channel_deltas_against_channel_36() {
    let deltas = channel_variance(&frequency_study(), 36).unwrap();
    let want = [
        ("7", 40, 1.34),
        ("7", 44, 3.78),
        ("10", 40, 1.29),
        ("10", 44, 0.59),
        ("18", 40, 0.90),
        ("18", 44, -0.75),
    ];
    for (loc, ch, v) in want {
        let got = deltas[&(LocationId::from(loc), ch)];
        assert!((got - v).abs() < 1e-9, "{loc}/{ch}: {got} vs {v}");
    }
    for loc in ["7", "10", "18"] {
        assert_eq!(deltas[&(LocationId::from(loc), 36)], 0.0);
    }
    assert_eq!(deltas.len(), 9);
}

#[test]
fn reference_rssi_gives_measured_path_loss() {
    let recs: Vec<_> = frequency_study()
        .into_iter()
        .filter(|r| r.channel == 36)
        .collect();
    let samples = aggregate_path_loss(&recs, &LocationRegistry::reference()).unwrap();
    let loc7 = samples.iter().find(|s| s.location_id == "7").unwrap();
    assert!((loc7.pl_db - 67.74).abs() < 1e-9);
    // Registry order: 7, 10, 18.
    let ids: Vec<&str> = samples.iter().map(|s| s.location_id.as_str()).collect();
    assert_eq!(ids, ["7", "10", "18"]);
}

#[test]
fn frequency_study_stays_within_shadowing_sigma() {
    let recs = frequency_study();
    let report = VarianceReport {
        per_location_std_db: time_variance(&recs).std_db,
        grid_max_abs_diff_db: BTreeMap::new(),
        per_channel_delta_db: channel_variance(&recs, 36).unwrap(),
    };
    assert!(report.exceeding(SHADOWING_SIGMA_DB).is_empty());
    let csv = report.to_csv();
    assert!(csv.contains("channel_delta,18,44,-0.750\n"), "{csv}");
}

#[test]
fn capture_file_round_trip() {
    let recs = frequency_study();
    let text = write_capture(&recs);
    let parsed = parse_capture(text.as_bytes())
        .unwrap()
        .into_strict()
        .unwrap();
    assert_eq!(parsed, recs);
    assert_eq!(write_capture(&parsed), text);
}

#[test]
fn columns_located_by_name() {
    let text = "location_id,timestamp_s,channel,rssi_dbm,mcs,nss,bw_mhz,ptx_dbm\n7,0.5,40,-43.4,8,2,80,23\n";
    let cap = parse_capture(text.as_bytes()).unwrap();
    assert_eq!(cap.records[0].channel, 40);
    assert_eq!(cap.records[0].bw_mhz, 80);
    assert_eq!(cap.summary(), "1 record(s) accepted, 0 rejected");
}
