//! Golden values for the evaluators, frozen from an independent
//! hand/spreadsheet-style calculation (plain float arithmetic on the closed
//! forms, done outside this crate).

use wifi_pathloss::fitting::compute_wbar;
use wifi_pathloss::pathloss::*;
use wifi_pathloss::rate::{phy_rate, GuardInterval};
use wifi_pathloss::LocationRegistry;

const TOL: f64 = 1e-3;

fn g(d: f64, walls: u32) -> LinkGeometry {
    LinkGeometry::new(d, walls).unwrap()
}

fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got}, want {want} ± {tol}"
    );
}

/// (label, model, d, walls, floors, expected dB), expected values computed
/// independently to full double precision.
const CASES: &[(&str, ModelId, f64, u32, u32, f64)] = &[
    (
        "residential d=5",
        ModelId::Residential,
        5.0,
        0,
        0,
        60.71177044739291,
    ),
    (
        "residential d=10 W=2",
        ModelId::Residential,
        10.0,
        2,
        0,
        81.24782029563225,
    ),
    (
        "enterprise d=10",
        ModelId::Enterprise,
        10.0,
        0,
        0,
        66.73237036067253,
    ),
    (
        "enterprise d=20 W=3",
        ModelId::Enterprise,
        20.0,
        3,
        0,
        98.26842020891188,
    ),
    ("log-distance d=1", ModelId::LogDistance, 1.0, 0, 0, 54.12),
    (
        "log-distance d=10",
        ModelId::LogDistance,
        10.0,
        0,
        0,
        74.7267,
    ),
    (
        "log-distance d=100",
        ModelId::LogDistance,
        100.0,
        0,
        0,
        95.3334,
    ),
    (
        "wall-factor loc 10",
        ModelId::WallFactor,
        11.141,
        4,
        0,
        96.69365238110606,
    ),
    (
        "wall-factor loc 8",
        ModelId::WallFactor,
        5.778,
        2,
        0,
        80.31772118216978,
    ),
    ("tmb d=1", ModelId::Tmb, 1.0, 0, 0, 54.890175),
    ("tmb d=10", ModelId::Tmb, 10.0, 0, 0, 82.42845),
    ("itu d=1", ModelId::ItuR, 1.0, 0, 0, 46.28659519490466),
    ("itu d=10", ModelId::ItuR, 10.0, 0, 0, 77.28659519490466),
];

#[test]
fn evaluators_match_frozen_oracle() {
    let p = PathLossParams::default();
    for &(label, model, d, walls, floors, want) in CASES {
        let geom = g(d, walls).with_floors(floors);
        assert_close(evaluate(model, &geom, &p).unwrap(), want, 1e-9, label);
    }
}

#[test]
fn evaluators_match_published_rounding() {
    // Three-decimal values as listed for each operation.
    let p = PathLossParams::default();
    let listed = [
        (ModelId::Residential, 5.0, 0, 60.712),
        (ModelId::Residential, 10.0, 2, 81.248),
        (ModelId::Enterprise, 10.0, 0, 66.732),
        (ModelId::Enterprise, 20.0, 3, 98.268),
        (ModelId::LogDistance, 1.0, 0, 54.120),
        (ModelId::LogDistance, 10.0, 0, 74.727),
        (ModelId::LogDistance, 100.0, 0, 95.333),
        (ModelId::WallFactor, 11.141, 4, 96.694),
        (ModelId::Tmb, 1.0, 0, 54.890),
        (ModelId::Tmb, 10.0, 0, 82.428),
        (ModelId::ItuR, 1.0, 0, 46.287),
        (ModelId::ItuR, 10.0, 0, 77.287),
    ];
    for (model, d, walls, want) in listed {
        assert_close(
            evaluate(model, &g(d, walls), &p).unwrap(),
            want,
            TOL,
            model.name(),
        );
    }
}

#[test]
fn enterprise_at_reference_frequency() {
    let p = PathLossParams {
        fc_ghz: 2.4,
        ..Default::default()
    };
    assert_close(
        pl_enterprise(&g(1.0, 0), &p).unwrap(),
        40.05,
        1e-12,
        "enterprise fc=2.4 d=1",
    );
}

#[test]
fn itu_with_floor_loss() {
    let p = PathLossParams {
        lf_itu_db: 6.0,
        ..Default::default()
    };
    assert_close(pl_itu(&g(1.0, 0), &p).unwrap(), 52.287, TOL, "itu Lf=6");
}

#[test]
fn residential_breakpoint_is_continuous() {
    let p = PathLossParams::default();
    let eps = 1e-4;
    let lo = pl_residential(&g(5.0 - eps, 0), &p).unwrap();
    let hi = pl_residential(&g(5.0 + eps, 0), &p).unwrap();
    assert!((hi - lo).abs() < 0.01);
}

#[test]
fn rssi_golden_values() {
    let p = PathLossParams::default();
    assert_close(
        rssi_at(ModelId::Tmb, &g(10.0, 0), &p, 23.0).unwrap(),
        -59.42845,
        1e-9,
        "tmb rssi d=10",
    );
    assert_close(
        rssi_at(ModelId::Tmb, &g(1.0, 0), &p, 23.0).unwrap(),
        -31.890175,
        1e-9,
        "tmb rssi d=1",
    );
    assert_close(
        LinkBudget::from_rssi(23.0, -44.74).pl_db,
        67.74,
        1e-12,
        "measured PL loc 7",
    );
}

#[test]
fn wbar_of_office_testbed() {
    // Sum of W_i/d_i over the 21 locations divided by 21.
    let wbar = compute_wbar(&LocationRegistry::reference().geometries()).unwrap();
    assert_close(wbar, 0.1467014450351431, 1e-12, "W-bar oracle");
    assert_close(wbar, 0.1467, 5e-4, "W-bar published");
}

#[test]
fn phy_rate_golden_values() {
    assert_eq!(phy_rate(7, 1, 20, GuardInterval::Long).unwrap(), 65.0);
    assert_close(
        phy_rate(9, 2, 80, GuardInterval::Short).unwrap(),
        866.6666666666666,
        1e-9,
        "VHT80 MCS9 2SS SGI",
    );
}
