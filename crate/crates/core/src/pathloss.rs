//! Indoor path loss evaluators for the 5 GHz band.
//!
//! Six model families share one parameter set ([`PathLossParams`]) and one
//! receiver description ([`LinkGeometry`]):
//!
//! - **Residential / Enterprise**: the 802.11ax indoor channel models with a
//!   breakpoint (5 m / 10 m) and fixed per-wall penalties.
//! - **Log-distance**: `L0 + 10·γ·log10(d)`.
//! - **Wall factor**: log-distance plus `k` dB per traversed wall.
//! - **TMB**: log-distance plus `k·W̄·d`, an averaged wall term that grows with
//!   distance so no per-location wall count is needed.
//! - **ITU-R site-general**: `20·log10(f_MHz) + N·log10(d) + Lf − 28`.
//!
//! All evaluators return dB and reject non-positive or non-finite distances.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Reference frequency (GHz) of the 802.11ax residential/enterprise models.
const TGAX_REF_FREQ_GHZ: f64 = 2.4;
/// Free-space-like constant shared by the residential and enterprise models.
const TGAX_INTERCEPT_DB: f64 = 40.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathLossError {
    #[error("distance must be finite and > 0 m, got {0}")]
    Distance(f64),
    #[error("invalid parameter {name}: {value}")]
    Param { name: &'static str, value: f64 },
    #[error("unknown model `{0}` (expected one of residential, enterprise, log-distance, wall-factor, tmb, itu)")]
    UnknownModel(String),
}

/// One receiver location relative to the AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub distance_m: f64,
    /// Traversed office walls.
    pub walls: u32,
    /// Traversed floors.
    pub floors: u32,
    /// Receiver height. Carried as metadata; no model reads it.
    pub height_m: f64,
}

impl LinkGeometry {
    pub fn new(distance_m: f64, walls: u32) -> Result<Self, PathLossError> {
        check_distance(distance_m)?;
        Ok(Self {
            distance_m,
            walls,
            floors: 0,
            height_m: 0.0,
        })
    }

    pub fn with_floors(mut self, floors: u32) -> Self {
        self.floors = floors;
        self
    }

    pub fn with_height(mut self, height_m: f64) -> Self {
        self.height_m = height_m;
        self
    }

    pub fn validate(&self) -> Result<(), PathLossError> {
        check_distance(self.distance_m)
    }
}

fn check_distance(d: f64) -> Result<(), PathLossError> {
    if d.is_finite() && d > 0.0 {
        Ok(())
    } else {
        Err(PathLossError::Distance(d))
    }
}

/// Coefficients for every model family.
///
/// [`Default`] yields the fitted 5 GHz office set: `L0 = 54.12 dB`,
/// `γ = 2.06067`, `k = 5.25 dB/wall`, `W̄ = 0.1467 walls/m`, plus
/// `fc = 5.18 GHz` (channel 36), `N = 31` and `Lf = 0` for the ITU model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    pub l0_db: f64,
    pub gamma: f64,
    pub k_db_per_wall: f64,
    pub wbar_walls_per_m: f64,
    pub fc_ghz: f64,
    pub n_itu: f64,
    pub lf_itu_db: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self {
            l0_db: 54.12,
            gamma: 2.06067,
            k_db_per_wall: 5.25,
            wbar_walls_per_m: 0.1467,
            fc_ghz: 5.18,
            n_itu: 31.0,
            lf_itu_db: 0.0,
        }
    }
}

impl PathLossParams {
    /// Key names of the flat text format, in canonical output order.
    pub const KEYS: [&'static str; 7] = [
        "l0_db",
        "gamma",
        "k_db_per_wall",
        "wbar_walls_per_m",
        "fc_ghz",
        "n_itu",
        "lf_itu_db",
    ];

    pub fn validate(&self) -> Result<(), PathLossError> {
        let finite = [
            ("l0_db", self.l0_db),
            ("n_itu", self.n_itu),
            ("lf_itu_db", self.lf_itu_db),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(PathLossError::Param { name, value });
            }
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(PathLossError::Param {
                name: "gamma",
                value: self.gamma,
            });
        }
        if !(self.k_db_per_wall.is_finite() && self.k_db_per_wall >= 0.0) {
            return Err(PathLossError::Param {
                name: "k_db_per_wall",
                value: self.k_db_per_wall,
            });
        }
        if !(self.wbar_walls_per_m.is_finite() && self.wbar_walls_per_m >= 0.0) {
            return Err(PathLossError::Param {
                name: "wbar_walls_per_m",
                value: self.wbar_walls_per_m,
            });
        }
        if !(self.fc_ghz.is_finite() && self.fc_ghz > 0.0) {
            return Err(PathLossError::Param {
                name: "fc_ghz",
                value: self.fc_ghz,
            });
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "l0_db" => self.l0_db,
            "gamma" => self.gamma,
            "k_db_per_wall" => self.k_db_per_wall,
            "wbar_walls_per_m" => self.wbar_walls_per_m,
            "fc_ghz" => self.fc_ghz,
            "n_itu" => self.n_itu,
            "lf_itu_db" => self.lf_itu_db,
            _ => return None,
        })
    }

    /// Sets one coefficient by its key name. Returns `false` for unknown keys.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "l0_db" => &mut self.l0_db,
            "gamma" => &mut self.gamma,
            "k_db_per_wall" => &mut self.k_db_per_wall,
            "wbar_walls_per_m" => &mut self.wbar_walls_per_m,
            "fc_ghz" => &mut self.fc_ghz,
            "n_itu" => &mut self.n_itu,
            "lf_itu_db" => &mut self.lf_itu_db,
            _ => return false,
        };
        *slot = value;
        true
    }
}

/// The six supported model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Residential,
    Enterprise,
    LogDistance,
    WallFactor,
    Tmb,
    ItuR,
}

impl ModelId {
    pub const ALL: [ModelId; 6] = [
        ModelId::Residential,
        ModelId::Enterprise,
        ModelId::LogDistance,
        ModelId::WallFactor,
        ModelId::Tmb,
        ModelId::ItuR,
    ];

    /// Stable lowercase name used on the command line and in documents.
    pub fn name(self) -> &'static str {
        match self {
            ModelId::Residential => "residential",
            ModelId::Enterprise => "enterprise",
            ModelId::LogDistance => "log-distance",
            ModelId::WallFactor => "wall-factor",
            ModelId::Tmb => "tmb",
            ModelId::ItuR => "itu",
        }
    }

    /// Whether the model reads the per-location wall/floor counts.
    pub fn is_location_specific(self) -> bool {
        matches!(
            self,
            ModelId::Residential | ModelId::Enterprise | ModelId::WallFactor
        )
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = PathLossError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match norm.as_str() {
            "residential" | "res" => ModelId::Residential,
            "enterprise" | "ent" => ModelId::Enterprise,
            "log-distance" | "logdistance" | "ld" => ModelId::LogDistance,
            "wall-factor" | "wallfactor" | "wf" => ModelId::WallFactor,
            "tmb" => ModelId::Tmb,
            "itu" | "itu-r" | "itur" => ModelId::ItuR,
            _ => return Err(PathLossError::UnknownModel(s.to_string())),
        })
    }
}

/// Transmit power, received power and the loss between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub ptx_dbm: f64,
    pub rssi_dbm: f64,
    pub pl_db: f64,
}

impl LinkBudget {
    /// From a measured RSSI: `PL = PTX − RSSI`.
    pub fn from_rssi(ptx_dbm: f64, rssi_dbm: f64) -> Self {
        Self {
            ptx_dbm,
            rssi_dbm,
            pl_db: ptx_dbm - rssi_dbm,
        }
    }

    /// From a predicted loss: `RSSI = PTX − PL`.
    pub fn from_path_loss(ptx_dbm: f64, pl_db: f64) -> Self {
        Self {
            ptx_dbm,
            rssi_dbm: ptx_dbm - pl_db,
            pl_db,
        }
    }
}

fn tgax_frequency_term(fc_ghz: f64) -> f64 {
    20.0 * (fc_ghz / TGAX_REF_FREQ_GHZ).log10()
}

/// Dual-slope distance term shared by the 802.11ax models: free-space
/// exponent up to `breakpoint_m`, exponent 3.5 beyond it (strictly).
fn tgax_distance_term(d: f64, breakpoint_m: f64) -> f64 {
    let near = 20.0 * d.min(breakpoint_m).log10();
    if d > breakpoint_m {
        near + 35.0 * (d / breakpoint_m).log10()
    } else {
        near
    }
}

/// `18.3 · F^((F+2)/(F+1) − 0.46)`, zero for a single floor.
fn residential_floor_term(floors: u32) -> f64 {
    if floors == 0 {
        return 0.0;
    }
    let f = f64::from(floors);
    18.3 * f.powf((f + 2.0) / (f + 1.0) - 0.46)
}

pub fn pl_residential(geom: &LinkGeometry, params: &PathLossParams) -> Result<f64, PathLossError> {
    geom.validate()?;
    Ok(TGAX_INTERCEPT_DB
        + tgax_frequency_term(params.fc_ghz)
        + tgax_distance_term(geom.distance_m, 5.0)
        + residential_floor_term(geom.floors)
        + 5.0 * f64::from(geom.walls))
}

pub fn pl_enterprise(geom: &LinkGeometry, params: &PathLossParams) -> Result<f64, PathLossError> {
    geom.validate()?;
    Ok(TGAX_INTERCEPT_DB
        + tgax_frequency_term(params.fc_ghz)
        + tgax_distance_term(geom.distance_m, 10.0)
        + 7.0 * f64::from(geom.walls))
}

pub fn pl_log_distance(geom: &LinkGeometry, params: &PathLossParams) -> Result<f64, PathLossError> {
    geom.validate()?;
    Ok(params.l0_db + 10.0 * params.gamma * geom.distance_m.log10())
}

pub fn pl_wall_factor(geom: &LinkGeometry, params: &PathLossParams) -> Result<f64, PathLossError> {
    Ok(pl_log_distance(geom, params)? + params.k_db_per_wall * f64::from(geom.walls))
}

/// Log-distance plus the averaged wall term `k·W̄·d`. The per-location wall
/// count is ignored.
pub fn pl_tmb(geom: &LinkGeometry, params: &PathLossParams) -> Result<f64, PathLossError> {
    Ok(pl_log_distance(geom, params)?
        + params.k_db_per_wall * params.wbar_walls_per_m * geom.distance_m)
}

/// ITU-R indoor site-general loss with the frequency in MHz.
pub fn pl_itu(geom: &LinkGeometry, params: &PathLossParams) -> Result<f64, PathLossError> {
    geom.validate()?;
    let f_mhz = params.fc_ghz * 1000.0;
    Ok(20.0 * f_mhz.log10() + params.n_itu * geom.distance_m.log10() + params.lf_itu_db - 28.0)
}

pub fn evaluate(
    model: ModelId,
    geom: &LinkGeometry,
    params: &PathLossParams,
) -> Result<f64, PathLossError> {
    match model {
        ModelId::Residential => pl_residential(geom, params),
        ModelId::Enterprise => pl_enterprise(geom, params),
        ModelId::LogDistance => pl_log_distance(geom, params),
        ModelId::WallFactor => pl_wall_factor(geom, params),
        ModelId::Tmb => pl_tmb(geom, params),
        ModelId::ItuR => pl_itu(geom, params),
    }
}

/// Predicted RSSI (dBm) for a transmit power `ptx_dbm`.
pub fn rssi_at(
    model: ModelId,
    geom: &LinkGeometry,
    params: &PathLossParams,
    ptx_dbm: f64,
) -> Result<f64, PathLossError> {
    Ok(LinkBudget::from_path_loss(ptx_dbm, evaluate(model, geom, params)?).rssi_dbm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(d: f64, walls: u32) -> LinkGeometry {
        LinkGeometry::new(d, walls).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn rejects_bad_distances() {
        let p = PathLossParams::default();
        for d in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let g = LinkGeometry {
                distance_m: d,
                walls: 0,
                floors: 0,
                height_m: 0.0,
            };
            for m in ModelId::ALL {
                assert!(matches!(
                    evaluate(m, &g, &p),
                    Err(PathLossError::Distance(_))
                ));
            }
        }
        assert!(LinkGeometry::new(0.0, 0).is_err());
    }

    #[test]
    fn enterprise_reduces_to_intercept_at_reference() {
        let p = PathLossParams {
            fc_ghz: 2.4,
            ..Default::default()
        };
        close(pl_enterprise(&geom(1.0, 0), &p).unwrap(), 40.05, 1e-12);
    }

    #[test]
    fn residential_floor_term_boundaries() {
        assert_eq!(residential_floor_term(0), 0.0);
        close(residential_floor_term(1), 18.3, 1e-12);
        let p = PathLossParams::default();
        let base = pl_residential(&geom(3.0, 0), &p).unwrap();
        let one = pl_residential(&geom(3.0, 0).with_floors(1), &p).unwrap();
        close(one - base, 18.3, 1e-9);
    }

    #[test]
    fn breakpoint_indicator_is_strict() {
        let p = PathLossParams::default();
        let at = pl_residential(&geom(5.0, 0), &p).unwrap();
        close(
            at,
            40.05 + tgax_frequency_term(5.18) + 20.0 * 5f64.log10(),
            1e-12,
        );
    }

    #[test]
    fn log_distance_at_one_meter_is_intercept() {
        let p = PathLossParams::default();
        assert_eq!(pl_log_distance(&geom(1.0, 3), &p).unwrap(), p.l0_db);
    }

    #[test]
    fn wall_factor_without_walls_equals_log_distance() {
        let p = PathLossParams::default();
        for d in [0.5, 1.0, 7.3, 42.0] {
            assert_eq!(
                pl_wall_factor(&geom(d, 0), &p).unwrap(),
                pl_log_distance(&geom(d, 0), &p).unwrap()
            );
        }
    }

    #[test]
    fn tmb_ignores_wall_count() {
        let p = PathLossParams::default();
        assert_eq!(
            pl_tmb(&geom(8.0, 0), &p).unwrap(),
            pl_tmb(&geom(8.0, 5), &p).unwrap()
        );
    }

    #[test]
    fn itu_floor_term_is_additive() {
        let p = PathLossParams {
            lf_itu_db: 6.0,
            ..Default::default()
        };
        let base = pl_itu(&geom(1.0, 0), &PathLossParams::default()).unwrap();
        close(pl_itu(&geom(1.0, 0), &p).unwrap() - base, 6.0, 1e-12);
    }

    #[test]
    fn sub_meter_distances_are_evaluated_as_written() {
        let p = PathLossParams::default();
        let v = pl_log_distance(&geom(0.5, 0), &p).unwrap();
        assert!(v < p.l0_db);
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(m.name().parse::<ModelId>().unwrap(), m);
        }
        assert_eq!("ITU-R".parse::<ModelId>().unwrap(), ModelId::ItuR);
        assert!("okumura".parse::<ModelId>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(PathLossParams::default().validate().is_ok());
        let bad = PathLossParams {
            gamma: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = PathLossParams {
            k_db_per_wall: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = PathLossParams {
            fc_ghz: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn params_get_set_cover_every_key() {
        let mut p = PathLossParams::default();
        for (i, key) in PathLossParams::KEYS.iter().enumerate() {
            assert!(p.set(key, i as f64 + 0.5));
            assert_eq!(p.get(key), Some(i as f64 + 0.5));
        }
        assert!(!p.set("sigma", 5.0));
        assert_eq!(p.get("sigma"), None);
    }

    #[test]
    fn link_budget_from_measurement() {
        let lb = LinkBudget::from_rssi(23.0, -44.74);
        close(lb.pl_db, 67.74, 1e-12);
    }
}
