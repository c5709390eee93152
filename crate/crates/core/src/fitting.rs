//! Fitting the log-distance family to measured path loss.
//!
//! The pipeline runs in three steps:
//!
//! 1. `(L0, γ)` from a robust regression of PL on `10·log10(d)` over the
//!    wall-free locations only.
//! 2. `k` by exhaustive grid search over `[0, 10]` dB in 0.01 dB steps,
//!    minimizing the wall-factor RMSE over every sample.
//! 3. `W̄` as the mean of `W_i / d_i` over the distinct locations.
//!
//! [`fit_full`] composes the steps and scores all six models.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::kv::{KvDocument, KvError};
use crate::pathloss::{evaluate, LinkGeometry, ModelId, PathLossError, PathLossParams};
use crate::regression::{robust_bisquare, RegressionError};

/// Number of points on the wall attenuation grid (0.00 ..= 10.00 dB).
pub const K_GRID_POINTS: usize = 1001;
pub const K_GRID_STEP_DB: f64 = 0.01;

/// Value of the `i`-th grid point, computed without accumulated rounding.
pub fn k_grid_value(i: usize) -> f64 {
    i as f64 / 100.0
}

/// One measured path loss value at a known location.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossSample {
    pub geom: LinkGeometry,
    pub pl_db: f64,
    pub location_id: String,
}

impl PathLossSample {
    pub fn new(location_id: impl Into<String>, geom: LinkGeometry, pl_db: f64) -> Self {
        Self {
            geom,
            pl_db,
            location_id: location_id.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("sample for location {location} traverses {walls} wall(s); log-distance fit needs wall-free samples")]
    WalledSample { location: String, walls: u32 },
    #[error("empty input")]
    Empty,
    #[error(transparent)]
    Model(#[from] PathLossError),
    #[error("non-finite path loss at location {0}")]
    NonFinite(String),
    #[error("{step} step failed: {source}")]
    Step {
        step: FitStep,
        #[source]
        source: Box<FitError>,
    },
}

impl From<RegressionError> for FitError {
    fn from(e: RegressionError) -> Self {
        FitError::InsufficientData(e.to_string())
    }
}

/// Stage of [`fit_full`], used to attribute failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStep {
    LogDistance,
    WallAttenuation,
    WallDensity,
    Scoring,
}

impl fmt::Display for FitStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitStep::LogDistance => "log-distance regression",
            FitStep::WallAttenuation => "wall attenuation search",
            FitStep::WallDensity => "wall density",
            FitStep::Scoring => "rmse scoring",
        })
    }
}

trait StepContext<T> {
    fn step(self, step: FitStep) -> Result<T, FitError>;
}

impl<T> StepContext<T> for Result<T, FitError> {
    fn step(self, step: FitStep) -> Result<T, FitError> {
        self.map_err(|e| FitError::Step {
            step,
            source: Box::new(e),
        })
    }
}

fn check_finite(samples: &[PathLossSample]) -> Result<(), FitError> {
    for s in samples {
        if !s.pl_db.is_finite() {
            return Err(FitError::NonFinite(s.location_id.clone()));
        }
        s.geom.validate()?;
    }
    Ok(())
}

/// Robust fit of `(L0, γ)` over wall-free samples.
pub fn fit_log_distance(samples: &[PathLossSample]) -> Result<(f64, f64), FitError> {
    if let Some(s) = samples.iter().find(|s| s.geom.walls > 0) {
        return Err(FitError::WalledSample {
            location: s.location_id.clone(),
            walls: s.geom.walls,
        });
    }
    if samples.len() < 2 {
        return Err(FitError::InsufficientData(format!(
            "log-distance fit needs at least 2 wall-free samples, got {}",
            samples.len()
        )));
    }
    check_finite(samples)?;
    let x: Vec<f64> = samples
        .iter()
        .map(|s| 10.0 * s.geom.distance_m.log10())
        .collect();
    let y: Vec<f64> = samples.iter().map(|s| s.pl_db).collect();
    let fit = robust_bisquare(&x, &y).map_err(|e| match e {
        RegressionError::DegenerateX => FitError::InsufficientData(
            "all wall-free samples share one distance; slope is unidentifiable".into(),
        ),
        other => other.into(),
    })?;
    Ok((fit.intercept, fit.slope))
}

/// Outcome of the wall attenuation grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct WallSearch {
    pub k_db_per_wall: f64,
    pub rmse_db: f64,
    /// `(k, rmse)` at every grid point, ascending in `k`.
    pub trace: Vec<(f64, f64)>,
}

/// Grid search for the per-wall attenuation minimizing the wall-factor RMSE
/// over all samples. Ties resolve to the smaller `k`.
pub fn fit_wall_k(
    samples: &[PathLossSample],
    l0_db: f64,
    gamma: f64,
) -> Result<WallSearch, FitError> {
    if !samples.iter().any(|s| s.geom.walls > 0) {
        return Err(FitError::InsufficientData(
            "no sample traverses a wall; k is unidentifiable".into(),
        ));
    }
    check_finite(samples)?;
    // Residual of the log-distance part; the wall term is linear in k.
    let parts: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| {
            let base = l0_db + 10.0 * gamma * s.geom.distance_m.log10();
            (base - s.pl_db, f64::from(s.geom.walls))
        })
        .collect();
    let n = parts.len() as f64;

    let mut trace = Vec::with_capacity(K_GRID_POINTS);
    let mut best = (f64::NAN, f64::INFINITY);
    for i in 0..K_GRID_POINTS {
        let k = k_grid_value(i);
        let sse: f64 = parts
            .iter()
            .map(|(r, w)| {
                let e = r + k * w;
                e * e
            })
            .sum();
        let rmse = (sse / n).sqrt();
        trace.push((k, rmse));
        if rmse < best.1 {
            best = (k, rmse);
        }
    }
    Ok(WallSearch {
        k_db_per_wall: best.0,
        rmse_db: best.1,
        trace,
    })
}

/// Mean traversed walls per metre, `(1/N) Σ W_i / d_i`.
pub fn compute_wbar(geoms: &[LinkGeometry]) -> Result<f64, FitError> {
    if geoms.is_empty() {
        return Err(FitError::Empty);
    }
    let mut total = 0.0;
    for g in geoms {
        g.validate()?;
        total += f64::from(g.walls) / g.distance_m;
    }
    Ok(total / geoms.len() as f64)
}

pub fn rmse(
    model: ModelId,
    samples: &[PathLossSample],
    params: &PathLossParams,
) -> Result<f64, FitError> {
    if samples.is_empty() {
        return Err(FitError::Empty);
    }
    let mut sse = 0.0;
    for s in samples {
        let e = evaluate(model, &s.geom, params)? - s.pl_db;
        sse += e * e;
    }
    Ok((sse / samples.len() as f64).sqrt())
}

/// Fitted parameters and their scores.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub params: PathLossParams,
    pub rmse_by_model: BTreeMap<ModelId, f64>,
    pub sample_count: usize,
    pub location_count: usize,
    pub k_search_trace: Vec<(f64, f64)>,
}

/// [`fit_full_with`] using the default carrier frequency and ITU constants.
pub fn fit_full(samples: &[PathLossSample]) -> Result<FitReport, FitError> {
    fit_full_with(samples, &PathLossParams::default())
}

/// Runs the three fitting steps. `fc_ghz`, `n_itu` and `lf_itu_db` are taken
/// from `base`; the four fitted coefficients replace the rest.
pub fn fit_full_with(
    samples: &[PathLossSample],
    base: &PathLossParams,
) -> Result<FitReport, FitError> {
    let wall_free: Vec<PathLossSample> = samples
        .iter()
        .filter(|s| s.geom.walls == 0)
        .cloned()
        .collect();
    let (l0_db, gamma) = fit_log_distance(&wall_free).step(FitStep::LogDistance)?;
    let search = fit_wall_k(samples, l0_db, gamma).step(FitStep::WallAttenuation)?;

    let mut seen = BTreeSet::new();
    let locations: Vec<LinkGeometry> = samples
        .iter()
        .filter(|s| seen.insert(s.location_id.as_str()))
        .map(|s| s.geom)
        .collect();
    let wbar = compute_wbar(&locations).step(FitStep::WallDensity)?;

    let params = PathLossParams {
        l0_db,
        gamma,
        k_db_per_wall: search.k_db_per_wall,
        wbar_walls_per_m: wbar,
        ..*base
    };
    let mut rmse_by_model = BTreeMap::new();
    for model in ModelId::ALL {
        rmse_by_model.insert(model, rmse(model, samples, &params).step(FitStep::Scoring)?);
    }
    Ok(FitReport {
        params,
        rmse_by_model,
        sample_count: samples.len(),
        location_count: locations.len(),
        k_search_trace: search.trace,
    })
}

impl FitReport {
    pub fn to_kv(&self) -> KvDocument {
        let mut doc = self.params.to_kv();
        for (model, value) in &self.rmse_by_model {
            doc.push_f64(format!("rmse.{model}"), *value);
        }
        doc.push("sample_count", self.sample_count.to_string());
        doc.push("location_count", self.location_count.to_string());
        doc
    }

    pub fn to_text(&self) -> String {
        self.to_kv().render()
    }

    /// Reloads a rendered report. The k-search trace is not part of the
    /// document and comes back empty.
    pub fn from_text(text: &str) -> Result<Self, KvError> {
        let doc = KvDocument::parse(text)?;
        let params = PathLossParams::from_kv(&doc)?;
        let mut rmse_by_model = BTreeMap::new();
        for model in ModelId::ALL {
            if let Some(v) = doc.get_f64(&format!("rmse.{model}"))? {
                rmse_by_model.insert(model, v);
            }
        }
        let count = |key: &str| -> Result<usize, KvError> {
            let raw = doc.get(key).ok_or_else(|| KvError::Missing(key.into()))?;
            raw.parse().map_err(|_| KvError::Number {
                key: key.into(),
                value: raw.into(),
            })
        };
        Ok(Self {
            params,
            rmse_by_model,
            sample_count: count("sample_count")?,
            location_count: count("location_count")?,
            k_search_trace: Vec::new(),
        })
    }

    /// `k_db_per_wall,rmse_db` CSV of the grid search.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("k_db_per_wall,rmse_db\n");
        for (k, r) in &self.k_search_trace {
            out.push_str(&format!("{k:.2},{r:?}\n"));
        }
        out
    }

    /// Human-readable table of parameters and RMSE per model.
    pub fn summary(&self) -> String {
        let p = &self.params;
        let mut out = format!(
            "{:<14} {:>10} {:>10} {:>8} {:>8} {:>10}\n",
            "model", "L0", "gamma", "k", "Wbar", "RMSE(dB)"
        );
        for model in ModelId::ALL {
            let cols = match model {
                ModelId::LogDistance => {
                    format!("{:>10.4} {:>10.5} {:>8} {:>8}", p.l0_db, p.gamma, "-", "-")
                }
                ModelId::WallFactor => {
                    format!(
                        "{:>10.4} {:>10.5} {:>8.2} {:>8}",
                        p.l0_db, p.gamma, p.k_db_per_wall, "-"
                    )
                }
                ModelId::Tmb => format!(
                    "{:>10.4} {:>10.5} {:>8.2} {:>8.4}",
                    p.l0_db, p.gamma, p.k_db_per_wall, p.wbar_walls_per_m
                ),
                _ => format!("{:>10} {:>10} {:>8} {:>8}", "-", "-", "-", "-"),
            };
            let r = self
                .rmse_by_model
                .get(&model)
                .map(|v| format!("{v:.4}"))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!("{:<14} {} {:>10}\n", model.name(), cols, r));
        }
        out.push_str(&format!(
            "samples: {}  locations: {}\n",
            self.sample_count, self.location_count
        ));
        out
    }
}
