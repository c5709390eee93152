//! Packet capture ingestion, the location registry, and per-location
//! aggregates.
//!
//! Captures use a fixed CSV schema:
//!
//! ```text
//! timestamp_s,location_id,rssi_dbm,mcs,nss,bw_mhz,ptx_dbm,channel
//! ```
//!
//! Rows that fail validation are collected with their line numbers instead of
//! being dropped.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;

use thiserror::Error;

use crate::fitting::PathLossSample;
use crate::pathloss::LinkGeometry;

pub const CAPTURE_HEADER: [&str; 8] = [
    "timestamp_s",
    "location_id",
    "rssi_dbm",
    "mcs",
    "nss",
    "bw_mhz",
    "ptx_dbm",
    "channel",
];

pub const REGISTRY_HEADER: [&str; 5] = ["location_id", "distance_m", "walls", "floors", "height_m"];

/// Shadowing level used as the acceptance bound for every variance statistic.
pub const SHADOWING_SIGMA_DB: f64 = 5.0;

pub const BANDWIDTHS_MHZ: [u16; 3] = [20, 40, 80];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing or malformed header; expected `{}`", .0.join(","))]
    Header(Vec<&'static str>),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{} invalid row(s); first: {}", .0.len(), .0[0])]
    Rows(Vec<RowError>),
    #[error("unknown location id(s): {}", .0.join(", "))]
    UnknownLocations(Vec<String>),
    #[error("duplicate location id `{0}`")]
    DuplicateLocation(String),
    #[error("no records for center location `{0}`")]
    MissingCenter(String),
    #[error("no records for grid point `{0}`")]
    MissingGridPoint(String),
    #[error("location `{location}` has no records on reference channel {channel}")]
    MissingReference { location: String, channel: u16 },
}

/// One rejected input row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub line: u64,
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}: field `{}`: {}",
            self.line, self.field, self.message
        )
    }
}

/// Location identifier with natural ordering: numeric ids sort by value and
/// before any non-numeric id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocationId(pub String);

impl LocationId {
    fn numeric(&self) -> Option<u64> {
        self.0.parse().ok()
    }
}

impl Ord for LocationId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for LocationId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for LocationId {
    fn from(s: &str) -> Self {
        LocationId(s.to_string())
    }
}

/// One captured packet.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    pub timestamp_s: f64,
    pub location_id: String,
    pub rssi_dbm: f64,
    pub mcs: u8,
    pub nss: u8,
    pub bw_mhz: u16,
    pub ptx_dbm: f64,
    pub channel: u16,
}

impl PacketRecord {
    /// Checks the record invariants, naming the first offending field.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if !self.timestamp_s.is_finite() {
            return Err(("timestamp_s", "must be finite".into()));
        }
        if self.location_id.is_empty() {
            return Err(("location_id", "must not be empty".into()));
        }
        if !self.rssi_dbm.is_finite() {
            return Err(("rssi_dbm", "must be finite".into()));
        }
        if self.mcs > 9 {
            return Err(("mcs", format!("{} outside 0..=9", self.mcs)));
        }
        if self.nss == 0 {
            return Err(("nss", "must be at least 1".into()));
        }
        if !BANDWIDTHS_MHZ.contains(&self.bw_mhz) {
            return Err(("bw_mhz", format!("{} not one of 20, 40, 80", self.bw_mhz)));
        }
        if !self.ptx_dbm.is_finite() {
            return Err(("ptx_dbm", "must be finite".into()));
        }
        if self.rssi_dbm >= self.ptx_dbm {
            return Err((
                "rssi_dbm",
                format!(
                    "{} dBm not below transmit power {} dBm",
                    self.rssi_dbm, self.ptx_dbm
                ),
            ));
        }
        Ok(())
    }

    pub fn path_loss_db(&self) -> f64 {
        self.ptx_dbm - self.rssi_dbm
    }
}

/// Result of parsing a capture file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Capture {
    pub records: Vec<PacketRecord>,
    pub rejected: Vec<RowError>,
}

impl Capture {
    /// Fails if any row was rejected.
    pub fn into_strict(self) -> Result<Vec<PacketRecord>, IngestError> {
        if self.rejected.is_empty() {
            Ok(self.records)
        } else {
            Err(IngestError::Rows(self.rejected))
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "{} record(s) accepted, {} rejected",
            self.records.len(),
            self.rejected.len()
        )
    }
}

fn header_index<R: Read>(
    reader: &mut csv::Reader<R>,
    expected: &[&'static str],
) -> Result<Vec<usize>, IngestError> {
    let headers = reader.headers()?.clone();
    expected
        .iter()
        .map(|name| headers.iter().position(|h| h.trim() == *name))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| IngestError::Header(expected.to_vec()))
}

fn field<T: std::str::FromStr>(
    row: &csv::StringRecord,
    idx: usize,
    name: &'static str,
    line: u64,
) -> Result<T, RowError> {
    let raw = row.get(idx).unwrap_or("").trim();
    raw.parse().map_err(|_| RowError {
        line,
        field: name,
        message: format!("cannot parse `{raw}`"),
    })
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn parse_packet(
    row: &csv::StringRecord,
    idx: &[usize],
    line: u64,
) -> Result<PacketRecord, RowError> {
    let record = PacketRecord {
        timestamp_s: field(row, idx[0], "timestamp_s", line)?,
        location_id: field(row, idx[1], "location_id", line)?,
        rssi_dbm: field(row, idx[2], "rssi_dbm", line)?,
        mcs: field(row, idx[3], "mcs", line)?,
        nss: field(row, idx[4], "nss", line)?,
        bw_mhz: field(row, idx[5], "bw_mhz", line)?,
        ptx_dbm: field(row, idx[6], "ptx_dbm", line)?,
        channel: field(row, idx[7], "channel", line)?,
    };
    record.validate().map_err(|(field, message)| RowError {
        line,
        field,
        message,
    })?;
    Ok(record)
}

/// Parses a capture CSV. Columns are located by header name.
pub fn parse_capture<R: Read>(input: R) -> Result<Capture, IngestError> {
    let mut reader = csv_reader(input);
    let idx = header_index(&mut reader, &CAPTURE_HEADER)?;
    let mut capture = Capture::default();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        match parse_packet(&row, &idx, line) {
            Ok(r) => capture.records.push(r),
            Err(e) => capture.rejected.push(e),
        }
    }
    Ok(capture)
}

/// Renders records in the canonical capture schema.
pub fn write_capture(records: &[PacketRecord]) -> String {
    let mut out = CAPTURE_HEADER.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.timestamp_s, r.location_id, r.rssi_dbm, r.mcs, r.nss, r.bw_mhz, r.ptx_dbm, r.channel
        ));
    }
    out
}

/// Receiver locations keyed by identifier, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocationRegistry {
    entries: Vec<(String, LinkGeometry)>,
    index: HashMap<String, usize>,
}

/// `(id, height_m, distance_m, walls)` for the 21 office receiver locations.
const OFFICE_TESTBED: [(&str, f64, f64, u32); 21] = [
    ("0", 0.740, 1.000, 0),
    ("1", 0.505, 0.934, 0),
    ("2", 0.740, 3.084, 0),
    ("3", 0.740, 4.266, 0),
    ("4", 1.680, 2.717, 0),
    ("5", 1.970, 2.879, 0),
    ("6", 1.680, 3.995, 0),
    ("7", 0.740, 2.945, 0),
    ("8", 0.505, 5.778, 2),
    ("9", 1.800, 9.286, 1),
    ("10", 0.740, 11.141, 4),
    ("11", 1.970, 10.669, 3),
    ("12", 1.970, 13.884, 4),
    ("13", 0.740, 15.801, 4),
    ("14", 1.970, 17.579, 5),
    ("15", 1.800, 18.508, 3),
    ("16", 0.0, 22.020, 2),
    ("17", 0.505, 24.304, 2),
    ("18", 0.740, 8.975, 3),
    ("19", 1.970, 7.267, 2),
    ("20", 0.740, 4.623, 1),
];

impl LocationRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The 21-location single-floor office testbed.
    pub fn reference() -> Self {
        let mut reg = Self::new();
        for (id, height, d, walls) in OFFICE_TESTBED {
            let geom = LinkGeometry::new(d, walls)
                .expect("embedded geometry")
                .with_height(height);
            reg.insert(id, geom).expect("unique embedded ids");
        }
        reg
    }

    pub fn insert(&mut self, id: impl Into<String>, geom: LinkGeometry) -> Result<(), IngestError> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(IngestError::DuplicateLocation(id));
        }
        self.index.insert(id.clone(), self.entries.len());
        self.entries.push((id, geom));
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&LinkGeometry> {
        self.index.get(id).map(|&i| &self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LinkGeometry)> {
        self.entries.iter().map(|(id, g)| (id.as_str(), g))
    }

    pub fn geometries(&self) -> Vec<LinkGeometry> {
        self.entries.iter().map(|(_, g)| *g).collect()
    }

    fn position(&self, id: &str) -> usize {
        self.index.get(id).copied().unwrap_or(usize::MAX)
    }

    pub fn parse_csv<R: Read>(input: R) -> Result<Self, IngestError> {
        let mut reader = csv_reader(input);
        let idx = header_index(&mut reader, &REGISTRY_HEADER)?;
        let mut reg = Self::new();
        let mut errors = Vec::new();
        for row in reader.records() {
            let row = row?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let parsed = (|| -> Result<(String, LinkGeometry), RowError> {
                let id: String = field(&row, idx[0], "location_id", line)?;
                let d: f64 = field(&row, idx[1], "distance_m", line)?;
                let walls: u32 = field(&row, idx[2], "walls", line)?;
                let floors: u32 = field(&row, idx[3], "floors", line)?;
                let height: f64 = field(&row, idx[4], "height_m", line)?;
                let geom = LinkGeometry::new(d, walls)
                    .map_err(|e| RowError {
                        line,
                        field: "distance_m",
                        message: e.to_string(),
                    })?
                    .with_floors(floors)
                    .with_height(height);
                Ok((id, geom))
            })();
            match parsed {
                Ok((id, geom)) => reg.insert(id, geom)?,
                Err(e) => errors.push(e),
            }
        }
        if errors.is_empty() {
            Ok(reg)
        } else {
            Err(IngestError::Rows(errors))
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = REGISTRY_HEADER.join(",");
        out.push('\n');
        for (id, g) in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                id,
                fixed3(g.distance_m),
                g.walls,
                g.floors,
                fixed3(g.height_m)
            ));
        }
        out
    }
}

/// Three decimals when that is lossless, otherwise the shortest exact form.
fn fixed3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s.parse::<f64>().ok() == Some(v) {
        s
    } else {
        format!("{v}")
    }
}

/// Mean after sorting, so the result does not depend on input order.
pub(crate) fn stable_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_std(values: &mut [f64]) -> f64 {
    let m = stable_mean(values);
    let mut sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    stable_mean(&mut sq).sqrt()
}

fn check_known(records: &[PacketRecord], registry: &LocationRegistry) -> Result<(), IngestError> {
    let mut unknown: Vec<LocationId> = records
        .iter()
        .filter(|r| registry.get(&r.location_id).is_none())
        .map(|r| LocationId(r.location_id.clone()))
        .collect();
    if unknown.is_empty() {
        return Ok(());
    }
    unknown.sort();
    unknown.dedup();
    Err(IngestError::UnknownLocations(
        unknown.into_iter().map(|l| l.0).collect(),
    ))
}

/// One path loss sample per location: the mean of per-record `PTX − RSSI`,
/// pooling every bandwidth and power level. Ordered as in the registry.
pub fn aggregate_path_loss(
    records: &[PacketRecord],
    registry: &LocationRegistry,
) -> Result<Vec<PathLossSample>, IngestError> {
    check_known(records, registry)?;
    let mut groups: HashMap<&str, Vec<f64>> = HashMap::new();
    for r in records {
        groups
            .entry(r.location_id.as_str())
            .or_default()
            .push(r.path_loss_db());
    }
    let mut out: Vec<(usize, PathLossSample)> = groups
        .into_iter()
        .map(|(id, mut pls)| {
            let geom = *registry.get(id).expect("checked");
            (
                registry.position(id),
                PathLossSample::new(id, geom, stable_mean(&mut pls)),
            )
        })
        .collect();
    out.sort_by_key(|(pos, _)| *pos);
    Ok(out.into_iter().map(|(_, s)| s).collect())
}

/// One sample per (location, bandwidth, transmit power) configuration. The
/// sample keeps the plain location id so per-location statistics still see
/// each location once.
pub fn aggregate_path_loss_by_config(
    records: &[PacketRecord],
    registry: &LocationRegistry,
) -> Result<Vec<PathLossSample>, IngestError> {
    check_known(records, registry)?;
    let mut groups: HashMap<(&str, u16, u64), Vec<f64>> = HashMap::new();
    for r in records {
        groups
            .entry((r.location_id.as_str(), r.bw_mhz, r.ptx_dbm.to_bits()))
            .or_default()
            .push(r.path_loss_db());
    }
    let mut out: Vec<((usize, u16, f64), PathLossSample)> = groups
        .into_iter()
        .map(|((id, bw, ptx), mut pls)| {
            let geom = *registry.get(id).expect("checked");
            (
                (registry.position(id), bw, f64::from_bits(ptx)),
                PathLossSample::new(id, geom, stable_mean(&mut pls)),
            )
        })
        .collect();
    out.sort_by(|(a, _), (b, _)| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    Ok(out.into_iter().map(|(_, s)| s).collect())
}

fn rssi_by_location(records: &[PacketRecord]) -> BTreeMap<LocationId, Vec<f64>> {
    let mut groups: BTreeMap<LocationId, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry(LocationId(r.location_id.clone()))
            .or_default()
            .push(r.rssi_dbm);
    }
    groups
}

/// Per-location RSSI standard deviation over time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeVariance {
    pub std_db: BTreeMap<LocationId, f64>,
    /// Locations skipped for having fewer than two records.
    pub skipped: Vec<LocationId>,
}

/// Population standard deviation of RSSI per location.
pub fn time_variance(records: &[PacketRecord]) -> TimeVariance {
    let mut out = TimeVariance::default();
    for (id, mut values) in rssi_by_location(records) {
        if values.len() < 2 {
            out.skipped.push(id);
        } else {
            out.std_db.insert(id, population_std(&mut values));
        }
    }
    out
}

/// For each grid centre, the largest `|mean RSSI(point) − mean RSSI(centre)|`
/// over the grid points assigned to it. `grid_map` maps point id to centre id.
pub fn grid_variance(
    records: &[PacketRecord],
    grid_map: &BTreeMap<String, String>,
) -> Result<BTreeMap<LocationId, f64>, IngestError> {
    let means: HashMap<LocationId, f64> = rssi_by_location(records)
        .into_iter()
        .map(|(id, mut v)| (id, stable_mean(&mut v)))
        .collect();
    let mut out = BTreeMap::new();
    for center in grid_map.values() {
        let key = LocationId(center.clone());
        if !means.contains_key(&key) {
            return Err(IngestError::MissingCenter(center.clone()));
        }
        out.insert(key, 0.0_f64);
    }
    for (point, center) in grid_map {
        let center_mean = means[&LocationId(center.clone())];
        let point_mean = *means
            .get(&LocationId(point.clone()))
            .ok_or_else(|| IngestError::MissingGridPoint(point.clone()))?;
        let slot = out.get_mut(&LocationId(center.clone())).expect("inserted");
        *slot = slot.max((point_mean - center_mean).abs());
    }
    Ok(out)
}

/// Mean RSSI per (location, channel) minus the mean on `reference_channel` at
/// the same location.
pub fn channel_variance(
    records: &[PacketRecord],
    reference_channel: u16,
) -> Result<BTreeMap<(LocationId, u16), f64>, IngestError> {
    let mut groups: BTreeMap<(LocationId, u16), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((LocationId(r.location_id.clone()), r.channel))
            .or_default()
            .push(r.rssi_dbm);
    }
    let means: BTreeMap<(LocationId, u16), f64> = groups
        .into_iter()
        .map(|(k, mut v)| (k, stable_mean(&mut v)))
        .collect();
    let mut out = BTreeMap::new();
    for ((loc, ch), mean) in &means {
        let reference = means
            .get(&(loc.clone(), reference_channel))
            .ok_or_else(|| IngestError::MissingReference {
                location: loc.0.clone(),
                channel: reference_channel,
            })?;
        out.insert((loc.clone(), *ch), mean - reference);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarianceKind {
    TimeStd,
    GridMaxAbsDiff,
    ChannelDelta,
}

impl VarianceKind {
    pub fn name(self) -> &'static str {
        match self {
            VarianceKind::TimeStd => "time_std",
            VarianceKind::GridMaxAbsDiff => "grid_max_abs_diff",
            VarianceKind::ChannelDelta => "channel_delta",
        }
    }
}

/// One statistic in a [`VarianceReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceEntry {
    pub kind: VarianceKind,
    pub location: LocationId,
    pub channel: Option<u16>,
    pub value_db: f64,
}

/// Signal stability statistics gathered over one or more experiments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarianceReport {
    pub per_location_std_db: BTreeMap<LocationId, f64>,
    pub grid_max_abs_diff_db: BTreeMap<LocationId, f64>,
    pub per_channel_delta_db: BTreeMap<(LocationId, u16), f64>,
}

impl VarianceReport {
    pub fn entries(&self) -> Vec<VarianceEntry> {
        let mut out = Vec::new();
        for (loc, v) in &self.per_location_std_db {
            out.push(VarianceEntry {
                kind: VarianceKind::TimeStd,
                location: loc.clone(),
                channel: None,
                value_db: *v,
            });
        }
        for (loc, v) in &self.grid_max_abs_diff_db {
            out.push(VarianceEntry {
                kind: VarianceKind::GridMaxAbsDiff,
                location: loc.clone(),
                channel: None,
                value_db: *v,
            });
        }
        for ((loc, ch), v) in &self.per_channel_delta_db {
            out.push(VarianceEntry {
                kind: VarianceKind::ChannelDelta,
                location: loc.clone(),
                channel: Some(*ch),
                value_db: *v,
            });
        }
        out
    }

    /// Statistics whose magnitude exceeds `threshold_db`.
    pub fn exceeding(&self, threshold_db: f64) -> Vec<VarianceEntry> {
        self.entries()
            .into_iter()
            .filter(|e| e.value_db.abs() > threshold_db)
            .collect()
    }

    /// `kind,location_id,channel,value_db` with 3-decimal values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,location_id,channel,value_db\n");
        for e in self.entries() {
            let ch = e.channel.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{:.3}\n",
                e.kind.name(),
                e.location,
                ch,
                e.value_db
            ));
        }
        out
    }
}
