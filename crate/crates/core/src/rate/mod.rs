//! Empirical MCS / spatial-stream distributions keyed by RSSI.
//!
//! Records are binned into 5 dB half-open RSSI tiles `[l, l + 5)` with
//! `l = −97 + 5n` (n = 0..=14), and grouped per AP configuration
//! (bandwidth, transmit power). Each non-empty cell holds the relative
//! frequency of every observed `(mcs, nss)` pair. Queries return that
//! distribution, its mode, and the expected PHY rate.

mod phy;
pub mod reference;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use thiserror::Error;

use crate::measurements::PacketRecord;
use crate::pathloss::{rssi_at, LinkGeometry, ModelId, PathLossError, PathLossParams};

pub use phy::{data_subcarriers, is_valid_combination, phy_rate, GuardInterval};

pub const TABLE_HEADER: &str = "rssi_bin_low,bw_mhz,ptx_dbm,mcs,nss,probability,samples";

const BIN_WIDTH_DB: i32 = 5;
const LOWEST_BIN_DBM: i32 = -97;
const BIN_COUNT: i32 = 15;
const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("invalid VHT combination: MCS {mcs}, {nss} SS, {bw_mhz} MHz")]
    InvalidCombination { mcs: u8, nss: u8, bw_mhz: u16 },
    #[error("RSSI {0} dBm outside the table range [-97, -22)")]
    OutOfRange(f64),
    #[error("no data for {bw_mhz} MHz / {ptx_dbm} dBm in bin {bin} or its neighbours")]
    NoData {
        bin: RssiBin,
        bw_mhz: u16,
        ptx_dbm: f64,
    },
    #[error("no records to build a table from")]
    Empty,
    #[error(transparent)]
    Model(#[from] PathLossError),
    #[error("table parse: {0}")]
    Parse(String),
}

/// A 5 dB RSSI tile `[lower, lower + 5)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RssiBin(i32);

impl RssiBin {
    /// Tile containing `rssi_dbm`, if inside `[−97, −22)`.
    pub fn containing(rssi_dbm: f64) -> Option<Self> {
        if !rssi_dbm.is_finite() {
            return None;
        }
        let idx = ((rssi_dbm - f64::from(LOWEST_BIN_DBM)) / f64::from(BIN_WIDTH_DB)).floor();
        if (0.0..f64::from(BIN_COUNT)).contains(&idx) {
            Some(RssiBin(LOWEST_BIN_DBM + BIN_WIDTH_DB * idx as i32))
        } else {
            None
        }
    }

    /// Tile with the given lower edge; must lie on the −97 + 5n grid.
    pub fn from_lower(lower_dbm: i32) -> Option<Self> {
        let off = lower_dbm - LOWEST_BIN_DBM;
        (off >= 0 && off % BIN_WIDTH_DB == 0 && off / BIN_WIDTH_DB < BIN_COUNT)
            .then_some(RssiBin(lower_dbm))
    }

    pub fn all() -> impl Iterator<Item = RssiBin> {
        (0..BIN_COUNT).map(|n| RssiBin(LOWEST_BIN_DBM + BIN_WIDTH_DB * n))
    }

    pub fn lower_dbm(self) -> i32 {
        self.0
    }

    pub fn upper_dbm(self) -> i32 {
        self.0 + BIN_WIDTH_DB
    }

    pub fn below(self) -> Option<Self> {
        Self::from_lower(self.0 - BIN_WIDTH_DB)
    }

    pub fn above(self) -> Option<Self> {
        Self::from_lower(self.0 + BIN_WIDTH_DB)
    }
}

impl fmt::Display for RssiBin {
    /// Integer-inclusive label, e.g. `[-62, -58]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.0, self.0 + BIN_WIDTH_DB - 1)
    }
}

/// Transmit power as a totally ordered map key.
#[derive(Debug, Clone, Copy)]
struct Dbm(f64);

impl PartialEq for Dbm {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Dbm {}
impl PartialOrd for Dbm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Dbm {
    fn cmp(&self, other: &Self) -> Ordering {
        // +0.0 folds -0.0 so both spellings share a cell.
        (self.0 + 0.0).total_cmp(&(other.0 + 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct CellKey {
    bin: RssiBin,
    bw_mhz: u16,
    ptx: Dbm,
}

/// Probability of one `(mcs, nss)` pair within a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsShare {
    pub mcs: u8,
    pub nss: u8,
    pub probability: f64,
}

/// One (bin, bandwidth, power) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Sorted by `(mcs, nss)`.
    pub distribution: Vec<McsShare>,
    pub samples: u64,
}

impl Cell {
    /// Highest-probability entry; ties go to the lower MCS, then lower NSS.
    pub fn mode(&self) -> McsShare {
        let mut best = self.distribution[0];
        for share in &self.distribution[1..] {
            if share.probability > best.probability {
                best = *share;
            }
        }
        best
    }
}

/// The (RSSI bin × bandwidth × transmit power) → (MCS, NSS) probability
/// table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct McsDistributionTable {
    cells: BTreeMap<CellKey, Cell>,
    /// Records whose RSSI fell outside the binned range while building.
    pub out_of_range: usize,
    /// Records with an MCS/NSS/width combination the standard excludes.
    pub excluded: usize,
}

/// Counts records per cell and converts to relative frequencies.
pub fn build_table(records: &[PacketRecord]) -> Result<McsDistributionTable, RateError> {
    if records.is_empty() {
        return Err(RateError::Empty);
    }
    let mut counts: BTreeMap<CellKey, BTreeMap<(u8, u8), u64>> = BTreeMap::new();
    let mut table = McsDistributionTable::default();
    for r in records {
        let Some(bin) = RssiBin::containing(r.rssi_dbm) else {
            table.out_of_range += 1;
            continue;
        };
        if !is_valid_combination(r.mcs, r.nss, r.bw_mhz) {
            table.excluded += 1;
            continue;
        }
        let key = CellKey {
            bin,
            bw_mhz: r.bw_mhz,
            ptx: Dbm(r.ptx_dbm),
        };
        *counts
            .entry(key)
            .or_default()
            .entry((r.mcs, r.nss))
            .or_default() += 1;
    }
    for (key, pairs) in counts {
        let total: u64 = pairs.values().sum();
        let distribution = pairs
            .into_iter()
            .map(|((mcs, nss), n)| McsShare {
                mcs,
                nss,
                probability: n as f64 / total as f64,
            })
            .collect();
        table.cells.insert(
            key,
            Cell {
                distribution,
                samples: total,
            },
        );
    }
    Ok(table)
}

/// Answer to a rate query.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePrediction {
    pub rssi_dbm: f64,
    pub bin: RssiBin,
    pub bw_mhz: u16,
    pub ptx_dbm: f64,
    pub distribution: Vec<McsShare>,
    pub mode: McsShare,
    pub expected_phy_rate_mbps: f64,
    pub guard: GuardInterval,
    /// Set when `bin` was empty and a neighbouring bin's data was used.
    pub borrowed_from: Option<RssiBin>,
    pub samples: u64,
}

impl RatePrediction {
    pub fn is_borrowed(&self) -> bool {
        self.borrowed_from.is_some()
    }

    pub const CSV_HEADER: &'static str =
        "rssi_dbm,rssi_bin_low,bw_mhz,ptx_dbm,mode_mcs,mode_nss,mode_pct,expected_rate_mbps,borrowed_bin_low";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.3},{},{},{},{},{},{:.2},{:.3},{}",
            self.rssi_dbm,
            self.bin.lower_dbm(),
            self.bw_mhz,
            self.ptx_dbm,
            self.mode.mcs,
            self.mode.nss,
            100.0 * self.mode.probability,
            self.expected_phy_rate_mbps,
            self.borrowed_from
                .map(|b| b.lower_dbm().to_string())
                .unwrap_or_default()
        )
    }

    /// `MCS 7 / 2SS (71.37%)`.
    pub fn mode_label(&self) -> String {
        format!(
            "MCS {} / {}SS ({:.2}%)",
            self.mode.mcs,
            self.mode.nss,
            100.0 * self.mode.probability
        )
    }
}

impl McsDistributionTable {
    pub fn cell(&self, bin: RssiBin, bw_mhz: u16, ptx_dbm: f64) -> Option<&Cell> {
        self.cells.get(&CellKey {
            bin,
            bw_mhz,
            ptx: Dbm(ptx_dbm),
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `(bin, bw, ptx, cell)` in key order.
    pub fn cells(&self) -> impl Iterator<Item = (RssiBin, u16, f64, &Cell)> {
        self.cells
            .iter()
            .map(|(k, c)| (k.bin, k.bw_mhz, k.ptx.0, c))
    }

    /// Distribution for an RSSI value. An empty cell borrows the nearest
    /// adjacent bin of the same configuration, the lower one first.
    pub fn query_by_rssi(
        &self,
        rssi_dbm: f64,
        bw_mhz: u16,
        ptx_dbm: f64,
        guard: GuardInterval,
    ) -> Result<RatePrediction, RateError> {
        let bin = RssiBin::containing(rssi_dbm).ok_or(RateError::OutOfRange(rssi_dbm))?;
        let (cell, borrowed_from) = match self.cell(bin, bw_mhz, ptx_dbm) {
            Some(c) => (c, None),
            None => [bin.below(), bin.above()]
                .into_iter()
                .flatten()
                .find_map(|b| self.cell(b, bw_mhz, ptx_dbm).map(|c| (c, Some(b))))
                .ok_or(RateError::NoData {
                    bin,
                    bw_mhz,
                    ptx_dbm,
                })?,
        };
        let mut expected = 0.0;
        for s in &cell.distribution {
            expected += s.probability * phy_rate(s.mcs, s.nss, bw_mhz, guard)?;
        }
        Ok(RatePrediction {
            rssi_dbm,
            bin,
            bw_mhz,
            ptx_dbm,
            distribution: cell.distribution.clone(),
            mode: cell.mode(),
            expected_phy_rate_mbps: expected,
            guard,
            borrowed_from,
            samples: cell.samples,
        })
    }

    /// Predicts RSSI with a path loss model, then looks up the distribution.
    #[allow(clippy::too_many_arguments)]
    pub fn query_by_distance(
        &self,
        model: ModelId,
        params: &PathLossParams,
        geom: &LinkGeometry,
        bw_mhz: u16,
        ptx_dbm: f64,
        guard: GuardInterval,
    ) -> Result<RatePrediction, RateError> {
        let rssi = rssi_at(model, geom, params, ptx_dbm)?;
        self.query_by_rssi(rssi, bw_mhz, ptx_dbm, guard)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TABLE_HEADER);
        out.push('\n');
        for (bin, bw, ptx, cell) in self.cells() {
            for s in &cell.distribution {
                out.push_str(&format!(
                    "{},{},{},{},{},{:?},{}\n",
                    bin.lower_dbm(),
                    bw,
                    ptx,
                    s.mcs,
                    s.nss,
                    s.probability,
                    cell.samples
                ));
            }
        }
        out
    }

    /// Loads a table written by [`to_csv`](Self::to_csv), checking every
    /// cell's probabilities sum to one.
    pub fn from_csv<R: Read>(input: R) -> Result<Self, RateError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers = reader
            .headers()
            .map_err(|e| RateError::Parse(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>().join(",") != TABLE_HEADER {
            return Err(RateError::Parse(format!(
                "expected header `{TABLE_HEADER}`"
            )));
        }
        let mut table = Self::default();
        for row in reader.records() {
            let row = row.map_err(|e| RateError::Parse(e.to_string()))?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let get = |i: usize, name: &str| -> Result<&str, RateError> {
                row.get(i)
                    .ok_or_else(|| RateError::Parse(format!("line {line}: missing {name}")))
            };
            fn num<T: std::str::FromStr>(raw: &str, name: &str, line: u64) -> Result<T, RateError> {
                raw.parse()
                    .map_err(|_| RateError::Parse(format!("line {line}: bad {name} `{raw}`")))
            }
            let low: i32 = num(get(0, "rssi_bin_low")?, "rssi_bin_low", line)?;
            let bin = RssiBin::from_lower(low)
                .ok_or_else(|| RateError::Parse(format!("line {line}: {low} is not a bin edge")))?;
            let bw_mhz: u16 = num(get(1, "bw_mhz")?, "bw_mhz", line)?;
            let ptx: f64 = num(get(2, "ptx_dbm")?, "ptx_dbm", line)?;
            let mcs: u8 = num(get(3, "mcs")?, "mcs", line)?;
            let nss: u8 = num(get(4, "nss")?, "nss", line)?;
            let probability: f64 = num(get(5, "probability")?, "probability", line)?;
            let samples: u64 = num(get(6, "samples")?, "samples", line)?;
            if !is_valid_combination(mcs, nss, bw_mhz) {
                return Err(RateError::Parse(format!(
                    "line {line}: invalid combination MCS {mcs} / {nss} SS / {bw_mhz} MHz"
                )));
            }
            if !(0.0..=1.0).contains(&probability) {
                return Err(RateError::Parse(format!(
                    "line {line}: probability {probability} outside [0, 1]"
                )));
            }
            let cell = table
                .cells
                .entry(CellKey {
                    bin,
                    bw_mhz,
                    ptx: Dbm(ptx),
                })
                .or_insert_with(|| Cell {
                    distribution: Vec::new(),
                    samples,
                });
            if cell.samples != samples {
                return Err(RateError::Parse(format!(
                    "line {line}: inconsistent sample count for cell"
                )));
            }
            if cell
                .distribution
                .iter()
                .any(|s| (s.mcs, s.nss) == (mcs, nss))
            {
                return Err(RateError::Parse(format!(
                    "line {line}: duplicate MCS {mcs} / {nss} SS"
                )));
            }
            cell.distribution.push(McsShare {
                mcs,
                nss,
                probability,
            });
        }
        for (key, cell) in table.cells.iter_mut() {
            cell.distribution.sort_by_key(|s| (s.mcs, s.nss));
            let total: f64 = cell.distribution.iter().map(|s| s.probability).sum();
            if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
                return Err(RateError::Parse(format!(
                    "cell {} / {} MHz / {} dBm sums to {total}",
                    key.bin, key.bw_mhz, key.ptx.0
                )));
            }
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(rssi: f64, mcs: u8, nss: u8) -> PacketRecord {
        PacketRecord {
            timestamp_s: 0.0,
            location_id: "7".into(),
            rssi_dbm: rssi,
            mcs,
            nss,
            bw_mhz: 20,
            ptx_dbm: 23.0,
            channel: 36,
        }
    }

    #[test]
    fn bins_tile_without_gaps() {
        assert_eq!(RssiBin::containing(-97.0).unwrap().lower_dbm(), -97);
        assert_eq!(RssiBin::containing(-92.3).unwrap().lower_dbm(), -97);
        assert_eq!(RssiBin::containing(-92.0).unwrap().lower_dbm(), -92);
        assert_eq!(RssiBin::containing(-22.0001).unwrap().lower_dbm(), -27);
        assert!(RssiBin::containing(-22.0).is_none());
        assert!(RssiBin::containing(-97.01).is_none());
        assert!(RssiBin::containing(f64::NAN).is_none());
        assert_eq!(RssiBin::all().count(), 15);
        assert_eq!(RssiBin::from_lower(-62).unwrap().to_string(), "[-62, -58]");
        assert!(RssiBin::from_lower(-60).is_none());
        assert!(RssiBin::from_lower(-22).is_none());
    }

    #[test]
    fn single_pair_cell() {
        let recs: Vec<_> = (0..100).map(|_| rec(-45.0, 8, 2)).collect();
        let t = build_table(&recs).unwrap();
        assert_eq!(t.len(), 1);
        let c = t
            .cell(RssiBin::containing(-45.0).unwrap(), 20, 23.0)
            .unwrap();
        assert_eq!(
            c.distribution,
            vec![McsShare {
                mcs: 8,
                nss: 2,
                probability: 1.0
            }]
        );
        assert_eq!(c.samples, 100);
    }

    #[test]
    fn counting_shares() {
        let mut recs: Vec<_> = (0..60).map(|_| rec(-70.0, 3, 1)).collect();
        recs.extend((0..40).map(|_| rec(-69.0, 4, 1)));
        let t = build_table(&recs).unwrap();
        let c = t.cell(RssiBin::from_lower(-72).unwrap(), 20, 23.0).unwrap();
        assert_eq!(c.distribution[0].probability, 0.6);
        assert_eq!(c.distribution[1].probability, 0.4);
        assert_eq!(c.mode().mcs, 3);
    }

    #[test]
    fn out_of_range_and_excluded_are_counted() {
        let recs = vec![
            rec(-10.0, 8, 2),
            rec(-99.0, 0, 1),
            rec(-60.0, 9, 1),
            rec(-60.0, 8, 2),
        ];
        let t = build_table(&recs).unwrap();
        assert_eq!(t.out_of_range, 2);
        assert_eq!(t.excluded, 1);
        assert_eq!(t.len(), 1);
        assert_eq!(build_table(&[]), Err(RateError::Empty));
    }

    #[test]
    fn mode_tie_breaks_low() {
        let cell = Cell {
            distribution: vec![
                McsShare {
                    mcs: 3,
                    nss: 1,
                    probability: 0.4,
                },
                McsShare {
                    mcs: 3,
                    nss: 2,
                    probability: 0.4,
                },
                McsShare {
                    mcs: 5,
                    nss: 1,
                    probability: 0.2,
                },
            ],
            samples: 5,
        };
        assert_eq!((cell.mode().mcs, cell.mode().nss), (3, 1));
    }

    #[test]
    fn query_fallback_and_errors() {
        let recs = vec![rec(-90.0, 1, 1), rec(-80.0, 3, 1)];
        let t = build_table(&recs).unwrap();
        // [-87,-83] empty, both neighbours present: lower wins.
        let p = t
            .query_by_rssi(-85.0, 20, 23.0, GuardInterval::Long)
            .unwrap();
        assert_eq!(p.borrowed_from, Some(RssiBin::from_lower(-92).unwrap()));
        assert_eq!(p.mode.mcs, 1);
        assert!(p.is_borrowed());
        // Direct hit.
        let p = t
            .query_by_rssi(-80.0, 20, 23.0, GuardInterval::Long)
            .unwrap();
        assert!(!p.is_borrowed());
        assert_eq!(p.expected_phy_rate_mbps, 26.0);
        // Two bins away from any data.
        assert!(matches!(
            t.query_by_rssi(-60.0, 20, 23.0, GuardInterval::Long),
            Err(RateError::NoData { .. })
        ));
        // Other configuration.
        assert!(t
            .query_by_rssi(-80.0, 40, 23.0, GuardInterval::Long)
            .is_err());
        assert_eq!(
            t.query_by_rssi(-10.0, 20, 23.0, GuardInterval::Long),
            Err(RateError::OutOfRange(-10.0))
        );
    }

    #[test]
    fn query_by_distance_rejects_zero_distance() {
        let t = build_table(&[rec(-60.0, 7, 2)]).unwrap();
        let g = LinkGeometry {
            distance_m: 0.0,
            walls: 0,
            floors: 0,
            height_m: 0.0,
        };
        let err = t
            .query_by_distance(
                ModelId::Tmb,
                &PathLossParams::default(),
                &g,
                20,
                23.0,
                GuardInterval::Long,
            )
            .unwrap_err();
        assert!(matches!(err, RateError::Model(PathLossError::Distance(_))));
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let mut recs: Vec<_> = (0..3).map(|_| rec(-70.0, 3, 1)).collect();
        recs.push(rec(-70.0, 4, 2));
        recs.push(rec(-40.0, 8, 2));
        let t = build_table(&recs).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with(TABLE_HEADER));
        let back = McsDistributionTable::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(back.to_csv(), csv);
        assert_eq!(back.cells().count(), t.cells().count());

        let bad = format!("{TABLE_HEADER}\n-72,20,23,3,1,0.5,4\n");
        assert!(McsDistributionTable::from_csv(bad.as_bytes()).is_err());
        let bad = format!("{TABLE_HEADER}\n-72,20,23,9,1,1.0,4\n");
        assert!(McsDistributionTable::from_csv(bad.as_bytes()).is_err());
        let bad = format!("{TABLE_HEADER}\n-70,20,23,3,1,1.0,4\n");
        assert!(McsDistributionTable::from_csv(bad.as_bytes()).is_err());
        assert!(McsDistributionTable::from_csv("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn prediction_formatting() {
        let t = build_table(&[rec(-60.0, 7, 2), rec(-60.0, 7, 2), rec(-60.0, 8, 2)]).unwrap();
        let p = t
            .query_by_rssi(-60.0, 20, 23.0, GuardInterval::Long)
            .unwrap();
        assert_eq!(p.mode_label(), "MCS 7 / 2SS (66.67%)");
        assert!(p.csv_row().starts_with("-60.000,-62,20,23,7,2,66.67,"));
    }
}
