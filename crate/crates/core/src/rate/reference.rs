//! Per-cell modes of the office measurement campaign and a synthetic record
//! set that reproduces them.
//!
//! Only the most frequent `(MCS, NSS)` pair and its frequency are known for
//! each cell. [`synthetic_records`] fills the rest of each cell with nearby
//! MCS values, every one strictly less frequent than the mode, so a table
//! built from the records has exactly the listed mode and percentage.

use crate::measurements::PacketRecord;

use super::{build_table, is_valid_combination, McsDistributionTable, RssiBin};

/// Mode of one non-empty (bin, bandwidth, power) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCell {
    pub bin_low: i32,
    pub bw_mhz: u16,
    pub ptx_dbm: f64,
    pub mcs: u8,
    pub nss: u8,
    /// Appearance frequency of the mode, in percent with two decimals.
    pub percent: f64,
}

/// Records per synthetic cell; two-decimal percentages become whole counts.
pub const RECORDS_PER_CELL: u32 = 10_000;

/// Fillers share the non-mode remainder across at least this many pairs.
const MIN_FILLERS: usize = 4;

pub const MODE_CELLS: [ModeCell; 103] = [
    ModeCell {
        bin_low: -97,
        bw_mhz: 20,
        ptx_dbm: 4.0,
        mcs: 0,
        nss: 1,
        percent: 82.42,
    },
    ModeCell {
        bin_low: -97,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 3,
        nss: 1,
        percent: 54.57,
    },
    ModeCell {
        bin_low: -92,
        bw_mhz: 20,
        ptx_dbm: 4.0,
        mcs: 2,
        nss: 1,
        percent: 31.62,
    },
    ModeCell {
        bin_low: -92,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 3,
        nss: 1,
        percent: 74.76,
    },
    ModeCell {
        bin_low: -92,
        bw_mhz: 40,
        ptx_dbm: 4.0,
        mcs: 0,
        nss: 1,
        percent: 51.24,
    },
    ModeCell {
        bin_low: -92,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 1,
        nss: 1,
        percent: 51.41,
    },
    ModeCell {
        bin_low: -92,
        bw_mhz: 80,
        ptx_dbm: 4.0,
        mcs: 1,
        nss: 1,
        percent: 57.61,
    },
    ModeCell {
        bin_low: -92,
        bw_mhz: 80,
        ptx_dbm: 10.0,
        mcs: 0,
        nss: 1,
        percent: 46.37,
    },
    ModeCell {
        bin_low: -92,
        bw_mhz: 80,
        ptx_dbm: 23.0,
        mcs: 1,
        nss: 1,
        percent: 100.00,
    },
    ModeCell {
        bin_low: -87,
        bw_mhz: 20,
        ptx_dbm: 4.0,
        mcs: 4,
        nss: 1,
        percent: 33.10,
    },
    ModeCell {
        bin_low: -87,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 3,
        nss: 1,
        percent: 55.00,
    },
    ModeCell {
        bin_low: -87,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 5,
        nss: 1,
        percent: 42.86,
    },
    ModeCell {
        bin_low: -87,
        bw_mhz: 40,
        ptx_dbm: 4.0,
        mcs: 1,
        nss: 1,
        percent: 69.45,
    },
    ModeCell {
        bin_low: -87,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 1,
        nss: 1,
        percent: 34.75,
    },
    ModeCell {
        bin_low: -87,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 3,
        nss: 1,
        percent: 99.33,
    },
    ModeCell {
        bin_low: -87,
        bw_mhz: 80,
        ptx_dbm: 4.0,
        mcs: 1,
        nss: 1,
        percent: 48.37,
    },
    ModeCell {
        bin_low: -87,
        bw_mhz: 80,
        ptx_dbm: 10.0,
        mcs: 2,
        nss: 1,
        percent: 54.91,
    },
    ModeCell {
        bin_low: -87,
        bw_mhz: 80,
        ptx_dbm: 23.0,
        mcs: 1,
        nss: 1,
        percent: 43.62,
    },
    ModeCell {
        bin_low: -82,
        bw_mhz: 20,
        ptx_dbm: 4.0,
        mcs: 5,
        nss: 1,
        percent: 45.33,
    },
    ModeCell {
        bin_low: -82,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 6,
        nss: 1,
        percent: 27.27,
    },
    ModeCell {
        bin_low: -82,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 3,
        nss: 2,
        percent: 29.33,
    },
    ModeCell {
        bin_low: -82,
        bw_mhz: 40,
        ptx_dbm: 4.0,
        mcs: 4,
        nss: 1,
        percent: 54.72,
    },
    ModeCell {
        bin_low: -82,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 3,
        nss: 1,
        percent: 60.33,
    },
    ModeCell {
        bin_low: -82,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 5,
        nss: 1,
        percent: 31.47,
    },
    ModeCell {
        bin_low: -82,
        bw_mhz: 80,
        ptx_dbm: 4.0,
        mcs: 3,
        nss: 1,
        percent: 82.68,
    },
    ModeCell {
        bin_low: -82,
        bw_mhz: 80,
        ptx_dbm: 10.0,
        mcs: 4,
        nss: 1,
        percent: 31.15,
    },
    ModeCell {
        bin_low: -82,
        bw_mhz: 80,
        ptx_dbm: 23.0,
        mcs: 3,
        nss: 1,
        percent: 57.37,
    },
    ModeCell {
        bin_low: -77,
        bw_mhz: 20,
        ptx_dbm: 4.0,
        mcs: 4,
        nss: 1,
        percent: 35.76,
    },
    ModeCell {
        bin_low: -77,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 5,
        nss: 1,
        percent: 29.85,
    },
    ModeCell {
        bin_low: -77,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 5,
        nss: 1,
        percent: 30.89,
    },
    ModeCell {
        bin_low: -77,
        bw_mhz: 40,
        ptx_dbm: 4.0,
        mcs: 4,
        nss: 1,
        percent: 45.90,
    },
    ModeCell {
        bin_low: -77,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 6,
        nss: 1,
        percent: 17.61,
    },
    ModeCell {
        bin_low: -77,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 5,
        nss: 1,
        percent: 45.14,
    },
    ModeCell {
        bin_low: -77,
        bw_mhz: 80,
        ptx_dbm: 4.0,
        mcs: 4,
        nss: 1,
        percent: 81.67,
    },
    ModeCell {
        bin_low: -77,
        bw_mhz: 80,
        ptx_dbm: 10.0,
        mcs: 6,
        nss: 1,
        percent: 49.59,
    },
    ModeCell {
        bin_low: -77,
        bw_mhz: 80,
        ptx_dbm: 23.0,
        mcs: 4,
        nss: 2,
        percent: 35.14,
    },
    ModeCell {
        bin_low: -72,
        bw_mhz: 20,
        ptx_dbm: 4.0,
        mcs: 7,
        nss: 2,
        percent: 44.44,
    },
    ModeCell {
        bin_low: -72,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 6,
        nss: 2,
        percent: 36.17,
    },
    ModeCell {
        bin_low: -72,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 7,
        nss: 2,
        percent: 37.24,
    },
    ModeCell {
        bin_low: -72,
        bw_mhz: 40,
        ptx_dbm: 4.0,
        mcs: 4,
        nss: 2,
        percent: 34.29,
    },
    ModeCell {
        bin_low: -72,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 7,
        nss: 1,
        percent: 47.03,
    },
    ModeCell {
        bin_low: -72,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 6,
        nss: 1,
        percent: 41.91,
    },
    ModeCell {
        bin_low: -72,
        bw_mhz: 80,
        ptx_dbm: 4.0,
        mcs: 7,
        nss: 1,
        percent: 40.04,
    },
    ModeCell {
        bin_low: -72,
        bw_mhz: 80,
        ptx_dbm: 10.0,
        mcs: 7,
        nss: 1,
        percent: 67.49,
    },
    ModeCell {
        bin_low: -72,
        bw_mhz: 80,
        ptx_dbm: 23.0,
        mcs: 8,
        nss: 1,
        percent: 47.39,
    },
    ModeCell {
        bin_low: -67,
        bw_mhz: 20,
        ptx_dbm: 4.0,
        mcs: 8,
        nss: 2,
        percent: 77.39,
    },
    ModeCell {
        bin_low: -67,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 6,
        nss: 2,
        percent: 54.10,
    },
    ModeCell {
        bin_low: -67,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 5,
        nss: 2,
        percent: 28.45,
    },
    ModeCell {
        bin_low: -67,
        bw_mhz: 40,
        ptx_dbm: 4.0,
        mcs: 8,
        nss: 2,
        percent: 48.93,
    },
    ModeCell {
        bin_low: -67,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 7,
        nss: 2,
        percent: 45.38,
    },
    ModeCell {
        bin_low: -67,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 4,
        nss: 2,
        percent: 44.30,
    },
    ModeCell {
        bin_low: -67,
        bw_mhz: 80,
        ptx_dbm: 4.0,
        mcs: 7,
        nss: 2,
        percent: 58.14,
    },
    ModeCell {
        bin_low: -67,
        bw_mhz: 80,
        ptx_dbm: 10.0,
        mcs: 4,
        nss: 2,
        percent: 42.02,
    },
    ModeCell {
        bin_low: -67,
        bw_mhz: 80,
        ptx_dbm: 23.0,
        mcs: 5,
        nss: 2,
        percent: 61.79,
    },
    ModeCell {
        bin_low: -62,
        bw_mhz: 20,
        ptx_dbm: 4.0,
        mcs: 8,
        nss: 2,
        percent: 60.70,
    },
    ModeCell {
        bin_low: -62,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 8,
        nss: 2,
        percent: 86.00,
    },
    ModeCell {
        bin_low: -62,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 7,
        nss: 2,
        percent: 71.37,
    },
    ModeCell {
        bin_low: -62,
        bw_mhz: 40,
        ptx_dbm: 4.0,
        mcs: 9,
        nss: 2,
        percent: 51.95,
    },
    ModeCell {
        bin_low: -62,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 9,
        nss: 2,
        percent: 65.36,
    },
    ModeCell {
        bin_low: -62,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 9,
        nss: 2,
        percent: 55.56,
    },
    ModeCell {
        bin_low: -62,
        bw_mhz: 80,
        ptx_dbm: 4.0,
        mcs: 7,
        nss: 2,
        percent: 62.26,
    },
    ModeCell {
        bin_low: -62,
        bw_mhz: 80,
        ptx_dbm: 10.0,
        mcs: 9,
        nss: 2,
        percent: 63.79,
    },
    ModeCell {
        bin_low: -62,
        bw_mhz: 80,
        ptx_dbm: 23.0,
        mcs: 8,
        nss: 2,
        percent: 45.01,
    },
    ModeCell {
        bin_low: -57,
        bw_mhz: 20,
        ptx_dbm: 4.0,
        mcs: 8,
        nss: 2,
        percent: 50.33,
    },
    ModeCell {
        bin_low: -57,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 8,
        nss: 2,
        percent: 99.13,
    },
    ModeCell {
        bin_low: -57,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 8,
        nss: 2,
        percent: 66.46,
    },
    ModeCell {
        bin_low: -57,
        bw_mhz: 40,
        ptx_dbm: 4.0,
        mcs: 8,
        nss: 2,
        percent: 60.79,
    },
    ModeCell {
        bin_low: -57,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 9,
        nss: 2,
        percent: 93.40,
    },
    ModeCell {
        bin_low: -57,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 8,
        nss: 2,
        percent: 52.76,
    },
    ModeCell {
        bin_low: -57,
        bw_mhz: 80,
        ptx_dbm: 4.0,
        mcs: 7,
        nss: 2,
        percent: 68.81,
    },
    ModeCell {
        bin_low: -57,
        bw_mhz: 80,
        ptx_dbm: 10.0,
        mcs: 9,
        nss: 2,
        percent: 74.51,
    },
    ModeCell {
        bin_low: -52,
        bw_mhz: 20,
        ptx_dbm: 4.0,
        mcs: 8,
        nss: 2,
        percent: 97.92,
    },
    ModeCell {
        bin_low: -52,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 8,
        nss: 2,
        percent: 95.97,
    },
    ModeCell {
        bin_low: -52,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 8,
        nss: 2,
        percent: 99.12,
    },
    ModeCell {
        bin_low: -52,
        bw_mhz: 40,
        ptx_dbm: 4.0,
        mcs: 9,
        nss: 2,
        percent: 53.30,
    },
    ModeCell {
        bin_low: -52,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 9,
        nss: 2,
        percent: 93.35,
    },
    ModeCell {
        bin_low: -52,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 9,
        nss: 2,
        percent: 95.55,
    },
    ModeCell {
        bin_low: -52,
        bw_mhz: 80,
        ptx_dbm: 4.0,
        mcs: 9,
        nss: 2,
        percent: 94.86,
    },
    ModeCell {
        bin_low: -52,
        bw_mhz: 80,
        ptx_dbm: 10.0,
        mcs: 7,
        nss: 2,
        percent: 57.39,
    },
    ModeCell {
        bin_low: -52,
        bw_mhz: 80,
        ptx_dbm: 23.0,
        mcs: 9,
        nss: 2,
        percent: 96.58,
    },
    ModeCell {
        bin_low: -47,
        bw_mhz: 20,
        ptx_dbm: 4.0,
        mcs: 8,
        nss: 2,
        percent: 98.51,
    },
    ModeCell {
        bin_low: -47,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 8,
        nss: 2,
        percent: 97.89,
    },
    ModeCell {
        bin_low: -47,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 8,
        nss: 2,
        percent: 99.07,
    },
    ModeCell {
        bin_low: -47,
        bw_mhz: 40,
        ptx_dbm: 4.0,
        mcs: 9,
        nss: 2,
        percent: 95.37,
    },
    ModeCell {
        bin_low: -47,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 9,
        nss: 2,
        percent: 52.91,
    },
    ModeCell {
        bin_low: -47,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 9,
        nss: 2,
        percent: 95.82,
    },
    ModeCell {
        bin_low: -47,
        bw_mhz: 80,
        ptx_dbm: 4.0,
        mcs: 9,
        nss: 2,
        percent: 97.69,
    },
    ModeCell {
        bin_low: -47,
        bw_mhz: 80,
        ptx_dbm: 10.0,
        mcs: 9,
        nss: 2,
        percent: 93.71,
    },
    ModeCell {
        bin_low: -47,
        bw_mhz: 80,
        ptx_dbm: 23.0,
        mcs: 9,
        nss: 2,
        percent: 91.60,
    },
    ModeCell {
        bin_low: -42,
        bw_mhz: 20,
        ptx_dbm: 10.0,
        mcs: 8,
        nss: 2,
        percent: 97.25,
    },
    ModeCell {
        bin_low: -42,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 8,
        nss: 2,
        percent: 96.00,
    },
    ModeCell {
        bin_low: -42,
        bw_mhz: 40,
        ptx_dbm: 4.0,
        mcs: 9,
        nss: 2,
        percent: 99.58,
    },
    ModeCell {
        bin_low: -42,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 9,
        nss: 2,
        percent: 98.58,
    },
    ModeCell {
        bin_low: -42,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 9,
        nss: 2,
        percent: 85.96,
    },
    ModeCell {
        bin_low: -42,
        bw_mhz: 80,
        ptx_dbm: 10.0,
        mcs: 9,
        nss: 2,
        percent: 97.35,
    },
    ModeCell {
        bin_low: -42,
        bw_mhz: 80,
        ptx_dbm: 23.0,
        mcs: 9,
        nss: 2,
        percent: 87.26,
    },
    ModeCell {
        bin_low: -37,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 8,
        nss: 2,
        percent: 99.55,
    },
    ModeCell {
        bin_low: -37,
        bw_mhz: 40,
        ptx_dbm: 10.0,
        mcs: 9,
        nss: 2,
        percent: 99.12,
    },
    ModeCell {
        bin_low: -37,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 9,
        nss: 2,
        percent: 90.21,
    },
    ModeCell {
        bin_low: -32,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 8,
        nss: 2,
        percent: 64.42,
    },
    ModeCell {
        bin_low: -32,
        bw_mhz: 40,
        ptx_dbm: 23.0,
        mcs: 9,
        nss: 2,
        percent: 97.21,
    },
    ModeCell {
        bin_low: -32,
        bw_mhz: 80,
        ptx_dbm: 23.0,
        mcs: 9,
        nss: 2,
        percent: 98.16,
    },
    ModeCell {
        bin_low: -27,
        bw_mhz: 20,
        ptx_dbm: 23.0,
        mcs: 8,
        nss: 2,
        percent: 97.82,
    },
];

fn mode_count(cell: &ModeCell) -> u32 {
    (cell.percent * f64::from(RECORDS_PER_CELL) / 100.0).round() as u32
}

/// `(mcs, nss, count)` for every pair in the cell, mode first.
fn cell_counts(cell: &ModeCell) -> Vec<(u8, u8, u32)> {
    let mode = mode_count(cell);
    let mut out = vec![(cell.mcs, cell.nss, mode)];
    let remainder = RECORDS_PER_CELL - mode;
    if remainder == 0 {
        return out;
    }
    let mut candidates: Vec<(u8, u8)> = (0..=9u8)
        .flat_map(|mcs| [(mcs, 1u8), (mcs, 2u8)])
        .filter(|&(mcs, nss)| {
            (mcs, nss) != (cell.mcs, cell.nss) && is_valid_combination(mcs, nss, cell.bw_mhz)
        })
        .collect();
    candidates.sort_by_key(|&(mcs, nss)| (mcs.abs_diff(cell.mcs), nss != cell.nss, mcs, nss));

    let cap = mode - 1;
    let needed = remainder.div_ceil(cap) as usize;
    let fillers = needed.max(MIN_FILLERS).min(candidates.len());
    assert!(needed <= fillers, "mode too weak to dominate");
    let base = remainder / fillers as u32;
    let extra = (remainder % fillers as u32) as usize;
    for (i, &(mcs, nss)) in candidates.iter().take(fillers).enumerate() {
        let n = base + u32::from(i < extra);
        if n > 0 {
            out.push((mcs, nss, n));
        }
    }
    out
}

/// Deterministic packet records whose per-cell modes match [`MODE_CELLS`].
/// RSSI values spread evenly inside each cell's tile.
pub fn synthetic_records() -> Vec<PacketRecord> {
    let mut out = Vec::with_capacity(MODE_CELLS.len() * RECORDS_PER_CELL as usize);
    for cell in &MODE_CELLS {
        let bin = RssiBin::from_lower(cell.bin_low).expect("grid-aligned bin");
        let mut j = 0u32;
        for (mcs, nss, n) in cell_counts(cell) {
            for _ in 0..n {
                let frac = (f64::from(j) + 0.5) / f64::from(RECORDS_PER_CELL);
                out.push(PacketRecord {
                    timestamp_s: f64::from(j) / 85.0,
                    location_id: "ref".into(),
                    rssi_dbm: f64::from(bin.lower_dbm()) + 5.0 * frac,
                    mcs,
                    nss,
                    bw_mhz: cell.bw_mhz,
                    ptx_dbm: cell.ptx_dbm,
                    channel: 36,
                });
                j += 1;
            }
        }
    }
    out
}

/// Table built from [`synthetic_records`].
pub fn reference_table() -> McsDistributionTable {
    build_table(&synthetic_records()).expect("non-empty reference records")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_fill_each_cell_and_keep_mode_unique() {
        for cell in &MODE_CELLS {
            let counts = cell_counts(cell);
            assert_eq!(counts.iter().map(|c| c.2).sum::<u32>(), RECORDS_PER_CELL);
            let mode = counts[0].2;
            assert!(counts[1..].iter().all(|c| c.2 < mode), "{cell:?}");
        }
    }

    #[test]
    fn no_mcs9_at_20mhz() {
        assert!(synthetic_records()
            .iter()
            .all(|r| !(r.mcs == 9 && r.bw_mhz == 20)));
    }

    #[test]
    fn percentages_are_whole_counts() {
        for cell in &MODE_CELLS {
            let exact = cell.percent * f64::from(RECORDS_PER_CELL) / 100.0;
            assert!((exact - exact.round()).abs() < 1e-6);
        }
    }
}
