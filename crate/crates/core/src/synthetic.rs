//! Seeded synthetic measurement campaigns.
//!
//! Path loss follows the wall-factor model (`L0 + 10·γ·log10(d) + k·W`) at
//! each registry location, with one Gaussian shadowing draw per location and
//! AP configuration. Packet-level output adds a smaller per-packet jitter on
//! top, so aggregating per configuration recovers the shadowed value.

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::fitting::PathLossSample;
use crate::measurements::{LocationRegistry, PacketRecord, BANDWIDTHS_MHZ};
use crate::pathloss::{pl_wall_factor, PathLossParams};

/// Transmit powers of the measurement campaign (dBm).
pub const TX_POWERS_DBM: [f64; 3] = [4.0, 10.0, 23.0];

/// Default seed for every generator entry point on the command line.
pub const DEFAULT_SEED: u64 = 2019;

/// The nine (bandwidth, power) AP configurations.
pub fn ap_configurations() -> Vec<(u16, f64)> {
    BANDWIDTHS_MHZ
        .iter()
        .flat_map(|&bw| TX_POWERS_DBM.iter().map(move |&p| (bw, p)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignConfig {
    /// Shadowing standard deviation per (location, configuration), dB.
    pub shadowing_db: f64,
    /// Per-packet RSSI jitter, dB.
    pub jitter_db: f64,
    pub packets_per_config: usize,
    pub packet_rate_hz: f64,
    pub channel: u16,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            shadowing_db: 2.0,
            jitter_db: 1.0,
            packets_per_config: 85,
            packet_rate_hz: 85.0,
            channel: 36,
        }
    }
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("finite non-negative sigma")
}

/// `repeats` noisy samples per registry location, ordered by location.
pub fn path_loss_samples(
    params: &PathLossParams,
    registry: &LocationRegistry,
    repeats: usize,
    sigma_db: f64,
    seed: u64,
) -> Vec<PathLossSample> {
    let mut rng = StdRng::seed_from_u64(seed);
    let noise = normal(sigma_db);
    let mut out = Vec::with_capacity(registry.len() * repeats);
    for (id, geom) in registry.iter() {
        let mean = pl_wall_factor(geom, params).expect("registry geometry is valid");
        for _ in 0..repeats {
            out.push(PathLossSample::new(
                id,
                *geom,
                mean + noise.sample(&mut rng),
            ));
        }
    }
    out
}

/// Crude RSSI-driven rate choice so records carry plausible MCS/NSS values.
fn pick_rate(rssi_dbm: f64, bw_mhz: u16) -> (u8, u8) {
    let mcs = ((rssi_dbm + 92.0) / 4.0).floor().clamp(0.0, 9.0) as u8;
    let mcs = if bw_mhz == 20 { mcs.min(8) } else { mcs };
    let nss = if rssi_dbm > -72.0 { 2 } else { 1 };
    (mcs, nss)
}

/// Packet records for every registry location under all nine AP
/// configurations.
pub fn capture_records(
    params: &PathLossParams,
    registry: &LocationRegistry,
    config: &CampaignConfig,
    seed: u64,
) -> Vec<PacketRecord> {
    let mut rng = StdRng::seed_from_u64(seed);
    let shadow = normal(config.shadowing_db);
    let jitter = normal(config.jitter_db);
    let mut out = Vec::new();
    for (id, geom) in registry.iter() {
        let pl = pl_wall_factor(geom, params).expect("registry geometry is valid");
        for (bw, ptx) in ap_configurations() {
            let offset = shadow.sample(&mut rng);
            for i in 0..config.packets_per_config {
                let rssi = ptx - pl + offset + jitter.sample(&mut rng);
                let (mcs, nss) = pick_rate(rssi, bw);
                out.push(PacketRecord {
                    timestamp_s: i as f64 / config.packet_rate_hz,
                    location_id: id.to_string(),
                    rssi_dbm: rssi,
                    mcs,
                    nss,
                    bw_mhz: bw,
                    ptx_dbm: ptx,
                    channel: config.channel,
                });
            }
        }
    }
    out
}
