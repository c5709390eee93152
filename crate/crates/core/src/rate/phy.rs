//! VHT (802.11ac) PHY data rates.

use std::fmt;
use std::str::FromStr;

use super::RateError;

/// OFDM guard interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GuardInterval {
    /// 800 ns, 4.0 µs symbol.
    #[default]
    Long,
    /// 400 ns, 3.6 µs symbol.
    Short,
}

impl GuardInterval {
    pub fn symbol_time_us(self) -> f64 {
        match self {
            GuardInterval::Long => 4.0,
            GuardInterval::Short => 3.6,
        }
    }
}

impl fmt::Display for GuardInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GuardInterval::Long => "long",
            GuardInterval::Short => "short",
        })
    }
}

impl FromStr for GuardInterval {
    type Err = RateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "long" | "lgi" | "800" => Ok(GuardInterval::Long),
            "short" | "sgi" | "400" => Ok(GuardInterval::Short),
            _ => Err(RateError::Parse(format!("unknown guard interval `{s}`"))),
        }
    }
}

/// Coded bits per subcarrier and coding rate (numerator, denominator) for
/// VHT MCS 0..=9.
const MCS_TABLE: [(u32, u32, u32); 10] = [
    (1, 1, 2), // BPSK 1/2
    (2, 1, 2), // QPSK 1/2
    (2, 3, 4), // QPSK 3/4
    (4, 1, 2), // 16-QAM 1/2
    (4, 3, 4), // 16-QAM 3/4
    (6, 2, 3), // 64-QAM 2/3
    (6, 3, 4), // 64-QAM 3/4
    (6, 5, 6), // 64-QAM 5/6
    (8, 3, 4), // 256-QAM 3/4
    (8, 5, 6), // 256-QAM 5/6
];

/// Data subcarriers for a channel width.
pub fn data_subcarriers(bw_mhz: u16) -> Option<u32> {
    match bw_mhz {
        20 => Some(52),
        40 => Some(108),
        80 => Some(234),
        _ => None,
    }
}

/// Whether the standard permits this (MCS, NSS, width) combination.
pub fn is_valid_combination(mcs: u8, nss: u8, bw_mhz: u16) -> bool {
    if mcs > 9 || !(1..=8).contains(&nss) || data_subcarriers(bw_mhz).is_none() {
        return false;
    }
    match (bw_mhz, mcs) {
        (20, 9) => nss == 3 || nss == 6,
        (80, 6) => nss != 3 && nss != 7,
        _ => true,
    }
}

/// PHY rate in Mbit/s: `nss · N_SD · bits · R / T_sym`.
pub fn phy_rate(mcs: u8, nss: u8, bw_mhz: u16, guard: GuardInterval) -> Result<f64, RateError> {
    if !is_valid_combination(mcs, nss, bw_mhz) {
        return Err(RateError::InvalidCombination { mcs, nss, bw_mhz });
    }
    let n_sd = data_subcarriers(bw_mhz).expect("validated");
    let (bits, num, den) = MCS_TABLE[usize::from(mcs)];
    let bits_per_symbol =
        f64::from(nss) * f64::from(n_sd) * f64::from(bits) * f64::from(num) / f64::from(den);
    Ok(bits_per_symbol / guard.symbol_time_us())
}
