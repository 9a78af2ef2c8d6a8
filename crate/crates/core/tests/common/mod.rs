//! Oracles shared by the integration tests. Everything here recomputes
//! results by direct arithmetic, independent of the table/codec path under
//! test.

use histeval_core::histogram::HistogramConfig;

/// Where a sample lands, by plain arithmetic instead of ternary matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placed {
    Bin(u32),
    Low,
    High,
}

/// Direct binning: `floor((rtt − min) / width)` with the remainder folded
/// into the last bin.
pub fn arithmetic_bin(config: &HistogramConfig, rtt_ns: u32) -> Placed {
    if rtt_ns < config.min_ns {
        return Placed::Low;
    }
    if rtt_ns >= config.max_ns {
        return Placed::High;
    }
    let width = config.base_width_ns() as u64;
    let index = (rtt_ns as u64 - config.min_ns as u64) / width;
    Placed::Bin(index.min(config.num_bins as u64 - 1) as u32)
}

/// Histogram of a sample set by direct arithmetic: per-bin counts plus the
/// two outlier sides.
pub fn arithmetic_histogram(config: &HistogramConfig, samples: &[u32]) -> (Vec<u64>, u64, u64) {
    let mut counts = vec![0u64; config.num_bins as usize];
    let mut low = 0;
    let mut high = 0;
    for &rtt in samples {
        match arithmetic_bin(config, rtt) {
            Placed::Bin(i) => counts[i as usize] += 1,
            Placed::Low => low += 1,
            Placed::High => high += 1,
        }
    }
    (counts, low, high)
}
