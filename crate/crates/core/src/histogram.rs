//! Histogram planning, compilation and statistics.
//!
//! A histogram is configured as `[min_ns, max_ns)` with `num_bins`
//! equally-sized bins; each bin is a closed integer nanosecond range, and
//! consecutive bins tile `[min_ns, max_ns − 1]` exactly. Bins compile to
//! ternary table entries via range-to-prefix conversion, counters aggregate
//! back into bins by index, and the bin distribution yields mean, standard
//! deviation and interpolated percentiles.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prefix::{range_to_prefixes, IntRange};
use crate::scalar::{from_count, from_f64, Real};
use crate::tcam::{CounterSnapshot, TernaryEntry, KEY_WIDTH_BITS};

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum HistogramError {
    #[error("min_ns {min_ns} must be strictly below max_ns {max_ns}")]
    MinNotBelowMax { min_ns: u32, max_ns: u32 },
    #[error("num_bins must be at least 1")]
    ZeroBins,
    #[error("num_bins {num_bins} exceeds the {span_ns} ns span; bins would be empty")]
    TooManyBins { num_bins: u32, span_ns: u32 },
    #[error("compiled {compiled} entries, table capacity is {capacity}")]
    CapacityExceeded { capacity: usize, compiled: usize },
    #[error("counter carries bin index {bin_index}, histogram has {num_bins} bins")]
    BinIndexOutOfRange { bin_index: u32, num_bins: u32 },
    #[error("bin_counts length {len} does not match num_bins {num_bins}")]
    CountsLengthMismatch { len: usize, num_bins: u32 },
    #[error("no in-range samples; the distribution is empty")]
    EmptyDistribution,
    #[error("percentile rank must lie in (0, 100), got {p}")]
    InvalidPercentile { p: f64 },
}

/// Runtime histogram configuration: `[min_ns, max_ns)` split into
/// `num_bins` bins with nanosecond precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramConfig {
    /// Inclusive lower edge of the measured range, in ns.
    pub min_ns: u32,
    /// Exclusive upper edge, in ns.
    pub max_ns: u32,
    pub num_bins: u32,
}

impl HistogramConfig {
    pub fn new(min_ns: u32, max_ns: u32, num_bins: u32) -> Result<Self, HistogramError> {
        let config = Self {
            min_ns,
            max_ns,
            num_bins,
        };
        config.validate()?;
        Ok(config)
    }

    /// Revalidates the invariants; needed after deserializing.
    pub fn validate(&self) -> Result<(), HistogramError> {
        if self.min_ns >= self.max_ns {
            return Err(HistogramError::MinNotBelowMax {
                min_ns: self.min_ns,
                max_ns: self.max_ns,
            });
        }
        if self.num_bins == 0 {
            return Err(HistogramError::ZeroBins);
        }
        if self.num_bins > self.span_ns() {
            return Err(HistogramError::TooManyBins {
                num_bins: self.num_bins,
                span_ns: self.span_ns(),
            });
        }
        Ok(())
    }

    /// Width of the covered range `max_ns − min_ns`.
    pub fn span_ns(&self) -> u32 {
        self.max_ns - self.min_ns
    }

    /// Base bin width `floor(span / num_bins)`; the last bin absorbs any
    /// remainder.
    pub fn base_width_ns(&self) -> u32 {
        self.span_ns() / self.num_bins
    }
}

/// One planned bin: a closed integer range `[lo_ns, hi_ns]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinSpec {
    pub index: u32,
    pub lo_ns: u32,
    pub hi_ns: u32,
}

impl BinSpec {
    /// Number of nanosecond values in the bin.
    pub fn width_ns(&self) -> u32 {
        self.hi_ns - self.lo_ns + 1
    }

    /// Exact midpoint `(lo + hi) / 2`; half-integral midpoints are exact in
    /// `f64` since `lo + hi < 2^33`.
    pub fn midpoint_ns(&self) -> f64 {
        (self.lo_ns as f64 + self.hi_ns as f64) / 2.0
    }

    pub fn contains(&self, value_ns: u32) -> bool {
        self.lo_ns <= value_ns && value_ns <= self.hi_ns
    }
}

/// Splits the configured range into consecutive non-overlapping bins.
///
/// All bins share the base width except possibly the last, which absorbs the
/// remainder when the span is not divisible by the bin count; per-bin widths
/// are visible via [`BinSpec::width_ns`].
pub fn plan_bins(config: &HistogramConfig) -> Result<Vec<BinSpec>, HistogramError> {
    config.validate()?;
    let width = config.base_width_ns() as u64;
    let min = config.min_ns as u64;
    let bins = (0..config.num_bins)
        .map(|index| {
            let lo = min + index as u64 * width;
            let hi = if index == config.num_bins - 1 {
                config.max_ns as u64 - 1
            } else {
                lo + width - 1
            };
            BinSpec {
                index,
                lo_ns: lo as u32,
                hi_ns: hi as u32,
            }
        })
        .collect();
    Ok(bins)
}

/// Compiles every bin to ternary entries tagged with its bin index.
///
/// The concatenation covers `[min_ns, max_ns − 1]` exactly and entries are
/// pairwise disjoint across the whole table.
pub fn compile(config: &HistogramConfig) -> Result<Vec<TernaryEntry>, HistogramError> {
    let bins = plan_bins(config)?;
    let mut entries = Vec::new();
    for bin in &bins {
        let range = IntRange::new(bin.lo_ns, bin.hi_ns, KEY_WIDTH_BITS)
            .expect("planned bins are valid 32-bit ranges");
        entries.extend(
            range_to_prefixes(&range)
                .into_iter()
                .map(|prefix| TernaryEntry::new(prefix, bin.index)),
        );
    }
    Ok(entries)
}

/// Like [`compile`], but fails before any install when the compiled entry
/// count exceeds `capacity`.
pub fn compile_bounded(
    config: &HistogramConfig,
    capacity: usize,
) -> Result<Vec<TernaryEntry>, HistogramError> {
    let entries = compile(config)?;
    if entries.len() > capacity {
        return Err(HistogramError::CapacityExceeded {
            capacity,
            compiled: entries.len(),
        });
    }
    Ok(entries)
}

/// Per-bin counts plus outliers at one poll instant.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSnapshot {
    pub config: HistogramConfig,
    /// One count per bin, indexed by bin index.
    pub bin_counts: Vec<u64>,
    /// Samples below `min_ns`.
    pub miss_low: u64,
    /// Samples at or above `max_ns`.
    pub miss_high: u64,
    pub captured_at: Instant,
}

impl HistogramSnapshot {
    /// All-zero snapshot for a freshly configured histogram.
    pub fn empty(config: HistogramConfig) -> Self {
        Self {
            bin_counts: vec![0; config.num_bins as usize],
            config,
            miss_low: 0,
            miss_high: 0,
            captured_at: Instant::now(),
        }
    }

    pub fn total_in_range(&self) -> u64 {
        self.bin_counts.iter().sum()
    }

    pub fn total_outliers(&self) -> u64 {
        self.miss_low + self.miss_high
    }

    pub fn total(&self) -> u64 {
        self.total_in_range() + self.total_outliers()
    }
}

/// Sums raw per-entry counters into per-bin counts.
///
/// Counters with the same bin index add up; miss counters are copied through.
/// A bin index at or beyond `num_bins` is a data-integrity error.
pub fn aggregate(
    counters: &CounterSnapshot,
    config: &HistogramConfig,
) -> Result<HistogramSnapshot, HistogramError> {
    config.validate()?;
    let mut bin_counts = vec![0u64; config.num_bins as usize];
    for entry in &counters.entries {
        if entry.bin_index >= config.num_bins {
            return Err(HistogramError::BinIndexOutOfRange {
                bin_index: entry.bin_index,
                num_bins: config.num_bins,
            });
        }
        let slot = &mut bin_counts[entry.bin_index as usize];
        *slot = slot.saturating_add(entry.count);
    }
    Ok(HistogramSnapshot {
        config: *config,
        bin_counts,
        miss_low: counters.miss_low,
        miss_high: counters.miss_high,
        captured_at: Instant::now(),
    })
}

/// The 25th/50th/75th/90th percentiles of the bin distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Percentiles<R = f64> {
    pub p25: R,
    pub p50: R,
    pub p75: R,
    pub p90: R,
}

/// Mean, standard deviation and percentiles derived from in-range counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedStats<R = f64> {
    /// Midpoint-weighted mean of the bin distribution, in ns.
    pub mean_ns: R,
    /// Population standard deviation around that mean, in ns.
    pub stddev_ns: R,
    pub percentiles: Percentiles<R>,
}

/// Statistics for one snapshot. `derived` is absent — not zero — when no
/// in-range sample has been counted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramStats<R = f64> {
    pub total_in_range: u64,
    pub total_outliers: u64,
    pub derived: Option<DerivedStats<R>>,
}

/// Derives statistics from a snapshot.
///
/// Mean and standard deviation weight each bin midpoint by its count; the
/// histogram holds the full population of counted packets, so the deviation
/// divides by the total (population form). Both are within half a bin width
/// (mean) and one bin width (deviation) of the exact sample statistics.
pub fn stats<R: Real>(snapshot: &HistogramSnapshot) -> HistogramStats<R> {
    let total_in_range = snapshot.total_in_range();
    let total_outliers = snapshot.total_outliers();
    if total_in_range == 0 {
        return HistogramStats {
            total_in_range,
            total_outliers,
            derived: None,
        };
    }

    let bins = plan_bins(&snapshot.config).expect("snapshot holds a valid config");
    let total: R = from_count(total_in_range);
    let mut weighted_sum = R::zero();
    for (bin, &count) in bins.iter().zip(&snapshot.bin_counts) {
        if count > 0 {
            weighted_sum = weighted_sum + from_count::<R>(count) * from_f64(bin.midpoint_ns());
        }
    }
    let mean = weighted_sum / total;

    let mut weighted_sq = R::zero();
    for (bin, &count) in bins.iter().zip(&snapshot.bin_counts) {
        if count > 0 {
            let delta = from_f64::<R>(bin.midpoint_ns()) - mean;
            weighted_sq = weighted_sq + from_count::<R>(count) * delta * delta;
        }
    }
    let stddev = (weighted_sq / total).sqrt();

    let pct = |p: f64| -> R {
        percentile(snapshot, from_f64::<R>(p)).expect("total_in_range > 0 and 0 < p < 100")
    };
    HistogramStats {
        total_in_range,
        total_outliers,
        derived: Some(DerivedStats {
            mean_ns: mean,
            stddev_ns: stddev,
            percentiles: Percentiles {
                p25: pct(25.0),
                p50: pct(50.0),
                p75: pct(75.0),
                p90: pct(90.0),
            },
        }),
    }
}

/// The p-th percentile of the bin distribution, `0 < p < 100`, in ns.
///
/// With `T` in-range samples and rank `k = p/100 · T`, finds the first bin
/// whose cumulative count reaches `k` and interpolates linearly inside it:
/// `lo + (k − cum_before) / count · (hi + 1 − lo)`. The result lies within
/// `[lo, hi + 1]` of that bin, so the estimate is off by at most one bin
/// width regardless of where the samples sit inside their bins.
pub fn percentile<R: Real>(snapshot: &HistogramSnapshot, p: R) -> Result<R, HistogramError> {
    if p <= R::zero() || p >= from_f64(100.0) {
        return Err(HistogramError::InvalidPercentile {
            p: p.to_f64().unwrap_or(f64::NAN),
        });
    }
    let total = snapshot.total_in_range();
    if total == 0 {
        return Err(HistogramError::EmptyDistribution);
    }
    if snapshot.bin_counts.len() != snapshot.config.num_bins as usize {
        return Err(HistogramError::CountsLengthMismatch {
            len: snapshot.bin_counts.len(),
            num_bins: snapshot.config.num_bins,
        });
    }

    let bins = plan_bins(&snapshot.config)?;
    let rank = p / from_f64(100.0) * from_count(total);
    let mut cum_before = 0u64;
    for (bin, &count) in bins.iter().zip(&snapshot.bin_counts) {
        if count == 0 {
            continue;
        }
        let cum = cum_before + count;
        if from_count::<R>(cum) >= rank {
            let within = (rank - from_count(cum_before)) / from_count(count);
            let width = from_f64::<R>(bin.hi_ns as f64 + 1.0 - bin.lo_ns as f64);
            return Ok(from_f64::<R>(bin.lo_ns as f64) + within * width);
        }
        cum_before = cum;
    }
    // Float rounding can leave rank a hair above the final cumulative count;
    // the upper edge of the last occupied bin is the correct answer then.
    let last = bins
        .iter()
        .zip(&snapshot.bin_counts)
        .filter(|(_, &c)| c > 0)
        .map(|(b, _)| b)
        .next_back()
        .expect("total > 0 implies an occupied bin");
    Ok(from_f64(last.hi_ns as f64 + 1.0))
}
