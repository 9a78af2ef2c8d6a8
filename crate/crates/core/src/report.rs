//! The statistics document served over REST and written by the evaluation
//! harness.
//!
//! Counters are 64-bit and must survive JSON consumers that parse numbers as
//! IEEE-754 doubles: any count above `2^53 − 1` is serialized as a decimal
//! string instead of a number, and the document-level `counts_exact` flag
//! records whether that fallback was needed anywhere.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::histogram::{plan_bins, stats, HistogramConfig, HistogramSnapshot};

/// Largest u64 a double-parsing JSON consumer reads back exactly.
pub const MAX_EXACT_JSON_COUNT: u64 = (1 << 53) - 1;

/// A packet count that serializes as a JSON number while exact in a double,
/// and as a decimal string beyond that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Count(pub u64);

impl From<u64> for Count {
    fn from(value: u64) -> Self {
        Count(value)
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0 <= MAX_EXACT_JSON_COUNT {
            serializer.serialize_u64(self.0)
        } else {
            serializer.serialize_str(&self.0.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(n) => Ok(Count(n)),
            Raw::Text(s) => s.parse().map(Count).map_err(D::Error::custom),
        }
    }
}

/// One bin row: edges, midpoint and count, plus the theoretical probability
/// mass when the document comes from an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub bin_index: u32,
    pub lo_ns: u32,
    pub hi_ns: u32,
    pub midpoint_ns: f64,
    pub count: Count,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theoretical_mass: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierCounts {
    pub low: Count,
    pub high: Count,
    pub total: Count,
}

/// Percentiles of the bin distribution, keyed by rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentileSet {
    #[serde(rename = "25")]
    pub p25: f64,
    #[serde(rename = "50")]
    pub p50: f64,
    #[serde(rename = "75")]
    pub p75: f64,
    #[serde(rename = "90")]
    pub p90: f64,
}

/// Snapshot plus derived statistics, ready for JSON.
///
/// `mean_ns`, `stddev_ns` and `percentiles` are absent (`null`) rather than
/// zero while no in-range packet has been counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsDocument {
    pub config: HistogramConfig,
    /// Base bin width; the last bin may be wider by the division remainder.
    pub bin_width_ns: u32,
    pub bins: Vec<BinRow>,
    pub outliers: OutlierCounts,
    pub total_in_range: Count,
    pub total_packets: Count,
    pub mean_ns: Option<f64>,
    pub stddev_ns: Option<f64>,
    pub percentiles: Option<PercentileSet>,
    /// True when every count in the document fits a double exactly and was
    /// emitted as a JSON number; false when any count fell back to a string.
    pub counts_exact: bool,
}

/// Renders a snapshot into the wire document. `masses` attaches the
/// theoretical per-bin probability column when present; its length must
/// equal the bin count.
pub fn build_stats_document(snapshot: &HistogramSnapshot, masses: Option<&[f64]>) -> StatsDocument {
    let bins = plan_bins(&snapshot.config).expect("snapshot holds a valid config");
    if let Some(masses) = masses {
        assert_eq!(masses.len(), bins.len(), "one mass per bin");
    }
    let computed = stats::<f64>(snapshot);

    let rows: Vec<BinRow> = bins
        .iter()
        .map(|bin| BinRow {
            bin_index: bin.index,
            lo_ns: bin.lo_ns,
            hi_ns: bin.hi_ns,
            midpoint_ns: bin.midpoint_ns(),
            count: Count(snapshot.bin_counts[bin.index as usize]),
            theoretical_mass: masses.map(|m| m[bin.index as usize]),
        })
        .collect();

    let counts_exact = snapshot
        .bin_counts
        .iter()
        .chain([&snapshot.miss_low, &snapshot.miss_high])
        .all(|&c| c <= MAX_EXACT_JSON_COUNT)
        && snapshot.total() <= MAX_EXACT_JSON_COUNT;

    StatsDocument {
        config: snapshot.config,
        bin_width_ns: snapshot.config.base_width_ns(),
        bins: rows,
        outliers: OutlierCounts {
            low: Count(snapshot.miss_low),
            high: Count(snapshot.miss_high),
            total: Count(snapshot.total_outliers()),
        },
        total_in_range: Count(computed.total_in_range),
        total_packets: Count(snapshot.total()),
        mean_ns: computed.derived.as_ref().map(|d| d.mean_ns),
        stddev_ns: computed.derived.as_ref().map(|d| d.stddev_ns),
        percentiles: computed.derived.as_ref().map(|d| PercentileSet {
            p25: d.percentiles.p25,
            p50: d.percentiles.p50,
            p75: d.percentiles.p75,
            p90: d.percentiles.p90,
        }),
        counts_exact,
    }
}
