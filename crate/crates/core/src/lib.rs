//! Histogram-based RTT telemetry at stream rate, emulated in software.
//!
//! The measurement path mirrors a programmable data plane: 32-bit RTT values
//! are matched against a ternary match-action table whose entries are compiled
//! from histogram bins by range-to-prefix conversion. Every sample lands in
//! exactly one 64-bit per-entry counter (or an outlier counter); a control
//! plane aggregates the counters by bin and derives mean, standard deviation
//! and percentiles from the bin distribution.
//!
//! Modules, bottom-up:
//!
//! * [`prefix`] — integer ranges to minimal ternary prefix sets, plus the
//!   worst-case entry bounds and a decomposition verifier.
//! * [`tcam`] — the ternary table emulator with per-entry counters, batch
//!   install and low/high outlier counting.
//! * [`histogram`] — bin planning, compilation to table entries, counter
//!   aggregation and statistics.
//! * [`sim`] — the per-packet match-and-count path driven at stream rate.
//! * [`traffic`] — seeded synthetic RTT generation and the distribution
//!   arithmetic used to compare measurements against theory.
//! * [`report`] — the JSON statistics document served over REST and written
//!   by the evaluation harness.
//!
//! Derived statistics are generic over the floating-point scalar via
//! [`scalar::Real`]; `f64` is the default everywhere and the only scalar used
//! by the shipped binaries.

pub mod histogram;
pub mod prefix;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod tcam;
pub mod traffic;

pub use histogram::{
    aggregate, compile, compile_bounded, percentile, plan_bins, stats, BinSpec, HistogramConfig,
    HistogramError, HistogramSnapshot, HistogramStats,
};
pub use prefix::{
    range_to_prefixes, verify_decomposition, worst_case_entries_per_bin, worst_case_entries_total,
    IntRange, PrefixError, TernaryPrefix, VerificationReport,
};
pub use scalar::Real;
pub use sim::{PortPipeline, RttSample, RunReport};
pub use tcam::{
    CounterSnapshot, EntryCounter, MatchOutcome, MatchStrategy, MissSide, TableError, TcamTable,
    TernaryEntry, DEFAULT_TABLE_CAPACITY,
};
pub use traffic::{
    expected_packet_count, lognormal_underlying_params, Distribution, RateConvention, TrafficError,
    TrafficSpec, TrafficStream, Volume,
};

/// Statistics at the default `f64` precision.
pub type Stats64 = histogram::HistogramStats<f64>;
/// Statistics at reduced `f32` precision; useful only where memory is tight.
pub type Stats32 = histogram::HistogramStats<f32>;
