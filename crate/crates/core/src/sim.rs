//! Per-packet match-and-count path.
//!
//! Drives RTT samples through a port's ternary table the way the measurement
//! pipeline would: every sample is matched and counted, with no sampling and
//! no drops. One pipeline per RX port; distinct ports are independent.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use crate::tcam::{MatchOutcome, TcamTable};

/// One measured round-trip time: receive minus transmit timestamp, already
/// reduced to a 32-bit nanosecond value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RttSample {
    pub rtt_ns: u32,
    /// RX port the sample arrived on; routing to the right pipeline is the
    /// caller's job.
    pub port: u16,
}

impl RttSample {
    pub fn new(rtt_ns: u32, port: u16) -> Self {
        Self { rtt_ns, port }
    }
}

/// Bulk-processing report from [`PortPipeline::process_stream`].
#[derive(Debug, Clone, Copy)]
pub struct RunReport {
    pub samples: u64,
    pub elapsed: Duration,
    pub samples_per_sec: f64,
}

/// The per-port measurement pipeline: a table plus a processed-packet count.
///
/// `process` takes `&self` so counter readers can snapshot concurrently;
/// the single-writer contract of [`TcamTable`] carries over — exactly one
/// thread drives samples into a pipeline at a time.
pub struct PortPipeline {
    port: u16,
    table: TcamTable,
    packets: AtomicU64,
}

impl PortPipeline {
    pub fn new(port: u16, table: TcamTable) -> Self {
        Self {
            port,
            table,
            packets: AtomicU64::new(0),
        }
    }

    pub fn port(&self) -> u16 {
        self.port
    }

    pub fn table(&self) -> &TcamTable {
        &self.table
    }

    /// Exclusive table access for install/reset; mirrors the table's own
    /// exclusivity requirement.
    pub fn table_mut(&mut self) -> &mut TcamTable {
        &mut self.table
    }

    /// Samples processed since construction. Read this before a counter
    /// snapshot: the match counter is incremented first, so a concurrent
    /// snapshot can only show a sum at or above the packet count read
    /// beforehand.
    pub fn packets_processed(&self) -> u64 {
        self.packets.load(Ordering::Relaxed)
    }

    /// Matches and counts one sample. Exactly one counter — a bin counter or
    /// one of the miss sides — is incremented; nothing is ever dropped or
    /// sampled away.
    pub fn process(&self, sample: RttSample) -> MatchOutcome {
        debug_assert_eq!(sample.port, self.port, "sample routed to wrong pipeline");
        let outcome = self.table.match_key(sample.rtt_ns);
        self.packets.fetch_add(1, Ordering::Relaxed);
        outcome
    }

    /// Folds [`Self::process`] over a sample stream, reporting throughput.
    pub fn process_stream(&self, samples: impl IntoIterator<Item = RttSample>) -> RunReport {
        let started = Instant::now();
        let mut count = 0u64;
        for sample in samples {
            self.table.match_key(sample.rtt_ns);
            count += 1;
        }
        self.packets.fetch_add(count, Ordering::Relaxed);
        let elapsed = started.elapsed();
        RunReport {
            samples: count,
            elapsed,
            samples_per_sec: count as f64 / elapsed.as_secs_f64().max(f64::MIN_POSITIVE),
        }
    }

    /// Exact conservation check: every processed packet is in exactly one
    /// counter. Only meaningful while no writer is mid-stream.
    pub fn conservation_holds(&self) -> bool {
        self.table.read_counters().total() == self.packets_processed()
    }
}
