//! Ternary match-action table emulator.
//!
//! Entries are (value, mask) prefixes over a 32-bit key with a bin index as
//! action data and a 64-bit match counter each. Installation is batch-only
//! and all-or-nothing; entries must be pairwise disjoint, which makes the
//! at-most-one-match property structural rather than priority-resolved.
//! Keys that match no entry are counted as outliers, split into a low side
//! (below the smallest covered value) and a high side.
//!
//! Concurrency contract: one writer thread drives [`TcamTable::match_key`];
//! any number of threads may call [`TcamTable::read_counters`] concurrently.
//! Per-entry counter reads are atomic (never torn); a snapshot taken during
//! matching may be slightly stale as a whole. `install_batch` and `reset`
//! take `&mut self` and therefore exclusive access.

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::prefix::TernaryPrefix;

/// Default table capacity in entries.
pub const DEFAULT_TABLE_CAPACITY: usize = 8196;

/// Key width the table matches on, in bits.
pub const KEY_WIDTH_BITS: u8 = 32;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum TableError {
    #[error("table capacity is {capacity} entries, batch has {requested}")]
    CapacityExceeded { capacity: usize, requested: usize },
    #[error("entries {first} and {second} overlap in covered values")]
    OverlappingEntries { first: usize, second: usize },
    #[error("entry {ordinal} has width {width_bits}, table matches {KEY_WIDTH_BITS}-bit keys")]
    EntryWidth { ordinal: usize, width_bits: u8 },
}

/// One installable table entry: a 32-bit prefix plus its bin index.
///
/// The bin index is opaque action data, ignored during matching; the control
/// plane uses it to aggregate counters into bins. The match counter lives in
/// the table and starts at zero on installation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TernaryEntry {
    pub prefix: TernaryPrefix,
    pub bin_index: u32,
}

impl TernaryEntry {
    pub fn new(prefix: TernaryPrefix, bin_index: u32) -> Self {
        Self { prefix, bin_index }
    }
}

/// Which side of the covered value range a missed key fell on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissSide {
    /// Key below the smallest value covered by any entry.
    Low,
    /// Key above or inside a gap; for compiled histograms, above the range.
    High,
}

/// Outcome of matching one key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchOutcome {
    /// The key matched an entry carrying this bin index.
    Bin(u32),
    Miss(MissSide),
}

/// Lookup strategy. Both are observationally identical on valid tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchStrategy {
    /// Scan every entry; detects (and hard-faults on) duplicate matches.
    Linear,
    /// Binary search over the disjoint covered intervals.
    #[default]
    IntervalIndex,
}

struct Slot {
    value: u32,
    mask: u32,
    covered_lo: u32,
    covered_hi: u32,
    bin_index: u32,
    counter: AtomicU64,
}

/// Per-entry counter value in a [`CounterSnapshot`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntryCounter {
    /// Position of the entry in the installed batch.
    pub ordinal: usize,
    pub bin_index: u32,
    pub count: u64,
}

/// Snapshot of all table counters at one poll instant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterSnapshot {
    pub entries: Vec<EntryCounter>,
    pub miss_low: u64,
    pub miss_high: u64,
}

impl CounterSnapshot {
    /// Sum of all per-entry match counters.
    pub fn total_matched(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    /// Matched plus missed: every key ever processed.
    pub fn total(&self) -> u64 {
        self.total_matched() + self.miss_low + self.miss_high
    }
}

/// The emulated match-action table.
pub struct TcamTable {
    slots: Vec<Slot>,
    /// Slot ordinals sorted by covered_lo, for the interval index.
    by_start: Vec<u32>,
    capacity: usize,
    strategy: MatchStrategy,
    /// Smallest covered value of any installed entry; splits misses into
    /// low/high sides. Zero while empty, so an empty table misses high.
    lowest_covered: u32,
    miss_low: AtomicU64,
    miss_high: AtomicU64,
}

impl TcamTable {
    /// Empty table with the default capacity of 8196 entries.
    pub fn new() -> Self {
        Self::with_capacity(DEFAULT_TABLE_CAPACITY)
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            slots: Vec::new(),
            by_start: Vec::new(),
            capacity,
            strategy: MatchStrategy::default(),
            lowest_covered: 0,
            miss_low: AtomicU64::new(0),
            miss_high: AtomicU64::new(0),
        }
    }

    pub fn set_strategy(&mut self, strategy: MatchStrategy) {
        self.strategy = strategy;
    }

    pub fn strategy(&self) -> MatchStrategy {
        self.strategy
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// The installed entries, in batch order.
    pub fn entries(&self) -> impl Iterator<Item = TernaryEntry> + '_ {
        self.slots.iter().map(|s| TernaryEntry {
            prefix: TernaryPrefix::new(s.value, s.mask, KEY_WIDTH_BITS)
                .expect("installed slots hold valid prefixes"),
            bin_index: s.bin_index,
        })
    }

    /// Replaces the table contents with `entries`, atomically.
    ///
    /// Validates width, capacity and pairwise disjointness up front; on any
    /// error the table is left untouched. On success all match and miss
    /// counters start from zero.
    pub fn install_batch(&mut self, entries: &[TernaryEntry]) -> Result<(), TableError> {
        if entries.len() > self.capacity {
            return Err(TableError::CapacityExceeded {
                capacity: self.capacity,
                requested: entries.len(),
            });
        }
        for (ordinal, e) in entries.iter().enumerate() {
            if e.prefix.width_bits() != KEY_WIDTH_BITS {
                return Err(TableError::EntryWidth {
                    ordinal,
                    width_bits: e.prefix.width_bits(),
                });
            }
        }
        let mut by_start: Vec<u32> = (0..entries.len() as u32).collect();
        by_start.sort_unstable_by_key(|&i| entries[i as usize].prefix.covered_lo());
        for pair in by_start.windows(2) {
            let (a, b) = (pair[0] as usize, pair[1] as usize);
            if entries[a].prefix.covered_hi() >= entries[b].prefix.covered_lo() {
                return Err(TableError::OverlappingEntries {
                    first: a.min(b),
                    second: a.max(b),
                });
            }
        }

        self.slots = entries
            .iter()
            .map(|e| Slot {
                value: e.prefix.value(),
                mask: e.prefix.mask(),
                covered_lo: e.prefix.covered_lo(),
                covered_hi: e.prefix.covered_hi(),
                bin_index: e.bin_index,
                counter: AtomicU64::new(0),
            })
            .collect();
        self.lowest_covered = by_start
            .first()
            .map(|&i| entries[i as usize].prefix.covered_lo())
            .unwrap_or(0);
        self.by_start = by_start;
        self.miss_low.store(0, Ordering::Relaxed);
        self.miss_high.store(0, Ordering::Relaxed);
        Ok(())
    }

    /// Removes all entries and zeroes the miss counters.
    pub fn reset(&mut self) {
        self.slots.clear();
        self.by_start.clear();
        self.lowest_covered = 0;
        self.miss_low.store(0, Ordering::Relaxed);
        self.miss_high.store(0, Ordering::Relaxed);
    }

    // Saturating increment; exact under the single-writer contract and never
    // wraps, so counters never under-report by overflow.
    fn bump(counter: &AtomicU64) {
        let current = counter.load(Ordering::Relaxed);
        if current != u64::MAX {
            counter.store(current + 1, Ordering::Relaxed);
        }
    }

    /// Matches one 32-bit key, incrementing the hit entry's counter or the
    /// appropriate miss counter.
    ///
    /// Panics if two installed entries match the same key: that indicates a
    /// corrupted install and is surfaced as a hard fault, never resolved by
    /// priority. (Only the `Linear` strategy can observe it; `install_batch`
    /// makes it unreachable through the public API.)
    pub fn match_key(&self, key: u32) -> MatchOutcome {
        let hit = match self.strategy {
            MatchStrategy::IntervalIndex => self.lookup_indexed(key),
            MatchStrategy::Linear => self.lookup_linear(key),
        };
        match hit {
            Some(ordinal) => {
                let slot = &self.slots[ordinal];
                Self::bump(&slot.counter);
                MatchOutcome::Bin(slot.bin_index)
            }
            None => {
                let side = if key < self.lowest_covered {
                    MissSide::Low
                } else {
                    MissSide::High
                };
                match side {
                    MissSide::Low => Self::bump(&self.miss_low),
                    MissSide::High => Self::bump(&self.miss_high),
                }
                MatchOutcome::Miss(side)
            }
        }
    }

    fn lookup_indexed(&self, key: u32) -> Option<usize> {
        let idx = self
            .by_start
            .partition_point(|&i| self.slots[i as usize].covered_lo <= key);
        if idx == 0 {
            return None;
        }
        let ordinal = self.by_start[idx - 1] as usize;
        let slot = &self.slots[ordinal];
        (key <= slot.covered_hi).then_some(ordinal)
    }

    fn lookup_linear(&self, key: u32) -> Option<usize> {
        let mut hit = None;
        for (ordinal, slot) in self.slots.iter().enumerate() {
            if key & slot.mask == slot.value {
                if let Some(first) = hit {
                    panic!(
                        "ternary invariant violated: key {key:#010x} matches \
                         entries {first} and {ordinal}"
                    );
                }
                hit = Some(ordinal);
            }
        }
        hit
    }

    /// Copies out every counter. Reading does not reset anything; each value
    /// is read atomically, so no entry is ever torn, though the snapshot as a
    /// whole may lag concurrent matching.
    pub fn read_counters(&self) -> CounterSnapshot {
        CounterSnapshot {
            entries: self
                .slots
                .iter()
                .enumerate()
                .map(|(ordinal, slot)| EntryCounter {
                    ordinal,
                    bin_index: slot.bin_index,
                    count: slot.counter.load(Ordering::Relaxed),
                })
                .collect(),
            miss_low: self.miss_low.load(Ordering::Relaxed),
            miss_high: self.miss_high.load(Ordering::Relaxed),
        }
    }

    /// Combined outlier count, for parity with counters that do not split
    /// the miss side.
    pub fn total_misses(&self) -> u64 {
        self.miss_low.load(Ordering::Relaxed) + self.miss_high.load(Ordering::Relaxed)
    }

    #[cfg(test)]
    fn preload_counter(&mut self, ordinal: usize, value: u64) {
        self.slots[ordinal].counter.store(value, Ordering::Relaxed);
    }

    #[cfg(test)]
    fn install_unchecked(&mut self, entries: &[TernaryEntry]) {
        self.slots = entries
            .iter()
            .map(|e| Slot {
                value: e.prefix.value(),
                mask: e.prefix.mask(),
                covered_lo: e.prefix.covered_lo(),
                covered_hi: e.prefix.covered_hi(),
                bin_index: e.bin_index,
                counter: AtomicU64::new(0),
            })
            .collect();
        let mut by_start: Vec<u32> = (0..self.slots.len() as u32).collect();
        by_start.sort_unstable_by_key(|&i| self.slots[i as usize].covered_lo);
        self.by_start = by_start;
    }
}

impl Default for TcamTable {
    fn default() -> Self {
        Self::new()
    }
}
