//! Per-port registry: configuration, pipelines and the latest polled
//! statistics.
//!
//! Locking layout, per port: `update` serializes configure/delete against
//! the poll loop's snapshot publication, so `latest` always reflects the
//! current configuration. The pipeline sits behind an `RwLock`: sample
//! drivers and counter polls share read access (counters are atomic),
//! install and reset take the write side. `driving` flags an active sample
//! driver so configuration changes are refused rather than racing traffic.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use histeval_core::histogram::{aggregate, compile_bounded, HistogramConfig, HistogramSnapshot};
use histeval_core::report::{build_stats_document, StatsDocument};
use histeval_core::sim::{PortPipeline, RttSample};
use histeval_core::tcam::TcamTable;

use crate::error::ApiError;

/// Response to a successful configure call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigureResponse {
    /// Ternary entries compiled and installed for this histogram.
    pub num_entries: u64,
    /// Base bin width; the last bin may absorb a remainder.
    pub bin_width_ns: u32,
    pub bins: u32,
}

/// One port's configured measurement state.
pub struct ConfiguredPort {
    pub config: HistogramConfig,
    pub pipeline: PortPipeline,
    pub entries_installed: usize,
}

struct PortSlot {
    update: Mutex<()>,
    configured: RwLock<Option<ConfiguredPort>>,
    latest: RwLock<Option<StatsDocument>>,
    driving: AtomicBool,
}

impl PortSlot {
    fn new() -> Self {
        Self {
            update: Mutex::new(()),
            configured: RwLock::new(None),
            latest: RwLock::new(None),
            driving: AtomicBool::new(false),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortInfo {
    pub port: u16,
    pub configured: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortsResponse {
    pub ports: Vec<PortInfo>,
    pub capacity: usize,
}

/// Shared service state: a fixed set of ports and the table capacity.
pub struct AppState {
    ports: BTreeMap<u16, PortSlot>,
    capacity: usize,
}

impl AppState {
    pub fn new(ports: impl IntoIterator<Item = u16>, capacity: usize) -> Self {
        Self {
            ports: ports.into_iter().map(|p| (p, PortSlot::new())).collect(),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn slot(&self, port: u16) -> Result<&PortSlot, ApiError> {
        self.ports
            .get(&port)
            .ok_or_else(|| ApiError::not_found(format!("port {port} is not registered")))
    }

    /// Plans, compiles and installs a histogram on a quiescent port,
    /// discarding any previous configuration and counters. Transactional:
    /// on any failure the port keeps its previous state.
    pub fn configure(
        &self,
        port: u16,
        config: HistogramConfig,
    ) -> Result<ConfigureResponse, ApiError> {
        let slot = self.slot(port)?;
        if slot.driving.load(Ordering::Acquire) {
            return Err(ApiError::quiescence(format!(
                "port {port} has traffic being driven; stop it before reconfiguring"
            )));
        }
        let _update = slot.update.lock();

        config.validate()?;
        let entries = compile_bounded(&config, self.capacity)?;
        let mut table = TcamTable::with_capacity(self.capacity);
        table
            .install_batch(&entries)
            .map_err(|e| ApiError::internal(format!("compiled entries failed install: {e}")))?;

        let entries_installed = entries.len();
        *slot.configured.write() = Some(ConfiguredPort {
            config,
            pipeline: PortPipeline::new(port, table),
            entries_installed,
        });
        *slot.latest.write() = Some(build_stats_document(
            &HistogramSnapshot::empty(config),
            None,
        ));

        Ok(ConfigureResponse {
            num_entries: entries_installed as u64,
            bin_width_ns: config.base_width_ns(),
            bins: config.num_bins,
        })
    }

    /// The most recent polled statistics document for a configured port.
    pub fn stats(&self, port: u16) -> Result<StatsDocument, ApiError> {
        let slot = self.slot(port)?;
        slot.latest
            .read()
            .clone()
            .ok_or_else(|| ApiError::not_found(format!("port {port} has no histogram configured")))
    }

    /// Clears a port: table reset, configuration and statistics gone.
    pub fn delete(&self, port: u16) -> Result<(), ApiError> {
        let slot = self.slot(port)?;
        if slot.driving.load(Ordering::Acquire) {
            return Err(ApiError::quiescence(format!(
                "port {port} has traffic being driven; stop it before deleting"
            )));
        }
        let _update = slot.update.lock();
        if slot.configured.write().take().is_none() {
            return Err(ApiError::not_found(format!(
                "port {port} has no histogram configured"
            )));
        }
        *slot.latest.write() = None;
        Ok(())
    }

    pub fn ports(&self) -> PortsResponse {
        PortsResponse {
            ports: self
                .ports
                .iter()
                .map(|(&port, slot)| PortInfo {
                    port,
                    configured: slot.configured.read().is_some(),
                })
                .collect(),
            capacity: self.capacity,
        }
    }

    /// Drives a sample batch through a configured port's pipeline.
    ///
    /// Marks the port as driving for the duration, which makes concurrent
    /// configure/delete calls fail with a quiescence conflict, and refuses a
    /// second concurrent driver (the pipeline is single-writer).
    pub fn drive_samples(
        &self,
        port: u16,
        samples: impl IntoIterator<Item = RttSample>,
    ) -> Result<u64, ApiError> {
        let slot = self.slot(port)?;
        if slot.driving.swap(true, Ordering::AcqRel) {
            return Err(ApiError::quiescence(format!(
                "port {port} is already being driven"
            )));
        }
        let _guard = ClearOnDrop(&slot.driving);

        let configured = slot.configured.read();
        let state = configured.as_ref().ok_or_else(|| {
            ApiError::not_found(format!("port {port} has no histogram configured"))
        })?;
        let mut count = 0u64;
        for sample in samples {
            state.pipeline.process(sample);
            count += 1;
        }
        Ok(count)
    }

    /// One polling sweep: read counters, aggregate, derive statistics and
    /// atomically replace each configured port's `latest` document. A port
    /// that fails to aggregate keeps its previous document; partial data is
    /// never published.
    pub fn poll_once(&self) {
        for (&port, slot) in &self.ports {
            let _update = slot.update.lock();
            let configured = slot.configured.read();
            let Some(state) = configured.as_ref() else {
                continue;
            };
            // Reading the packet count first bounds the sum from below: the
            // pipeline bumps match counters before the packet count.
            let packets_before = state.pipeline.packets_processed();
            let counters = state.pipeline.table().read_counters();
            match aggregate(&counters, &state.config) {
                Ok(snapshot) => {
                    let total = snapshot.total();
                    if total < packets_before {
                        tracing::warn!(
                            port,
                            total,
                            packets_before,
                            "counter snapshot lost packets; keeping previous statistics"
                        );
                        continue;
                    }
                    let doc = build_stats_document(&snapshot, None);
                    *slot.latest.write() = Some(doc);
                }
                Err(err) => {
                    tracing::warn!(port, %err, "poll failed; keeping previous statistics");
                }
            }
        }
    }
}

struct ClearOnDrop<'a>(&'a AtomicBool);

impl Drop for ClearOnDrop<'_> {
    fn drop(&mut self) {
        self.0.store(false, Ordering::Release);
    }
}
