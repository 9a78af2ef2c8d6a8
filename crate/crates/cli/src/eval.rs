//! The evaluation runner: compile a histogram, stream synthetic (or file)
//! RTT samples through it, and write per-bin data plus a summary.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use histeval_core::histogram::{
    aggregate, compile_bounded, plan_bins, HistogramConfig, HistogramError,
};
use histeval_core::report::{build_stats_document, Count, StatsDocument};
use histeval_core::sim::{PortPipeline, RttSample, RunReport};
use histeval_core::tcam::{TableError, TcamTable};
use histeval_core::traffic::{TrafficError, TrafficSpec};

use crate::input::{read_samples, InputError, InputFormat};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Histogram(#[from] HistogramError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Where the RTT samples come from.
pub enum SampleSource {
    /// Seeded synthetic traffic; enables the theoretical-mass column.
    Spec(TrafficSpec),
    /// Pre-recorded samples; the theoretical column stays empty.
    File { path: PathBuf, format: InputFormat },
}

pub struct EvalOptions {
    pub config: HistogramConfig,
    pub capacity: usize,
    pub source: SampleSource,
    pub port: u16,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Everything an evaluation writes to disk. Deterministic for a given
/// (config, spec, seed): no timestamps or rates in here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalDocument {
    #[serde(flatten)]
    pub stats: StatsDocument,
    pub entries_compiled: u64,
    pub samples_processed: Count,
    /// Draws clamped into the 32-bit domain during generation.
    pub clamped: Count,
}

pub struct EvalOutcome {
    pub document: EvalDocument,
    pub run: RunReport,
}

/// Runs one evaluation end to end. Capacity errors surface before anything
/// is installed; conservation (every sample in exactly one counter) is
/// asserted on the final snapshot.
pub fn run_eval(options: &EvalOptions) -> Result<EvalOutcome, EvalError> {
    let entries = compile_bounded(&options.config, options.capacity)?;
    let entries_compiled = entries.len() as u64;
    let mut table = TcamTable::with_capacity(options.capacity);
    table.install_batch(&entries)?;
    let pipeline = PortPipeline::new(options.port, table);

    let (run, clamped, masses) = match &options.source {
        SampleSource::Spec(spec) => {
            let mut stream = spec.stream(options.port)?;
            let run = pipeline.process_stream(&mut stream);
            let bins = plan_bins(&options.config)?;
            let masses: Vec<f64> = bins
                .iter()
                .map(|b| spec.distribution.bin_mass(b.lo_ns, b.hi_ns))
                .collect();
            (run, stream.clamped(), Some(masses))
        }
        SampleSource::File { path, format } => {
            let samples = read_samples(path, *format)?;
            let port = options.port;
            let run =
                pipeline.process_stream(samples.into_iter().map(|rtt| RttSample::new(rtt, port)));
            (run, 0, None)
        }
    };

    let snapshot = aggregate(&pipeline.table().read_counters(), &options.config)?;
    assert_eq!(
        snapshot.total(),
        run.samples,
        "conservation violated: {} counted of {} processed",
        snapshot.total(),
        run.samples
    );

    let document = EvalDocument {
        stats: build_stats_document(&snapshot, masses.as_deref()),
        entries_compiled,
        samples_processed: Count(run.samples),
        clamped: Count(clamped),
    };

    if let Some(path) = &options.out {
        let mut file = std::fs::File::create(path)?;
        match options.format {
            OutputFormat::Csv => write_csv(&mut file, &document)?,
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut file, &document)
                    .map_err(std::io::Error::other)?;
                file.write_all(b"\n")?;
            }
        }
    }

    Ok(EvalOutcome { document, run })
}

/// Per-bin rows, exactly `bin_index,lo_ns,hi_ns,midpoint_ns,count,theoretical_mass`.
pub fn write_csv(out: &mut impl Write, document: &EvalDocument) -> std::io::Result<()> {
    writeln!(
        out,
        "bin_index,lo_ns,hi_ns,midpoint_ns,count,theoretical_mass"
    )?;
    for row in &document.stats.bins {
        write!(
            out,
            "{},{},{},{},{},",
            row.bin_index, row.lo_ns, row.hi_ns, row.midpoint_ns, row.count.0
        )?;
        match row.theoretical_mass {
            Some(mass) => writeln!(out, "{mass}")?,
            None => writeln!(out)?,
        }
    }
    Ok(())
}

/// Human-readable run summary for stdout; the wall-time figures live here
/// and never in the output file.
pub fn render_summary(outcome: &EvalOutcome, out_path: Option<&Path>) -> String {
    let doc = &outcome.document;
    let stats = &doc.stats;
    let mut text = String::new();
    text.push_str(&format!(
        "entries compiled: {}\nsamples: {} (clamped: {})\n",
        doc.entries_compiled, doc.samples_processed.0, doc.clamped.0
    ));
    text.push_str(&format!(
        "in range: {}  outliers: low {} high {}\n",
        stats.total_in_range.0, stats.outliers.low.0, stats.outliers.high.0
    ));
    match (&stats.mean_ns, &stats.stddev_ns, &stats.percentiles) {
        (Some(mean), Some(stddev), Some(p)) => {
            text.push_str(&format!("mean: {mean:.1} ns  stddev: {stddev:.1} ns\n"));
            text.push_str(&format!(
                "p25: {:.1}  p50: {:.1}  p75: {:.1}  p90: {:.1} ns\n",
                p.p25, p.p50, p.p75, p.p90
            ));
        }
        _ => text.push_str("statistics: absent (no in-range samples)\n"),
    }
    text.push_str(&format!(
        "throughput: {:.3e} samples/s ({:.3} s)\n",
        outcome.run.samples_per_sec,
        outcome.run.elapsed.as_secs_f64()
    ));
    if let Some(path) = out_path {
        text.push_str(&format!("wrote {}\n", path.display()));
    }
    text
}
