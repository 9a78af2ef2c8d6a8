//! `histeval` — drive RTT histograms the way the hardware pipeline would:
//! compile bins to ternary entries, stream traffic, read back statistics.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use histeval::eval::{render_summary, run_eval, EvalOptions, OutputFormat, SampleSource};
use histeval::input::InputFormat;
use histeval_core::histogram::HistogramConfig;
use histeval_core::prefix::{range_to_prefixes, IntRange};
use histeval_core::tcam::DEFAULT_TABLE_CAPACITY;
use histeval_core::traffic::{
    expected_packet_count_with, Distribution, RateConvention, TrafficSpec, Volume,
};
use histeval_service::{AppState, ServiceConfig};

#[derive(Parser)]
#[command(
    name = "histeval",
    version,
    about = "Histogram-based RTT measurement emulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream synthetic or recorded RTT samples through a compiled histogram
    /// and write per-bin results.
    Run(RunArgs),
    /// Convert an integer range into its minimal ternary prefix set.
    Decompose(DecomposeArgs),
    /// Packets in a constant-bit-rate stream: rate / (frame bits) · duration.
    ExpectedCount(ExpectedCountArgs),
    /// Start the REST control service (optionally with a built-in traffic
    /// driver).
    Serve(ServeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistKind {
    Lognormal,
    Constant,
    Uniform,
}

#[derive(Args)]
struct DistArgs {
    /// Sample distribution.
    #[arg(long, value_enum)]
    dist: Option<DistKind>,
    /// Log-normal mean in ns.
    #[arg(long)]
    mean: Option<f64>,
    /// Log-normal standard deviation in ns.
    #[arg(long)]
    std: Option<f64>,
    /// Constant RTT value in ns.
    #[arg(long)]
    value: Option<u32>,
    /// Uniform lower bound in ns (inclusive).
    #[arg(long)]
    lo: Option<u32>,
    /// Uniform upper bound in ns (inclusive).
    #[arg(long)]
    hi: Option<u32>,
}

impl DistArgs {
    fn build(&self) -> anyhow::Result<Distribution> {
        match self.dist {
            Some(DistKind::Lognormal) => {
                let mean_ns = self.mean.context("--dist lognormal requires --mean")?;
                let stddev_ns = self.std.context("--dist lognormal requires --std")?;
                Ok(Distribution::Lognormal { mean_ns, stddev_ns })
            }
            Some(DistKind::Constant) => Ok(Distribution::Constant {
                value_ns: self.value.context("--dist constant requires --value")?,
            }),
            Some(DistKind::Uniform) => Ok(Distribution::Uniform {
                lo_ns: self.lo.context("--dist uniform requires --lo")?,
                hi_ns: self.hi.context("--dist uniform requires --hi")?,
            }),
            None => bail!("no distribution given"),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Histogram lower edge in ns (inclusive).
    #[arg(long)]
    min: u32,
    /// Histogram upper edge in ns (exclusive).
    #[arg(long)]
    max: u32,
    /// Number of equally-sized bins.
    #[arg(long)]
    bins: u32,
    /// Ternary table capacity.
    #[arg(long, default_value_t = DEFAULT_TABLE_CAPACITY)]
    capacity: usize,

    #[command(flatten)]
    dist: DistArgs,

    /// Number of samples to generate.
    #[arg(long, conflicts_with_all = ["rate", "frame", "duration"])]
    samples: Option<u64>,
    /// CBR rate in bit/s (use with --frame and --duration).
    #[arg(long, requires = "frame", requires = "duration")]
    rate: Option<f64>,
    /// Frame size in bytes.
    #[arg(long)]
    frame: Option<u32>,
    /// Stream duration in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Account 20 bytes/frame of L1 overhead in the rate.
    #[arg(long)]
    l1: bool,

    /// Read samples from a file instead of generating them.
    #[arg(long, conflicts_with_all = ["dist", "samples", "rate", "seed"])]
    input: Option<PathBuf>,
    /// Sample file format.
    #[arg(long, value_enum, default_value_t = InputFormatArg::Text)]
    input_format: InputFormatArg,

    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// RX port id carried on the samples.
    #[arg(long, default_value_t = 0)]
    port: u16,
    /// Output file for the per-bin data.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormatArg {
    Text,
    BinaryLe,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Range lower bound (inclusive).
    #[arg(long)]
    lo: u32,
    /// Range upper bound (inclusive).
    #[arg(long)]
    hi: u32,
    /// Field width in bits.
    #[arg(long, default_value_t = 32)]
    width: u8,
}

#[derive(Args)]
struct ExpectedCountArgs {
    /// Stream rate in bit/s (scientific notation accepted, e.g. 20e9).
    #[arg(long)]
    rate: f64,
    /// Frame size in bytes.
    #[arg(long)]
    frame: u32,
    /// Duration in seconds.
    #[arg(long)]
    duration: f64,
    /// Account 20 bytes/frame of L1 overhead.
    #[arg(long)]
    l1: bool,
}

#[derive(Args)]
struct ServeArgs {
    /// Listen address.
    #[arg(long, default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Counter polling interval in milliseconds.
    #[arg(long, default_value_t = 500)]
    poll_interval_ms: u64,
    /// Ternary table capacity per port.
    #[arg(long, default_value_t = DEFAULT_TABLE_CAPACITY)]
    capacity: usize,
    /// RX ports to register, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    ports: Vec<u16>,
    /// TOML config file; overrides the flags above entirely.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Continuously drive synthetic traffic into this port once it is
    /// configured.
    #[arg(long)]
    drive_port: Option<u16>,
    #[command(flatten)]
    dist: DistArgs,
    /// Driver pacing in packets per second (0 = unthrottled).
    #[arg(long, default_value_t = 0.0)]
    pps: f64,
    /// Stop the driver after this many samples (default: endless).
    #[arg(long)]
    drive_samples: Option<u64>,
    /// Driver seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(args),
        Command::Decompose(args) => decompose(args),
        Command::ExpectedCount(args) => expected_count(args),
        Command::Serve(args) => serve(args),
    }
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let config = HistogramConfig::new(args.min, args.max, args.bins)?;
    let source = if let Some(path) = args.input {
        SampleSource::File {
            path,
            format: match args.input_format {
                InputFormatArg::Text => InputFormat::Text,
                InputFormatArg::BinaryLe => InputFormat::BinaryLe,
            },
        }
    } else {
        let distribution = args
            .dist
            .build()
            .context("choose a traffic source: --dist … or --input FILE")?;
        let convention = if args.l1 {
            RateConvention::L1
        } else {
            RateConvention::L2
        };
        let volume = match (args.samples, args.rate) {
            (Some(count), None) => Volume::Count(count),
            (None, Some(rate_bps)) => Volume::Rate {
                rate_bps,
                frame_size_bytes: args.frame.context("--rate requires --frame")?,
                duration_s: args.duration.context("--rate requires --duration")?,
                convention,
            },
            (None, None) => {
                bail!("give a traffic volume: --samples N or --rate/--frame/--duration")
            }
            (Some(_), Some(_)) => unreachable!("clap rejects --samples with --rate"),
        };
        SampleSource::Spec(TrafficSpec {
            distribution,
            volume,
            seed: args.seed,
        })
    };

    let options = EvalOptions {
        config,
        capacity: args.capacity,
        source,
        port: args.port,
        out: args.out.clone(),
        format: match args.format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        },
    };
    let outcome = run_eval(&options)?;
    print!("{}", render_summary(&outcome, args.out.as_deref()));
    Ok(())
}

fn decompose(args: DecomposeArgs) -> anyhow::Result<()> {
    let range = IntRange::new(args.lo, args.hi, args.width)?;
    let prefixes = range_to_prefixes(&range);
    let hex_digits = (args.width as usize).div_ceil(4);
    for p in &prefixes {
        println!(
            "{p} ({})  0x{:0hex$X}/0x{:0hex$X}",
            p.pattern(),
            p.value(),
            p.mask(),
            hex = hex_digits,
        );
    }
    println!(
        "{} entr{} for [{}, {}] at {} bits",
        prefixes.len(),
        if prefixes.len() == 1 { "y" } else { "ies" },
        args.lo,
        args.hi,
        args.width
    );
    Ok(())
}

fn expected_count(args: ExpectedCountArgs) -> anyhow::Result<()> {
    let convention = if args.l1 {
        RateConvention::L1
    } else {
        RateConvention::L2
    };
    let count = expected_packet_count_with(args.rate, args.frame, args.duration, convention)?;
    println!("{count}");
    Ok(())
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_max_level(tracing::Level::INFO)
        .init();

    let config = match &args.config {
        Some(path) => ServiceConfig::from_toml(path)?,
        None => ServiceConfig {
            listen: args.listen,
            poll_interval_ms: args.poll_interval_ms,
            capacity: args.capacity,
            ports: args.ports.clone(),
        },
    };
    config.validate()?;

    let state = Arc::new(AppState::new(config.ports.iter().copied(), config.capacity));

    if let Some(port) = args.drive_port {
        let distribution = args
            .dist
            .build()
            .context("--drive-port needs a --dist description")?;
        let spec = TrafficSpec {
            distribution,
            volume: Volume::Count(args.drive_samples.unwrap_or(u64::MAX)),
            seed: args.seed,
        };
        let driver_state = Arc::clone(&state);
        std::thread::spawn(move || drive_loop(driver_state, port, spec, args.pps));
    }

    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(histeval_service::serve_with_state(config, state))
        .map_err(|e| anyhow::anyhow!(e.to_string()))
}

/// Feeds batches into the port until the spec is exhausted. Waits for the
/// port to be configured; batch boundaries are the points where
/// reconfiguration can take effect.
fn drive_loop(state: Arc<AppState>, port: u16, spec: TrafficSpec, pps: f64) {
    const BATCH: usize = 4096;
    let mut stream = match spec.stream(port) {
        Ok(stream) => stream,
        Err(err) => {
            tracing::error!(%err, "traffic spec invalid; driver not started");
            return;
        }
    };
    let started = Instant::now();
    let mut driven = 0u64;
    loop {
        let batch: Vec<_> = stream.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            tracing::info!(driven, "driver finished");
            return;
        }
        // Not configured yet, or a configure in flight: retry the same
        // batch until it lands, so no sample is silently lost.
        while let Err(err) = state.drive_samples(port, batch.iter().copied()) {
            tracing::debug!(%err, "drive deferred");
            std::thread::sleep(Duration::from_millis(200));
        }
        driven += batch.len() as u64;
        if pps > 0.0 {
            let due = started + Duration::from_secs_f64(driven as f64 / pps);
            if let Some(wait) = due.checked_duration_since(Instant::now()) {
                std::thread::sleep(wait);
            }
        }
    }
}
