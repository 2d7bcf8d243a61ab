//! `egg-df`: dominant-frequency analysis of a manifest-described EGG dataset.

mod range;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use egg_df::dataset::{
    load_dataset, Channel, Dataset, Delimiter, LoadOptions, SignalFormat, State,
};
use egg_df::estimators::NcamConfig;
use egg_df::evaluation::{
    analyze_recordings, compare_states, count_peak_exceedance, pair_by_channel,
    select_window_ratio, snr_sweep, summarize_all, Benchmark, SweepOptions, WindowTarget,
};
use egg_df::export::{render, Format, ResultTable, Tabular};
use egg_df::signal::BandpassSpec;
use serde_json::{json, Value as Json};

#[derive(Parser, Debug)]
#[command(
    name = "egg-df",
    version,
    about = "Dominant-frequency analysis of EGG recordings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-recording DFs, group summary table and autocorrelation peak counts.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Only analyze this channel.
        #[arg(long)]
        channel: Option<Channel>,
        /// Only analyze this state.
        #[arg(long)]
        state: Option<State>,
        /// State counted in the peak table: fasting, postprandial or all.
        #[arg(long, default_value = "postprandial")]
        peak_state: String,
    },
    /// Robustness of each estimator to white noise on one recording.
    SweepSnr {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        subject: String,
        #[arg(long)]
        channel: Channel,
        #[arg(long)]
        state: State,
        /// SNR grid in dB as start:stop:step.
        #[arg(long, default_value = "-40:20:2", allow_hyphen_values = true)]
        snr: String,
        /// Noise realizations averaged per SNR point.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        /// clean-fft, own, or a fixed DF in cpm.
        #[arg(long, default_value = "clean-fft")]
        benchmark: String,
    },
    /// Choose the Welch window ratio whose state-comparison p-values best match targets.
    SelectWindow {
        #[command(flatten)]
        common: Common,
        /// Candidate ratios: start:stop:step or comma-separated values.
        #[arg(long, default_value = "1.5:11:0.5")]
        s_grid: String,
        /// Reference p-values, one per channel, comma-separated.
        #[arg(long)]
        targets: Option<String>,
        /// Without targets, prefer ratios where only CH2 is significant.
        #[arg(long)]
        fallback: bool,
    },
    /// Paired fasting/postprandial t-tests and raw DFs for box plots.
    Stats {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Dataset root; manifest file paths are relative to it.
    #[arg(long)]
    dataset: PathBuf,
    /// Manifest CSV [default: <dataset>/manifest.csv].
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Autocorrelation peak threshold for NCAM.
    #[arg(long)]
    threshold: Option<f64>,
    /// Spectral search band in cpm as low:high.
    #[arg(long)]
    band: Option<String>,
    #[arg(long)]
    nfft_fft: Option<usize>,
    #[arg(long)]
    nfft_welch: Option<usize>,
    /// Signal length over Welch segment length.
    #[arg(long)]
    window_ratio: Option<f64>,
    /// Signal file delimiter: comma, tab or whitespace.
    #[arg(long, default_value = "comma")]
    delimiter: Delimiter,
    /// Zero-based column holding the samples.
    #[arg(long, default_value_t = 0)]
    column: usize,
    /// Header rows to skip in each signal file.
    #[arg(long, default_value_t = 0)]
    skip_rows: usize,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

/// Effective settings for one run.
struct RunConfig {
    dataset: PathBuf,
    manifest: PathBuf,
    out: PathBuf,
    format: Format,
    seed: u64,
    ncam: NcamConfig,
    bandpass: BandpassSpec,
    load: LoadOptions,
}

impl RunConfig {
    fn from_common(c: &Common) -> Result<Self> {
        let mut ncam = NcamConfig::default();
        if let Some(v) = c.threshold {
            ncam.ac_threshold = v;
        }
        if let Some(b) = &c.band {
            ncam.search_band_cpm = range::parse_band(b)?;
        }
        if let Some(v) = c.nfft_fft {
            ncam.fft_nfft = v;
        }
        if let Some(v) = c.nfft_welch {
            ncam.welch_nfft = v;
        }
        if let Some(v) = c.window_ratio {
            ncam.welch_window_ratio = v;
        }
        ncam.validate()?;

        if !c.dataset.is_dir() {
            bail!("dataset directory {} not found", c.dataset.display());
        }
        let manifest = c
            .manifest
            .clone()
            .unwrap_or_else(|| c.dataset.join("manifest.csv"));
        if !manifest.is_file() {
            bail!("manifest {} not found", manifest.display());
        }
        Ok(Self {
            dataset: c.dataset.clone(),
            manifest,
            out: c.out.clone(),
            format: c.format,
            seed: c.seed,
            ncam,
            bandpass: BandpassSpec::default(),
            load: LoadOptions {
                signal: SignalFormat {
                    delimiter: c.delimiter,
                    column: c.column,
                    skip_rows: c.skip_rows,
                },
                ..LoadOptions::default()
            },
        })
    }

    fn metadata(&self, command: &str, extra: Json) -> Json {
        let mut meta = json!({
            "tool": "egg-df",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "dataset": self.dataset.display().to_string(),
            "manifest": self.manifest.display().to_string(),
            "seed": self.seed,
            "ncam": self.ncam,
            "bandpass": self.bandpass,
            "welch_taper": "hann (periodic), no detrend",
        });
        if let (Json::Object(m), Json::Object(e)) = (&mut meta, extra) {
            m.extend(e);
        }
        meta
    }

    fn load(&self) -> Result<Dataset> {
        let ds = load_dataset(&self.dataset, &self.manifest, &self.load)
            .with_context(|| format!("loading {}", self.manifest.display()))?;
        for issue in &ds.issues {
            log::warn!("{issue}");
        }
        if ds.recordings.is_empty() {
            bail!("no recordings loaded from {}", self.manifest.display());
        }
        log::info!(
            "loaded {} recordings from {} subjects",
            ds.recordings.len(),
            ds.subjects.len()
        );
        Ok(ds)
    }

    /// Render every table first so nothing is written if any fails.
    fn write_all(&self, tables: &[(&str, ResultTable)], meta: &Json) -> Result<()> {
        let rendered = tables
            .iter()
            .map(|(name, t)| {
                let file = self.out.join(format!("{name}.{}", self.format.extension()));
                Ok((file, render(t, self.format, Some(meta))?))
            })
            .collect::<Result<Vec<_>>>()?;
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        for (file, bytes) in rendered {
            fs::write(&file, bytes).with_context(|| format!("writing {}", file.display()))?;
            log::info!("wrote {}", file.display());
        }
        Ok(())
    }
}

fn opt_str<T: ToString>(v: &Option<T>) -> Json {
    v.as_ref()
        .map(|v| Json::from(v.to_string()))
        .unwrap_or(Json::Null)
}

fn analyze(
    cfg: &RunConfig,
    channel: Option<Channel>,
    state: Option<State>,
    peak_state: &str,
) -> Result<()> {
    let peak_filter = match peak_state.to_ascii_lowercase().as_str() {
        "all" => None,
        s => Some(s.parse::<State>()?),
    };
    let ds = cfg.load()?;
    let recs: Vec<_> = ds
        .recordings
        .into_iter()
        .filter(|r| channel.is_none_or(|c| r.channel == c) && state.is_none_or(|s| r.state == s))
        .collect();
    if recs.is_empty() {
        bail!("no recordings match the channel/state filter");
    }
    let analyses = analyze_recordings(&recs, &cfg.ncam, &cfg.bandpass)?;
    let summary = summarize_all(&analyses);
    let peaks = count_peak_exceedance(&analyses, cfg.ncam.ac_threshold, peak_filter);

    let meta = cfg.metadata(
        "analyze",
        json!({
            "channel": opt_str(&channel),
            "state": opt_str(&state),
            "peak_state": peak_filter.map(|s| s.to_string()).unwrap_or_else(|| "all".into()),
        }),
    );
    cfg.write_all(
        &[
            ("per_recording", analyses.to_table()),
            ("summary", summary.to_table()),
            ("peak_counts", peaks.to_table()),
        ],
        &meta,
    )
}

fn parse_benchmark(s: &str) -> Result<Benchmark> {
    match s {
        "clean-fft" => Ok(Benchmark::CleanFft),
        "own" => Ok(Benchmark::OwnMethod),
        v => {
            let df: f64 = v.parse().with_context(|| {
                format!("benchmark must be clean-fft, own or a DF in cpm, got `{v}`")
            })?;
            if !(df.is_finite() && df > 0.0) {
                bail!("fixed benchmark must be a positive DF, got {df}");
            }
            Ok(Benchmark::Fixed(df))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    cfg: &RunConfig,
    subject: &str,
    channel: Channel,
    state: State,
    snr: &str,
    repeats: usize,
    benchmark: &str,
) -> Result<()> {
    let snr_db = range::parse_range(snr)?;
    let bench = parse_benchmark(benchmark)?;
    let ds = cfg.load()?;
    let Some(rec) = ds.find(subject, channel, state) else {
        let keys: Vec<String> = ds.keys().iter().map(ToString::to_string).collect();
        bail!(
            "recording {subject}/{channel}/{state} not found; available: {}",
            keys.join(", ")
        );
    };
    let opts = SweepOptions {
        snr_db,
        repeats,
        bandpass: cfg.bandpass,
        benchmark: bench,
    };
    let result = snr_sweep(&rec.series, &opts, &cfg.ncam, cfg.seed)?;
    let meta = cfg.metadata(
        "sweep-snr",
        json!({
            "subject": subject,
            "channel": channel.to_string(),
            "state": state.to_string(),
            "snr": snr,
            "repeats": repeats,
            "benchmark": benchmark,
        }),
    );
    cfg.write_all(&[("sweep", result.to_table())], &meta)
}

fn select_window(
    cfg: &RunConfig,
    s_grid: &str,
    targets: Option<&str>,
    fallback: bool,
) -> Result<()> {
    let ratios = range::parse_list(s_grid)?;
    let target = match (targets, fallback) {
        (Some(t), _) => WindowTarget::PValues(range::parse_list(t)?),
        (None, true) => WindowTarget::Ch2Pattern,
        (None, false) => bail!("provide --targets p1,p2,p3 or pass --fallback"),
    };
    let ds = cfg.load()?;
    let pairs = pair_by_channel(&ds.recordings, &cfg.bandpass)?;
    if pairs.is_empty() {
        bail!("no subject has both fasting and postprandial recordings on any channel");
    }
    let sel = select_window_ratio(&pairs, &ratios, &target, &cfg.ncam)?;
    let meta = cfg.metadata(
        "select-window",
        json!({
            "s_grid": s_grid,
            "targets": targets,
            "fallback": targets.is_none(),
        }),
    );
    cfg.write_all(&[("window_selection", sel.to_table())], &meta)?;
    println!("S = {}", sel.chosen_ratio);
    Ok(())
}

fn stats(cfg: &RunConfig) -> Result<()> {
    let ds = cfg.load()?;
    let analyses = analyze_recordings(&ds.recordings, &cfg.ncam, &cfg.bandpass)?;
    let tests = compare_states(&analyses);
    let meta = cfg.metadata("stats", json!({}));
    cfg.write_all(
        &[("ttest", tests.to_table()), ("dfs", analyses.to_table())],
        &meta,
    )
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Analyze {
            common,
            channel,
            state,
            peak_state,
        } => analyze(
            &RunConfig::from_common(common)?,
            *channel,
            *state,
            peak_state,
        ),
        Command::SweepSnr {
            common,
            subject,
            channel,
            state,
            snr,
            repeats,
            benchmark,
        } => sweep(
            &RunConfig::from_common(common)?,
            subject,
            *channel,
            *state,
            snr,
            *repeats,
            benchmark,
        ),
        Command::SelectWindow {
            common,
            s_grid,
            targets,
            fallback,
        } => select_window(
            &RunConfig::from_common(common)?,
            s_grid,
            targets.as_deref(),
            *fallback,
        ),
        Command::Stats { common } => stats(&RunConfig::from_common(common)?),
    }
}

fn verbosity(cli: &Cli) -> u8 {
    match &cli.command {
        Command::Analyze { common, .. }
        | Command::SweepSnr { common, .. }
        | Command::SelectWindow { common, .. }
        | Command::Stats { common } => common.verbose,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match verbosity(&cli) {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
