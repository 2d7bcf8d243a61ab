//! Accuracy metric, paired t-test, SNR robustness sweep, Welch window-ratio
//! selection, and per-group summaries over a dataset.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::{BmiGroup, Channel, Recording, State};
use crate::error::{Error, Result};
use crate::estimators::{estimate_all, DfSet, Method, NcamConfig};
use crate::export::{ResultTable, Tabular, Value};
use crate::signal::{add_awgn, bandpass_filter, BandpassSpec, TimeSeries};

pub const SIGNIFICANCE: f64 = 0.05;

/// `|benchmark - method| / benchmark * 100`.
pub fn relative_difference(df_benchmark: f64, df_method: f64) -> Result<f64> {
    if !(df_benchmark > 0.0 && df_benchmark.is_finite()) {
        return Err(Error::arg(
            "df_benchmark",
            format!("benchmark must be positive, got {df_benchmark}"),
        ));
    }
    Ok((df_benchmark - df_method).abs() / df_benchmark * 100.0)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for a single value.
pub fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub p_value: f64,
    pub n_pairs: usize,
}

impl TTestResult {
    pub fn significant(&self) -> bool {
        self.p_value < SIGNIFICANCE
    }

    /// `***` below 0.001, `**` below 0.01, `*` below 0.05.
    pub fn stars(&self) -> &'static str {
        significance_stars(self.p_value)
    }
}

pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Two-tailed p-value of a Student t statistic with `dof` degrees of freedom.
pub fn student_t_two_tailed(t: f64, dof: f64) -> Result<f64> {
    let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::arg("dof", e.to_string()))?;
    Ok((2.0 * dist.sf(t.abs())).min(1.0))
}

/// Paired-sample t-test on `a - b`, two-tailed.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::arg(
            "b",
            format!("length mismatch: {} vs {}", a.len(), b.len()),
        ));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::arg("a", "need at least 2 pairs"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = mean(&d);
    let sd = sample_sd(&d);
    if !(sd > f64::EPSILON * m.abs()) {
        return Err(Error::Degenerate(
            "paired differences have zero variance".into(),
        ));
    }
    let t = m / (sd / (n as f64).sqrt());
    Ok(TTestResult {
        t_statistic: t,
        p_value: student_t_two_tailed(t, (n - 1) as f64)?,
        n_pairs: n,
    })
}

/// One value per estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct PerMethod<T> {
    pub ac: T,
    pub welch: T,
    pub fft: T,
    pub ncam: T,
}

impl<T> PerMethod<T> {
    pub fn get(&self, m: Method) -> &T {
        match m {
            Method::Ac => &self.ac,
            Method::Welch => &self.welch,
            Method::Fft => &self.fft,
            Method::Ncam => &self.ncam,
        }
    }

    pub fn get_mut(&mut self, m: Method) -> &mut T {
        match m {
            Method::Ac => &mut self.ac,
            Method::Welch => &mut self.welch,
            Method::Fft => &mut self.fft,
            Method::Ncam => &mut self.ncam,
        }
    }

    pub fn from_fn(mut f: impl FnMut(Method) -> T) -> Self {
        Self {
            ac: f(Method::Ac),
            welch: f(Method::Welch),
            fft: f(Method::Fft),
            ncam: f(Method::Ncam),
        }
    }
}

/// Reference the sweep errors are measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Benchmark {
    /// FFT estimate of the noise-free waveform.
    CleanFft,
    /// Each method against its own noise-free estimate.
    OwnMethod,
    /// Externally supplied value in cpm, e.g. an expert-corrected DF.
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub snr_db: Vec<f64>,
    /// Noise realizations per SNR point; errors are averaged over them.
    pub repeats: usize,
    pub bandpass: BandpassSpec,
    pub benchmark: Benchmark,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            snr_db: default_snr_grid(),
            repeats: 1,
            bandpass: BandpassSpec::default(),
            benchmark: Benchmark::CleanFft,
        }
    }
}

/// -40 dB to 20 dB in 2 dB steps, 31 points.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=30).map(|i| -40.0 + 2.0 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub snr_db: Vec<f64>,
    /// Relative difference in percent, averaged over repeats.
    pub rel_diff_percent: PerMethod<Vec<f64>>,
    /// Mean estimated DF per SNR point, cpm.
    pub df_cpm: PerMethod<Vec<f64>>,
    pub benchmark_df_cpm: PerMethod<f64>,
    pub repeats: usize,
}

impl SweepResult {
    /// Mean relative difference of `method` over SNR points within `[lo, hi]` dB.
    pub fn band_mean(&self, method: Method, lo: f64, hi: f64) -> Option<f64> {
        let vals: Vec<f64> = self
            .snr_db
            .iter()
            .zip(self.rel_diff_percent.get(method))
            .filter(|(s, _)| **s >= lo && **s <= hi)
            .map(|(_, v)| *v)
            .collect();
        (!vals.is_empty()).then(|| mean(&vals))
    }
}

/// Add white noise to `clean` at each SNR, re-filter, run all four estimators
/// and record the relative difference from the benchmark.
///
/// The benchmark estimate passes `clean` through the same re-filtering step,
/// so a noise-free point reproduces it exactly. Point `i`, repeat `r` uses
/// noise seed `seed + i * repeats + r`, independent of scheduling.
pub fn snr_sweep(
    clean: &TimeSeries,
    opts: &SweepOptions,
    cfg: &NcamConfig,
    seed: u64,
) -> Result<SweepResult> {
    cfg.validate()?;
    if opts.repeats == 0 {
        return Err(Error::arg("repeats", "need at least one realization"));
    }
    if opts.snr_db.is_empty() {
        return Err(Error::arg("snr_db", "empty SNR list"));
    }
    let reference = estimate_all(&bandpass_filter(clean, &opts.bandpass)?, cfg)?;
    let benchmark = match opts.benchmark {
        Benchmark::CleanFft => PerMethod::from_fn(|_| reference.fft.df_cpm),
        Benchmark::OwnMethod => PerMethod::from_fn(|m| reference.get(m).df_cpm),
        Benchmark::Fixed(v) => {
            relative_difference(v, v)?;
            PerMethod::from_fn(|_| v)
        }
    };

    let repeats = opts.repeats;
    let jobs: Vec<(usize, usize)> = (0..opts.snr_db.len())
        .flat_map(|i| (0..repeats).map(move |r| (i, r)))
        .collect();
    let estimates: Vec<((usize, usize), DfSet)> = jobs
        .into_par_iter()
        .map(|(i, r)| {
            let point_seed = seed.wrapping_add((i * repeats + r) as u64);
            let noisy = add_awgn(clean, opts.snr_db[i], point_seed)?;
            let filtered = bandpass_filter(&noisy, &opts.bandpass)?;
            Ok(((i, r), estimate_all(&filtered, cfg)?))
        })
        .collect::<Result<_>>()?;

    let points = opts.snr_db.len();
    let mut rel = PerMethod::from_fn(|_| vec![0.0; points]);
    let mut dfs = PerMethod::from_fn(|_| vec![0.0; points]);
    for ((i, _), set) in &estimates {
        for m in Method::ALL {
            let df = set.get(m).df_cpm;
            rel.get_mut(m)[*i] += relative_difference(*benchmark.get(m), df)? / repeats as f64;
            dfs.get_mut(m)[*i] += df / repeats as f64;
        }
    }

    Ok(SweepResult {
        snr_db: opts.snr_db.clone(),
        rel_diff_percent: rel,
        df_cpm: dfs,
        benchmark_df_cpm: benchmark,
        repeats,
    })
}

impl Tabular for SweepResult {
    fn to_table(&self) -> ResultTable {
        let mut t = ResultTable::new(["snr_db", "rd_AC", "rd_FFT", "rd_Welch", "rd_NCAM"]);
        for (i, snr) in self.snr_db.iter().enumerate() {
            t.push(vec![
                (*snr).into(),
                self.rel_diff_percent.ac[i].into(),
                self.rel_diff_percent.fft[i].into(),
                self.rel_diff_percent.welch[i].into(),
                self.rel_diff_percent.ncam[i].into(),
            ]);
        }
        t
    }
}

/// Subject group used for summaries and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Group {
    All,
    LowBmi,
    HighBmi,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::All, Group::LowBmi, Group::HighBmi];

    pub fn contains(self, g: BmiGroup) -> bool {
        match self {
            Group::All => true,
            Group::LowBmi => g == BmiGroup::Low,
            Group::HighBmi => g == BmiGroup::High,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Group::All => "All",
            Group::LowBmi => "LowBMI",
            Group::HighBmi => "HighBMI",
        }
    }
}

/// All four DF estimates for one recording.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordingDf {
    pub subject_id: String,
    pub bmi_group: BmiGroup,
    pub channel: Channel,
    pub state: State,
    pub dfs: DfSet,
}

/// Filter every recording and estimate its DF with all methods.
pub fn analyze_recordings(
    recordings: &[Recording],
    cfg: &NcamConfig,
    bandpass: &BandpassSpec,
) -> Result<Vec<RecordingDf>> {
    cfg.validate()?;
    recordings
        .par_iter()
        .map(|r| {
            let filtered = bandpass_filter(&r.series, bandpass)?;
            let dfs = estimate_all(&filtered, cfg)
                .map_err(|e| Error::Degenerate(format!("{}: {e}", r.key())))?;
            Ok(RecordingDf {
                subject_id: r.subject.subject_id.clone(),
                bmi_group: r.subject.bmi_group,
                channel: r.channel,
                state: r.state,
                dfs,
            })
        })
        .collect()
}

impl Tabular for [RecordingDf] {
    fn to_table(&self) -> ResultTable {
        let mut t = ResultTable::new([
            "subject_id",
            "bmi_group",
            "channel",
            "state",
            "df_AC",
            "df_Welch",
            "df_FFT",
            "df_NCAM",
            "peak_ac",
            "index_max",
            "peak_found",
            "ncam_branch",
        ]);
        for r in self {
            t.push(vec![
                r.subject_id.as_str().into(),
                format!("{:?}", r.bmi_group).into(),
                r.channel.as_str().into(),
                r.state.as_str().into(),
                r.dfs.ac.df_cpm.into(),
                r.dfs.welch.df_cpm.into(),
                r.dfs.fft.df_cpm.into(),
                r.dfs.ncam.df_cpm.into(),
                r.dfs.ac.peak_ac.into(),
                r.dfs.ac.index_max.into(),
                r.dfs.ac.peak_found.into(),
                r.dfs.ncam.branch.map(|b| b.as_str()).into(),
            ]);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group: Group,
    pub channel: Channel,
    pub state: State,
    pub method: Method,
    pub mean_cpm: f64,
    /// Sample SD; zero when `n == 1`.
    pub sd_cpm: f64,
    pub n: usize,
}

/// Mean and SD of DF per group × channel × state for `method`. Empty groups
/// are skipped with a warning.
pub fn summarize_df(analyses: &[RecordingDf], method: Method) -> Vec<GroupSummary> {
    let mut out = Vec::new();
    for group in Group::ALL {
        for channel in Channel::ALL {
            for state in State::ALL {
                let vals: Vec<f64> = analyses
                    .iter()
                    .filter(|a| {
                        group.contains(a.bmi_group) && a.channel == channel && a.state == state
                    })
                    .map(|a| a.dfs.get(method).df_cpm)
                    .collect();
                if vals.is_empty() {
                    log::warn!(
                        "no recordings for {}/{channel}/{state}; summary row omitted",
                        group.as_str()
                    );
                    continue;
                }
                out.push(GroupSummary {
                    group,
                    channel,
                    state,
                    method,
                    mean_cpm: mean(&vals),
                    sd_cpm: sample_sd(&vals),
                    n: vals.len(),
                });
            }
        }
    }
    out
}

/// Summaries for all four methods, grouped like the classic results table.
pub fn summarize_all(analyses: &[RecordingDf]) -> Vec<GroupSummary> {
    let mut rows: Vec<GroupSummary> = Method::ALL
        .iter()
        .flat_map(|&m| summarize_df(analyses, m))
        .collect();
    rows.sort_by_key(|r| (r.group, r.channel, r.state, r.method));
    rows
}

/// Filter, estimate and summarize in one call.
pub fn summarize_recordings(
    recordings: &[Recording],
    method: Method,
    cfg: &NcamConfig,
) -> Result<Vec<GroupSummary>> {
    let analyses = analyze_recordings(recordings, cfg, &BandpassSpec::default())?;
    Ok(summarize_df(&analyses, method))
}

impl Tabular for [GroupSummary] {
    fn to_table(&self) -> ResultTable {
        let mut t = ResultTable::new([
            "group", "channel", "state", "method", "mean_cpm", "sd_cpm", "n",
        ]);
        for s in self {
            t.push(vec![
                s.group.as_str().into(),
                s.channel.as_str().into(),
                s.state.as_str().into(),
                s.method.as_str().into(),
                s.mean_cpm.into(),
                s.sd_cpm.into(),
                s.n.into(),
            ]);
        }
        t
    }
}

/// Fasting vs postprandial DF for the same subjects, in subject order.
fn paired_states(
    analyses: &[RecordingDf],
    group: Group,
    channel: Channel,
    method: Method,
) -> (Vec<f64>, Vec<f64>) {
    let mut by_subject: BTreeMap<&str, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for a in analyses
        .iter()
        .filter(|a| group.contains(a.bmi_group) && a.channel == channel)
    {
        let e = by_subject.entry(a.subject_id.as_str()).or_default();
        let v = Some(a.dfs.get(method).df_cpm);
        match a.state {
            State::Fasting => e.0 = v,
            State::Postprandial => e.1 = v,
        }
    }
    by_subject
        .into_values()
        .filter_map(|(f, p)| Some((f?, p?)))
        .unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateComparison {
    pub group: Group,
    pub channel: Channel,
    pub method: Method,
    pub n_pairs: usize,
    /// `None` when the test could not be computed (too few pairs, zero variance).
    pub test: Option<TTestResult>,
}

/// Paired fasting-vs-postprandial t-test per group × channel × method.
pub fn compare_states(analyses: &[RecordingDf]) -> Vec<StateComparison> {
    let mut out = Vec::new();
    for group in Group::ALL {
        for channel in Channel::ALL {
            for method in Method::ALL {
                let (fasting, post) = paired_states(analyses, group, channel, method);
                let test = match paired_t_test(&fasting, &post) {
                    Ok(t) => Some(t),
                    Err(e) => {
                        log::warn!("{}/{channel}/{method}: {e}", group.as_str());
                        None
                    }
                };
                out.push(StateComparison {
                    group,
                    channel,
                    method,
                    n_pairs: fasting.len(),
                    test,
                });
            }
        }
    }
    out
}

impl Tabular for [StateComparison] {
    fn to_table(&self) -> ResultTable {
        let mut t = ResultTable::new([
            "group",
            "channel",
            "method",
            "n",
            "t_statistic",
            "p_value",
            "significance",
        ]);
        for c in self {
            t.push(vec![
                c.group.as_str().into(),
                c.channel.as_str().into(),
                c.method.as_str().into(),
                c.n_pairs.into(),
                c.test.map(|t| t.t_statistic).into(),
                c.test.map(|t| t.p_value).into(),
                c.test.map(|t| t.stars()).unwrap_or("").into(),
            ]);
        }
        t
    }
}

/// Per BMI group and channel, how many recordings exceed an autocorrelation
/// peak threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakCount {
    pub bmi_group: BmiGroup,
    pub channel: Channel,
    pub exceeding: usize,
    pub total: usize,
}

/// Count recordings whose autocorrelation peak is strictly above `threshold`.
/// `state` restricts the count to one recording state.
pub fn count_peak_exceedance(
    analyses: &[RecordingDf],
    threshold: f64,
    state: Option<State>,
) -> Vec<PeakCount> {
    let mut out = Vec::new();
    for bmi_group in [BmiGroup::High, BmiGroup::Low] {
        for channel in Channel::ALL {
            let cell: Vec<&RecordingDf> = analyses
                .iter()
                .filter(|a| {
                    a.bmi_group == bmi_group
                        && a.channel == channel
                        && state.is_none_or(|s| a.state == s)
                })
                .collect();
            let exceeding = cell
                .iter()
                .filter(|a| a.dfs.ac.peak_ac.is_some_and(|p| p > threshold))
                .count();
            out.push(PeakCount {
                bmi_group,
                channel,
                exceeding,
                total: cell.len(),
            });
        }
    }
    out
}

impl Tabular for [PeakCount] {
    fn to_table(&self) -> ResultTable {
        let mut t = ResultTable::new(["bmi_group", "channel", "exceeding", "total"]);
        for c in self {
            t.push(vec![
                format!("{:?}", c.bmi_group).into(),
                c.channel.as_str().into(),
                c.exceeding.into(),
                c.total.into(),
            ]);
        }
        t
    }
}

/// Filtered fasting and postprandial signals for one channel, aligned by subject.
#[derive(Debug, Clone)]
pub struct ChannelPairs {
    pub channel: Channel,
    pub fasting: Vec<TimeSeries>,
    pub postprandial: Vec<TimeSeries>,
}

/// Group recordings into per-channel fasting/postprandial pairs. Subjects
/// missing either state on a channel are left out of that channel.
pub fn pair_by_channel(
    recordings: &[Recording],
    bandpass: &BandpassSpec,
) -> Result<Vec<ChannelPairs>> {
    let mut out = Vec::new();
    for channel in Channel::ALL {
        let mut by_subject: BTreeMap<&str, (Option<&TimeSeries>, Option<&TimeSeries>)> =
            BTreeMap::new();
        for r in recordings.iter().filter(|r| r.channel == channel) {
            let e = by_subject.entry(r.subject.subject_id.as_str()).or_default();
            match r.state {
                State::Fasting => e.0 = Some(&r.series),
                State::Postprandial => e.1 = Some(&r.series),
            }
        }
        let pairs: Vec<(&TimeSeries, &TimeSeries)> = by_subject
            .into_values()
            .filter_map(|(f, p)| Some((f?, p?)))
            .collect();
        if pairs.is_empty() {
            continue;
        }
        let filtered: Vec<(TimeSeries, TimeSeries)> = pairs
            .par_iter()
            .map(|(f, p)| Ok((bandpass_filter(f, bandpass)?, bandpass_filter(p, bandpass)?)))
            .collect::<Result<_>>()?;
        let (fasting, postprandial) = filtered.into_iter().unzip();
        out.push(ChannelPairs {
            channel,
            fasting,
            postprandial,
        });
    }
    Ok(out)
}

/// What a window-ratio candidate is scored against.
#[derive(Debug, Clone, PartialEq)]
pub enum WindowTarget {
    /// Reference p-values, one per channel in [`ChannelPairs`] order.
    PValues(Vec<f64>),
    /// No reference p-values: prefer ratios where only CH2 separates the
    /// states at the 0.05 level.
    Ch2Pattern,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRow {
    pub ratio: f64,
    pub p_values: Vec<f64>,
    /// Lower is better.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSelection {
    pub channels: Vec<Channel>,
    pub rows: Vec<WindowRow>,
    pub chosen_ratio: f64,
}

fn welch_p_value(pairs: &ChannelPairs, cfg: &NcamConfig) -> Result<f64> {
    let est = |xs: &[TimeSeries]| -> Result<Vec<f64>> {
        xs.par_iter()
            .map(|x| crate::estimators::df_welch(x, cfg).map(|r| r.df_cpm))
            .collect()
    };
    let fasting = est(&pairs.fasting)?;
    let post = est(&pairs.postprandial)?;
    match paired_t_test(&fasting, &post) {
        Ok(t) => Ok(t.p_value),
        // identical DFs in both states: no evidence of a difference
        Err(Error::Degenerate(_)) => Ok(1.0),
        Err(e) => Err(e),
    }
}

/// Welch-DF paired t-test p-values per channel for each candidate ratio.
pub fn window_p_values(
    pairs: &[ChannelPairs],
    ratios: &[f64],
    cfg: &NcamConfig,
) -> Result<Vec<(f64, Vec<f64>)>> {
    ratios
        .iter()
        .map(|&ratio| {
            let cfg = NcamConfig {
                welch_window_ratio: ratio,
                ..*cfg
            };
            cfg.validate()?;
            let ps = pairs
                .iter()
                .map(|p| welch_p_value(p, &cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok((ratio, ps))
        })
        .collect()
}

/// Pick the ratio whose per-channel p-values best match `target`; ties go to
/// the smaller ratio.
pub fn choose_window_ratio(
    channels: &[Channel],
    table: &[(f64, Vec<f64>)],
    target: &WindowTarget,
) -> Result<WindowSelection> {
    if table.is_empty() {
        return Err(Error::arg("s_values", "no candidate ratios"));
    }
    let mut rows = Vec::with_capacity(table.len());
    for (ratio, ps) in table {
        if ps.len() != channels.len() {
            return Err(Error::arg("p_values", "one p-value per channel expected"));
        }
        let score = match target {
            WindowTarget::PValues(targets) => {
                if targets.len() != ps.len() {
                    return Err(Error::arg(
                        "target_p",
                        format!("{} targets for {} channels", targets.len(), ps.len()),
                    ));
                }
                ps.iter()
                    .zip(targets)
                    .map(|(p, t)| (p - t).abs())
                    .sum::<f64>()
                    / ps.len() as f64
            }
            WindowTarget::Ch2Pattern => channels
                .iter()
                .zip(ps)
                .filter(|(c, p)| (**p < SIGNIFICANCE) != (**c == Channel::Ch2))
                .count() as f64,
        };
        rows.push(WindowRow {
            ratio: *ratio,
            p_values: ps.clone(),
            score,
        });
    }
    let best = rows
        .iter()
        .min_by(|a, b| {
            a.score
                .total_cmp(&b.score)
                .then(a.ratio.total_cmp(&b.ratio))
        })
        .expect("non-empty");
    Ok(WindowSelection {
        channels: channels.to_vec(),
        chosen_ratio: best.ratio,
        rows,
    })
}

/// Sweep Welch window ratios and select the one matching the target p-values.
pub fn select_window_ratio(
    pairs: &[ChannelPairs],
    ratios: &[f64],
    target: &WindowTarget,
    cfg: &NcamConfig,
) -> Result<WindowSelection> {
    if ratios.is_empty() {
        return Err(Error::arg("s_values", "no candidate ratios"));
    }
    let table = window_p_values(pairs, ratios, cfg)?;
    let channels: Vec<Channel> = pairs.iter().map(|p| p.channel).collect();
    choose_window_ratio(&channels, &table, target)
}

/// 1.5 to 11 in steps of 0.5.
pub fn default_ratio_grid() -> Vec<f64> {
    (0..=19).map(|i| 1.5 + 0.5 * i as f64).collect()
}

impl Tabular for WindowSelection {
    fn to_table(&self) -> ResultTable {
        let mut cols = vec!["s".to_string()];
        cols.extend(self.channels.iter().map(|c| format!("p_{c}")));
        cols.push("score".into());
        cols.push("chosen".into());
        let mut t = ResultTable::new(cols);
        for r in &self.rows {
            let mut row: Vec<Value> = vec![r.ratio.into()];
            row.extend(r.p_values.iter().map(|&p| Value::from(p)));
            row.push(r.score.into());
            row.push((r.ratio == self.chosen_ratio).into());
            t.push(row);
        }
        t
    }
}
