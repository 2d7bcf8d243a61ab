//! Dominant-frequency estimators: normalized autocorrelation, Welch PSD peak,
//! zero-padded FFT peak, and the combined NCAM rule.
//!
//! All estimators expect an already bandpassed signal. Spectral peaks are
//! searched inside [`NcamConfig::search_band_cpm`]; widen the band to
//! `(0, 60 * fs / 2)` for a plain global maximum.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

/// Tunables shared by the four estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NcamConfig {
    pub ac_threshold: f64,
    /// First lag of the autocorrelation search, in samples.
    pub lag_min: usize,
    /// Last lag of the autocorrelation search, in samples.
    pub lag_max: usize,
    /// Signal length divided by Welch segment length.
    pub welch_window_ratio: f64,
    pub welch_nfft: usize,
    pub fft_nfft: usize,
    pub search_band_cpm: (f64, f64),
}

impl Default for NcamConfig {
    fn default() -> Self {
        Self {
            ac_threshold: 0.4,
            lag_min: 25,
            lag_max: 67,
            welch_window_ratio: 4.0,
            welch_nfft: 2048,
            fft_nfft: 4096,
            search_band_cpm: (1.8, 4.8),
        }
    }
}

impl NcamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ac_threshold > 0.0 && self.ac_threshold < 1.0) {
            return Err(Error::arg(
                "ac_threshold",
                format!("must lie in (0, 1), got {}", self.ac_threshold),
            ));
        }
        if self.lag_min >= self.lag_max {
            return Err(Error::arg(
                "lag_min",
                format!(
                    "lag_min {} must be below lag_max {}",
                    self.lag_min, self.lag_max
                ),
            ));
        }
        if !(self.welch_window_ratio.is_finite() && self.welch_window_ratio >= 1.0) {
            return Err(Error::arg(
                "welch_window_ratio",
                format!("must be >= 1, got {}", self.welch_window_ratio),
            ));
        }
        for (name, n) in [("welch_nfft", self.welch_nfft), ("fft_nfft", self.fft_nfft)] {
            if n < 2 || !n.is_power_of_two() {
                return Err(Error::arg(name, format!("{n} is not a power of two >= 2")));
            }
        }
        let (lo, hi) = self.search_band_cpm;
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::arg(
                "search_band_cpm",
                format!("need 0 <= low < high, got ({lo}, {hi})"),
            ));
        }
        Ok(())
    }

    pub fn search_band_hz(&self) -> (f64, f64) {
        (self.search_band_cpm.0 / 60.0, self.search_band_cpm.1 / 60.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "AC")]
    Ac,
    Welch,
    #[serde(rename = "FFT")]
    Fft,
    #[serde(rename = "NCAM")]
    Ncam,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ac, Method::Welch, Method::Fft, Method::Ncam];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ac => "AC",
            Method::Welch => "Welch",
            Method::Fft => "FFT",
            Method::Ncam => "NCAM",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ac" | "autocorrelation" => Ok(Method::Ac),
            "welch" | "w" => Ok(Method::Welch),
            "fft" => Ok(Method::Fft),
            "ncam" => Ok(Method::Ncam),
            _ => Err(Error::arg("method", format!("unknown method `{s}`"))),
        }
    }
}

/// Which side of the threshold the combined rule took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NcamBranch {
    /// Autocorrelation peak above threshold: FFT peak used as is.
    Fft,
    /// Welch peak corrected by the scaled FFT/autocorrelation difference.
    Corrected,
}

impl NcamBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            NcamBranch::Fft => "fft",
            NcamBranch::Corrected => "corrected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfResult {
    pub method: Method,
    pub df_cpm: f64,
    pub df_hz: f64,
    pub peak_ac: Option<f64>,
    pub index_max: Option<usize>,
    /// False when the autocorrelation had no interior positive peak and the
    /// global maximum was used instead.
    pub peak_found: bool,
    pub branch: Option<NcamBranch>,
}

impl DfResult {
    fn from_hz(method: Method, df_hz: f64) -> Result<Self> {
        Self::checked(method, df_hz * 60.0, df_hz)
    }

    fn from_cpm(method: Method, df_cpm: f64) -> Result<Self> {
        Self::checked(method, df_cpm, df_cpm / 60.0)
    }

    fn checked(method: Method, df_cpm: f64, df_hz: f64) -> Result<Self> {
        if !(df_cpm > 0.0 && df_cpm.is_finite()) {
            return Err(Error::Degenerate(format!(
                "{method} produced non-positive dominant frequency {df_cpm} cpm"
            )));
        }
        Ok(Self {
            method,
            df_cpm,
            df_hz,
            peak_ac: None,
            index_max: None,
            peak_found: true,
            branch: None,
        })
    }
}

/// Normalized autocorrelation over a contiguous lag range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcfCurve {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
}

impl AcfCurve {
    pub fn new(lags: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if lags.len() != values.len() {
            return Err(Error::arg("acf", "lags and values differ in length"));
        }
        if lags.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::arg("acf", "lags must be strictly increasing"));
        }
        Ok(Self { lags, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_at(&self, lag: usize) -> Option<f64> {
        self.lags
            .iter()
            .position(|&k| k == lag)
            .map(|i| self.values[i])
    }
}

/// Normalized direct autocorrelation for every lag in `lag_min..=lag_max`.
///
/// Each lag is normalized by the energies of the two overlapping windows, so
/// the values are bounded by 1 in magnitude.
pub fn normalized_autocorrelation(
    x: &TimeSeries,
    lag_min: usize,
    lag_max: usize,
) -> Result<AcfCurve> {
    let s = x.samples();
    let n = s.len();
    if lag_min > lag_max {
        return Err(Error::arg("lag_min", "lag_min exceeds lag_max"));
    }
    if lag_max >= n {
        return Err(Error::arg(
            "lag_max",
            format!("lag {lag_max} not below signal length {n}"),
        ));
    }

    let mut values = Vec::with_capacity(lag_max - lag_min + 1);
    for k in lag_min..=lag_max {
        let head = &s[k..];
        let tail = &s[..n - k];
        let num: f64 = head.iter().zip(tail).map(|(a, b)| a * b).sum();
        let e_head: f64 = head.iter().map(|v| v * v).sum();
        let e_tail: f64 = tail.iter().map(|v| v * v).sum();
        let den = e_head.sqrt() * e_tail.sqrt();
        if den == 0.0 {
            return Err(Error::ZeroEnergy("autocorrelation window has no energy"));
        }
        values.push((num / den).clamp(-1.0, 1.0));
    }
    AcfCurve::new((lag_min..=lag_max).collect(), values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfPeak {
    pub lag: usize,
    pub value: f64,
    /// False when the curve had no interior positive local maximum.
    pub found: bool,
}

/// First interior local maximum with a positive value.
///
/// Rising edge is strict and falling edge weak, so a plateau resolves to its
/// leftmost sample. Falls back to the global maximum (leftmost on ties) with
/// `found == false`.
pub fn first_positive_peak(acf: &AcfCurve) -> Result<AcfPeak> {
    let v = &acf.values;
    if v.len() < 3 {
        return Err(Error::arg(
            "acf",
            format!("need at least 3 points, got {}", v.len()),
        ));
    }
    for i in 1..v.len() - 1 {
        if v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] > 0.0 {
            return Ok(AcfPeak {
                lag: acf.lags[i],
                value: v[i],
                found: true,
            });
        }
    }
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    Ok(AcfPeak {
        lag: acf.lags[best],
        value: v[best],
        found: false,
    })
}

/// Dominant frequency from the period at the first positive autocorrelation peak.
pub fn df_autocorrelation(x: &TimeSeries, cfg: &NcamConfig) -> Result<DfResult> {
    cfg.validate()?;
    let acf = normalized_autocorrelation(x, cfg.lag_min, cfg.lag_max)?;
    let peak = first_positive_peak(&acf)?;
    let mut r = DfResult::from_hz(Method::Ac, x.fs_hz() / peak.lag as f64)?;
    r.peak_ac = Some(peak.value);
    r.index_max = Some(peak.lag);
    r.peak_found = peak.found;
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumKind {
    WelchPsd,
    FftMagnitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Taper {
    Rectangular,
    Hann,
}

/// One-sided spectrum on a uniform grid from 0 to fs/2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub freqs_hz: Vec<f64>,
    pub power: Vec<f64>,
    pub kind: SpectrumKind,
    pub taper: Taper,
}

impl SpectralEstimate {
    pub fn resolution_hz(&self) -> f64 {
        self.freqs_hz[1] - self.freqs_hz[0]
    }

    /// Index of the largest power with `low_hz <= f <= high_hz`; the lowest
    /// frequency wins exact ties.
    pub fn argmax_in_band(&self, low_hz: f64, high_hz: f64) -> Result<usize> {
        let mut best: Option<usize> = None;
        for (i, (&f, &p)) in self.freqs_hz.iter().zip(&self.power).enumerate() {
            if f < low_hz || f > high_hz {
                continue;
            }
            match best {
                Some(b) if self.power[b] >= p => {}
                _ => best = Some(i),
            }
        }
        best.ok_or_else(|| {
            Error::arg(
                "search_band",
                format!("no spectral bins between {low_hz} and {high_hz} Hz"),
            )
        })
    }

    /// Frequency of the in-band peak, in Hz.
    pub fn peak_hz(&self, low_hz: f64, high_hz: f64) -> Result<f64> {
        self.argmax_in_band(low_hz, high_hz)
            .map(|i| self.freqs_hz[i])
    }
}

fn check_nfft(nfft: usize) -> Result<()> {
    if nfft < 2 || !nfft.is_power_of_two() {
        return Err(Error::arg(
            "nfft",
            format!("{nfft} is not a power of two >= 2"),
        ));
    }
    Ok(())
}

fn one_sided_freqs(nfft: usize, fs_hz: f64) -> Vec<f64> {
    (0..=nfft / 2)
        .map(|k| k as f64 * fs_hz / nfft as f64)
        .collect()
}

/// Squared magnitude of the `nfft`-point DFT of `x` (zero-padded, untapered).
///
/// Inputs longer than `nfft` are truncated.
pub fn fft_spectrum(x: &TimeSeries, nfft: usize) -> Result<SpectralEstimate> {
    check_nfft(nfft)?;
    let s = x.samples();
    if s.is_empty() {
        return Err(Error::InvalidSeries("empty input".into()));
    }
    if s.len() > nfft {
        log::debug!("fft_spectrum: truncating {} samples to {nfft}", s.len());
    }
    let mut buf: Vec<Complex64> = s
        .iter()
        .take(nfft)
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    buf.resize(nfft, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);

    let power = buf[..=nfft / 2].iter().map(|c| c.norm_sqr()).collect();
    Ok(SpectralEstimate {
        freqs_hz: one_sided_freqs(nfft, x.fs_hz()),
        power,
        kind: SpectrumKind::FftMagnitude,
        taper: Taper::Rectangular,
    })
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// Welch power spectral density: Hann-tapered, overlapped segments averaged
/// and scaled to a one-sided density (units² / Hz).
pub fn welch_psd(
    x: &TimeSeries,
    window_len: usize,
    overlap: usize,
    nfft: usize,
) -> Result<SpectralEstimate> {
    check_nfft(nfft)?;
    let s = x.samples();
    let n = s.len();
    if window_len < 2 {
        return Err(Error::arg("window_len", "need at least 2 samples"));
    }
    if window_len > n {
        return Err(Error::arg(
            "window_len",
            format!("segment of {window_len} exceeds signal length {n}"),
        ));
    }
    if overlap >= window_len {
        return Err(Error::arg("overlap", "overlap must be below window length"));
    }
    if nfft < window_len {
        return Err(Error::arg(
            "nfft",
            format!("nfft {nfft} shorter than window {window_len}"),
        ));
    }

    let step = window_len - overlap;
    let segments = (n - window_len) / step + 1;
    let window = hann(window_len);
    let window_power: f64 = window.iter().map(|w| w * w).sum();

    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let bins = nfft / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for seg in 0..segments {
        let start = seg * step;
        for (slot, (v, w)) in buf
            .iter_mut()
            .zip(s[start..start + window_len].iter().zip(&window))
        {
            *slot = Complex64::new(v * w, 0.0);
        }
        for slot in buf[window_len..].iter_mut() {
            *slot = Complex64::new(0.0, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf[..bins]) {
            *a += c.norm_sqr();
        }
    }

    let scale = 1.0 / (x.fs_hz() * window_power * segments as f64);
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            // fold negative frequencies into the positive half; DC and
            // Nyquist have no mirror
            let fold = if k == 0 || k == nfft / 2 { 1.0 } else { 2.0 };
            p * scale * fold
        })
        .collect();

    Ok(SpectralEstimate {
        freqs_hz: one_sided_freqs(nfft, x.fs_hz()),
        power,
        kind: SpectrumKind::WelchPsd,
        taper: Taper::Hann,
    })
}

/// Segment length for a signal of `n` samples at length ratio `ratio`.
pub fn welch_window_len(n: usize, ratio: f64) -> usize {
    (n as f64 / ratio).floor() as usize
}

pub fn df_welch(x: &TimeSeries, cfg: &NcamConfig) -> Result<DfResult> {
    cfg.validate()?;
    let window = welch_window_len(x.len(), cfg.welch_window_ratio);
    let psd = welch_psd(x, window, window / 2, cfg.welch_nfft)?;
    let (lo, hi) = cfg.search_band_hz();
    DfResult::from_hz(Method::Welch, psd.peak_hz(lo, hi)?)
}

pub fn df_fft(x: &TimeSeries, cfg: &NcamConfig) -> Result<DfResult> {
    cfg.validate()?;
    let spec = fft_spectrum(x, cfg.fft_nfft)?;
    let (lo, hi) = cfg.search_band_hz();
    DfResult::from_hz(Method::Fft, spec.peak_hz(lo, hi)?)
}

/// All four estimates for one signal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfSet {
    pub ac: DfResult,
    pub welch: DfResult,
    pub fft: DfResult,
    pub ncam: DfResult,
}

impl DfSet {
    pub fn get(&self, method: Method) -> &DfResult {
        match method {
            Method::Ac => &self.ac,
            Method::Welch => &self.welch,
            Method::Fft => &self.fft,
            Method::Ncam => &self.ncam,
        }
    }
}

/// Combine the three base estimates.
///
/// Above the threshold the FFT peak is taken as is. Otherwise the Welch peak
/// is shifted by `peak_ac * (DF_FFT - DF_AC)`, every term in cpm.
pub fn combine_ncam(
    ac: &DfResult,
    welch: &DfResult,
    fft: &DfResult,
    threshold: f64,
) -> Result<DfResult> {
    let (peak_ac, index_max) = match (ac.peak_ac, ac.index_max) {
        (Some(p), Some(i)) => (p, i),
        _ => {
            return Err(Error::arg(
                "ac",
                "autocorrelation result lacks peak_ac/index_max",
            ))
        }
    };
    if !ac.peak_found {
        log::warn!(
            "no positive autocorrelation peak; using global maximum {peak_ac:.4} at lag {index_max}"
        );
    }
    let (mut r, branch) = if peak_ac > threshold {
        let mut r = fft.clone();
        r.method = Method::Ncam;
        (r, NcamBranch::Fft)
    } else {
        let df = welch.df_cpm + peak_ac * (fft.df_cpm - ac.df_cpm);
        (DfResult::from_cpm(Method::Ncam, df)?, NcamBranch::Corrected)
    };
    r.peak_ac = Some(peak_ac);
    r.index_max = Some(index_max);
    r.peak_found = ac.peak_found;
    r.branch = Some(branch);
    Ok(r)
}

pub fn df_ncam(x: &TimeSeries, cfg: &NcamConfig) -> Result<DfResult> {
    Ok(estimate_all(x, cfg)?.ncam)
}

pub fn estimate_all(x: &TimeSeries, cfg: &NcamConfig) -> Result<DfSet> {
    let ac = df_autocorrelation(x, cfg)?;
    let welch = df_welch(x, cfg)?;
    let fft = df_fft(x, cfg)?;
    let ncam = combine_ncam(&ac, &welch, &fft, cfg.ac_threshold)?;
    Ok(DfSet {
        ac,
        welch,
        fft,
        ncam,
    })
}

pub fn estimate(x: &TimeSeries, method: Method, cfg: &NcamConfig) -> Result<DfResult> {
    match method {
        Method::Ac => df_autocorrelation(x, cfg),
        Method::Welch => df_welch(x, cfg),
        Method::Fft => df_fft(x, cfg),
        Method::Ncam => df_ncam(x, cfg),
    }
}
