//! Waveform container, Butterworth bandpass design, zero-phase filtering and
//! white-noise injection.
//!
//! The bandpass is designed from the analog Butterworth prototype: poles are
//! placed on the left half of the unit circle, transformed lowpass→bandpass
//! around the prewarped cutoffs, and mapped to the z-plane with the bilinear
//! transform. Poles are grouped into second-order sections for filtering;
//! the expanded `b`, `a` polynomials are kept for inspection. [`filtfilt`]
//! applies the filter forward and backward.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled, finite, real-valued waveform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    samples: Vec<f64>,
    fs_hz: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, fs_hz: f64) -> Result<Self> {
        if !(fs_hz.is_finite() && fs_hz > 0.0) {
            return Err(Error::InvalidSeries(format!(
                "sampling rate must be positive and finite, got {fs_hz}"
            )));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self { samples, fs_hz })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn fs_hz(&self) -> f64 {
        self.fs_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; a valid series holds at least two samples.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs_hz
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Mean of squared samples.
    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }

    /// New series with the same sampling rate.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, self.fs_hz)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.with_samples(self.samples.iter().map(|v| v * factor).collect())
    }

    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self {
            samples,
            fs_hz: self.fs_hz,
        }
    }
}

/// Butterworth bandpass parameters. `order` is the prototype order per pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandpassSpec {
    pub order: usize,
    pub low_cut_hz: f64,
    pub high_cut_hz: f64,
}

impl Default for BandpassSpec {
    fn default() -> Self {
        Self {
            order: 3,
            low_cut_hz: 0.03,
            high_cut_hz: 0.25,
        }
    }
}

impl BandpassSpec {
    pub fn validate(&self, fs_hz: f64) -> Result<()> {
        if self.order < 1 {
            return Err(Error::InvalidSpec("order must be at least 1".into()));
        }
        if !(fs_hz.is_finite() && fs_hz > 0.0) {
            return Err(Error::InvalidSpec(format!("bad sampling rate {fs_hz}")));
        }
        let nyquist = fs_hz / 2.0;
        if !(self.low_cut_hz > 0.0 && self.low_cut_hz < self.high_cut_hz) {
            return Err(Error::InvalidSpec(format!(
                "need 0 < low ({}) < high ({})",
                self.low_cut_hz, self.high_cut_hz
            )));
        }
        if self.high_cut_hz >= nyquist {
            return Err(Error::InvalidSpec(format!(
                "high cutoff {} Hz is at or above Nyquist {} Hz",
                self.high_cut_hz, nyquist
            )));
        }
        Ok(())
    }
}

/// One second-order section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    pub fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }
}

/// Transfer function `B(z) / A(z)` with `a[0] == 1`.
///
/// Filters from [`design_bandpass`] also carry a cascade of second-order
/// sections with the same overall response; filtering runs through the
/// cascade when present, since the expanded polynomial loses precision for
/// narrow low-frequency bands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterCoefficients {
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    sections: Vec<Biquad>,
}

impl FilterCoefficients {
    /// Direct-form filter; coefficients are normalized so that `a[0] == 1`.
    pub fn new(numerator: Vec<f64>, denominator: Vec<f64>) -> Result<Self> {
        if numerator.is_empty() || denominator.is_empty() {
            return Err(Error::arg("coefficients", "empty coefficient vector"));
        }
        let a0 = denominator[0];
        if a0 == 0.0 || !a0.is_finite() {
            return Err(Error::arg(
                "denominator",
                "a[0] must be finite and non-zero",
            ));
        }
        Ok(Self {
            numerator: numerator.iter().map(|b| b / a0).collect(),
            denominator: denominator.iter().map(|a| a / a0).collect(),
            sections: Vec::new(),
        })
    }

    pub fn from_sections(sections: Vec<Biquad>) -> Result<Self> {
        if sections.is_empty() {
            return Err(Error::arg("sections", "empty cascade"));
        }
        if sections.iter().any(|s| s.a[0] != 1.0) {
            return Err(Error::arg("sections", "section a[0] must be 1"));
        }
        let mut b = vec![1.0];
        let mut a = vec![1.0];
        for s in &sections {
            b = convolve(&b, &s.b);
            a = convolve(&a, &s.a);
        }
        Ok(Self {
            numerator: b,
            denominator: a,
            sections,
        })
    }

    pub fn numerator(&self) -> &[f64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    /// Second-order sections; empty for a direct-form filter.
    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Number of delay elements, `max(len(b), len(a)) - 1`.
    pub fn state_len(&self) -> usize {
        self.numerator.len().max(self.denominator.len()) - 1
    }

    /// Edge padding used by [`filtfilt`].
    pub fn pad_len(&self) -> usize {
        3 * self.state_len()
    }

    /// Complex response at `freq_hz` on the unit circle.
    pub fn response(&self, freq_hz: f64, fs_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / fs_hz;
        let eval = |c: &[f64]| -> Complex64 {
            c.iter()
                .enumerate()
                .map(|(k, &v)| Complex64::from_polar(v, -w * k as f64))
                .sum()
        };
        if self.sections.is_empty() {
            eval(&self.numerator) / eval(&self.denominator)
        } else {
            self.sections
                .iter()
                .map(|s| eval(&s.b) / eval(&s.a))
                .product()
        }
    }

    /// Direct-form II transposed filtering of the expanded polynomial.
    pub fn lfilter(&self, x: &[f64], zi: Option<&[f64]>) -> Vec<f64> {
        df2t(&self.numerator, &self.denominator, x, zi)
    }

    /// Steady-state initial conditions of the expanded polynomial for a unit step.
    pub fn lfilter_zi(&self) -> Vec<f64> {
        step_zi(&self.numerator, &self.denominator)
    }

    /// Filter `x` starting from the steady state for a constant input `level`.
    fn filter_from_steady_state(&self, x: &[f64], level: f64) -> Vec<f64> {
        if self.sections.is_empty() {
            let zi: Vec<f64> = self.lfilter_zi().iter().map(|z| z * level).collect();
            return self.lfilter(x, Some(&zi));
        }
        let mut y = x.to_vec();
        let mut level = level;
        for s in &self.sections {
            let zi: Vec<f64> = step_zi(&s.b, &s.a).iter().map(|z| z * level).collect();
            y = df2t(&s.b, &s.a, &y, Some(&zi));
            level *= s.dc_gain();
        }
        y
    }
}

fn convolve(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn df2t(b: &[f64], a: &[f64], x: &[f64], zi: Option<&[f64]>) -> Vec<f64> {
    let n = b.len().max(a.len());
    let mut b = b.to_vec();
    let mut a = a.to_vec();
    b.resize(n, 0.0);
    a.resize(n, 0.0);

    let mut z = match zi {
        Some(s) => s.to_vec(),
        None => vec![0.0; n - 1],
    };
    z.resize(n - 1, 0.0);

    let mut y = Vec::with_capacity(x.len());
    for &xi in x {
        let yi = b[0] * xi + z.first().copied().unwrap_or(0.0);
        for k in 0..n - 1 {
            let next = if k + 1 < n - 1 { z[k + 1] } else { 0.0 };
            z[k] = b[k + 1] * xi + next - a[k + 1] * yi;
        }
        y.push(yi);
    }
    y
}

fn step_zi(b: &[f64], a: &[f64]) -> Vec<f64> {
    let n = b.len().max(a.len());
    let mut b = b.to_vec();
    let mut a = a.to_vec();
    b.resize(n, 0.0);
    a.resize(n, 0.0);
    let dc = b.iter().sum::<f64>() / a.iter().sum::<f64>();
    (0..n - 1)
        .map(|i| (i + 1..n).map(|j| b[j] - a[j] * dc).sum())
        .collect()
}

fn analog_prototype_poles(order: usize) -> Vec<Complex64> {
    let n = order as f64;
    (0..order)
        .map(|i| {
            let m = -n + 1.0 + 2.0 * i as f64;
            -Complex64::from_polar(1.0, PI * m / (2.0 * n))
        })
        .collect()
}

/// Digital Butterworth bandpass by bilinear transform with prewarped cutoffs.
pub fn design_bandpass(spec: &BandpassSpec, fs_hz: f64) -> Result<FilterCoefficients> {
    spec.validate(fs_hz)?;
    let order = spec.order;

    // Bilinear transform constant is 2*fs; the prewarped edges live in the
    // same analog frequency scale.
    let k2 = 2.0 * fs_hz;
    let w1 = k2 * (PI * spec.low_cut_hz / fs_hz).tan();
    let w2 = k2 * (PI * spec.high_cut_hz / fs_hz).tan();
    let bw = w2 - w1;
    let wo2 = w1 * w2;

    let mut analog_poles = Vec::with_capacity(2 * order);
    let lp: Vec<Complex64> = analog_prototype_poles(order)
        .into_iter()
        .map(|p| p * (bw / 2.0))
        .collect();
    for &p in &lp {
        analog_poles.push(p + (p * p - wo2).sqrt());
    }
    for &p in &lp {
        analog_poles.push(p - (p * p - wo2).sqrt());
    }
    // `order` analog zeros at the origin, gain bw^order.
    let analog_gain = bw.powi(order as i32);

    let to_z = |s: Complex64| (k2 + s) / (k2 - s);
    let poles: Vec<Complex64> = analog_poles.iter().map(|&p| to_z(p)).collect();

    let num_factor = k2.powi(order as i32);
    let den_factor: Complex64 = analog_poles.iter().map(|&p| k2 - p).product();
    let gain = analog_gain * (num_factor / den_factor).re;

    // Every section gets one zero at z = 1 and one at z = -1; poles are
    // grouped into conjugate pairs, leftover real poles pair up in order.
    let scale = poles.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    let mut upper: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > tol).collect();
    let mut real: Vec<f64> = poles
        .iter()
        .filter(|p| p.im.abs() <= tol)
        .map(|p| p.re)
        .collect();
    upper.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
    real.sort_by(f64::total_cmp);
    if !real.len().is_multiple_of(2) || upper.len() * 2 + real.len() != poles.len() {
        return Err(Error::InvalidSpec(
            "pole set is not conjugate-symmetric".into(),
        ));
    }

    let mut denominators: Vec<[f64; 3]> = upper
        .iter()
        .map(|p| [1.0, -2.0 * p.re, p.norm_sqr()])
        .collect();
    denominators.extend(real.chunks(2).map(|r| [1.0, -(r[0] + r[1]), r[0] * r[1]]));

    let sections = denominators
        .into_iter()
        .enumerate()
        .map(|(i, a)| {
            let g = if i == 0 { gain } else { 1.0 };
            Biquad { b: [g, 0.0, -g], a }
        })
        .collect();
    FilterCoefficients::from_sections(sections)
}

/// Zero-phase forward-backward filtering with odd-reflection edge padding.
pub fn filtfilt(coeffs: &FilterCoefficients, x: &TimeSeries) -> Result<TimeSeries> {
    let data = x.samples();
    let pad = coeffs.pad_len();
    if data.len() <= pad {
        return Err(Error::TooShort {
            required: pad,
            actual: data.len(),
        });
    }

    let n = data.len();
    let mut ext = Vec::with_capacity(n + 2 * pad);
    let first = data[0];
    let last = data[n - 1];
    ext.extend((1..=pad).rev().map(|i| 2.0 * first - data[i]));
    ext.extend_from_slice(data);
    ext.extend((1..=pad).map(|i| 2.0 * last - data[n - 1 - i]));

    let mut y = coeffs.filter_from_steady_state(&ext, ext[0]);
    y.reverse();
    let mut y = coeffs.filter_from_steady_state(&y, y[0]);
    y.reverse();

    let out: Vec<f64> = y[pad..pad + n].to_vec();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSeries(
            "filter produced non-finite output".into(),
        ));
    }
    x.with_samples(out)
}

/// Design the standard bandpass for `x`'s sampling rate and apply it zero-phase.
pub fn bandpass_filter(x: &TimeSeries, spec: &BandpassSpec) -> Result<TimeSeries> {
    let coeffs = design_bandpass(spec, x.fs_hz())?;
    filtfilt(&coeffs, x)
}

/// Noise variance that puts white noise `snr_db` below a signal of mean-square `power`.
pub fn noise_variance(power: f64, snr_db: f64) -> f64 {
    power / 10f64.powf(snr_db / 10.0)
}

/// Add zero-mean white Gaussian noise at `snr_db` relative to the mean-square of `x`.
///
/// The generator is seeded from `seed`, so identical inputs give identical
/// output. `snr_db = +inf` returns an unmodified copy.
pub fn add_awgn(x: &TimeSeries, snr_db: f64, seed: u64) -> Result<TimeSeries> {
    let power = x.mean_square();
    if power <= 0.0 {
        return Err(Error::ZeroEnergy("signal power is zero"));
    }
    if snr_db.is_nan() {
        return Err(Error::arg("snr_db", "NaN"));
    }
    if snr_db == f64::INFINITY {
        return Ok(x.clone());
    }
    let sd = noise_variance(power, snr_db).sqrt();
    if !sd.is_finite() {
        return Err(Error::arg(
            "snr_db",
            format!("{snr_db} dB overflows noise level"),
        ));
    }
    let normal = Normal::new(0.0, sd).map_err(|e| Error::arg("snr_db", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = x
        .samples()
        .iter()
        .map(|v| v + normal.sample(&mut rng))
        .collect();
    x.with_samples(noisy)
}
