#![allow(dead_code)]

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use egg_df::signal::TimeSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FS: f64 = 2.0;

pub fn sine(freq_hz: f64, n: usize, fs: f64, phase: f64) -> TimeSeries {
    TimeSeries::new(
        (0..n)
            .map(|i| (2.0 * PI * freq_hz * i as f64 / fs + phase).sin())
            .collect(),
        fs,
    )
    .unwrap()
}

/// Normalized autocorrelation by a plain double loop, one lag at a time.
pub fn naive_acf(x: &[f64], lag_min: usize, lag_max: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::new();
    for k in lag_min..=lag_max {
        let mut num = 0.0;
        let mut e1 = 0.0;
        let mut e2 = 0.0;
        for i in 0..n - k {
            num += x[i] * x[i + k];
            e1 += x[i] * x[i];
            e2 += x[i + k] * x[i + k];
        }
        out.push(num / (e1 * e2).sqrt());
    }
    out
}

/// One-sided |DFT|^2 by direct summation.
pub fn naive_dft_power(x: &[f64], nfft: usize) -> Vec<f64> {
    (0..=nfft / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &v) in x.iter().take(nfft).enumerate() {
                let w = -2.0 * PI * (k * i % nfft) as f64 / nfft as f64;
                re += v * w.cos();
                im += v * w.sin();
            }
            re * re + im * im
        })
        .collect()
}

pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Clean EGG-like waveform: a slow wave near 3 cpm with gentle frequency and
/// amplitude modulation, a second harmonic and a slow baseline drift.
pub fn egg_surrogate(seed: u64, n: usize) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f0 = rng.random_range(0.046..0.054);
    let fm_depth = rng.random_range(0.0005..0.002);
    let fm_period = rng.random_range(300.0..900.0);
    let am_depth = rng.random_range(0.05..0.25);
    let am_period = rng.random_range(200.0..600.0);
    let harm = rng.random_range(0.1..0.3);
    let (p0, p1, p2, p3) = (
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
    );
    let dt = 1.0 / FS;
    let mut phase = p0;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            let f = f0 + fm_depth * (2.0 * PI * t / fm_period + p1).sin();
            phase += 2.0 * PI * f * dt;
            let amp = 1.0 + am_depth * (2.0 * PI * t / am_period + p2).sin();
            amp * phase.sin()
                + harm * (2.0 * phase + p3).sin()
                + 0.5 * (2.0 * PI * t / 1500.0).sin()
        })
        .collect();
    TimeSeries::new(samples, FS).unwrap()
}

/// Write a complete synthetic dataset (`subjects` subjects × 3 channels ×
/// 2 states) with single-column signal files and a manifest. Half of the
/// subjects are low BMI. Returns the manifest path.
pub fn write_dataset(root: &Path, subjects: usize, n: usize) -> std::path::PathBuf {
    let mut manifest = String::from("file,subject_id,channel,state,bmi,sex,fs_hz\n");
    for s in 0..subjects {
        let id = format!("ID{}", s + 1);
        let bmi = if s % 2 == 0 {
            21.5 + s as f64 * 0.1
        } else {
            28.0 + s as f64 * 0.1
        };
        let sex = if s % 3 == 0 { "F" } else { "M" };
        for (c, ch) in ["CH1", "CH2", "CH3"].iter().enumerate() {
            for (k, state) in ["fasting", "postprandial"].iter().enumerate() {
                let seed = (s * 6 + c * 2 + k) as u64;
                let x = egg_surrogate(seed, n);
                let file = format!("{id}_{ch}_{state}.txt");
                let mut body = String::new();
                for v in x.samples() {
                    writeln!(body, "{v}").unwrap();
                }
                fs::write(root.join(&file), body).unwrap();
                writeln!(manifest, "{file},{id},{ch},{state},{bmi},{sex},2").unwrap();
            }
        }
    }
    let path = root.join("manifest.csv");
    fs::write(&path, manifest).unwrap();
    path
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
