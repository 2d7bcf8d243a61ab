//! Dominant-frequency (DF) estimation for electrogastrogram recordings.
//!
//! * [`signal`]: waveform type, Butterworth bandpass, zero-phase filtering, noise injection
//! * [`estimators`]: autocorrelation, Welch, FFT and combined (NCAM) DF estimators
//! * [`evaluation`]: relative error, paired t-test, SNR sweeps, window selection, group tables
//! * [`dataset`]: manifest-driven loading of multi-subject recordings
//! * [`export`]: CSV / JSON result tables
//!
//! ```
//! use egg_df::estimators::{estimate_all, NcamConfig};
//! use egg_df::signal::{bandpass_filter, BandpassSpec, TimeSeries};
//!
//! let fs = 2.0;
//! let x: Vec<f64> = (0..2400)
//!     .map(|i| (2.0 * std::f64::consts::PI * 0.05 * i as f64 / fs).sin())
//!     .collect();
//! let x = bandpass_filter(&TimeSeries::new(x, fs)?, &BandpassSpec::default())?;
//! let dfs = estimate_all(&x, &NcamConfig::default())?;
//! assert_eq!(dfs.ac.index_max, Some(40));
//! assert!((dfs.ncam.df_cpm - 2.988).abs() < 0.01);
//! # Ok::<(), egg_df::Error>(())
//! ```

pub mod dataset;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod export;
pub mod signal;

pub use error::{Error, Result};
