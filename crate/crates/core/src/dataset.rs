//! Manifest-driven loading of multi-subject EGG recordings.
//!
//! The manifest is a comma-separated file with the header
//! `file,subject_id,channel,state,bmi,sex,fs_hz`. Each row points at one
//! signal file (relative to the dataset root) holding one recording. Signal
//! files are delimited text; one column is read as the sample stream.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

/// BMI separating the low and high groups; exactly this value is rejected.
pub const BMI_SPLIT: f64 = 25.0;
pub const DEFAULT_FS_HZ: f64 = 2.0;
/// 20 minutes at 2 Hz.
pub const NOMINAL_LEN: usize = 2400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "CH1")]
    Ch1,
    #[serde(rename = "CH2")]
    Ch2,
    #[serde(rename = "CH3")]
    Ch3,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Ch1, Channel::Ch2, Channel::Ch3];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Ch1 => "CH1",
            Channel::Ch2 => "CH2",
            Channel::Ch3 => "CH3",
        }
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CH1" | "1" => Ok(Channel::Ch1),
            "CH2" | "2" => Ok(Channel::Ch2),
            "CH3" | "3" => Ok(Channel::Ch3),
            _ => Err(Error::arg("channel", format!("unknown channel `{s}`"))),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum State {
    Fasting,
    Postprandial,
}

impl State {
    pub const ALL: [State; 2] = [State::Fasting, State::Postprandial];

    pub fn as_str(self) -> &'static str {
        match self {
            State::Fasting => "fasting",
            State::Postprandial => "postprandial",
        }
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fasting" | "f" | "fast" => Ok(State::Fasting),
            "postprandial" | "p" | "post" => Ok(State::Postprandial),
            _ => Err(Error::arg("state", format!("unknown state `{s}`"))),
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    F,
    M,
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F" | "FEMALE" => Ok(Sex::F),
            "M" | "MALE" => Ok(Sex::M),
            _ => Err(Error::arg("sex", format!("unknown sex `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BmiGroup {
    Low,
    High,
}

impl BmiGroup {
    pub fn from_bmi(bmi: f64) -> Result<Self> {
        if !(bmi.is_finite() && bmi > 0.0) {
            return Err(Error::arg(
                "bmi",
                format!("BMI must be positive, got {bmi}"),
            ));
        }
        if bmi < BMI_SPLIT {
            Ok(BmiGroup::Low)
        } else if bmi > BMI_SPLIT {
            Ok(BmiGroup::High)
        } else {
            Err(Error::arg(
                "bmi",
                format!("BMI of exactly {BMI_SPLIT} belongs to neither group"),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectMeta {
    pub subject_id: String,
    pub bmi: f64,
    pub sex: Sex,
    pub bmi_group: BmiGroup,
}

impl SubjectMeta {
    pub fn new(subject_id: impl Into<String>, bmi: f64, sex: Sex) -> Result<Self> {
        Ok(Self {
            subject_id: subject_id.into(),
            bmi,
            sex,
            bmi_group: BmiGroup::from_bmi(bmi)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recording {
    pub subject: SubjectMeta,
    pub channel: Channel,
    pub state: State,
    pub series: TimeSeries,
}

impl Recording {
    pub fn key(&self) -> CellKey {
        CellKey {
            subject_id: self.subject.subject_id.clone(),
            channel: self.channel,
            state: self.state,
        }
    }
}

/// One (subject, channel, state) cell of the dataset grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CellKey {
    pub subject_id: String,
    pub channel: Channel,
    pub state: State,
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.subject_id, self.channel, self.state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Comma,
    Tab,
    /// Any run of spaces or tabs.
    Whitespace,
}

impl FromStr for Delimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "," | "comma" => Ok(Delimiter::Comma),
            "\t" | "tab" => Ok(Delimiter::Tab),
            " " | "space" | "whitespace" => Ok(Delimiter::Whitespace),
            _ => Err(Error::arg(
                "delimiter",
                format!("unsupported delimiter `{s}`"),
            )),
        }
    }
}

/// How samples are laid out in a signal file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignalFormat {
    pub delimiter: Delimiter,
    /// Zero-based column holding the samples.
    pub column: usize,
    /// Leading rows to skip (headers).
    pub skip_rows: usize,
}

impl Default for SignalFormat {
    fn default() -> Self {
        Self {
            delimiter: Delimiter::Comma,
            column: 0,
            skip_rows: 0,
        }
    }
}

/// Read one sample column from a delimited text file. Blank lines are ignored;
/// row numbers in errors are 1-based file lines.
pub fn read_signal(path: &Path, format: &SignalFormat, fs_hz: f64) -> Result<TimeSeries> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate().skip(format.skip_rows) {
        let row = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let token = match format.delimiter {
            Delimiter::Comma => line.split(',').nth(format.column),
            Delimiter::Tab => line.split('\t').nth(format.column),
            Delimiter::Whitespace => line.split_whitespace().nth(format.column),
        };
        let token = token.map(str::trim).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            row,
            reason: format!("missing column {}", format.column),
        })?;
        let value: f64 = token.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            row,
            reason: format!("non-numeric sample `{token}`"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                reason: format!("non-finite sample `{token}`"),
            });
        }
        samples.push(value);
    }
    TimeSeries::new(samples, fs_hz).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        row: 0,
        reason: e.to_string(),
    })
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub signal: SignalFormat,
    /// Every recording must carry this rate when set.
    pub expected_fs_hz: Option<f64>,
    /// Nominal sample count; deviations over 5 % are logged.
    pub nominal_len: Option<usize>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            signal: SignalFormat::default(),
            expected_fs_hz: Some(DEFAULT_FS_HZ),
            nominal_len: Some(NOMINAL_LEN),
        }
    }
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    file: String,
    subject_id: String,
    channel: String,
    state: String,
    bmi: f64,
    sex: String,
    #[serde(default)]
    fs_hz: Option<f64>,
}

/// A per-row failure; loading continues past it.
#[derive(Debug)]
pub struct LoadIssue {
    /// 1-based manifest data row.
    pub manifest_row: usize,
    pub file: PathBuf,
    pub error: Error,
}

impl fmt::Display for LoadIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "manifest row {} ({}): {}",
            self.manifest_row,
            self.file.display(),
            self.error
        )
    }
}

#[derive(Debug, Default)]
pub struct Dataset {
    pub subjects: Vec<SubjectMeta>,
    pub recordings: Vec<Recording>,
    /// Cells of the subject × channel × state grid that did not load.
    pub missing: Vec<CellKey>,
    pub issues: Vec<LoadIssue>,
}

impl Dataset {
    pub fn from_recordings(recordings: Vec<Recording>) -> Self {
        let mut subjects: BTreeMap<String, SubjectMeta> = BTreeMap::new();
        for r in &recordings {
            subjects
                .entry(r.subject.subject_id.clone())
                .or_insert_with(|| r.subject.clone());
        }
        Self {
            subjects: subjects.into_values().collect(),
            recordings,
            missing: Vec::new(),
            issues: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.missing.is_empty() && self.issues.is_empty()
    }

    pub fn find(&self, subject_id: &str, channel: Channel, state: State) -> Option<&Recording> {
        self.recordings.iter().find(|r| {
            r.subject.subject_id == subject_id && r.channel == channel && r.state == state
        })
    }

    pub fn keys(&self) -> Vec<CellKey> {
        let mut k: Vec<_> = self.recordings.iter().map(Recording::key).collect();
        k.sort();
        k
    }
}

fn parse_row(
    row: &ManifestRow,
    root: &Path,
    opts: &LoadOptions,
) -> Result<(SubjectMeta, Channel, State, PathBuf, f64)> {
    let channel: Channel = row.channel.parse()?;
    let state: State = row.state.parse()?;
    let sex: Sex = row.sex.parse()?;
    let subject = SubjectMeta::new(row.subject_id.trim(), row.bmi, sex)?;
    let fs = row.fs_hz.or(opts.expected_fs_hz).unwrap_or(DEFAULT_FS_HZ);
    if let Some(expected) = opts.expected_fs_hz {
        if (fs - expected).abs() > 1e-9 * expected {
            return Err(Error::Manifest(format!(
                "sampling rate {fs} Hz differs from expected {expected} Hz"
            )));
        }
    }
    Ok((subject, channel, state, root.join(row.file.trim()), fs))
}

/// Load every recording listed in `manifest`.
///
/// Only an unreadable or malformed manifest fails outright. Per-row problems
/// (bad metadata, unreadable or non-numeric files, rate mismatches,
/// duplicates, conflicting subject metadata) are collected into
/// [`Dataset::issues`] and the affected cells are listed in
/// [`Dataset::missing`].
pub fn load_dataset(root: &Path, manifest: &Path, opts: &LoadOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(manifest)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: manifest.to_path_buf(),
                source,
            },
            other => Error::Manifest(format!("{other:?}")),
        })?;

    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<ManifestRow>().enumerate() {
        let rec = rec.map_err(|e| Error::Manifest(format!("row {}: {e}", i + 1)))?;
        rows.push((i + 1, rec));
    }

    let mut issues = Vec::new();
    let mut subjects: BTreeMap<String, SubjectMeta> = BTreeMap::new();
    let mut seen: BTreeSet<CellKey> = BTreeSet::new();
    let mut all_ids: BTreeSet<String> = BTreeSet::new();
    let mut jobs = Vec::new();

    for (row_no, row) in &rows {
        all_ids.insert(row.subject_id.trim().to_string());
        let file = root.join(row.file.trim());
        let parsed = parse_row(row, root, opts).and_then(|(subject, channel, state, path, fs)| {
            if let Some(known) = subjects.get(&subject.subject_id) {
                if known.bmi != subject.bmi || known.sex != subject.sex {
                    return Err(Error::Manifest(format!(
                        "subject {} has conflicting metadata",
                        subject.subject_id
                    )));
                }
            }
            let key = CellKey {
                subject_id: subject.subject_id.clone(),
                channel,
                state,
            };
            if !seen.insert(key.clone()) {
                return Err(Error::Manifest(format!("duplicate entry for {key}")));
            }
            subjects
                .entry(subject.subject_id.clone())
                .or_insert_with(|| subject.clone());
            Ok((subject, channel, state, path, fs))
        });
        match parsed {
            Ok(job) => jobs.push((*row_no, job)),
            Err(error) => issues.push(LoadIssue {
                manifest_row: *row_no,
                file,
                error,
            }),
        }
    }

    let loaded: Vec<(usize, PathBuf, Result<Recording>)> = jobs
        .into_par_iter()
        .map(|(row_no, (subject, channel, state, path, fs))| {
            let res = read_signal(&path, &opts.signal, fs).map(|series| Recording {
                subject,
                channel,
                state,
                series,
            });
            (row_no, path, res)
        })
        .collect();

    let mut recordings = Vec::new();
    for (row_no, file, res) in loaded {
        match res {
            Ok(r) => {
                if let Some(nominal) = opts.nominal_len {
                    let dev = (r.series.len() as f64 - nominal as f64).abs() / nominal as f64;
                    if dev > 0.05 {
                        log::warn!(
                            "{}: {} samples deviates from nominal {nominal} by {:.1}%",
                            r.key(),
                            r.series.len(),
                            dev * 100.0
                        );
                    }
                }
                recordings.push(r);
            }
            Err(error) => issues.push(LoadIssue {
                manifest_row: row_no,
                file,
                error,
            }),
        }
    }
    recordings.sort_by_key(Recording::key);
    issues.sort_by_key(|i| i.manifest_row);

    let present: BTreeSet<CellKey> = recordings.iter().map(Recording::key).collect();
    let mut missing = Vec::new();
    for id in &all_ids {
        for channel in Channel::ALL {
            for state in State::ALL {
                let key = CellKey {
                    subject_id: id.clone(),
                    channel,
                    state,
                };
                if !present.contains(&key) {
                    missing.push(key);
                }
            }
        }
    }
    for issue in &issues {
        log::warn!("{issue}");
    }

    Ok(Dataset {
        subjects: subjects.into_values().collect(),
        recordings,
        missing,
        issues,
    })
}
