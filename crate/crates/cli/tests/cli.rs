use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_egg-df"))
}

/// Deterministic 2-channel-state grid: slow wave near 3 cpm plus a weak
/// incommensurate tone, fasting slightly slower than postprandial.
fn write_dataset(root: &Path, subjects: usize) {
    let mut manifest = String::from("file,subject_id,channel,state,bmi,sex,fs_hz\n");
    for s in 0..subjects {
        let id = format!("ID{}", s + 1);
        let bmi = if s % 2 == 0 { 22.0 } else { 28.5 };
        for (c, ch) in ["CH1", "CH2", "CH3"].iter().enumerate() {
            for (k, state) in ["fasting", "postprandial"].iter().enumerate() {
                let f = 0.046 + 0.001 * s as f64 + 0.0005 * c as f64 + 0.003 * k as f64;
                let mut body = String::new();
                for i in 0..2400 {
                    let t = i as f64 / 2.0;
                    let v =
                        (2.0 * PI * f * t).sin() + 0.2 * (2.0 * PI * 0.1713 * t + s as f64).sin();
                    writeln!(body, "{v}").unwrap();
                }
                let file = format!("{id}_{ch}_{state}.csv");
                fs::write(root.join(&file), body).unwrap();
                writeln!(manifest, "{file},{id},{ch},{state},{bmi},M,2").unwrap();
            }
        }
    }
    fs::write(root.join("manifest.csv"), manifest).unwrap();
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn analyze_writes_tables_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fs::create_dir(&data).unwrap();
    write_dataset(&data, 4);
    let out = dir.path().join("out");
    let o = run(&[
        "analyze",
        "--dataset",
        data.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--threshold",
        "0.4",
        "--channel",
        "CH2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let per = data_lines(&out.join("per_recording.csv"));
    assert_eq!(per.len(), 1 + 8);
    assert!(per[0].starts_with("subject_id,bmi_group,channel,state,df_AC,df_Welch,df_FFT,df_NCAM"));
    let summary = data_lines(&out.join("summary.csv"));
    assert_eq!(summary.len(), 1 + 3 * 2 * 4);
    let text = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(text.contains("# channel: CH2"));
    assert!(text.contains("\"ac_threshold\":0.4"));
    assert!(text.contains("# seed: 0"));
    assert!(out.join("peak_counts.csv").is_file());
}

#[test]
fn full_grid_summary_has_72_rows() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 4);
    let out = dir.path().join("out");
    let o = run(&[
        "analyze",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 72);
    assert_eq!(v["metadata"]["command"], "analyze");
    let per: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("per_recording.json")).unwrap()).unwrap();
    assert_eq!(per["records"].as_array().unwrap().len(), 24);
}

#[test]
fn sweep_range_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 1);
    let ds = dir.path().to_str().unwrap();
    let mut outputs = Vec::new();
    for run_id in 0..2 {
        let out = dir.path().join(format!("out{run_id}"));
        let o = run(&[
            "sweep-snr",
            "--dataset",
            ds,
            "--out",
            out.to_str().unwrap(),
            "--subject",
            "ID1",
            "--channel",
            "CH2",
            "--state",
            "postprandial",
            "--snr",
            "-10:0:2",
            "--seed",
            "5",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(out.join("sweep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "snr_db,rd_AC,rd_FFT,rd_Welch,rd_NCAM");
    assert_eq!(rows.len(), 7);
    assert!(rows[1].starts_with("-10,"));
    assert!(rows[6].starts_with("0,"));
}

#[test]
fn sweep_default_grid_has_31_rows() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 1);
    let out = dir.path().join("out");
    let o = run(&[
        "sweep-snr",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--subject",
        "ID1",
        "--channel",
        "2",
        "--state",
        "post",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_lines(&out.join("sweep.csv")).len(), 32);
}

#[test]
fn sweep_unknown_recording_lists_keys() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 1);
    let out = dir.path().join("out");
    let o = run(&[
        "sweep-snr",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--subject",
        "ID9",
        "--channel",
        "CH2",
        "--state",
        "postprandial",
    ]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ID1/CH2/postprandial"), "{err}");
    assert!(!out.exists());
}

#[test]
fn select_window_singleton_grid() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 3);
    let out = dir.path().join("out");
    let o = run(&[
        "select-window",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--s-grid",
        "4",
        "--targets",
        "0.5,0.01,0.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "S = 4");
    let rows = data_lines(&out.join("window_selection.csv"));
    assert_eq!(rows[0], "s,p_CH1,p_CH2,p_CH3,score,chosen");
    assert_eq!(rows.len(), 2);
}

#[test]
fn select_window_needs_targets_or_fallback() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 2);
    let ds = dir.path().to_str().unwrap();
    let o = run(&[
        "select-window",
        "--dataset",
        ds,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--targets"));
    let o = run(&[
        "select-window",
        "--dataset",
        ds,
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "--fallback",
        "--s-grid",
        "2:4:1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn stats_small_dataset() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 2);
    let out = dir.path().join("out");
    let o = run(&[
        "stats",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_lines(&out.join("ttest.csv"));
    assert_eq!(
        rows[0],
        "group,channel,method,n,t_statistic,p_value,significance"
    );
    assert_eq!(rows.len(), 1 + 36);
    assert!(rows.iter().any(|r| r.starts_with("All,CH1,AC,2,")));
    assert_eq!(data_lines(&out.join("dfs.csv")).len(), 13);
}

#[test]
fn empty_dataset_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("manifest.csv"),
        "file,subject_id,channel,state,bmi,sex,fs_hz\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "stats",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn invalid_override_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 1);
    let o = run(&[
        "analyze",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--nfft-fft",
        "1000",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("power of two"));
}
