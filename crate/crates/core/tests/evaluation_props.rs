mod common;

use common::{egg_surrogate, sine, FS};
use egg_df::dataset::{Channel, Recording, Sex, State, SubjectMeta};
use egg_df::estimators::{Method, NcamConfig};
use egg_df::evaluation::{
    analyze_recordings, compare_states, count_peak_exceedance, paired_t_test, relative_difference,
    snr_sweep, student_t_two_tailed, summarize_all, Benchmark, SweepOptions,
};
use egg_df::signal::BandpassSpec;
use proptest::prelude::*;

/// Student-t density integrated by composite Simpson's rule over [|t|, big].
fn t_tail_oracle(t: f64, dof: f64) -> f64 {
    let c = (lanczos_ln_gamma((dof + 1.0) / 2.0) - lanczos_ln_gamma(dof / 2.0)).exp()
        / (dof * std::f64::consts::PI).sqrt();
    let pdf = |x: f64| c * (1.0 + x * x / dof).powf(-(dof + 1.0) / 2.0);
    // substitute x = |t| + u/(1-u) to map the infinite tail onto [0, 1)
    let a = t.abs();
    let n = 200_000;
    let h = 1.0 / n as f64;
    let f = |u: f64| {
        if u >= 1.0 {
            0.0
        } else {
            let x = a + u / (1.0 - u);
            pdf(x) / ((1.0 - u) * (1.0 - u))
        }
    };
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    2.0 * s * h / 3.0
}

/// Lanczos approximation (g = 7, 9 terms).
fn lanczos_ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

#[test]
fn t_test_hand_computed() {
    let a = [1.0, 2.0, 3.0, 4.0, 5.0];
    let b = [0.0; 5];
    let r = paired_t_test(&a, &b).unwrap();
    // mean 3, sd sqrt(2.5), t = 3 / (sqrt(2.5)/sqrt(5))
    assert!((r.t_statistic - 3.0 / (2.5f64 / 5.0).sqrt()).abs() < 1e-12);
    assert!((r.t_statistic - 4.2426).abs() < 1e-4);
    assert!((r.p_value - 0.0132).abs() < 1e-4, "p = {}", r.p_value);
    assert_eq!(r.n_pairs, 5);
}

#[test]
fn t_distribution_tail_matches_quadrature() {
    for &(t, dof) in &[
        (0.5, 3.0),
        (1.0, 4.0),
        (2.1, 9.0),
        (4.2426, 4.0),
        (3.0, 29.0),
        (-1.7, 12.0),
    ] {
        let got = student_t_two_tailed(t, dof).unwrap();
        let want = t_tail_oracle(t, dof);
        assert!(
            (got - want).abs() < 1e-8,
            "t={t} dof={dof}: {got} vs {want}"
        );
    }
}

#[test]
fn sweep_is_deterministic_and_accurate_at_high_snr() {
    let clean = egg_surrogate(3, 2400);
    let opts = SweepOptions {
        snr_db: vec![10.0, 20.0],
        repeats: 3,
        ..SweepOptions::default()
    };
    let cfg = NcamConfig::default();
    let a = snr_sweep(&clean, &opts, &cfg, 42).unwrap();
    let b = snr_sweep(&clean, &opts, &cfg, 42).unwrap();
    assert_eq!(a, b);
    for m in Method::ALL {
        assert!(a.rel_diff_percent.get(m)[1] < 2.0, "{m} at 20 dB");
    }
}

#[test]
fn noise_free_sweep_point_reproduces_benchmark() {
    let clean = egg_surrogate(8, 2400);
    let opts = SweepOptions {
        snr_db: vec![f64::INFINITY],
        repeats: 2,
        benchmark: Benchmark::OwnMethod,
        ..SweepOptions::default()
    };
    let r = snr_sweep(&clean, &opts, &NcamConfig::default(), 1).unwrap();
    for m in Method::ALL {
        assert_eq!(r.rel_diff_percent.get(m)[0], 0.0);
    }
}

#[test]
fn sweep_fixed_benchmark() {
    let clean = sine(0.05, 2400, FS, 0.0);
    let opts = SweepOptions {
        snr_db: vec![f64::INFINITY],
        benchmark: Benchmark::Fixed(3.0),
        ..SweepOptions::default()
    };
    let r = snr_sweep(&clean, &opts, &NcamConfig::default(), 0).unwrap();
    assert_eq!(r.rel_diff_percent.ac[0], 0.0);
    let want = (r.df_cpm.fft[0] - 3.0).abs() / 3.0 * 100.0;
    assert!((r.rel_diff_percent.fft[0] - want).abs() < 1e-12);
}

fn synthetic_recordings(subjects: usize) -> Vec<Recording> {
    let mut out = Vec::new();
    for s in 0..subjects {
        let bmi = if s % 2 == 0 { 22.0 } else { 29.0 };
        let meta = SubjectMeta::new(format!("S{s}"), bmi, Sex::F).unwrap();
        for (c, channel) in Channel::ALL.into_iter().enumerate() {
            for (k, state) in State::ALL.into_iter().enumerate() {
                out.push(Recording {
                    subject: meta.clone(),
                    channel,
                    state,
                    series: egg_surrogate((s * 6 + c * 2 + k) as u64 + 500, 2400),
                });
            }
        }
    }
    out
}

#[test]
fn group_tables_have_full_shape() {
    let recs = synthetic_recordings(4);
    let cfg = NcamConfig::default();
    let analyses = analyze_recordings(&recs, &cfg, &BandpassSpec::default()).unwrap();
    assert_eq!(analyses.len(), 24);

    let summary = summarize_all(&analyses);
    assert_eq!(summary.len(), 72);
    assert!(summary.iter().all(|s| s.mean_cpm > 1.8 && s.mean_cpm < 4.8));

    let counts = count_peak_exceedance(&analyses, -2.0, None);
    assert_eq!(counts.len(), 6);
    assert_eq!(counts.iter().map(|c| c.total).sum::<usize>(), 24);
    assert!(counts.iter().all(|c| c.exceeding == c.total));
    let counts = count_peak_exceedance(&analyses, 1.0, Some(State::Fasting));
    assert_eq!(counts.iter().map(|c| c.total).sum::<usize>(), 12);
    assert!(counts.iter().all(|c| c.exceeding == 0));

    let comps = compare_states(&analyses);
    assert_eq!(comps.len(), 36);
    for c in &comps {
        let want = match c.group {
            egg_df::evaluation::Group::All => 4,
            _ => 2,
        };
        assert_eq!(c.n_pairs, want);
    }
}

proptest! {
    #[test]
    fn t_test_antisymmetric(
        pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let (Ok(ab), Ok(ba)) = (paired_t_test(&a, &b), paired_t_test(&b, &a)) {
            prop_assert!((ab.t_statistic + ba.t_statistic).abs() <= 1e-12 * ab.t_statistic.abs().max(1.0));
            prop_assert!((ab.p_value - ba.p_value).abs() <= 1e-12);
        }
    }

    #[test]
    fn p_value_decreases_with_t(t1 in 0.0f64..20.0, dt in 0.001f64..5.0, dof in 1.0f64..100.0) {
        let p1 = student_t_two_tailed(t1, dof).unwrap();
        let p2 = student_t_two_tailed(t1 + dt, dof).unwrap();
        prop_assert!(p2 <= p1);
        prop_assert!((0.0..=1.0).contains(&p1));
    }

    #[test]
    fn relative_difference_properties(b in 0.1f64..10.0, m in 0.1f64..10.0) {
        let rd = relative_difference(b, m).unwrap();
        prop_assert!(rd >= 0.0);
        prop_assert!((rd - (b - m).abs() / b * 100.0).abs() < 1e-9);
        prop_assert_eq!(relative_difference(b, b).unwrap(), 0.0);
    }
}
