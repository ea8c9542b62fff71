use fourphoton::coincidence::{
    appendix_rates, appendix_rates_from, simulate_pulse_train, verify_time_structure, ExperimentConfig,
    TimeStructureConfig, TruncationMode,
};
use fourphoton::moments::{chi_closed_form, GaussianSetup};
use fourphoton::Error;
use num_rational::BigRational;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn ratio(p2: f64, chi: f64, eta: f64, pulses: u64, seed: u64) -> (f64, f64) {
    let c = ExperimentConfig::new(p2, chi, pulses, seed).with_efficiency(eta);
    let s = simulate_pulse_train(&c).unwrap().summary().unwrap();
    (s.ratio, s.ratio_stderr)
}

#[test]
fn ratio_recovers_one_plus_chi() {
    for (i, chi) in [0.0, 0.5, 1.0].into_iter().enumerate() {
        let (r, se) = ratio(0.1, chi, 1.0, 1_000_000, 100 + i as u64);
        assert!((r - (1.0 + chi)).abs() < 3.0 * se, "chi {chi}: {r} ± {se}");
    }
}

#[test]
fn mean_over_seeds_is_consistent() {
    let chi = 0.5;
    let ratios: Vec<f64> = (0..20).map(|s| ratio(0.1, chi, 1.0, 100_000, 1000 + s).0).collect();
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sem = (var / n).sqrt();
    assert!((mean - 1.5).abs() < 3.0 * sem, "{mean} ± {sem}");
}

#[test]
fn peak_areas_are_homogeneous_across_seeds() {
    // contingency table seeds × {−Δτ, 0, +Δτ}
    let rows: Vec<[f64; 3]> = (0..20)
        .map(|s| {
            let h = simulate_pulse_train(&ExperimentConfig::new(0.1, 0.3, 100_000, 500 + s)).unwrap();
            [h.peaks.minus.counts as f64, h.peaks.zero.counts as f64, h.peaks.plus.counts as f64]
        })
        .collect();
    let total: f64 = rows.iter().flatten().sum();
    let col: Vec<f64> = (0..3).map(|k| rows.iter().map(|r| r[k]).sum()).collect();
    let mut stat = 0.0;
    for r in &rows {
        let rs: f64 = r.iter().sum();
        for k in 0..3 {
            let e = rs * col[k] / total;
            stat += (r[k] - e).powi(2) / e;
        }
    }
    let p = 1.0 - ChiSquared::new(((rows.len() - 1) * 2) as f64).unwrap().cdf(stat);
    assert!(p > 0.01, "chi2 = {stat}, p = {p}");
}

#[test]
fn efficiency_cancels_in_ratio() {
    let (a, sa) = ratio(0.1, 0.5, 1.0, 1_000_000, 7);
    let (b, sb) = ratio(0.1, 0.5, 0.2, 1_000_000, 8);
    assert!((a - b).abs() < 3.0 * (sa * sa + sb * sb).sqrt(), "{a} ± {sa} vs {b} ± {sb}");
}

#[test]
fn peaks_at_zero_and_one_period() {
    let h = simulate_pulse_train(&ExperimentConfig::new(0.1, 0.5, 200_000, 11)).unwrap();
    assert_eq!(h.peaks.zero.center_ns, 0.0);
    assert_eq!(h.peaks.plus.center_ns, 13.0);
    assert_eq!(h.peaks.minus.center_ns, -13.0);
    let centers = h.centers();
    let argmax = |lo: f64, hi: f64| {
        centers
            .iter()
            .zip(&h.counts)
            .filter(|(t, _)| **t > lo && **t < hi)
            .max_by_key(|(_, c)| **c)
            .map(|(t, _)| *t)
            .unwrap()
    };
    assert!(argmax(-6.5, 6.5).abs() < 1e-9);
    assert!((argmax(6.5, 19.5) - 13.0).abs() < 1e-9);
    assert!((argmax(-19.5, -6.5) + 13.0).abs() < 1e-9);
}

#[test]
fn dark_counts_alone_give_flat_histogram() {
    let c = ExperimentConfig::new(0.0, 0.0, 1_000_000, 5).with_dark(0.02);
    let h = simulate_pulse_train(&c).unwrap();
    // inside one period of zero delay every bin sees the same expected rate
    let bins: Vec<f64> = h
        .centers()
        .iter()
        .zip(&h.counts)
        .filter(|(t, _)| t.abs() < 12.0)
        .map(|(_, &c)| c as f64)
        .collect();
    let mean = bins.iter().sum::<f64>() / bins.len() as f64;
    let stat: f64 = bins.iter().map(|c| (c - mean).powi(2) / mean).sum();
    let p = 1.0 - ChiSquared::new((bins.len() - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi2 = {stat} over {} bins", bins.len());
    let s = h.summary().unwrap();
    assert!((s.ratio - 1.0).abs() < 3.0 * s.ratio_stderr);
}

#[test]
fn per_pulse_mode_matches_its_biased_expectation() {
    // independent pulses: R_side = s², s = P(D+ clicks) = ½P₂ + ¾P₄
    let (p2, chi) = (0.2, 0.5);
    let c = ExperimentConfig::new(p2, chi, 2_000_000, 3).with_truncation(TruncationMode::PerPulse);
    let p4 = c.p4();
    let expected = 0.5 * p4 / (0.5 * p2 + 0.75 * p4).powi(2);
    let s = simulate_pulse_train(&c).unwrap().summary().unwrap();
    assert!((s.ratio - expected).abs() < 3.0 * s.ratio_stderr, "{} ± {} vs {expected}", s.ratio, s.ratio_stderr);
    assert!((s.ratio - (1.0 + chi)).abs() > 3.0 * s.ratio_stderr);
}

#[test]
fn window_mode_counts_what_it_drops() {
    let h = simulate_pulse_train(&ExperimentConfig::new(0.2, 0.5, 500_000, 4)).unwrap();
    assert!(h.excluded > 0);
    let h = simulate_pulse_train(&ExperimentConfig::new(0.2, 0.5, 500_000, 4).with_truncation(TruncationMode::PerPulse))
        .unwrap();
    assert_eq!(h.excluded, 0);
}

#[test]
fn seed_changes_result() {
    let a = simulate_pulse_train(&ExperimentConfig::new(0.1, 0.5, 100_000, 1)).unwrap();
    let b = simulate_pulse_train(&ExperimentConfig::new(0.1, 0.5, 100_000, 2)).unwrap();
    assert_ne!(a.counts, b.counts);
}

#[test]
fn empty_run() {
    assert!(matches!(simulate_pulse_train(&ExperimentConfig::new(0.1, 0.5, 0, 1)), Err(Error::EmptyRun)));
}

#[test]
fn rational_rates_are_exact() {
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let (j2, j4) = (q(3, 7), q(5, 11));
    let r = appendix_rates_from(j2.clone(), j4.clone()).unwrap();
    assert_eq!(r.lateral, q(9, 49));
    assert_eq!(r.central, q(2, 1) * (q(9, 49) + q(5, 11)));
    assert_eq!(r.ratio.clone() - q(1, 1), j4.clone() / (j2.clone() * j2));
    assert_eq!(r.ratio, r.central / (q(2, 1) * r.lateral));
}

#[test]
fn rates_reproduce_chi_from_moments() {
    let m = GaussianSetup::<f64>::new(1.0).unwrap().chi(64).unwrap();
    let r = appendix_rates(&m).unwrap();
    assert_eq!(r.ratio, 1.0 + m.chi);
    assert!((r.ratio - 1.0 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    assert!((r.central / (2.0 * r.lateral) - r.ratio).abs() < 1e-15);
}

#[test]
fn double_pulse_terms_separate() {
    let g = GaussianSetup::<f64>::new(1.0).unwrap();
    let t = std::time::Instant::now();
    let rep = verify_time_structure(&g.amplitude, &g.filter, &TimeStructureConfig::new(50.0)).unwrap();
    eprintln!("{:?} in {:?}", rep, t.elapsed());
    assert!(rep.r2_cross_ratio() < 1e-3);
    assert!(rep.r1_spread() < 1e-6);
    assert!(rep.half_rate_ratio() < 1e-3);
    let chi = chi_closed_form(1.0).unwrap();
    assert!((rep.chi - chi).abs() < 1e-6, "{} vs {chi}", rep.chi);
    assert!((rep.ratio - 1.0 - chi).abs() < 1e-6);
}
