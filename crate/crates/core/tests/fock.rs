use fourphoton::fock::{
    chi_from_fock, for_each_pattern, four_photon_decomposition, poisson_limit_check, probabilities, sector_norms,
    MultiProcessState,
};
use proptest::prelude::*;

#[test]
fn sector_norms_match_closed_formulas() {
    for n in 1..=64u64 {
        let s = sector_norms(n as usize).unwrap();
        assert_eq!((s.two_photon, s.four_photon), (n, n * (n + 1) / 2), "N = {n}");
    }
}

#[test]
fn decomposition_weights_exact() {
    for n in 1..=64u64 {
        let d = four_photon_decomposition::<f64>(n).unwrap();
        assert_eq!(d.weight_entangled, 2.0 / (n + 1) as f64);
        assert_eq!(d.weight_two_pairs, (n - 1) as f64 / (n + 1) as f64);
        assert_eq!(d.chi_equivalent, 1.0 / n as f64);
        let chi = d.chi_equivalent;
        assert!((d.weight_entangled - 2.0 * chi / (1.0 + chi)).abs() <= f64::EPSILON);
        assert!((d.weight_entangled + d.weight_two_pairs - 1.0).abs() <= f64::EPSILON);
    }
}

#[test]
fn decomposition_large_n_tends_to_independent_pairs() {
    let d = four_photon_decomposition::<f64>(1000).unwrap();
    assert!(d.weight_entangled < 2e-3 && d.weight_two_pairs > 0.998 && d.chi_equivalent == 1e-3);
}

#[test]
fn three_processes_one_third() {
    let d = four_photon_decomposition::<f64>(3).unwrap();
    assert_eq!((d.weight_entangled, d.weight_two_pairs), (0.5, 0.5));
    // finite gain keeps χ above 1/3; the excess is C^{2N}(N+1)/N − (N+1)/N
    let chi = chi_from_fock(&MultiProcessState::new(3, 0.05f64).unwrap()).unwrap();
    let c6 = 0.05f64.cosh().powi(6);
    assert!((chi - (c6 * 4.0 / 3.0 - 1.0)).abs() < 1e-12, "{chi}");
    let chi = chi_from_fock(&MultiProcessState::new(3, 1e-4f64).unwrap()).unwrap();
    assert!((chi - 1.0 / 3.0).abs() < 1e-7, "{chi}");
}

#[test]
fn table_ratio_matches_finite_gain_formula() {
    // independent oracle: multinomial count of two-pair patterns
    for (n, xi) in [(1usize, 0.1f64), (3, 0.05), (7, 0.2), (16, 0.01)] {
        let state = MultiProcessState::new(n, xi).unwrap();
        let table = probabilities(&state).unwrap();
        let (t, c) = (xi.tanh(), xi.cosh());
        let mut p4 = 0.0;
        for_each_pattern(n, 2, |_| p4 += t.powi(4) / c.powi(2 * n as i32));
        let p2 = n as f64 * t * t / c.powi(2 * n as i32);
        assert!((table.get(1) - p2).abs() < 1e-13 * p2);
        assert!((table.get(2) - p4).abs() < 1e-14 * p4);
        let chi = chi_from_fock(&state).unwrap();
        let expected = c.powi(2 * n as i32) * (n as f64 + 1.0) / n as f64 - 1.0;
        assert!((chi - expected).abs() < 1e-10, "N {n}: {chi} vs {expected}");
    }
}

#[test]
fn single_process_is_fully_stimulated() {
    let chi = chi_from_fock(&MultiProcessState::new(1, 1e-4f64).unwrap()).unwrap();
    assert!((chi - 1.0).abs() < 1e-7);
}

#[test]
fn chi_approaches_one_over_n() {
    for n in [1usize, 2, 4] {
        let chi = chi_from_fock(&MultiProcessState::new(n, 0.01f64).unwrap()).unwrap();
        assert!((chi - 1.0 / n as f64).abs() < 1e-3, "N {n}: {chi}");
    }
}

#[test]
fn poisson_distance_small_and_decreasing() {
    assert!(poisson_limit_check(100, 0.1f64).unwrap() < 1e-3);
    let a = poisson_limit_check(10, 0.2f64).unwrap();
    let b = poisson_limit_check(1000, 0.2f64).unwrap();
    assert!(b < a, "{a} {b}");
    assert_eq!(poisson_limit_check(50, 0.0f64).unwrap(), 0.0);
    assert!(poisson_limit_check(10, 20.0f64).is_err());
    assert!(poisson_limit_check(5, 0.1f64).is_err());
}

#[test]
fn poisson_distance_against_independent_oracle() {
    // negative binomial: P(n) = C(n+N−1, n) (1−x)^N xⁿ, x = μ/N
    let (n, mu) = (100usize, 0.1f64);
    let x = mu / n as f64;
    let mut nb = (1.0 - x).powi(n as i32);
    let mut po = (-mu).exp();
    let mut tv = 0.0;
    let (mut snb, mut spo) = (0.0, 0.0);
    for k in 0..40 {
        tv += (nb - po).abs();
        snb += nb;
        spo += po;
        nb *= (k + n) as f64 / (k + 1) as f64 * x;
        po *= mu / (k + 1) as f64;
    }
    tv = 0.5 * (tv + ((1.0 - snb) - (1.0 - spo)).abs());
    let got = poisson_limit_check(n, mu).unwrap();
    assert!((got - tv).abs() < 1e-12, "{got} vs {tv}");
}

proptest! {
    #[test]
    fn table_sums_within_tail(n in 1usize..=12, xi in 0.0f64..0.3) {
        let state = MultiProcessState::new(n, xi).unwrap().with_max_pairs(40).with_tolerance(1.0);
        let table = probabilities(&state).unwrap();
        let total = table.total();
        prop_assert!(total <= 1.0 + 1e-12);
        prop_assert!(total + table.tail_bound >= 1.0 - 1e-12);
        prop_assert!(table.probabilities.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn chi_within_quadratic_band(n in 1usize..=16, xi in 1e-4f64..0.05) {
        let chi = chi_from_fock(&MultiProcessState::new(n, xi).unwrap().with_tolerance(1.0)).unwrap();
        prop_assert!((chi - 1.0 / n as f64).abs() <= 10.0 * n as f64 * xi * xi);
    }
}
