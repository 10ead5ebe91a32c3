#![allow(clippy::excessive_precision)]
//! Closed-form evaluators against values recomputed at 50 significant digits
//! (mpmath) and frozen here.

use greedy_ssc::error::SscError;
use greedy_ssc::pursuit::Method;
use greedy_ssc::theory::{
    admissible_smax, clustering_condition, curve_fit_rho_of_aff, curve_fit_rho_of_sigma,
    noise_constant, reference_rho_of_aff, reference_rho_of_sigma, success_probability_bound,
    tau_admissible_range, theorem3_smax, theorem3_tp_lower_bound, TheoryConstants, TheoryParams,
};
use proptest::prelude::*;

const REL: f64 = 1e-12;

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= REL * want.abs().max(f64::MIN_POSITIVE)
}

fn params(m: usize, counts: &[usize], dims: &[usize], sigma: f64, s_max: usize, aff: f64, method: Method) -> TheoryParams {
    TheoryParams {
        m,
        counts: counts.to_vec(),
        dims: dims.to_vec(),
        sigma,
        s_max,
        max_aff: aff,
        method,
        constants: TheoryConstants::default(),
    }
}

#[test]
fn clustering_condition_matches_extended_precision() {
    let cases = [
        (params(200, &[100; 3], &[20; 3], 0.0, 10, 0.3, Method::Omp), 0.2999999999999999889, 0.0064386748996259783297),
        (params(200, &[80; 3], &[20; 3], 0.5, 10, 0.2, Method::Omp), 7.6639266037473321028, 0.0066686221332243304803),
        (params(300, &[81, 161, 241, 321], &[20, 40, 60, 80], 0.2, 5, 0.45, Method::Mp), 7.0114829963548081742, 0.0057661518960624726235),
        (params(1000, &[5000, 7000], &[50, 100], 0.05, 3, 0.01, Method::Mp), 0.71204801805186960856, 0.0042696217531787700331),
        (params(80, &[60; 3], &[15; 3], 1.5, 30, 0.447, Method::Omp), 52.407211463730677174, 0.0065858563010667207186),
    ];
    for (p, lhs, rhs) in cases {
        let c = clustering_condition(&p).unwrap();
        assert!(close(c.lhs, lhs), "{} vs {lhs}", c.lhs);
        assert!(close(c.rhs, rhs), "{} vs {rhs}", c.rhs);
        assert_eq!(c.satisfied, c.lhs <= c.rhs);
    }
}

#[test]
fn clustering_condition_examples() {
    let p = params(200, &[50, 50], &[10, 10], 0.0, 10, 0.25, Method::Omp);
    assert_eq!(clustering_condition(&p).unwrap().lhs, 0.25);
    // N = 100, s_max = 10
    let rhs = clustering_condition(&p).unwrap().rhs;
    assert!(close(rhs, 0.0077552586054152112081));
    assert!((rhs - 0.0077559).abs() <= 1e-6);
    assert_eq!(noise_constant(Method::Omp, 0.5), 16.5);
    assert_eq!(noise_constant(Method::Mp, 0.5), 36.5);
    let tiny = params(10, &[1], &[1], 0.0, 1, 0.0, Method::Omp);
    assert!(matches!(clustering_condition(&tiny), Err(SscError::DomainError(_))));
}

#[test]
fn success_probability_matches_extended_precision() {
    let with = |c_d: f64, c_m: f64| TheoryConstants {
        c_d,
        c_m,
        ..TheoryConstants::default()
    };
    let cases = [
        (200, vec![100; 3], vec![20; 3], TheoryConstants::default(), -591.56737807506196586),
        (2000, vec![3000; 4], vec![400; 4], TheoryConstants::default(), 0.99948391785365933722),
        (500, vec![400, 600], vec![200, 300], with(0.03, 0.1), -5.3992805187113080634),
        (100, vec![10, 20], vec![5, 5], with(0.05, 0.01), -194.56605712856922143),
    ];
    for (m, counts, dims, constants, want) in cases {
        let p = TheoryParams {
            constants,
            ..params(m, &counts, &dims, 0.0, 1, 0.0, Method::Omp)
        };
        let got = success_probability_bound(&p);
        assert!(close(got, want), "{got} vs {want}");
    }
}

#[test]
fn success_probability_is_monotone() {
    let base = params(200, &[100; 3], &[20; 3], 0.0, 1, 0.0, Method::Omp);
    let bigger = params(400, &[100; 3], &[40; 3], 0.0, 1, 0.0, Method::Omp);
    assert!(success_probability_bound(&bigger) > success_probability_bound(&base));
    let weaker = TheoryParams {
        constants: TheoryConstants {
            c_d: 0.02,
            c_m: 0.05,
            ..TheoryConstants::default()
        },
        ..base.clone()
    };
    assert!(success_probability_bound(&weaker) < success_probability_bound(&base));
}

#[test]
fn theorem3_bound_matches_extended_precision() {
    let cases = [
        ((100, 101, 400, 0.0, 0.0, 0.1), 1),
        ((80, 321, 300, 0.2, 0.1, 0.1), 1),
        ((80, 321, 300, 0.2, 0.14, 0.1), 0),
        ((1000, 2001, 5000, 0.5, 0.2, 0.1), 5),
        ((5000, 4001, 20000, 0.3, 0.3, 0.05), 14),
        ((300, 1201, 1000, 0.1, 0.05, 0.02), 0),
        ((60, 241, 300, 0.2, 0.0, 0.1), 0),
    ];
    for ((d, n, m, sigma, tau, c_s), want) in cases {
        let b = theorem3_tp_lower_bound(d, n, m, sigma, tau, c_s).unwrap();
        assert!(b.admissible);
        assert_eq!(b.value, want, "{:?}", (d, n, m, sigma, tau, c_s));
    }
}

#[test]
fn theorem3_bound_edges() {
    let upper = tau_admissible_range(80, 300, 0.2).unwrap().upper;
    let top = theorem3_tp_lower_bound(80, 321, 300, 0.2, upper, 0.1).unwrap();
    assert!(top.admissible);
    assert_eq!(top.value, 0);
    let beyond = theorem3_tp_lower_bound(80, 321, 300, 0.2, upper + 1e-9, 0.1).unwrap();
    assert!(!beyond.admissible);
    assert_eq!(beyond.value, 0);
    assert!(theorem3_tp_lower_bound(10, 1, 100, 0.0, 0.0, 0.1).is_err());
    assert_eq!(theorem3_smax(&[100, 20], &[101, 81], 0.1).unwrap(), 1);
}

#[test]
fn admissible_smax_matches_scan_oracle() {
    let cases = [
        ((20, 81, 0.1), 0),
        ((10000, 10000, 0.1), 204),
        ((100, 101, 0.1), 2),
        ((500, 1000, 0.1), 8),
        ((2000, 50, 0.05), 133),
        ((50000, 3, 0.1), 5),
    ];
    for ((d, n, c_s), want) in cases {
        assert_eq!(admissible_smax(d, n, c_s).unwrap(), want, "{:?}", (d, n, c_s));
    }
}

#[test]
fn tau_range_matches_extended_precision() {
    let cases = [
        ((100, 400, 0.5), 0.41666666666666666667, 0.16666666666666666667),
        ((80, 300, 0.2), 0.56338711076780221066, 0.46666666666666665556),
        ((15, 80, 1.3), 0.10375015420678152704, 0.0),
        ((7, 11, 0.25), 0.4672356578623002562, 0.41666666666666666667),
    ];
    for ((d, m, sigma), upper, conservative) in cases {
        let r = tau_admissible_range(d, m, sigma).unwrap();
        assert!(close(r.upper, upper));
        assert!(close(r.conservative_upper, conservative) || (conservative == 0.0 && r.conservative_upper == 0.0));
    }
    assert_eq!(tau_admissible_range(20, 200, 0.0).unwrap().upper, 2.0 / 3.0);
    let sigma = 2.0 / 3.0 * (200.0f64 / 20.0).sqrt();
    assert!(tau_admissible_range(20, 200, sigma).unwrap().upper.abs() < 1e-15);
}

#[test]
fn curve_fits_match_extended_precision() {
    for (aff, want) in [
        (0.0, 0.1369),
        (0.2, 0.21390625),
        (0.46, 0.46947873799725651578),
        (0.812, 3.873358985966500679),
    ] {
        assert!(close(reference_rho_of_aff(aff).unwrap(), want));
    }
    for (sigma, want) in [
        (0.1, 0.0022120999879241637483),
        (0.84, 0.56209539652450701309),
        (1.0, 1.12890625),
        (1.28, 3.9261442319219475068),
    ] {
        assert!(close(reference_rho_of_sigma(sigma).unwrap(), want));
    }
    assert_eq!(curve_fit_rho_of_aff(0.5, 2.0, 0.0).unwrap(), 0.0625);
    assert_eq!(curve_fit_rho_of_sigma([1.0, 1.0, 1.0, 1.0, 1.0], 0.0).unwrap(), 0.0);
    assert!(curve_fit_rho_of_aff(0.37, 1.0, 1.0).is_err());
    assert!(curve_fit_rho_of_sigma([1.0, 1.0, 1.0, 1.0, 1.0], 1.0).is_err());
}

#[test]
fn constants_are_range_checked() {
    assert!(TheoryConstants::default().validate().is_ok());
    let bad = TheoryConstants {
        c_s: 0.2,
        ..TheoryConstants::default()
    };
    assert!(bad.validate().is_err());
    let rho = TheoryConstants {
        c_rho: Some(0.5),
        ..TheoryConstants::default()
    };
    assert!(rho.validate().is_err());
    let p = TheoryParams {
        constants: TheoryConstants {
            c_rho: Some(3.0),
            ..TheoryConstants::default()
        },
        ..params(200, &[81, 61], &[20, 20], 0.0, 1, 0.0, Method::Omp)
    };
    assert_eq!(p.rho_min(), 3.0);
    assert_eq!(p.density_hypothesis(), Some(true));
}

proptest! {
    #[test]
    fn lhs_monotonicity(sigma in 0.0f64..2.0, ds in 0.0f64..1.0, aff in 0.0f64..0.9, daff in 0.0f64..0.1,
                        n in 30usize..300, m in 50usize..500) {
        let p = params(m, &[n, n], &[10, 10], sigma, 5, aff, Method::Omp);
        let base = clustering_condition(&p).unwrap().lhs;
        let more_noise = clustering_condition(&TheoryParams { sigma: sigma + ds, ..p.clone() }).unwrap().lhs;
        let more_aff = clustering_condition(&TheoryParams { max_aff: aff + daff, ..p.clone() }).unwrap().lhs;
        let more_m = clustering_condition(&TheoryParams { m: m + 50, ..p.clone() }).unwrap().lhs;
        prop_assert!(more_noise >= base);
        prop_assert!(more_aff >= base);
        prop_assert!(more_m <= base);
        // same N, lower rho_min
        let sparser = clustering_condition(&TheoryParams { counts: vec![n + 10, n - 10], ..p.clone() }).unwrap().lhs;
        prop_assert!(sparser >= base);
    }

    #[test]
    fn tp_bound_structure(d in 1usize..2000, n in 2usize..5000, m in 1usize..10_000, sigma in 0.0f64..1.0,
                          t1 in 0.0f64..0.7, t2 in 0.0f64..0.7, c_s in 0.001f64..0.1) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let a = theorem3_tp_lower_bound(d, n, m, sigma, lo, c_s).unwrap();
        let b = theorem3_tp_lower_bound(d, n, m, sigma, hi, c_s).unwrap();
        if a.admissible && b.admissible {
            prop_assert!(b.value <= a.value);
        }
        let cap = (c_s * d as f64 / (((n - 1) as f64).ln() + 1.0)).floor() as u64;
        prop_assert!(a.value <= cap);
    }

    #[test]
    fn smax_nondecreasing_in_d(d in 1usize..3000, n in 2usize..5000, c_s in 0.01f64..0.1) {
        prop_assert!(admissible_smax(d + 1, n, c_s).unwrap() >= admissible_smax(d, n, c_s).unwrap());
    }
}
