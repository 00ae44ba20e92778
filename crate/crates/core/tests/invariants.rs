use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use rsl_core::contfrac::{interval_of_convergent, sample_points, CFReal, IntervalMode, QuotientLaw};
use rsl_core::gauss::gauss_sum;
use rsl_core::series::{cesaro_form_sum, riemann_partial_sum, truncated_series, weyl_partial_sum};

fn frac(a: u64, q: u64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(q))
}

/// `e(a n^k / q)` from machine integers, independent of the phase walker.
fn direct_term(a: u64, q: u64, k: u32, n: u64) -> Complex64 {
    let mut r = 1u128;
    for _ in 0..k {
        r = r * u128::from(n) % u128::from(q);
    }
    let r = r * u128::from(a) % u128::from(q);
    Complex64::from_polar(1.0, TAU * r as f64 / q as f64)
}

proptest! {
    #[test]
    fn weyl_sum_over_periods_is_gauss_sum(a in 0u64..200, q in 1u64..200, k in 2u32..6, periods in 1u64..4) {
        let xi = gauss_sum(a, q, k).unwrap().value();
        let s = weyl_partial_sum(&frac(a, q), k, periods * q);
        prop_assert!((s - xi * periods as f64).norm() < 1e-9 * (periods * q) as f64);
    }

    #[test]
    fn partial_sums_match_direct_evaluation(a in 0u64..1000, q in 1u64..1000, k in 2u32..6, n in 1u64..2000) {
        let direct: Complex64 = (1..=n).map(|m| direct_term(a, q, k, m) / m as f64).sum();
        let walked = truncated_series(&frac(a, q), k, n);
        prop_assert!((walked - direct).norm() < 1e-10);
        let trace = riemann_partial_sum(&frac(a, q), k, n, &[]).unwrap();
        prop_assert_eq!(trace.values, vec![walked]);
    }

    #[test]
    fn summation_by_parts(a in 0u64..500, q in 1u64..500, k in 2u32..5, n in 2u64..1500) {
        let x = frac(a, q);
        let reshaped = cesaro_form_sum(&x, k, 1, n).unwrap() + weyl_partial_sum(&x, k, n) / n as f64;
        prop_assert!((reshaped - truncated_series(&x, k, n)).norm() < 1e-10);
    }

    #[test]
    fn sampled_points_stay_in_interval(quotients in prop::collection::vec(1u64..20, 1..6), seed in any::<u64>()) {
        let mut quotients = quotients;
        quotients[0] += 1;
        if quotients.len() > 1 && *quotients.last().unwrap() == 1 {
            *quotients.last_mut().unwrap() = 2;
        }
        let base = CFReal::exact_fraction(&quotients).unwrap();
        let c = base.last_convergent().clone();
        let interval = interval_of_convergent(&c.p, &c.q, IntervalMode::TwoSided).unwrap();
        let law = QuotientLaw::GaussKuzmin { max_quotient: 1000 };
        for point in sample_points(&interval, &base, 16, 8, law, seed) {
            prop_assert!(interval.contains(&point.value()));
        }
    }
}
