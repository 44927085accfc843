use bandcap::geometry::{
    bound_report, capacity_2eps_bounds, capacity_eps_delta_bounds, entropy_eps_bounds, rates,
    verify_pairwise_distance_inequality, Quantity,
};
use bandcap::simulation::{decode_error_indicator, estimate_delta, Codebook};
use bandcap::SignalSpaceParams;
use proptest::prelude::*;
use std::f64::consts::PI;

fn points(dim: usize, max_m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dim), 1..max_m)
}

fn brute_pairwise(center: &[f64], pts: &[Vec<f64>]) -> (f64, f64) {
    let d2 =
        |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };
    let mut lhs = 0.0;
    for a in pts {
        for b in pts {
            lhs += d2(a, b);
        }
    }
    let rhs = 2.0 * pts.len() as f64 * pts.iter().map(|p| d2(center, p)).sum::<f64>();
    (lhs, rhs)
}

proptest! {
    #[test]
    fn pairwise_distance_inequality_holds(
        (center, pts) in (1usize..6).prop_flat_map(|d| (prop::collection::vec(-10.0f64..10.0, d), points(d, 25)))
    ) {
        let check = verify_pairwise_distance_inequality(&center, &pts).unwrap();
        prop_assert!(check.holds);
        let (lhs, rhs) = brute_pairwise(&center, &pts);
        prop_assert!((check.lhs - lhs).abs() <= 1e-9 * (1.0 + lhs));
        prop_assert!((check.rhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
        prop_assert!(check.slack >= -1e-9 * (1.0 + rhs));
    }

    #[test]
    fn centroid_turns_inequality_into_equality(pts in (1usize..6).prop_flat_map(|d| points(d, 25))) {
        let dim = pts[0].len();
        let m = pts.len() as f64;
        let centroid: Vec<f64> = (0..dim).map(|k| pts.iter().map(|p| p[k]).sum::<f64>() / m).collect();
        let check = verify_pairwise_distance_inequality(&centroid, &pts).unwrap();
        prop_assert!(check.holds);
        prop_assert!((check.lhs - check.rhs).abs() <= 1e-9 * (1.0 + check.rhs));
    }

    #[test]
    fn bounds_are_ordered(
        n in 1usize..300,
        zeta in 0.01f64..=1.0,
        energy in 0.01f64..1e6,
        eps in 0.01f64..10.0,
        delta in 0.001f64..0.999,
    ) {
        let c2 = capacity_2eps_bounds(n, zeta, energy, eps).unwrap();
        prop_assert!(c2.lower_bits >= 0.0 && c2.lower_bits <= c2.upper_bits);
        let cd = capacity_eps_delta_bounds(n, zeta, energy, eps, delta).unwrap();
        prop_assert!(cd.lower_bits >= 0.0 && cd.lower_bits <= cd.upper_bits);
        let h = entropy_eps_bounds(n, zeta, energy, eps).unwrap();
        prop_assert!(h.lower_bits >= 0.0);
        if let Some(u) = h.upper_bits {
            prop_assert!(h.lower_bits <= u);
        }
    }

    #[test]
    fn bounds_are_monotone_in_energy_and_eps(
        n in 1usize..200,
        zeta in 0.05f64..=1.0,
        energy in 0.01f64..1e4,
        grow in 1.0f64..100.0,
        eps in 0.05f64..5.0,
        shrink in 0.01f64..=1.0,
        delta in 0.001f64..0.999,
    ) {
        for (e2, eps2) in [(energy * grow, eps), (energy, eps * shrink)] {
            let a = capacity_2eps_bounds(n, zeta, energy, eps).unwrap();
            let b = capacity_2eps_bounds(n, zeta, e2, eps2).unwrap();
            prop_assert!(b.lower_bits >= a.lower_bits && b.upper_bits >= a.upper_bits);
            let a = capacity_eps_delta_bounds(n, zeta, energy, eps, delta).unwrap();
            let b = capacity_eps_delta_bounds(n, zeta, e2, eps2, delta).unwrap();
            prop_assert!(b.lower_bits >= a.lower_bits && b.upper_bits >= a.upper_bits);
            let a = entropy_eps_bounds(n, zeta, energy, eps).unwrap();
            let b = entropy_eps_bounds(n, zeta, e2, eps2).unwrap();
            prop_assert!(b.lower_bits >= a.lower_bits);
            if let (Some(ua), Some(ub)) = (a.upper_bits, b.upper_bits) {
                prop_assert!(ub >= ua);
            }
        }
    }

    #[test]
    fn rates_are_monotone_and_chained(snr in 1e-3f64..1e8, grow in 1.0f64..100.0, omega in 0.1f64..100.0) {
        for q in [Quantity::Capacity2Eps, Quantity::CapacityEpsDelta, Quantity::EntropyEps] {
            let (lo, hi) = rates(q, omega, snr);
            let (lo2, hi2) = rates(q, omega, snr * grow);
            prop_assert!(lo >= 0.0 && lo <= hi);
            prop_assert!(lo2 >= lo && hi2 >= hi);
        }
        let (c2_lo, _) = rates(Quantity::Capacity2Eps, omega, snr);
        let (h, _) = rates(Quantity::EntropyEps, omega, snr);
        let (_, cd_hi) = rates(Quantity::CapacityEpsDelta, omega, snr);
        prop_assert!(c2_lo <= h && h <= cd_hi);
    }

    #[test]
    fn reports_are_ordered(n in 1usize..100, snr in 1.0f64..1e5, delta in 0.0f64..=1.0) {
        let p = SignalSpaceParams::new(PI, n as f64, snr, 1.0, delta).unwrap();
        for q in [Quantity::Capacity2Eps, Quantity::CapacityEpsDelta, Quantity::EntropyEps] {
            prop_assert!(bound_report(q, &p, n, 1.0).unwrap().is_ordered());
        }
    }

    #[test]
    fn decoding_is_scale_covariant(
        (book, rx) in (1usize..5).prop_flat_map(|d| (points(d, 12), prop::collection::vec(-10.0f64..10.0, d))),
        scale in 0.01f64..100.0,
    ) {
        let scaled: Vec<Vec<f64>> = book.iter().map(|p| p.iter().map(|x| x * scale).collect()).collect();
        let rx_scaled: Vec<f64> = rx.iter().map(|x| x * scale).collect();
        let a = Codebook::explicit(book.clone()).unwrap();
        let b = Codebook::explicit(scaled).unwrap();
        for i in 0..book.len() {
            prop_assert_eq!(
                decode_error_indicator(&a, i, &rx).unwrap(),
                decode_error_indicator(&b, i, &rx_scaled).unwrap()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn delta_hat_ignores_codeword_order(
        book in (1usize..4).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-2.0f64..2.0, d), 2..30)),
        seed in any::<u64>(),
        perm_seed in any::<u64>(),
    ) {
        let a = Codebook::explicit(book).unwrap();
        let mut perm: Vec<usize> = (0..a.len()).collect();
        let mut s = perm_seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let b = a.permuted(&perm).unwrap();
        let ra = estimate_delta(&a, 1.0, 200, seed).unwrap();
        let rb = estimate_delta(&b, 1.0, 200, seed).unwrap();
        prop_assert_eq!(ra.total_errors, rb.total_errors);
        prop_assert_eq!(ra.delta_hat, rb.delta_hat);
        for (k, &p) in perm.iter().enumerate() {
            prop_assert_eq!(rb.delta_i[k].errors, ra.delta_i[p].errors);
        }
    }
}
