use oia_core::complexity::flops_oia_1bit;
use oia_core::grassmann::{
    chordal_distance_sq, chordal_distance_sq_overlap, metric_cdf, orthonormal_basis, sample_uniform_subspace,
    ManifoldParams, Subspace,
};
use oia_core::harness::{format_float, KRule};
use oia_core::lambert::{lambert_w, Branch};
use oia_core::linalg::gaussian_matrix;
use oia_core::oia::{
    conditional_means, expected_metric_one_bit, expected_metric_upper_bound, outage_probability, select_conventional,
    select_one_bit,
};
use oia_core::threshold::{threshold, ThresholdMethod};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn manifold() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((2, 1)), Just((3, 1)), Just((4, 1)), Just((4, 2)), Just((5, 2)), Just((6, 3))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chordal_symmetric_bounded_and_rotation_invariant(seed in any::<u64>(), (n, d) in manifold()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sample_uniform_subspace(&mut rng, n, d);
        let b = sample_uniform_subspace(&mut rng, n, d);
        let ab = chordal_distance_sq(&a, &b).unwrap();
        prop_assert_eq!(ab, chordal_distance_sq(&b, &a).unwrap());
        prop_assert!((0.0..=d as f64 + 1e-10).contains(&ab));
        prop_assert!((ab - chordal_distance_sq_overlap(&a, &b).unwrap()).abs() < 1e-10);

        let q = orthonormal_basis(&gaussian_matrix(&mut rng, d, d)).unwrap().into_basis();
        let rotated = Subspace::from_orthonormal(a.basis() * q).unwrap();
        prop_assert!((chordal_distance_sq(&rotated, &b).unwrap() - ab).abs() < 1e-10);
    }

    #[test]
    fn cdf_monotone_and_saturating((n, d) in manifold(), x in 0.0..3.0f64, dx in 0.0..1.0f64) {
        let p = ManifoldParams::new(n, d).unwrap();
        let (f1, f2) = (metric_cdf(x, &p), metric_cdf(x + dx, &p));
        prop_assert!((0.0..=1.0).contains(&f1) && f1 <= f2);
        prop_assert!((metric_cdf(p.x_hat(), &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn selection_functionals_are_consistent((n, d) in manifold(), t in 0.001..0.999f64, k in 1u64..5000) {
        let p = ManifoldParams::new(n, d).unwrap();
        let x = t * p.x_hat();
        let out = outage_probability(x, k, &p);
        prop_assert!((0.0..=1.0).contains(&out));
        prop_assert!(outage_probability(x * 1.01, k, &p) <= out);
        let (below, above) = conditional_means(x, &p);
        prop_assert!(below < x && x < above);
        prop_assert!(expected_metric_upper_bound(x, k, &p) >= expected_metric_one_bit(x, k, &p) - 1e-12);
    }

    #[test]
    fn one_bit_selection_respects_reports(seed in any::<u64>(), k in 1usize..60, x in 0.0..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Vec<f64> = (0..k).map(|_| rng.random()).collect();
        let s = select_one_bit(&m, x, &mut rng);
        prop_assert_eq!(s.eligible_count, m.iter().filter(|&&v| v < x).count());
        prop_assert_eq!(s.outage, s.eligible_count == 0);
        prop_assert!(s.outage || m[s.selected] < x);
        prop_assert!(m[select_conventional(&m)] <= m[s.selected]);
    }

    #[test]
    fn lambert_inverts(z in -0.367879f64..50.0) {
        let w = lambert_w(Branch::Principal, z).unwrap();
        prop_assert!((w * w.exp() - z).abs() <= 1e-12 * z.abs().max(1.0));
        if z < 0.0 {
            let w = lambert_w(Branch::Lower, z).unwrap();
            prop_assert!(w <= -1.0);
            prop_assert!((w * w.exp() - z).abs() <= 1e-12 * z.abs().max(1.0));
        }
    }

    #[test]
    fn thresholds_lie_in_support(k in 100u64..1_000_000, (n, d) in manifold()) {
        let p = ManifoldParams::new(n, d).unwrap();
        for m in [ThresholdMethod::Numeric, ThresholdMethod::Asymptotic, ThresholdMethod::Lambert] {
            if let Ok(spec) = threshold(m, k, &p) {
                prop_assert!(spec.x > 0.0 && spec.x <= p.x_hat(), "{} {}", m, spec.x);
            }
        }
    }

    #[test]
    fn float_format_keeps_nine_digits(v in prop::num::f64::NORMAL) {
        let back: f64 = format_float(v).parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-9 * v.abs());
    }

    #[test]
    fn flops_scale_linearly(b in 1u32..200, k in 1u32..20) {
        prop_assert_eq!(flops_oia_1bit(2, 1, k * b).unwrap(), u64::from(k) * flops_oia_1bit(2, 1, b).unwrap());
    }

    #[test]
    fn k_rule_round_trips(k in 1u64..1_000_000, e in 1u32..9) {
        for r in [KRule::Fixed(k), KRule::CeilP, KRule::CeilPPow(e)] {
            prop_assert_eq!(r.to_string().parse::<KRule>().unwrap(), r);
        }
    }
}

#[test]
fn conventional_beats_one_bit_in_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (k, x) in [(10usize, 0.05), (10, 0.3), (50, 0.08), (50, 0.9)] {
        let n = 20_000;
        let diffs: Vec<f64> = (0..n)
            .map(|_| {
                let m: Vec<f64> = (0..k).map(|_| rng.random()).collect();
                m[select_one_bit(&m, x, &mut rng).selected] - m[select_conventional(&m)]
            })
            .collect();
        let mean = diffs.iter().sum::<f64>() / n as f64;
        let se = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0) / n as f64).sqrt();
        assert!(mean > 3.0 * se, "K={k} x={x}: {mean} ({se})");
    }
}

#[test]
fn dof_loss_proxy_vanishes() {
    for (n, d, method) in [(2usize, 1usize, ThresholdMethod::ClosedFormD1), (4, 2, ThresholdMethod::Lambert), (4, 2, ThresholdMethod::Numeric)] {
        let p = ManifoldParams::new(n, d).unwrap();
        let ratios: Vec<f64> = [1.0f64, 2.0, 3.0, 4.0]
            .iter()
            .map(|e| {
                let power = 10f64.powf(*e);
                let k = KRule::CeilPPow(d as u32).users(power);
                let x = threshold(method, k, &p).unwrap().x;
                (power * expected_metric_upper_bound(x, k, &p)).log2() / power.log2()
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{n},{d} {method}: {ratios:?}");
    }
}
