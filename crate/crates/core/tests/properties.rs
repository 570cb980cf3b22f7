use proptest::prelude::*;

use jdr_core::capacity::{
    binary_entropy, capacity_bounds, classical_bpsk_mi, estimate_port_laws, mi_product_channel,
    PortLawEstimate,
};
use jdr_core::detection::{detection_probs, optimize_threshold};
use jdr_core::model::{hadamard_entry, hadamard_receiver_transform, received_amplitudes};
use jdr_core::noise::{bessel_ratio, circular_moments, sample_phases, wrap_angle};
use jdr_core::rng::{derive_seed, rng_from_seed};
use jdr_core::{ComplexAmplitude, HadamardOrder, PhaseNoiseModel};

fn simplex_row() -> impl Strategy<Value = [f64; 3]> {
    (0.01f64..1.0, 0.01f64..1.0, 0.01f64..1.0).prop_map(|(a, b, c)| {
        let s = a + b + c;
        [a / s, b / s, c / s]
    })
}

fn noise_model() -> impl Strategy<Value = PhaseNoiseModel> {
    prop_oneof![
        (-2.0f64..9.0).prop_map(|e| PhaseNoiseModel::von_mises(10f64.powf(e)).unwrap()),
        (-9.0f64..1.0).prop_map(|e| PhaseNoiseModel::wrapped_normal(10f64.powf(e)).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detection_probabilities_form_a_distribution(beta in -40.0f64..40.0, eps in 0.0f64..40.0) {
        let p = detection_probs(beta, eps);
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let mirrored = detection_probs(-beta, eps);
        prop_assert!((p[0] - mirrored[2]).abs() <= 1e-15);
    }

    #[test]
    fn zero_outcome_grows_with_threshold(beta in -5.0f64..5.0, eps in 0.0f64..5.0, step in 0.0f64..1.0) {
        let a = detection_probs(beta, eps);
        let b = detection_probs(beta, eps + step);
        prop_assert!(b[1] >= a[1] - 1e-15);
        prop_assert!(b[0] <= a[0] + 1e-15);
    }

    #[test]
    fn hadamard_rows_are_orthogonal(log2 in 1u32..7, j in 0usize..64, k in 0usize..64) {
        let o = HadamardOrder::from_log2(log2).unwrap();
        let n = o.n();
        let (j, k) = (j % n, k % n);
        let dot: i64 = (0..n)
            .map(|m| i64::from(hadamard_entry(j, m, o).unwrap()) * i64::from(hadamard_entry(k, m, o).unwrap()))
            .sum();
        prop_assert_eq!(dot, if j == k { n as i64 } else { 0 });
        prop_assert_eq!(hadamard_entry(j, k, o).unwrap(), hadamard_entry(k, j, o).unwrap());
    }

    #[test]
    fn receiver_preserves_energy(log2 in 1u32..8, seed in any::<u64>()) {
        let n = 1usize << log2;
        let mut rng = rng_from_seed(seed);
        let x: Vec<ComplexAmplitude> = (0..n)
            .map(|_| {
                use rand::Rng;
                ComplexAmplitude::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
            })
            .collect();
        let y = hadamard_receiver_transform(&x).unwrap();
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((ex - ey).abs() <= 1e-12 * ex.max(1.0));
        let back = hadamard_receiver_transform(&y).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn received_energy_is_n_alpha_squared(log2 in 1u32..7, k in 0usize..64, model in noise_model(), seed in any::<u64>()) {
        let o = HadamardOrder::from_log2(log2).unwrap();
        let k = k % o.n();
        let mut rng = rng_from_seed(seed);
        let phases = sample_phases(&model, o.n(), &mut rng);
        let alpha = ComplexAmplitude::new(0.7, 0.2);
        let out = received_amplitudes(k, alpha, &phases, o).unwrap();
        let energy: f64 = out.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((energy - o.n() as f64 * alpha.norm_sqr()).abs() <= 1e-12 * o.n() as f64);
    }

    #[test]
    fn sampled_phases_lie_on_the_principal_branch(model in noise_model(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        for phi in sample_phases(&model, 64, &mut rng) {
            prop_assert!(phi > -std::f64::consts::PI && phi <= std::f64::consts::PI);
        }
    }

    #[test]
    fn wrap_angle_is_idempotent(x in -1e4f64..1e4) {
        let w = wrap_angle(x);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        prop_assert_eq!(wrap_angle(w), w);
        prop_assert!(((x - w) / (2.0 * std::f64::consts::PI)).fract().abs() < 1e-9
            || (1.0 - ((x - w) / (2.0 * std::f64::consts::PI)).fract().abs()) < 1e-9);
    }

    #[test]
    fn bessel_ratio_is_increasing_and_bounded(e in -3.0f64..9.0, bump in 1.0001f64..2.0) {
        let k = 10f64.powf(e);
        let r = bessel_ratio(1, k);
        prop_assert!((0.0..1.0).contains(&r));
        prop_assert!(bessel_ratio(1, k * bump) >= r);
        prop_assert!(bessel_ratio(2, k) <= r);
    }

    #[test]
    fn circular_moments_are_consistent(model in noise_model()) {
        let m = circular_moments(&model);
        prop_assert!((0.0..=1.0).contains(&m.m1));
        prop_assert!(m.m2 <= m.m1 + 1e-15);
        prop_assert!(m.var_cos >= 0.0);
        prop_assert!(m.var_cos <= 0.5 + 1e-15);
    }

    #[test]
    fn mi_lies_between_zero_and_log_2n(on in simplex_row(), off in simplex_row(), log2 in 1u32..6, seed in any::<u64>()) {
        let o = HadamardOrder::from_log2(log2).unwrap();
        let law = PortLawEstimate::from_plus_rows(on, off).unwrap();
        let mut rng = rng_from_seed(seed);
        let mi = mi_product_channel(&law, o, 4000, &mut rng).unwrap();
        let cap = (2.0 * o.n() as f64).log2();
        prop_assert!(mi.mean_bits >= -4.0 * mi.std_error - 1e-12);
        prop_assert!(mi.mean_bits <= cap + 4.0 * mi.std_error + 1e-12);
        let bounds = capacity_bounds(1.0, o, &law).unwrap();
        prop_assert!(mi.mean_bits / o.n() as f64 <= bounds.upper + 4.0 * mi.std_error + 1e-12);
        if let Some(lower) = bounds.lower {
            prop_assert!(lower <= bounds.upper);
        }
    }

    #[test]
    fn binary_entropy_is_symmetric(d in 0.0f64..=1.0) {
        let h = binary_entropy(d).unwrap();
        prop_assert!((0.0..=1.0 + 1e-15).contains(&h));
        prop_assert!((h - binary_entropy(1.0 - d).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn classical_mi_is_at_most_one_bit(alpha in 0.0f64..4.0, model in noise_model()) {
        let (mi, _) = classical_bpsk_mi(alpha, &model, 0.5).unwrap();
        prop_assert!((0.0..=1.0 + 1e-9).contains(&mi));
    }

    #[test]
    fn optimized_threshold_stays_in_range(log2 in 1u32..7, alpha in 0.1f64..5.0, model in noise_model()) {
        let n = 1usize << log2;
        let m = circular_moments(&model);
        let opt = optimize_threshold(n, alpha, &m).unwrap();
        prop_assert!(opt.epsilon >= 0.0);
        prop_assert!(opt.epsilon <= (n as f64).sqrt() * m.m1 * alpha + 1e-12);
        prop_assert!((0.0..=1.0).contains(&opt.objective));
    }

    #[test]
    fn port_laws_are_sign_symmetric(log2 in 1u32..5, alpha in 0.0f64..3.0, eps in 0.0f64..3.0, model in noise_model(), seed in any::<u64>()) {
        let o = HadamardOrder::from_log2(log2).unwrap();
        let mut rng = rng_from_seed(seed);
        let law = estimate_port_laws(o, alpha, &model, eps, 50, &mut rng).unwrap();
        prop_assert!(law.validate().is_ok());
        prop_assert!(law.bpsk_asymmetry() <= 1e-15);
    }

    #[test]
    fn derived_seeds_are_deterministic(master in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        prop_assert_eq!(derive_seed(master, &[a, b]), derive_seed(master, &[a, b]));
        if a != b {
            prop_assert_ne!(derive_seed(master, &[a]), derive_seed(master, &[b]));
        }
    }
}
