use std::f64::consts::PI;

use proptest::prelude::*;

use crate::estimator::{wrap_phase, Estimator, EstimatorConfig, FrequencyMode};
use crate::metrics::{crb_amplitude, crb_phase, phase_error};
use crate::persistence::{format_sci, read_samples, write_samples, SampleRecord};
use crate::signalgen::quantize;
use crate::streamer::settle_time;
use crate::windows::window_coefficients;

fn tone(n: usize, lambda: f64, amplitude: f64, phi: f64) -> Vec<f64> {
    (0..n)
        .map(|i| amplitude * (2.0 * PI * lambda * i as f64 / n as f64 + phi).sin())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_coefficients_sum_to_unit_peak(h in 1usize..12) {
        let a = window_coefficients(h).unwrap();
        // peak Σ a_h = 1 and edge Σ (-1)^h a_h = 0
        let peak: f64 = a.iter().sum();
        let edge: f64 = a.iter().enumerate().map(|(i, v)| if i % 2 == 0 { *v } else { -v }).sum();
        prop_assert!((peak - 1.0).abs() < 1e-12);
        prop_assert!(edge.abs() < 1e-12 || h == 1);
        prop_assert!(a.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn known_frequency_recovers_clean_tone(
        lambda in 0.1f64..1.9,
        amplitude in 0.01f64..100.0,
        phi in -PI..PI,
        e in 6u32..11,
    ) {
        let n = 1usize << e;
        let est = Estimator::new(
            EstimatorConfig::new(2, n, 1.0).with_frequency(FrequencyMode::Known(lambda)).with_max_cir(1.9),
        ).unwrap();
        let r = est.estimate(&tone(n, lambda, amplitude, phi)).unwrap();
        // worst-phase systematic error at N = 64, CiR = 0.1 is below 1e-4
        prop_assert!(((r.amplitude - amplitude) / amplitude).abs() < 1e-4);
        prop_assert!(phase_error(r.phase, phi) < 1e-4);
    }

    #[test]
    fn estimated_frequency_matches_truth(lambda in 0.2f64..1.8, phi in -PI..PI) {
        let n = 512;
        let est = Estimator::new(EstimatorConfig::new(2, n, 512.0).with_max_cir(1.9)).unwrap();
        let r = est.estimate(&tone(n, lambda, 1.0, phi)).unwrap();
        prop_assert!((r.lambda - lambda).abs() < 1e-6, "{} vs {}", r.lambda, lambda);
        prop_assert!((r.frequency - lambda).abs() < 1e-6);
    }

    #[test]
    fn amplitude_scales_and_phase_shifts_with_input(
        lambda in 0.3f64..1.7,
        phi in -PI..PI,
        gain in 0.1f64..10.0,
    ) {
        let n = 256;
        let est = Estimator::new(
            EstimatorConfig::new(3, n, 1.0).with_frequency(FrequencyMode::Known(lambda)).with_max_cir(1.9),
        ).unwrap();
        let x = tone(n, lambda, 1.0, phi);
        let a = est.estimate(&x).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * gain).collect();
        let b = est.estimate(&scaled).unwrap();
        prop_assert!((b.amplitude / a.amplitude - gain).abs() < 1e-9 * gain);
        prop_assert!(wrap_phase(b.phase - a.phase).abs() < 1e-9);
        let negated: Vec<f64> = x.iter().map(|v| -v).collect();
        let c = est.estimate(&negated).unwrap();
        prop_assert!(phase_error(c.phase, a.phase + PI) < 1e-9);
    }

    #[test]
    fn wrapped_phase_error_is_bounded_and_symmetric(a in -20.0f64..20.0, b in -20.0f64..20.0) {
        let e = phase_error(a, b);
        prop_assert!((0.0..=PI).contains(&e));
        prop_assert!((e - phase_error(b, a)).abs() < 1e-12);
        prop_assert!(phase_error(a + 2.0 * PI, b) - e < 1e-9);
    }

    #[test]
    fn bounds_fall_with_length_and_snr(sigma in 1e-4f64..1.0, n in 2usize..4096) {
        prop_assert!(crb_amplitude(sigma, n + 1) < crb_amplitude(sigma, n));
        prop_assert!(crb_phase(sigma, 1.0, n + 1) < crb_phase(sigma, 1.0, n));
        prop_assert!(crb_amplitude(sigma / 2.0, n) < crb_amplitude(sigma, n));
        prop_assert!(crb_phase(sigma / 2.0, 1.0, n) < crb_phase(sigma, 1.0, n));
    }

    #[test]
    fn csv_numbers_round_trip(v in proptest::num::f64::NORMAL) {
        let s = format_sci(v);
        let back: f64 = s.parse().unwrap();
        prop_assert!(((back - v) / v).abs() < 1e-11);
    }

    #[test]
    fn sample_files_round_trip(samples in proptest::collection::vec(proptest::num::f64::ANY, 1..200)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.f64");
        let rec = SampleRecord::new(1000.0, samples.clone()).unwrap();
        write_samples(&rec, &path).unwrap();
        let back = read_samples(&path).unwrap();
        prop_assert!(back.samples.iter().zip(&samples).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn quantization_error_is_half_a_step(x in proptest::collection::vec(-1.4f64..1.4, 1..100), bits in 8u32..20) {
        let q = quantize(&x, bits, 1.5).unwrap();
        let step = 1.5 / (1u64 << (bits - 1)) as f64;
        prop_assert_eq!(q.clipped, 0);
        prop_assert!(q.samples.iter().zip(&x).all(|(a, b)| (a - b).abs() <= step / 2.0 + 1e-15));
    }

    #[test]
    fn wider_tolerance_never_settles_later(
        values in proptest::collection::vec(0.5f64..1.5, 2..60),
        tol in 0.01f64..0.3,
    ) {
        let pts: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, v)| (i as f64 * 0.1, *v)).collect();
        let tight = settle_time(&pts, 1.0, tol);
        let loose = settle_time(&pts, 1.0, 2.0 * tol);
        if let Some(t) = tight {
            prop_assert!(loose.is_some_and(|l| l <= t));
        }
    }

    #[test]
    fn parallel_map_matches_sequential(v in proptest::collection::vec(-1e3f64..1e3, 0..500)) {
        let f = |x: &f64| x.sin() * x.cos();
        let seq: Vec<f64> = v.iter().map(f).collect();
        prop_assert_eq!(crate::par::map(&v, f), seq);
    }
}
