use proptest::prelude::*;
use specklenoise::ensemble::{field_kernel, parse_ensemble_csv, write_ensemble_csv};
use specklenoise::photon::transmitted_variance_quantum;
use specklenoise::*;

fn off(x: f64) -> NormalizedOffset {
    NormalizedOffset::new(x).unwrap()
}

proptest! {
    #[test]
    fn decay_is_a_bounded_decreasing_function(mut xs in prop::collection::vec(1e-6f64..100.0, 2..40)) {
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let fs: Vec<f64> = xs.iter().map(|&x| frequency_decay(off(x))).collect();
        for (f, x) in fs.iter().zip(&xs) {
            prop_assert!(*f > 0.0 && *f <= 1.0, "f({x}) = {f}");
        }
        for (w, x) in fs.windows(2).zip(xs.windows(2)) {
            if x[1] > x[0] * (1.0 + 1e-6) {
                prop_assert!(w[1] < w[0], "not decreasing between {} and {}", x[0], x[1]);
            }
        }
    }

    #[test]
    fn mesoscopic_kernel_is_positive(x in 1e-12f64..1e6) {
        prop_assert!(mesoscopic_decay(off(x)).unwrap() > 0.0);
    }

    #[test]
    fn mesoscopic_kernel_small_offset_asymptote(x in 1e-14f64..=1e-4) {
        let scaled = mesoscopic_decay(off(x)).unwrap() * 3.0 * x.sqrt();
        prop_assert!((0.99..=1.0).contains(&scaled), "{scaled}");
    }

    #[test]
    fn classical_noise_identity(x in 0.0f64..200.0) {
        let sn = shot_noise_correlation(off(x));
        prop_assert_eq!(classical_noise_correlation(off(x)), sn * sn + 4.0 * sn);
    }

    #[test]
    fn coherent_light_reduces_to_shot_noise(x in 0.0f64..200.0, q in prop::sample::select(vec![1e-4, 1e-2, 0.5])) {
        let c = quantum_noise_correlation(off(x), 1.0, q).unwrap();
        prop_assert!((c - frequency_decay(off(x))).abs() <= 1e-14);
    }

    #[test]
    fn field_kernel_reproduces_decay(x in 0.0f64..1e4) {
        prop_assert!((field_kernel(x).norm_sqr() - frequency_decay(off(x))).abs() <= 1e-12);
    }

    #[test]
    fn transmitted_variance_is_non_negative(n in 0.0f64..1e6, fano in 0.0f64..50.0, t in 0.0f64..=1.0) {
        let s = QuantumState::custom(n, fano).unwrap();
        prop_assert!(transmitted_variance_quantum(&s, ChannelTransmission::new(t).unwrap()) >= 0.0);
    }

    #[test]
    fn curve_tables_survive_csv(values in prop::collection::vec(prop::num::f64::NORMAL, 1..20)) {
        let xs: Vec<f64> = (0..values.len()).map(|i| i as f64 * 0.25).collect();
        let curve = CorrelationCurve::tabulate("c", &xs, |x| Ok(values[(x * 4.0) as usize])).unwrap();
        let table = CurveTable::from_curves(&[curve]).unwrap();
        prop_assert_eq!(CurveTable::parse_csv(&table.to_csv_string()).unwrap(), table);
    }

    #[test]
    fn ensembles_survive_csv(seed in any::<u64>(), r in 1usize..20) {
        let ens = SpeckleEnsemble::diffusive(&[0.0, 0.3, 7.0], 0.05, r, seed).unwrap();
        let mut buf = Vec::new();
        write_ensemble_csv(&ens, &mut buf).unwrap();
        prop_assert_eq!(parse_ensemble_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), ens);
    }
}

#[test]
fn quantum_correlation_limit_at_zero() {
    for fano in [0.0, 0.5, 2.0, 3.0] {
        for q in [1e-4, 1e-2, 0.2] {
            let c = quantum_noise_correlation(NormalizedOffset::ZERO, fano, q).unwrap();
            let fq = (fano - 1.0) * q;
            let f = 1.0;
            let direct = ((1.0 + f) + 4.0 * fq * (1.0 + 2.0 * f) + 4.0 * fq * fq * (1.0 + 4.0 * f + f * f))
                / (1.0 + 2.0 * fq).powi(2)
                - 1.0;
            assert!((c - direct).abs() <= 1e-12);
        }
    }
}

/// The Gaussian-order closed form departs from `f + 4 (F-1) f q` at second
/// order with coefficient `4 (F-1)^2 f (f - 1)`.
#[test]
fn first_order_expansion_consistency() {
    for fano in [0.0f64, 2.0] {
        let e = fano - 1.0;
        for x in [0.5, 4.0, 16.0] {
            let f = frequency_decay(off(x));
            let k2 = 4.0 * e * e * f * (f - 1.0);
            for q in [1e-2, 1e-3, 1e-4] {
                let c = quantum_noise_correlation(off(x), fano, q).unwrap();
                let residual = c - f - 4.0 * e * f * q;
                // third-order term is -16 (F-1)^3 f^2 q^3; fourth is bounded by 64 (F-1)^4 q^4
                let third = -16.0 * e.powi(3) * f * f * q.powi(3);
                let rest = residual - k2 * q * q - third;
                assert!(rest.abs() <= 70.0 * q.powi(4) + 1e-15, "F={fano} x={x} q={q}: {rest:e}");
            }
        }
    }
}
