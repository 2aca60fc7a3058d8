use num_complex::Complex64;
use proptest::prelude::*;

use glasscav::analysis::{
    k_correlator, overlap_distribution, overlap_matrix, parisi_function, shannon_entropy_jackknife, Histogram,
};
use glasscav::coupling::{assemble_j, sample_positions, PositionConstraints, PositionGroup};
use glasscav::dynamics::{binarize_ensemble, ReplicaEnsemble};
use glasscav::optics::{frft_apply, mehler_kernel, CavityGeometry, ComplexFieldImage};

fn spins(n: usize, reps: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(prop_oneof![-1.0..-0.05f64, 0.05..1.0f64], n), reps)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mehler_kernel_is_symmetric_and_positive(
        x in -2.0..2.0f64, y in -2.0..2.0f64, u in -2.0..2.0f64, v in -2.0..2.0f64, phi in 0.05..3.0f64,
    ) {
        let a = mehler_kernel([x, y], [u, v], Complex64::new(phi, 0.0)).unwrap();
        let b = mehler_kernel([u, v], [x, y], Complex64::new(phi, 0.0)).unwrap();
        prop_assert!(a.re > 0.0 && a.im == 0.0);
        prop_assert!((a.re - b.re).abs() <= 1e-14 * a.re);
    }

    #[test]
    fn binarized_replicas_are_unit_sign_vectors(rows in spins(7, 5)) {
        let e = binarize_ensemble(&ReplicaEnsemble::from_rows(rows.clone(), String::new()).unwrap());
        for (b, r) in e.rows().zip(&rows) {
            prop_assert!((b.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(b.iter().zip(r).all(|(x, y)| x.signum() == y.signum()));
        }
        prop_assert!(binarize_ensemble(&e).rows().zip(e.rows()).all(|(a, b)| a == b));
    }

    #[test]
    fn entropy_stays_within_its_bounds(rows in spins(5, 12)) {
        let h = shannon_entropy_jackknife(&ReplicaEnsemble::from_rows(rows, String::new()).unwrap()).unwrap();
        prop_assert!(h.plug_in >= 1.0 - 1e-12 && h.plug_in <= 1.0 + (12f64).log2() + 1e-12);
        prop_assert!(h.classes >= 1 && h.classes <= 12);
    }

    #[test]
    fn k_correlator_is_nonnegative_and_label_free(rows in spins(6, 8), shift in 1usize..8) {
        let e = ReplicaEnsemble::from_rows(rows.clone(), String::new()).unwrap();
        let k = k_correlator(&overlap_matrix(&e).unwrap()).unwrap();
        prop_assert!(k.mean >= 0.0 && k.triples == 56);
        let mut rotated = rows;
        rotated.rotate_left(shift);
        let r = k_correlator(&overlap_matrix(&ReplicaEnsemble::from_rows(rotated, String::new()).unwrap()).unwrap()).unwrap();
        prop_assert!((r.mean - k.mean).abs() < 1e-12);
    }

    #[test]
    fn parisi_function_and_fit_are_non_decreasing(weights in prop::collection::vec(0.0..1.0f64, 50)) {
        prop_assume!(weights.iter().sum::<f64>() > 0.0);
        let pf = parisi_function(&Histogram::from_weights(-1.0, 1.0, &weights), 100).unwrap();
        prop_assert!(pf.q.windows(2).all(|w| w[1] >= w[0]));
        if let Some(f) = pf.fit {
            let curve: Vec<f64> = (0..=200).map(|k| f.eval(k as f64 / 200.0)).collect();
            prop_assert!(curve.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        }
    }

    #[test]
    fn overlap_histogram_is_normalized(rows in spins(8, 6), bins in 2usize..60) {
        let q = overlap_matrix(&ReplicaEnsemble::from_rows(rows, String::new()).unwrap()).unwrap();
        let h = overlap_distribution(&q, bins, true).unwrap();
        prop_assert!((h.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in 0..bins {
            prop_assert!((h.probabilities[k] - h.probabilities[bins - 1 - k]).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sampled_couplings_are_symmetric(seed in 0u64..1000) {
        let geom = CavityGeometry::four_seven();
        let sites = sample_positions(&PositionGroup::C.params(), &PositionConstraints::default(), Default::default(), seed).unwrap();
        let jm = assemble_j(&sites, &geom, &Default::default(), true).unwrap();
        prop_assert!((&jm.j - jm.j.transpose()).abs().max() == 0.0);
        prop_assert!(jm.eigvals.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn frft_angles_compose(a in -3.0..3.0f64, b in -3.0..3.0f64, seed in 0u64..100) {
        let size = 24;
        let data = (0..size * size)
            .map(|k| {
                let t = (k as u64).wrapping_mul(6364136223846793005).wrapping_add(seed) as f64 / u64::MAX as f64;
                Complex64::new(t - 0.5, 0.25 - t * t)
            })
            .collect();
        let c = (size as f64 - 1.0) / 2.0;
        let img = ComplexFieldImage::from_data(size, data, 1.0, (c, c), 2.5).unwrap();
        let two = frft_apply(&frft_apply(&img, a).unwrap(), b).unwrap();
        let one = frft_apply(&img, a + b).unwrap();
        prop_assert!(two.relative_l2(&one) < 1e-10);
        prop_assert!((frft_apply(&img, a).unwrap().power() / img.power() - 1.0).abs() < 1e-10);
    }
}
