//! Cross-module properties exercised only through the public API.

use num_complex::Complex64;
use proptest::prelude::*;

use ncball::automorphisms::{poincare_bergman, random_automorphism, BallAutomorphism};
use ncball::freeholo::{schwarz_pick_check, FreePolyMap};
use ncball::metrics::{delta, delta_many, kernel_metric, omega};
use ncball::tuples::{random_tuple, row_norm};
use ncball::{ComplexMatrix, Execution, MetricOptions, OperatorTuple};

fn point(coords: &[(f64, f64)], radius: f64) -> Vec<Complex64> {
    let z: Vec<Complex64> = coords.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
    let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
    z.iter().map(|c| c * (radius / norm)).collect()
}

#[test]
fn batch_schedules_agree_bitwise() {
    let pairs: Vec<_> = (0..6u64)
        .map(|s| (random_tuple(2, 2, 0.4, s).unwrap(), random_tuple(2, 2, 0.7, s + 100).unwrap()))
        .collect();
    let opts = MetricOptions::default();
    let seq = delta_many(&pairs, &opts, Execution::Sequential);
    let par = delta_many(&pairs, &opts, Execution::Parallel);
    assert_eq!(seq, par);
    for ((a, b), e) in pairs.iter().zip(&seq) {
        assert_eq!(e.as_ref().unwrap(), &delta(a, b, &opts).unwrap());
    }
}

#[test]
fn disk_origin_distances() {
    // ω(z, 0) = sqrt((1 + |z|)/(1 - |z|)) and d_H(z, 0) = 2|z|/(1 - |z|) on the disk.
    let opts = MetricOptions::default();
    let zero = OperatorTuple::zeros(1, 1);
    for r in [0.2, 0.5, 0.75] {
        let z = OperatorTuple::scalar(&[Complex64::from_polar(r, 1.0)]);
        assert!(omega(&z, &zero, &opts).unwrap().contains(((1.0 + r) / (1.0 - r)).sqrt()));
        assert!(kernel_metric(&z, &zero, &opts).unwrap().contains(2.0 * r / (1.0 - r)));
    }
}

#[test]
fn unitary_conjugation_preserves_delta() {
    // Simultaneous similarity by a unitary is an isometry of the matrix ball.
    let opts = MetricOptions::default();
    let (a, b) = (random_tuple(2, 2, 0.5, 1).unwrap(), random_tuple(2, 2, 0.6, 2).unwrap());
    let v = ncball::automorphisms::random_unitary(2, 3);
    let conj = |x: &OperatorTuple| x.map(|m| &(&v * m) * &v.adjoint());
    let (e1, e2) = (delta(&a, &b, &opts).unwrap(), delta(&conj(&a), &conj(&b), &opts).unwrap());
    assert!((e1.mid() - e2.mid()).abs() <= e1.width() + e2.width() + 1e-9);
}

#[test]
fn coordinate_projection_contracts() {
    let opts = MetricOptions::default();
    let x = OperatorTuple::scalar(&[Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4)]);
    let y = OperatorTuple::scalar(&[Complex64::new(-0.1, 0.0), Complex64::new(0.5, -0.1)]);
    for i in 1..=2 {
        let rep = schwarz_pick_check(&FreePolyMap::coordinate(2, i).unwrap(), &x, &y, &opts).unwrap();
        assert!(rep.holds);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scalar_delta_is_poincare_bergman(
        z in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2),
        w in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2),
        rz in 0.0f64..0.7,
        rw in 0.0f64..0.7,
    ) {
        let (z, w) = (point(&z, rz), point(&w, rw));
        let e = delta(&OperatorTuple::scalar(&z), &OperatorTuple::scalar(&w), &MetricOptions::default()).unwrap();
        prop_assert!(e.contains(poincare_bergman(&z, &w).unwrap()));
    }

    #[test]
    fn automorphisms_invert_and_keep_the_ball(seed in any::<u64>(), t in 0.05f64..0.95) {
        let psi = random_automorphism(2, 0.6, seed).unwrap();
        let x = random_tuple(2, 3, t, seed ^ 0xabc).unwrap();
        let y = psi.apply(&x).unwrap();
        prop_assert!(row_norm(&y) < 1.0);
        let back = psi.invert().unwrap().apply(&y).unwrap();
        prop_assert!(back.max_abs_diff(&x) <= 1e-9);
    }

    #[test]
    fn automorphism_sends_lambda_to_origin(seed in any::<u64>()) {
        let psi = random_automorphism(3, 0.9, seed).unwrap();
        let lambda = OperatorTuple::scalar(psi.lambda());
        let image = psi.apply(&lambda).unwrap();
        prop_assert!(image.max_abs_diff(&OperatorTuple::zeros(3, 1)) <= 1e-12);
        let id = BallAutomorphism::new(ComplexMatrix::identity(3), vec![Complex64::new(0.0, 0.0); 3]).unwrap();
        prop_assert!(id.apply(&lambda).unwrap().max_abs_diff(&lambda.scale(-1.0)) <= 1e-15);
    }
}
