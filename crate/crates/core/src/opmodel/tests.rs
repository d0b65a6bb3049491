use super::*;
use crate::matcore::{ComplexMatrix, HermitianOperator, ToleranceConfig};
use crate::random::{random_channel, random_density, random_experiment, random_isometry, ExperimentShape};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

// Tr([phi][theta]) for Bloch-circle projectors.
fn overlap(theta: f64, phi: f64) -> f64 {
    ((theta - phi) / 2.0).cos().powi(2)
}

fn kraus_apply(ops: &[ComplexMatrix<f64>], rho: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
    let d = ops[0].rows();
    let mut out = ComplexMatrix::zeros(d, d);
    for k in ops {
        out = &out + &(&(k * rho) * &k.adjoint());
    }
    out
}

#[test]
fn chsh_cells_match_overlap_formula() {
    let e = build_chsh_experiment::<f64>();
    let p = born_predict(&e).unwrap();
    let states = [0.0, PI, PI / 2.0, -PI / 2.0];
    let effects = [PI / 4.0, -3.0 * PI / 4.0, -PI / 4.0, 3.0 * PI / 4.0];
    for (x, a, y, b) in p.scenario().tuples() {
        let want = 0.5 * overlap(states[2 * x + a], effects[2 * y + b]);
        assert!((p.get(x, a, y, b) - want).abs() < 1e-12, "cell {x}{a}{y}{b}");
    }
    let v = chsh_value(&p).unwrap();
    assert!((v - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-12);
    // every winning cell carries cos^2(pi/8)/2
    let win = 0.5 * (PI / 8.0).cos().powi(2);
    assert!((p.get(0, 0, 0, 0) - win).abs() < 1e-12);
}

#[test]
fn price_with_and_without_measurement() {
    let with = born_predict(&build_price_experiment::<f64>(true)).unwrap();
    // Z/Z and X/X cells are deterministic given a
    assert!((with.get(0, 0, 0, 0) - 0.5).abs() < 1e-12);
    assert!(with.get(0, 0, 0, 1).abs() < 1e-12);
    assert!((with.get(1, 1, 1, 1) - 0.5).abs() < 1e-12);
    // mixed bases are uniform
    assert!((with.get(0, 1, 1, 0) - 0.25).abs() < 1e-12);
    assert!((chsh_value(&with).unwrap() - 0.5).abs() < 1e-12);

    let without = born_predict(&build_price_experiment::<f64>(false)).unwrap();
    let (nx, na, ny, nb) = without.scenario().sizes();
    assert_eq!((nx, na, ny, nb), (2, 2, 1, 1));
    for x in 0..2 {
        for a in 0..2 {
            assert!((without.get(x, a, 0, 0) - 0.5).abs() < 1e-12);
        }
    }
}

#[test]
fn cr_family_marginals_and_pair_statistic() {
    for n in 1..=6 {
        let e = build_cr_experiment::<f64>(n);
        assert!(is_no_signalling(&e.preparation, &tol()));
        let p = born_predict(&e).unwrap();
        let (prep, meas) = cr_angles(n);
        for (x, a, y, b) in p.scenario().tuples() {
            let want = 0.5 * overlap(prep[2 * x + a], meas[2 * y + b]);
            assert!((p.get(x, a, y, b) - want).abs() < 1e-12);
        }
        for x in 0..n {
            for a in 0..2 {
                assert!((e.preparation.outcome_probability(x, a) - 0.5).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn channel_matches_kraus_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for &(din, dout, k) in &[(2, 2, 1), (2, 3, 2), (3, 2, 3)] {
        let v = random_isometry(&mut rng, dout * k, din, true);
        let ops: Vec<ComplexMatrix<f64>> = (0..k)
            .map(|j| ComplexMatrix::from_fn(dout, din, |r, c| v[(j * dout + r, c)]))
            .collect();
        let ch = Channel::from_kraus(&ops, &tol()).unwrap();
        let rho = random_density(&mut rng, din, din, true);
        let got = ch.apply(&rho);
        let want = kraus_apply(&ops, rho.matrix());
        assert!(got.matrix().max_abs_diff(&want) < 1e-12);
    }
}

#[test]
fn channel_constructors() {
    let id = Channel::<f64>::identity(2);
    assert!(id.is_identity(&tol()));
    let dep = Channel::<f64>::completely_depolarizing(2, 3);
    let rho = HermitianOperator::diag(&[0.3, 0.7]);
    let out = dep.apply(&rho);
    assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(3).scale(1.0 / 3.0)) < 1e-14);
    let sigma = HermitianOperator::diag(&[0.25, 0.75]);
    let constant = Channel::constant(3, &sigma);
    let out = constant.apply(&HermitianOperator::diag(&[1.0, 0.0, 0.0]));
    assert!(out.matrix().max_abs_diff(sigma.matrix()) < 1e-14);
    let hadamard = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]])
        .unwrap()
        .scale(0.5f64.sqrt());
    let h = Channel::unitary(&hadamard, &tol()).unwrap();
    let plus = h.apply(&HermitianOperator::diag(&[1.0, 0.0]));
    assert!(
        plus.matrix()
            .max_abs_diff(&ComplexMatrix::from_fn(2, 2, |_, _| Complex64::new(0.5, 0.0)))
            < 1e-14
    );
}

#[test]
fn rejects_invalid_objects() {
    let t = tol();
    // not trace preserving
    let bad = ComplexMatrix::identity(4);
    assert!(matches!(
        Channel::<f64>::new(2, 2, bad, &t),
        Err(crate::Error::InvalidChannel(_))
    ));
    // ensemble traces do not sum to one
    let states = vec![
        HermitianOperator::diag(&[0.5, 0.0]),
        HermitianOperator::diag(&[0.0, 0.6]),
    ];
    assert!(Preparation::new(2, Alphabet::range(1), Alphabet::binary(), states, &t).is_err());
    // negative eigenvalue
    let states = vec![
        HermitianOperator::diag(&[1.2, 0.0]),
        HermitianOperator::diag(&[0.0, -0.2]),
    ];
    assert!(Preparation::new(2, Alphabet::range(1), Alphabet::binary(), states, &t).is_err());
    // incomplete POVM
    let effects = vec![
        HermitianOperator::diag(&[1.0, 0.0]),
        HermitianOperator::diag(&[0.0, 0.5]),
    ];
    assert!(Measurement::new(2, Alphabet::range(1), Alphabet::binary(), effects, &t).is_err());
    // dimension mismatch between channel and measurement
    let e = build_chsh_experiment::<f64>();
    assert!(Experiment::new(e.preparation.clone(), Channel::identity(2), Measurement::trivial(3)).is_err());
}

#[test]
fn signalling_preparation_is_detected() {
    let states = vec![
        HermitianOperator::diag(&[0.5, 0.0]),
        HermitianOperator::diag(&[0.0, 0.5]),
        HermitianOperator::diag(&[1.0, 0.0]),
        HermitianOperator::diag(&[0.0, 0.0]),
    ];
    let p = Preparation::<f64>::new(2, Alphabet::binary(), Alphabet::binary(), states, &tol()).unwrap();
    assert!(!is_no_signalling(&p, &tol()));
    // Frobenius distance between diag(1/2, 1/2) and diag(1, 0)
    assert!((p.signalling_defect() - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn document_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let e = random_experiment(&mut rng, ExperimentShape::qutrit(true));
    let json = document::experiment_to_json(&e);
    let back: Experiment<f64> = document::experiment_from_json(&json, &tol()).unwrap();
    let p = born_predict(&e).unwrap();
    let q = born_predict(&back).unwrap();
    assert!(p.max_deviation(&q).unwrap() < 1e-12);
    assert_eq!(document::experiment_to_json(&back), json);
}

#[test]
fn document_errors() {
    let e = build_chsh_experiment::<f64>();
    let mut doc = document::experiment_to_document(&e);
    doc.preparation.states.pop();
    let err = document::experiment_from_document::<f64>(&doc, &tol()).unwrap_err();
    assert!(err.to_string().contains("missing state"), "{err}");

    let mut doc = document::experiment_to_document(&e);
    let dup = doc.measurement.effects[0].clone();
    doc.measurement.effects[1] = dup;
    assert!(document::experiment_from_document::<f64>(&doc, &tol()).is_err());

    let mut doc = document::experiment_to_document(&e);
    doc.schema = "other".into();
    assert!(document::experiment_from_document::<f64>(&doc, &tol()).is_err());

    assert!(document::experiment_from_json::<f64>("{\"schema\": 1}", &tol()).is_err());
}

#[test]
fn f32_instantiation_agrees() {
    let t32 = f32::default_tolerances();
    let e = build_chsh_experiment::<f32>();
    let p = born_predict_with(&e, &t32).unwrap();
    let v = chsh_value(&p).unwrap() as f64;
    assert!((v - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_experiments_are_valid_behaviors(seed in any::<u64>(), complex in any::<bool>(), qutrit in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = if qutrit { ExperimentShape::qutrit(complex) } else { ExperimentShape::qubit(complex) };
        let e = random_experiment(&mut rng, shape);
        let p = born_predict(&e).unwrap();
        // normalization per (x, y) is enforced by the constructor; forward signalling vanishes
        prop_assert!(p.forward_signalling() < 1e-10);
        // no-signalling preparations give no backward signalling either
        prop_assert!(p.backward_signalling() < 1e-10);
    }

    #[test]
    fn channel_output_is_a_state(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_channel(&mut rng, 2, 3, k, true);
        let rho = random_density(&mut rng, 2, 2, true);
        let out = ch.apply(&rho);
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        prop_assert!(out.min_eigenvalue() > -1e-12);
    }
}
