use super::*;
use crate::matcore::ToleranceConfig;
use crate::onticlab::build_toy_model_extension;
use crate::opmodel::{born_predict, build_chsh_experiment, build_price_experiment, chsh_value, Alphabet};
use crate::random::{random_experiment, ExperimentShape};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn scenario(nx: usize, na: usize, ny: usize, nb: usize) -> Scenario {
    Scenario::new(
        Alphabet::range(nx),
        Alphabet::range(na),
        Alphabet::range(ny),
        Alphabet::range(nb),
    )
}

fn pr_box() -> BehaviorTable<Q> {
    BehaviorTable::from_fn(Scenario::binary(), 0.0, |x, a, y, b| {
        if (a ^ b) == (x & y) {
            q(1, 2)
        } else {
            Q::zero()
        }
    })
    .unwrap()
}

fn mixture(s: &Scenario, weights: &[(DeterministicStrategy, Q)]) -> BehaviorTable<Q> {
    BehaviorTable::from_fn(s.clone(), 0.0, |x, a, y, b| {
        weights
            .iter()
            .filter(|(st, _)| st.f_a[x] == a && st.f_b[y] == b)
            .fold(Q::zero(), |acc, (_, w)| acc + w.clone())
    })
    .unwrap()
}

#[test]
fn strategy_counts_and_order() {
    assert_eq!(enumerate_strategies(&Scenario::binary()).unwrap().len(), 16);
    assert_eq!(enumerate_strategies(&scenario(1, 2, 1, 2)).unwrap().len(), 4);
    assert_eq!(enumerate_strategies(&scenario(3, 2, 3, 2)).unwrap().len(), 64);
    let all = enumerate_strategies(&scenario(2, 3, 2, 2)).unwrap();
    assert_eq!(all.len(), 9 * 4);
    assert!(all.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(all[0].f_a, vec![0, 0]);
    assert_eq!(all[1].f_b, vec![0, 1]);
    assert!(matches!(
        enumerate_strategies(&scenario(10, 2, 10, 2)),
        Err(crate::Error::GuardExceeded(1_048_576, _))
    ));
}

#[test]
fn chsh_behavior_is_infeasible_with_verified_functional() {
    let t = born_predict(&build_chsh_experiment::<f64>()).unwrap();
    let r = lhv_feasibility(&t).unwrap();
    match &r.certificate {
        LhvCertificate::Infeasible {
            functional,
            value,
            local_bound,
            ..
        } => {
            assert!(value - local_bound > LP_EPS);
            // independent recomputation over the 16 strategies
            let bound = enumerate_strategies(t.scenario())
                .unwrap()
                .iter()
                .map(|s| s.evaluate(t.scenario(), functional))
                .fold(f64::MIN, f64::max);
            assert!((bound - local_bound).abs() < 1e-12);
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
    let facets = chsh_facets(&t).unwrap();
    assert!((facets[0].value - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-12);
    assert_eq!(facets[0].value, chsh_value(&t).unwrap());
}

#[test]
fn chsh_report_is_consistent() {
    let r = chsh_violation_report(&build_chsh_experiment(), &tol()).unwrap();
    assert!(r.infeasible());
    assert!(r.consistent);
    assert!(r.isomorphism_deviation < 1e-12);
    assert!(!r.spacelike_lp.is_feasible());
    let price = chsh_violation_report(&build_price_experiment(true), &tol()).unwrap();
    assert!(!price.infeasible());
    assert!((price.value - 0.5).abs() < 1e-12);
    assert!((price.facet_max - 0.75).abs() < 1e-12);
    assert!(price.consistent);
}

#[test]
fn pr_box_is_infeasible_exactly() {
    let r = lhv_feasibility(&pr_box()).unwrap();
    match r.certificate {
        LhvCertificate::Infeasible { value, local_bound, .. } => assert!(value > local_bound),
        other => panic!("expected infeasible, got {other:?}"),
    }
    assert!(r.objective > Q::zero());
    assert_eq!(chsh_facets(&pr_box()).unwrap()[0].value, q(1, 1));
}

#[test]
fn uniform_and_product_behaviors_are_feasible() {
    let uniform = BehaviorTable::from_fn(Scenario::binary(), 0.0, |_, _, _, _| q(1, 4)).unwrap();
    let r = lhv_feasibility(&uniform).unwrap();
    assert!(r.is_feasible());
    assert_eq!(chsh_value(&uniform).unwrap(), q(1, 2));
    let product = BehaviorTable::from_fn(scenario(3, 2, 2, 3), 0.0, |x, a, y, b| {
        let pa = if a == 0 { q(x as i64 + 1, 5) } else { q(4 - x as i64, 5) };
        let pb = [q(1, 6), q(2, 6), q(3, 6)][(b + y) % 3].clone();
        pa * pb
    })
    .unwrap();
    let r = lhv_feasibility(&product).unwrap();
    match r.certificate {
        LhvCertificate::Feasible { max_deviation, .. } => assert!(max_deviation.is_zero()),
        other => panic!("expected feasible, got {other:?}"),
    }
}

#[test]
fn price_behavior_matches_toy_model_mixture() {
    let t = build_toy_model_extension::<Q>().marginalize(0.0).unwrap();
    // lambda = (l0, l1) acts as f_A = f_B = (l0, l1) with weight 1/4
    let weights: Vec<(DeterministicStrategy, Q)> = (0..4)
        .map(|l| {
            let f = vec![l >> 1, l & 1];
            (DeterministicStrategy { f_a: f.clone(), f_b: f }, q(1, 4))
        })
        .collect();
    assert!(verify_mixture(&t, &weights).unwrap().is_zero());
    let r = lhv_feasibility(&t).unwrap();
    assert!(r.is_feasible());
    assert!(r.objective.is_zero());
}

#[test]
fn mixture_and_functional_verifiers_reject_bad_certificates() {
    let t = pr_box();
    let one = vec![(
        DeterministicStrategy {
            f_a: vec![0, 0],
            f_b: vec![0, 0],
        },
        q(1, 1),
    )];
    assert!(verify_mixture(&t, &one).is_err());
    let zero = vec![Q::zero(); 16];
    assert!(verify_functional(&t, &zero).is_err());
}

#[test]
fn chained_family_rows() {
    let rows = cr_family_report(6, &tol()).unwrap();
    for r in &rows {
        assert!(r.marginal_deviation < 1e-15, "N={} {}", r.n, r.marginal_deviation);
        assert!(r.overlap_deviation < 1e-10);
        assert!((r.chained_value - r.chained_closed_form).abs() < 1e-10);
        assert_eq!(r.classical_floor, 1.0);
        let want = if r.n == 1 {
            Verdict::Feasible
        } else {
            Verdict::Infeasible
        };
        assert_eq!(r.verdict, want, "N={}", r.n);
        assert_eq!(r.verdict_source, "lp");
    }
    let csv = cr_rows_to_csv(&rows);
    assert!(csv.starts_with(CR_CSV_HEADER));
    assert_eq!(csv.lines().count(), 7);
    assert!(cr_family_report(13, &tol()).is_err());
}

#[test]
fn chained_floor_by_full_enumeration() {
    for n in 1..=4 {
        let s = scenario(n, 2, n, 2);
        let f: Vec<Q> = chained_functional(&s);
        let floor = enumerate_strategies(&s)
            .unwrap()
            .iter()
            .map(|st| st.evaluate(&s, &f))
            .min()
            .unwrap();
        assert_eq!(floor, q(1, 1), "N={n}");
    }
}

fn random_strategy(rng: &mut impl Rng, s: &Scenario) -> DeterministicStrategy {
    let (nx, na, ny, nb) = s.sizes();
    DeterministicStrategy {
        f_a: (0..nx).map(|_| rng.random_range(0..na)).collect(),
        f_b: (0..ny).map(|_| rng.random_range(0..nb)).collect(),
    }
}

fn assert_sound(t: &BehaviorTable<f64>) {
    let r = lhv_feasibility(t).unwrap();
    match &r.certificate {
        LhvCertificate::Feasible { weights, .. } => {
            assert!(verify_mixture(t, weights).unwrap() <= LP_EPS);
            let fm = chsh_facets(t).unwrap().iter().map(|f| f.value).fold(f64::MIN, f64::max);
            assert!(fm <= 0.75 + LP_EPS);
        }
        LhvCertificate::Infeasible { functional, .. } => {
            verify_functional(t, functional).unwrap();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_mixtures_are_recovered(seed in any::<u64>(), k in 1usize..6, nx in 1usize..4, na in 2usize..4, ny in 1usize..4, nb in 2usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = scenario(nx, na, ny, nb);
        let weights: Vec<(DeterministicStrategy, Q)> = (0..k).map(|_| (random_strategy(&mut rng, &s), q(1, k as i64))).collect();
        let t = mixture(&s, &weights);
        let r = lhv_feasibility(&t).unwrap();
        prop_assert!(r.is_feasible());
        if let LhvCertificate::Feasible { max_deviation, .. } = r.certificate {
            prop_assert!(max_deviation.is_zero());
        }
    }

    #[test]
    fn float_certificates_are_sound(seed in any::<u64>(), lam in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // mix a quantum behavior with white noise
        let e = random_experiment(&mut rng, ExperimentShape::qubit(true));
        let q = born_predict(&e).unwrap();
        let t = BehaviorTable::from_fn(Scenario::binary(), 1e-12, |x, a, y, b| lam * q.get(x, a, y, b) + (1.0 - lam) * 0.25).unwrap();
        assert_sound(&t);
        // Fine: for no-signalling binary behaviors the facets decide
        let r = lhv_feasibility(&t).unwrap();
        let fm = chsh_facets(&t).unwrap().iter().map(|f| f.value).fold(f64::MIN, f64::max);
        if (fm - 0.75).abs() > 1e-6 {
            prop_assert_eq!(r.is_feasible(), fm < 0.75);
        }
    }

    #[test]
    fn signalling_tables_are_infeasible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells: Vec<Vec<f64>> = (0..4).map(|_| {
            let w: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|v| v / s).collect()
        }).collect();
        let t = BehaviorTable::from_fn(Scenario::binary(), 1e-12, |x, a, y, b| cells[2 * x + y][2 * a + b]).unwrap();
        assert_sound(&t);
        if t.forward_signalling() > 1e-6 || t.backward_signalling() > 1e-6 {
            prop_assert!(!lhv_feasibility(&t).unwrap().is_feasible());
        }
    }
}
