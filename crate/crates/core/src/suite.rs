//! The reproduction suite: one check per headline claim, with fixed seeds.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::choibridge::{channel_to_conditional_state, prediction_isomorphism_check};
use crate::error::Result;
use crate::lhv::{
    chsh_facets, cr_family_report, lhv_feasibility, verify_functional, verify_mixture, DeterministicStrategy,
    LhvCertificate, Verdict, LP_EPS,
};
use crate::matcore::ToleranceConfig;
use crate::onticlab::{
    build_toy_model_extension, check_independences, check_lambda_mediation, check_local_causality,
    check_no_retrocausality, check_psi_ontic, distinct_state_labels, find_ontological_time_reverse,
    price_contradiction_demo, PsiClassification,
};
use crate::opmodel::{
    born_predict_with, build_chsh_experiment, build_price_experiment, chsh_value, BehaviorTable, Channel, Experiment,
    Scenario,
};
use crate::random::{random_classical, random_experiment, ExperimentShape};
use crate::timerev::classical::ClassicalExperiment;
use crate::timerev::{operational_time_reverse, reverse_deviation};

pub const SUITE_SEED: u64 = 0x7153_7e11;

/// Result of one suite entry.
#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

/// Sizes of the randomized parts.
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub random_experiments: usize,
    pub random_behaviors: usize,
    pub lhv_experiments: usize,
    pub cr_n_max: usize,
    pub classical_max: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: SUITE_SEED,
            random_experiments: 200,
            random_behaviors: 1000,
            lhv_experiments: 50,
            cr_n_max: 6,
            classical_max: 4,
        }
    }
}

fn timed(id: u8, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CriterionOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> Vec<CriterionOutcome> {
    let tol = ToleranceConfig::default();
    let experiments = random_experiments(cfg.seed, cfg.random_experiments);
    vec![
        timed(1, "temporal CHSH value and LP infeasibility", || chsh_criterion(&tol)),
        timed(2, "operational time reverse on random experiments", || {
            reverse_criterion(&experiments, &tol)
        }),
        timed(3, "timelike/spacelike prediction isomorphism", || {
            isomorphism_criterion(&experiments, &tol)
        }),
        timed(4, "toy-model ontic extension", toy_criterion),
        timed(5, "Price contradiction", price_criterion),
        timed(6, "LHV certificate soundness", || lhv_criterion(cfg, &tol)),
        timed(7, "chained family", || cr_criterion(cfg.cr_n_max, &tol)),
        timed(8, "classical reversal against Bayes inversion", || {
            classical_criterion(cfg.seed, cfg.classical_max, &tol)
        }),
    ]
}

/// Half qubit, half qutrit; complex amplitudes on every other draw.
pub fn random_experiments(seed: u64, count: usize) -> Vec<Experiment<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let complex = k % 2 == 0;
            let shape = if k < count / 2 {
                ExperimentShape::qubit(complex)
            } else {
                ExperimentShape::qutrit(complex)
            };
            random_experiment(&mut rng, shape)
        })
        .collect()
}

fn chsh_criterion(tol: &ToleranceConfig) -> Result<(bool, String)> {
    let e = build_chsh_experiment::<f64>();
    let t = born_predict_with(&e, tol)?;
    let value = chsh_value(&t)?;
    let target = (2.0 + 2f64.sqrt()) / 4.0;
    let lp = lhv_feasibility(&t)?;
    let verified = match &lp.certificate {
        LhvCertificate::Infeasible { functional, .. } => verify_functional(&t, functional).is_ok(),
        LhvCertificate::Feasible { .. } => false,
    };
    let ok = (value - target).abs() <= 1e-9 && verified;
    Ok((
        ok,
        format!(
            "value {value:.12}, LP {}",
            if lp.is_feasible() { "FEASIBLE" } else { "INFEASIBLE" }
        ),
    ))
}

fn reverse_criterion(es: &[Experiment<f64>], tol: &ToleranceConfig) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for e in es {
        let r = operational_time_reverse(e, tol)?;
        worst = worst.max(reverse_deviation(e, &r, tol)?);
    }
    Ok((
        worst <= 1e-9,
        format!("{} experiments, max deviation {worst:e}", es.len()),
    ))
}

fn isomorphism_criterion(es: &[Experiment<f64>], tol: &ToleranceConfig) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for e in es {
        worst = worst.max(prediction_isomorphism_check(e, tol)?.max_deviation);
    }
    let chsh = build_chsh_experiment::<f64>();
    let r = prediction_isomorphism_check(&chsh, tol)?;
    let phi_half = channel_to_conditional_state(&Channel::<f64>::identity(2))
        .matrix()
        .scale(0.5);
    let image = r.bipartite.matrix().matrix().max_abs_diff(phi_half.matrix());
    let chsh_gap = (chsh_value(&r.spacelike)? - chsh_value(&r.timelike)?).abs();
    let ok = worst <= 1e-9 && image <= 1e-12 && chsh_gap <= 1e-12;
    Ok((
        ok,
        format!("max deviation {worst:e}, CHSH image off by {image:e}, CHSH values differ by {chsh_gap:e}"),
    ))
}

fn toy_criterion() -> Result<(bool, String)> {
    let toy = build_toy_model_extension::<BigRational>();
    let price: BehaviorTable<BigRational> =
        BehaviorTable::from_fn(Scenario::binary(), 0.0, |x, a, y, b| match (x == y, a == b) {
            (true, true) => BigRational::new(1.into(), 2.into()),
            (true, false) => BigRational::zero(),
            (false, _) => BigRational::new(1.into(), 4.into()),
        })?;
    let marginal = toy.marginalize(0.0)? == price;
    let born = born_predict_with(&build_price_experiment::<f64>(true), &ToleranceConfig::default())?;
    let born_ok = born.max_deviation(&price.to_f64())? <= 1e-12;
    let nr = check_no_retrocausality(&toy, 0.0).holds;
    let med = check_lambda_mediation(&toy, 0.0);
    let lc = check_local_causality(&toy, 0.0).holds;
    let ind = check_independences(&toy, 0.0).all_hold();
    let identity = find_ontological_time_reverse(&toy, &toy, 0.0)?.is_some_and(|f| f.is_identity());
    let witness = match check_psi_ontic(&toy, &distinct_state_labels(toy.scenario()), 0.0) {
        PsiClassification::Epistemic { witness, .. } => {
            witness.lambda == "00"
                && witness.first == ("0".into(), "0".into())
                && witness.second == ("1".into(), "0".into())
                && witness.p_first == 0.5
                && witness.p_second == 0.5
        }
        PsiClassification::Ontic { .. } => false,
    };
    let checks = [
        ("marginal", marginal && born_ok),
        ("no retrocausality", nr),
        ("lambda mediation", med.strong.holds && med.weak.holds),
        ("local causality", lc),
        ("independences", ind),
        ("identity reverse", identity),
        ("psi-epistemic witness", witness),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    let detail = if failed.is_empty() {
        "all exact checks hold; overlap at lambda=00 with probability 1/2".to_string()
    } else {
        format!("failed: {}", failed.join(", "))
    };
    Ok((failed.is_empty(), detail))
}

fn price_criterion() -> Result<(bool, String)> {
    let r = price_contradiction_demo::<BigRational>(None, 0.0)?;
    let mi = r.reverse_measurement_independence.as_ref();
    let ok =
        r.applicable && r.disjoint_supports && r.contradiction && mi.is_some_and(|m| !m.holds && m.witness.is_some());
    let witness = mi
        .and_then(|m| m.witness.as_ref())
        .map_or("none".to_string(), ToString::to_string);
    Ok((
        ok,
        format!("disjoint supports {}, witness {witness}", r.disjoint_supports),
    ))
}

fn random_behavior(rng: &mut impl Rng, kind: usize) -> Result<BehaviorTable<f64>> {
    let s = Scenario::binary();
    match kind % 3 {
        0 => {
            // mixture of up to four deterministic strategies
            let k = rng.random_range(1..=4);
            let picks: Vec<(DeterministicStrategy, f64)> = (0..k)
                .map(|_| {
                    let st = DeterministicStrategy {
                        f_a: vec![rng.random_range(0..2), rng.random_range(0..2)],
                        f_b: vec![rng.random_range(0..2), rng.random_range(0..2)],
                    };
                    (st, rng.random_range(0.1..1.0))
                })
                .collect();
            let total: f64 = picks.iter().map(|p| p.1).sum();
            BehaviorTable::from_fn(s, 1e-12, |x, a, y, b| {
                picks
                    .iter()
                    .filter(|(st, _)| st.f_a[x] == a && st.f_b[y] == b)
                    .map(|(_, w)| w / total)
                    .sum()
            })
        }
        1 => {
            // quantum behavior with white noise
            let e = random_experiment(rng, ExperimentShape::qubit(true));
            let q = born_predict_with(&e, &ToleranceConfig::default())?;
            let lam: f64 = rng.random_range(0.0..1.0);
            BehaviorTable::from_fn(s, 1e-12, |x, a, y, b| lam * q.get(x, a, y, b) + (1.0 - lam) * 0.25)
        }
        _ => {
            // arbitrary table, generally signalling
            let blocks: Vec<Vec<f64>> = (0..4)
                .map(|_| {
                    let w: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
                    let t: f64 = w.iter().sum();
                    w.into_iter().map(|v| v / t).collect()
                })
                .collect();
            BehaviorTable::from_fn(s, 1e-12, |x, a, y, b| blocks[2 * x + y][2 * a + b])
        }
    }
}

fn lhv_criterion(cfg: &SuiteConfig, tol: &ToleranceConfig) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6c68);
    let (mut feasible, mut infeasible, mut bad) = (0, 0, 0);
    for k in 0..cfg.random_behaviors {
        let t = random_behavior(&mut rng, k)?;
        let r = lhv_feasibility(&t)?;
        let sound = match &r.certificate {
            LhvCertificate::Feasible { weights, .. } => {
                feasible += 1;
                verify_mixture(&t, weights).is_ok_and(|d| d <= LP_EPS)
                    && chsh_facets(&t)?.iter().all(|f| f.value <= 0.75 + LP_EPS)
            }
            LhvCertificate::Infeasible { functional, .. } => {
                infeasible += 1;
                verify_functional(&t, functional).is_ok()
            }
        };
        if !sound {
            bad += 1;
        }
    }
    let mut disagreements = 0;
    let es = random_experiments(cfg.seed ^ 0x5ace, cfg.lhv_experiments);
    for e in &es {
        let iso = prediction_isomorphism_check(e, tol)?;
        if lhv_feasibility(&iso.timelike)?.is_feasible() != lhv_feasibility(&iso.spacelike)?.is_feasible() {
            disagreements += 1;
        }
    }
    let ok = bad == 0 && disagreements == 0;
    Ok((
        ok,
        format!(
            "{} behaviors ({feasible} feasible, {infeasible} infeasible, {bad} unsound); {} experiment pairs, {disagreements} disagreements",
            cfg.random_behaviors,
            es.len()
        ),
    ))
}

fn cr_criterion(n_max: usize, tol: &ToleranceConfig) -> Result<(bool, String)> {
    let rows = cr_family_report(n_max, tol)?;
    let mut ok = true;
    for r in &rows {
        let want = if r.n == 1 {
            Verdict::Feasible
        } else {
            Verdict::Infeasible
        };
        ok &= r.marginal_deviation <= 1e-15 && r.overlap_deviation <= 1e-10 && r.verdict == want;
    }
    let verdicts: Vec<String> = rows.iter().map(|r| format!("N={} {}", r.n, r.verdict)).collect();
    Ok((ok, verdicts.join(", ")))
}

/// Bayes inversion from the full joint `p(x) p(a, i | x) T(j | i) q(b | y, j) p(y)`,
/// with uniform `x` and `y`: returns `(p(b, j | y), p(i | j), p(a | x, i))` on the supports.
#[allow(clippy::type_complexity)]
pub fn bayes_inversion(
    e: &ClassicalExperiment<BigRational>,
) -> (
    Vec<Vec<Vec<BigRational>>>,
    Vec<Vec<BigRational>>,
    Vec<Vec<Vec<BigRational>>>,
) {
    let (nx, na, ny, nb) = e.scenario().sizes();
    let (n, m) = (e.dim_in(), e.dim_out());
    let px = BigRational::new(1.into(), (nx as i64).into());
    let py = BigRational::new(1.into(), (ny as i64).into());
    let zero = BigRational::zero;
    // nonzero cells of the joint, keyed by (x, a, i, j, y, b)
    let mut joint: Vec<([usize; 6], BigRational)> = Vec::new();
    for (x, a, y, b) in e.scenario().tuples() {
        for i in 0..n {
            for j in 0..m {
                let p = px.clone()
                    * e.prep[x][a][i].clone()
                    * e.transition[i][j].clone()
                    * e.response[y][b][j].clone()
                    * py.clone();
                if !p.is_zero() {
                    joint.push(([x, a, i, j, y, b], p));
                }
            }
        }
    }
    let sum = |f: &dyn Fn(usize, usize, usize, usize, usize, usize) -> bool| {
        joint
            .iter()
            .filter(|([x, a, i, j, y, b], _)| f(*x, *a, *i, *j, *y, *b))
            .fold(zero(), |s, (_, p)| s + p.clone())
    };
    let p_i: Vec<BigRational> = (0..n).map(|i0| sum(&|_, _, i, _, _, _| i == i0)).collect();
    let p_j: Vec<BigRational> = (0..m).map(|j0| sum(&|_, _, _, j, _, _| j == j0)).collect();
    let supp_i: Vec<usize> = (0..n).filter(|&i| !p_i[i].is_zero()).collect();
    let supp_j: Vec<usize> = (0..m).filter(|&j| !p_j[j].is_zero()).collect();
    let prep = (0..ny)
        .map(|y0| {
            (0..nb)
                .map(|b0| {
                    supp_j
                        .iter()
                        .map(|&j0| sum(&|_, _, _, j, y, b| y == y0 && b == b0 && j == j0) / py.clone())
                        .collect()
                })
                .collect()
        })
        .collect();
    let transition = supp_j
        .iter()
        .map(|&j0| {
            supp_i
                .iter()
                .map(|&i0| sum(&|_, _, i, j, _, _| i == i0 && j == j0) / p_j[j0].clone())
                .collect()
        })
        .collect();
    let response = (0..nx)
        .map(|x0| {
            (0..na)
                .map(|a0| {
                    supp_i
                        .iter()
                        .map(|&i0| {
                            sum(&|x, a, i, _, _, _| x == x0 && a == a0 && i == i0)
                                / sum(&|x, _, i, _, _, _| x == x0 && i == i0)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    (prep, transition, response)
}

fn classical_criterion(seed: u64, max: usize, tol: &ToleranceConfig) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc1a5);
    let mut cases = 0;
    let mut exact_failures = 0;
    let mut quantum_worst: f64 = 0.0;
    for nx in 1..=max {
        for na in 1..=max {
            for ny in 1..=max {
                for nb in 1..=max {
                    let (n, m) = (1 + (nx + ny) % max, 1 + (na + nb) % max);
                    let e = random_classical(&mut rng, (n, m, nx, na, ny, nb));
                    let r = e.reverse(0.0)?;
                    let (prep, transition, response) = bayes_inversion(&e);
                    let exact = r.prep == prep
                        && r.transition == transition
                        && r.response == response
                        && r.behavior(0.0)?.max_deviation(&e.behavior(0.0)?.swapped())?.is_zero();
                    if !exact {
                        exact_failures += 1;
                    }
                    let q: Experiment<f64> = e.to_quantum(tol)?;
                    let qr = operational_time_reverse(&q, tol)?;
                    let qb = born_predict_with(&qr, tol)?;
                    quantum_worst = quantum_worst.max(qb.max_deviation(&r.behavior(0.0)?.to_f64())?);
                    cases += 1;
                }
            }
        }
    }
    let ok = exact_failures == 0 && quantum_worst <= 1e-9;
    Ok((
        ok,
        format!(
            "{cases} experiments, {exact_failures} exact mismatches, diagonal quantum reverse within {quantum_worst:e}"
        ),
    ))
}
