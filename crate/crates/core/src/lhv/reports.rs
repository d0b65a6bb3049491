use serde::Serialize;

use super::{lhv_feasibility, LhvReport, StrategySpace, LP_EPS};
use crate::choibridge::prediction_isomorphism_check;
use crate::error::{Error, Result};
use crate::matcore::ToleranceConfig;
use crate::opmodel::{
    born_predict_with, build_cr_experiment, chsh_value, cr_angles, BehaviorTable, Experiment, Scenario,
};
use crate::scalar::Field;

/// One CHSH inequality `1/4 sum_{x,y} p(a xor b = xy xor alpha x xor beta y xor gamma | x, y) <= 3/4`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshFacet<P> {
    pub alpha: u8,
    pub beta: u8,
    pub gamma: u8,
    pub value: P,
}

/// All eight CHSH variants of a binary behavior, `(0, 0, 0)` first.
pub fn chsh_facets<P: Field>(t: &BehaviorTable<P>) -> Result<Vec<ChshFacet<P>>> {
    if !t.scenario().is_binary() {
        return Err(Error::NonBinaryAlphabet);
    }
    let quarter = P::ratio(1, 4);
    let mut out = Vec::with_capacity(8);
    for alpha in 0..2u8 {
        for beta in 0..2u8 {
            for gamma in 0..2u8 {
                let mut s = P::zero();
                for (x, a, y, b) in t.scenario().tuples() {
                    let target = (x as u8 & y as u8) ^ (alpha & x as u8) ^ (beta & y as u8) ^ gamma;
                    if (a ^ b) as u8 == target {
                        s = s + t.get(x, a, y, b).clone();
                    }
                }
                out.push(ChshFacet {
                    alpha,
                    beta,
                    gamma,
                    value: s * quarter.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// CHSH value, facet cross-check, LP certificate and spacelike comparison for one experiment.
#[derive(Clone, Debug)]
pub struct ChshReport {
    pub value: f64,
    pub facets: Vec<ChshFacet<f64>>,
    pub facet_max: f64,
    pub lp: LhvReport<f64>,
    /// Timelike/spacelike prediction deviation.
    pub isomorphism_deviation: f64,
    pub spacelike_lp: LhvReport<f64>,
    /// Facet check, CHSH value and both LP verdicts tell the same story.
    pub consistent: bool,
}

impl ChshReport {
    pub fn infeasible(&self) -> bool {
        !self.lp.is_feasible()
    }
}

pub fn chsh_violation_report(e: &Experiment<f64>, tol: &ToleranceConfig) -> Result<ChshReport> {
    let t = born_predict_with(e, tol)?;
    if !t.scenario().is_binary() {
        return Err(Error::NonBinaryAlphabet);
    }
    let value = chsh_value(&t)?;
    let facets = chsh_facets(&t)?;
    let facet_max = facets.iter().map(|f| f.value).fold(f64::MIN, f64::max);
    let lp = lhv_feasibility(&t)?;
    let iso = prediction_isomorphism_check(e, tol)?;
    let spacelike_lp = lhv_feasibility(&iso.spacelike)?;
    let bound = 0.75 + LP_EPS;
    let infeasible = !lp.is_feasible();
    let consistent = (facet_max > bound) == infeasible
        && (value <= bound || infeasible)
        && spacelike_lp.is_feasible() == lp.is_feasible();
    Ok(ChshReport {
        value,
        facets,
        facet_max,
        lp,
        isomorphism_deviation: iso.max_deviation,
        spacelike_lp,
        consistent,
    })
}

/// Largest `N` accepted by [`cr_family_report`].
pub const CR_N_MAX: usize = 12;

/// Chained-statistic coefficients for `N` settings per side.
///
/// Adjacent settings in angular order are `(x=k, y=k)` and `(x=k+1, y=k)`,
/// scored on `a != b`, closed by `(x=0, y=N-1)` scored on `a == b`.
/// For `N = 1` the single setting pair carries both terms.
pub fn chained_functional<P: Field>(scenario: &Scenario) -> Vec<P> {
    let n = scenario.x.len();
    let mut f = vec![P::zero(); scenario.cells()];
    for (x, a, y, b) in scenario.tuples() {
        let mut c = 0;
        if (x == y || x == y + 1) && a != b {
            c += 1;
        }
        if x == 0 && y + 1 == n && a == b {
            c += 1;
        }
        f[scenario.index(x, a, y, b)] = P::from_count(c);
    }
    f
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Feasible,
    Infeasible,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Feasible => "FEASIBLE",
            Self::Infeasible => "INFEASIBLE",
        })
    }
}

/// One row of the chained-family report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrRow {
    pub n: usize,
    /// `max |p(a|x) - 1/2|` and `max |p(b|y) - 1/2|` together.
    pub marginal_deviation: f64,
    /// Largest gap between a cell and `1/2 cos^2((theta - phi)/2)`.
    pub overlap_deviation: f64,
    /// Per-pair mismatch probability `sin^2(pi / 4N)`.
    pub pair_mismatch: f64,
    pub chained_value: f64,
    pub chained_closed_form: f64,
    /// Minimum of the chained statistic over deterministic strategies.
    pub classical_floor: f64,
    /// LP verdict when the strategy count is within the guard.
    pub lp_verdict: Option<Verdict>,
    pub verdict: Verdict,
    pub verdict_source: &'static str,
}

pub fn cr_family_report(n_max: usize, tol: &ToleranceConfig) -> Result<Vec<CrRow>> {
    if n_max == 0 || n_max > CR_N_MAX {
        return Err(Error::GuardExceeded(n_max as u128, CR_N_MAX as u128));
    }
    (1..=n_max).map(|n| cr_row(n, tol)).collect()
}

fn cr_row(n: usize, tol: &ToleranceConfig) -> Result<CrRow> {
    let e = build_cr_experiment::<f64>(n);
    let t = born_predict_with(&e, tol)?;
    let s = t.scenario().clone();
    let half = 0.5;
    let mut marginal_deviation: f64 = 0.0;
    for x in 0..n {
        for a in 0..2 {
            for y in 0..n {
                marginal_deviation = marginal_deviation.max((t.marginal_a(x, a, y) - half).abs());
            }
        }
    }
    for y in 0..n {
        for b in 0..2 {
            for x in 0..n {
                marginal_deviation = marginal_deviation.max((t.marginal_b(x, y, b) - half).abs());
            }
        }
    }
    let (prep, meas) = cr_angles(n);
    let overlap_deviation = s
        .tuples()
        .map(|(x, a, y, b)| {
            let closed = 0.5 * ((prep[2 * x + a] - meas[2 * y + b]) / 2.0).cos().powi(2);
            (t.get(x, a, y, b) - closed).abs()
        })
        .fold(0.0, f64::max);

    let f: Vec<f64> = chained_functional(&s);
    let chained_value = f.iter().zip(t.probs()).map(|(c, p)| c * p).sum();
    let pair_mismatch = (std::f64::consts::PI / (4.0 * n as f64)).sin().powi(2);
    let chained_closed_form = 2.0 * n as f64 * pair_mismatch;

    // exact floor: maximize the negated integer functional
    let neg: Vec<num_rational::BigRational> = chained_functional::<num_rational::BigRational>(&s)
        .into_iter()
        .map(|c| -c)
        .collect();
    let (best, _) = StrategySpace::new(s.clone())?.maximize(&neg);
    let classical_floor = (-best).as_f64();

    let lp_verdict = match lhv_feasibility(&t) {
        Ok(r) if r.is_feasible() => Some(Verdict::Feasible),
        Ok(_) => Some(Verdict::Infeasible),
        Err(Error::GuardExceeded(_, _)) => None,
        Err(e) => return Err(e),
    };
    let chained_violation = chained_value < classical_floor - LP_EPS;
    let (verdict, verdict_source) = match lp_verdict {
        Some(v) => (v, "lp"),
        None if chained_violation => (Verdict::Infeasible, "chained"),
        None => {
            return Err(Error::CertificateRejected(format!(
                "N = {n}: no chained violation and the LP is beyond the strategy guard"
            )))
        }
    };
    Ok(CrRow {
        n,
        marginal_deviation,
        overlap_deviation,
        pair_mismatch,
        chained_value,
        chained_closed_form,
        classical_floor,
        lp_verdict,
        verdict,
        verdict_source,
    })
}

pub const CR_CSV_HEADER: &str = "n,marginal_deviation,overlap_deviation,pair_mismatch,chained_value,chained_closed_form,classical_floor,lp_verdict,verdict,verdict_source";

/// Fixed-header CSV with `{:e}` floats.
pub fn cr_rows_to_csv(rows: &[CrRow]) -> String {
    let mut out = String::from(CR_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:e},{:e},{:.15e},{:.15e},{:.15e},{},{},{},{}\n",
            r.n,
            r.marginal_deviation,
            r.overlap_deviation,
            r.pair_mismatch,
            r.chained_value,
            r.chained_closed_form,
            r.classical_floor,
            r.lp_verdict.map_or("NA".to_string(), |v| v.to_string()),
            r.verdict,
            r.verdict_source
        ));
    }
    out
}
