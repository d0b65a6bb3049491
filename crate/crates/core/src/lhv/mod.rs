//! Local-causality certificates for behavior tables.
//!
//! A behavior is locally causal iff it is a mixture of deterministic
//! strategies. [`lhv_feasibility`] decides this with a phase-1 simplex and
//! returns either the mixture or a separating Bell functional taken from the
//! optimal duals. Both kinds of certificate are re-verified by direct
//! enumeration before they are returned.

mod reports;
mod simplex;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::opmodel::{BehaviorTable, Scenario};
use crate::scalar::Field;

pub use reports::{
    chained_functional, chsh_facets, chsh_violation_report, cr_family_report, cr_rows_to_csv, ChshFacet, ChshReport,
    CrRow, Verdict, CR_CSV_HEADER, CR_N_MAX,
};

/// Upper bound on `|A|^|X| * |B|^|Y|`.
pub const STRATEGY_GUARD: u128 = 1_000_000;

/// Feasibility threshold for floating-point tables.
pub const LP_EPS: f64 = 1e-8;

/// A pair of response functions `x -> a`, `y -> b` (outcome indices).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DeterministicStrategy {
    pub f_a: Vec<usize>,
    pub f_b: Vec<usize>,
}

impl DeterministicStrategy {
    /// `D(a, b | x, y)` as a 0/1 table.
    pub fn behavior<P: Field>(&self, scenario: &Scenario) -> BehaviorTable<P> {
        BehaviorTable::from_fn(scenario.clone(), 0.0, |x, a, y, b| {
            if self.f_a[x] == a && self.f_b[y] == b {
                P::one()
            } else {
                P::zero()
            }
        })
        .expect("deterministic table is normalized")
    }

    /// `"f_A=0,1 f_B=1,0"` in outcome labels.
    pub fn describe(&self, scenario: &Scenario) -> String {
        let fa: Vec<&str> = self.f_a.iter().map(|&a| scenario.a.label(a)).collect();
        let fb: Vec<&str> = self.f_b.iter().map(|&b| scenario.b.label(b)).collect();
        format!("f_A={} f_B={}", fa.join(","), fb.join(","))
    }

    /// `sum_{x,y} F(x, f_A(x), y, f_B(y))`.
    pub fn evaluate<P: Field>(&self, scenario: &Scenario, functional: &[P]) -> P {
        let (nx, _, ny, _) = scenario.sizes();
        let mut s = P::zero();
        for x in 0..nx {
            for y in 0..ny {
                s = s + functional[scenario.index(x, self.f_a[x], y, self.f_b[y])].clone();
            }
        }
        s
    }
}

fn strategy_count(scenario: &Scenario) -> u128 {
    let (nx, na, ny, nb) = scenario.sizes();
    let pow = |base: usize, exp: usize| (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base as u128));
    match (pow(na, nx), pow(nb, ny)) {
        (Some(l), Some(r)) => l.saturating_mul(r),
        _ => u128::MAX,
    }
}

fn check_guard(scenario: &Scenario) -> Result<u128> {
    let n = strategy_count(scenario);
    if n > STRATEGY_GUARD {
        return Err(Error::GuardExceeded(n, STRATEGY_GUARD));
    }
    Ok(n)
}

/// All deterministic strategies, lexicographic in `(f_A, f_B)`.
pub fn enumerate_strategies(scenario: &Scenario) -> Result<Vec<DeterministicStrategy>> {
    let n = check_guard(scenario)?;
    let space = StrategySpace::new(scenario.clone())?;
    Ok((0..n as u64).map(|r| space.decode(r)).collect())
}

/// Strategies indexed by their lexicographic rank, with decomposed optimizers.
pub(crate) struct StrategySpace {
    scenario: Scenario,
    left: u64,
    right: u64,
}

fn digits(mut r: u64, base: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = (r % base as u64) as usize;
        r /= base as u64;
    }
    d
}

fn undigits(d: &[usize], base: usize) -> u64 {
    d.iter().fold(0u64, |acc, &v| acc * base as u64 + v as u64)
}

impl StrategySpace {
    /// Requires only `|A|^|X|` to be enumerable; `f_B` is optimized per setting.
    pub(crate) fn new(scenario: Scenario) -> Result<Self> {
        let (nx, na, ny, nb) = scenario.sizes();
        let pow = |base: usize, exp: usize| (0..exp).try_fold(1u64, |acc, _| acc.checked_mul(base as u64));
        match (pow(na, nx), pow(nb, ny)) {
            (Some(left), Some(right)) if left.checked_mul(right).is_some() && u128::from(left) <= STRATEGY_GUARD => {
                Ok(Self { scenario, left, right })
            }
            _ => Err(Error::GuardExceeded(strategy_count(&scenario), STRATEGY_GUARD)),
        }
    }

    pub(crate) fn decode(&self, r: u64) -> DeterministicStrategy {
        let (nx, na, ny, nb) = self.scenario.sizes();
        DeterministicStrategy {
            f_a: digits(r / self.right, na, nx),
            f_b: digits(r % self.right, nb, ny),
        }
    }

    pub(crate) fn rows_of(&self, r: u64) -> Vec<usize> {
        let s = self.decode(r);
        let (nx, _, ny, _) = self.scenario.sizes();
        let mut rows = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                rows.push(self.scenario.index(x, s.f_a[x], y, s.f_b[y]));
            }
        }
        rows
    }

    /// `g[y][b] = sum_x F(x, f_A(x), y, b)` for a fixed `f_A`.
    fn partial<P: Field>(&self, fa: &[usize], f: &[P]) -> Vec<Vec<P>> {
        let (nx, _, ny, nb) = self.scenario.sizes();
        (0..ny)
            .map(|y| {
                (0..nb)
                    .map(|b| (0..nx).fold(P::zero(), |s, x| s + f[self.scenario.index(x, fa[x], y, b)].clone()))
                    .collect()
            })
            .collect()
    }

    /// `max_s F . D_s` and the lexicographically first maximizer.
    pub(crate) fn maximize<P: Field>(&self, f: &[P]) -> (P, u64) {
        let (nx, na, _, _) = self.scenario.sizes();
        let mut best: Option<(P, u64)> = None;
        for ra in 0..self.left {
            let fa = digits(ra, na, nx);
            let g = self.partial(&fa, f);
            let mut total = P::zero();
            let mut fb = Vec::with_capacity(g.len());
            for row in &g {
                let (mut arg, mut val) = (0, row[0].clone());
                for (b, v) in row.iter().enumerate().skip(1) {
                    if *v > val {
                        arg = b;
                        val = v.clone();
                    }
                }
                total = total + val;
                fb.push(arg);
            }
            if best.as_ref().is_none_or(|(v, _)| total > *v) {
                best = Some((total, ra * self.right + undigits(&fb, self.scenario.b.len())));
            }
        }
        best.expect("at least one strategy")
    }

    /// Lexicographically first strategy with `F . D_s > tol`.
    pub(crate) fn first_above<P: Field>(&self, f: &[P], tol: f64) -> Option<(P, u64)> {
        let (nx, na, _, _) = self.scenario.sizes();
        for ra in 0..self.left {
            let fa = digits(ra, na, nx);
            let g = self.partial(&fa, f);
            let maxes: Vec<P> = g
                .iter()
                .map(|row| row.iter().skip(1).fold(row[0].clone(), |m, v| P::max_of(m, v.clone())))
                .collect();
            let mut suffix = vec![P::zero(); g.len() + 1];
            for y in (0..g.len()).rev() {
                suffix[y] = suffix[y + 1].clone() + maxes[y].clone();
            }
            if !suffix[0].above(tol) {
                continue;
            }
            let mut prefix = P::zero();
            let mut fb = Vec::with_capacity(g.len());
            for (y, row) in g.iter().enumerate() {
                let b = (0..row.len())
                    .find(|&b| (prefix.clone() + row[b].clone() + suffix[y + 1].clone()).above(tol))
                    .expect("the row maximum qualifies");
                prefix = prefix + row[b].clone();
                fb.push(b);
            }
            return Some((prefix, ra * self.right + undigits(&fb, self.scenario.b.len())));
        }
        None
    }
}

/// Either a mixture of deterministic strategies or a separating functional.
#[derive(Clone, Debug, PartialEq)]
pub enum LhvCertificate<P> {
    Feasible {
        /// Positive weights in strategy order.
        weights: Vec<(DeterministicStrategy, P)>,
        /// Largest `|sum_s w_s D_s - p|` over cells.
        max_deviation: P,
    },
    Infeasible {
        /// Coefficients `F(x, a, y, b)` in table storage order.
        functional: Vec<P>,
        /// `F . p`
        value: P,
        /// `max_s F . D_s`
        local_bound: P,
        maximizer: DeterministicStrategy,
    },
}

impl<P: Field> LhvCertificate<P> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible { .. })
    }
}

/// LP decision together with its certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct LhvReport<P> {
    pub scenario: Scenario,
    pub certificate: LhvCertificate<P>,
    /// Optimal phase-1 objective (total constraint violation).
    pub objective: P,
    pub pivots: usize,
}

impl<P: Field> LhvReport<P> {
    pub fn is_feasible(&self) -> bool {
        self.certificate.is_feasible()
    }

    /// Machine-readable form; numbers are rendered with `Display` so exact values stay exact.
    pub fn to_json(&self) -> Value {
        let s = &self.scenario;
        let cert = match &self.certificate {
            LhvCertificate::Feasible { weights, max_deviation } => json!({
                "verdict": "FEASIBLE",
                "max_deviation": max_deviation.to_string(),
                "weights": weights.iter().map(|(st, w)| json!({
                    "strategy": st.describe(s),
                    "weight": w.to_string(),
                })).collect::<Vec<_>>(),
            }),
            LhvCertificate::Infeasible {
                functional,
                value,
                local_bound,
                maximizer,
            } => json!({
                "verdict": "INFEASIBLE",
                "value": value.to_string(),
                "local_bound": local_bound.to_string(),
                "maximizer": maximizer.describe(s),
                "functional": s.tuples().filter(|&(x, a, y, b)| !functional[s.index(x, a, y, b)].is_zero()).map(|(x, a, y, b)| json!({
                    "x": s.x.label(x), "a": s.a.label(a), "y": s.y.label(y), "b": s.b.label(b),
                    "coefficient": functional[s.index(x, a, y, b)].to_string(),
                })).collect::<Vec<_>>(),
            }),
        };
        json!({
            "objective": self.objective.to_string(),
            "pivots": self.pivots,
            "certificate": cert,
        })
    }
}

/// Decide local causality of `t` (exactly for exact fields, at [`LP_EPS`] otherwise).
pub fn lhv_feasibility<P: Field>(t: &BehaviorTable<P>) -> Result<LhvReport<P>> {
    let scenario = t.scenario().clone();
    check_guard(&scenario)?;
    let space = StrategySpace::new(scenario.clone())?;
    let tol = if P::EXACT { 0.0 } else { 1e-11 };
    let lp = simplex::solve(&space, t.probs(), tol)?;
    let certificate = if lp.objective.within(LP_EPS) {
        let mut weights: Vec<(DeterministicStrategy, P)> = lp
            .basis
            .iter()
            .zip(&lp.values)
            .filter_map(|(v, w)| match v {
                simplex::Var::Strat(r) if w.above(0.0) => Some((space.decode(*r), w.clone())),
                _ => None,
            })
            .collect();
        weights.sort_by(|a, b| a.0.cmp(&b.0));
        let max_deviation = verify_mixture(t, &weights)?;
        LhvCertificate::Feasible { weights, max_deviation }
    } else {
        let functional = lp.duals;
        let (local_bound, maximizer) = verify_functional(t, &functional)?;
        LhvCertificate::Infeasible {
            value: dot(&functional, t.probs()),
            functional,
            local_bound,
            maximizer,
        }
    };
    Ok(LhvReport {
        scenario,
        certificate,
        objective: lp.objective,
        pivots: lp.pivots,
    })
}

fn dot<P: Field>(a: &[P], b: &[P]) -> P {
    a.iter().zip(b).fold(P::zero(), |s, (x, y)| s + x.clone() * y.clone())
}

/// Check weights are a distribution reproducing `t`; returns the max cell deviation.
pub fn verify_mixture<P: Field>(t: &BehaviorTable<P>, weights: &[(DeterministicStrategy, P)]) -> Result<P> {
    let s = t.scenario();
    let mut recon = vec![P::zero(); s.cells()];
    let mut total = P::zero();
    for (st, w) in weights {
        if (-w.clone()).above(LP_EPS) {
            return Err(Error::CertificateRejected(format!("negative weight {w}")));
        }
        total = total + w.clone();
        let (nx, _, ny, _) = s.sizes();
        for x in 0..nx {
            for y in 0..ny {
                let k = s.index(x, st.f_a[x], y, st.f_b[y]);
                recon[k] = recon[k].clone() + w.clone();
            }
        }
    }
    if !(total - P::one()).within(LP_EPS) {
        return Err(Error::CertificateRejected("weights do not sum to one".into()));
    }
    let dev = recon
        .iter()
        .zip(t.probs())
        .fold(P::zero(), |m, (r, p)| P::max_of(m, (r.clone() - p.clone()).abs_val()));
    if !dev.within(LP_EPS) {
        return Err(Error::CertificateRejected(format!("mixture misses the table by {dev}")));
    }
    Ok(dev)
}

/// Maximize `F` over every enumerated strategy; rejects `F` unless `F . p` exceeds the maximum by more than [`LP_EPS`].
pub fn verify_functional<P: Field>(t: &BehaviorTable<P>, functional: &[P]) -> Result<(P, DeterministicStrategy)> {
    let s = t.scenario();
    let n = check_guard(s)?;
    let space = StrategySpace::new(s.clone())?;
    let mut best: Option<(P, u64)> = None;
    for r in 0..n as u64 {
        let v = space.decode(r).evaluate(s, functional);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, r));
        }
    }
    let (bound, r) = best.expect("non-empty strategy set");
    let value = dot(functional, t.probs());
    if !(value.clone() - bound.clone()).above(LP_EPS) {
        return Err(Error::CertificateRejected(format!(
            "functional value {value} does not exceed local bound {bound}"
        )));
    }
    Ok((bound, space.decode(r)))
}

#[cfg(test)]
mod tests;
