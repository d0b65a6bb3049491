//! Finite ontic extensions `p(a, b, lambda | x, y)` and the conditions placed on them.
//!
//! Conditional-independence checks only look at tuples whose conditioning
//! event has probability above `eps`; the rest are counted as skipped.
//! Marginals over a setting that the conditioned quantity should not depend
//! on are taken with uniform weight over that setting.

mod checks;
pub mod document;
mod reverse;
mod toy;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::opmodel::{Alphabet, BehaviorTable, Scenario};
use crate::scalar::Field;

pub use checks::{
    check_independences, check_lambda_mediation, check_local_causality, check_no_retrocausality, IndependenceReports,
    MediationReports,
};
pub use reverse::{find_ontological_time_reverse, Bijection, MAX_BIJECTION_LAMBDA};
pub use toy::{
    build_price_psi_ontic_extension, build_toy_model_extension, check_psi_ontic, distinct_state_labels,
    price_contradiction_demo, OverlapWitness, PriceDemoReport, PsiClassification,
};

/// Joint table `p(a, b, lambda | x, y)` over a finite ontic space.
#[derive(Clone, Debug, PartialEq)]
pub struct OnticExtension<P> {
    scenario: Scenario,
    lambda: Alphabet,
    joint: Vec<P>,
}

impl<P: Field> OnticExtension<P> {
    /// Validates nonnegativity and per-`(x, y)` normalization within `eps`.
    pub fn new(scenario: Scenario, lambda: Alphabet, joint: Vec<P>, eps: f64) -> Result<Self> {
        let want = scenario.cells() * lambda.len();
        if joint.len() != want {
            return Err(Error::InvalidExtension(format!(
                "{} entries for {want} cells",
                joint.len()
            )));
        }
        let ext = Self {
            scenario,
            lambda,
            joint,
        };
        ext.validate(eps)?;
        Ok(ext)
    }

    pub fn from_fn(
        scenario: Scenario,
        lambda: Alphabet,
        eps: f64,
        mut f: impl FnMut(usize, usize, usize, usize, usize) -> P,
    ) -> Result<Self> {
        let nl = lambda.len();
        let joint = scenario
            .tuples()
            .flat_map(|(x, a, y, b)| (0..nl).map(move |l| (x, a, y, b, l)))
            .map(|(x, a, y, b, l)| f(x, a, y, b, l))
            .collect();
        Self::new(scenario, lambda, joint, eps)
    }

    fn validate(&self, eps: f64) -> Result<()> {
        for (k, p) in self.joint.iter().enumerate() {
            if (-p.clone()).above(eps) {
                return Err(Error::InvalidExtension(format!("entry {k} = {p} is negative")));
            }
        }
        let (nx, _, ny, _) = self.scenario.sizes();
        for x in 0..nx {
            for y in 0..ny {
                let dev = self.p_xy(x, y) - P::one();
                if !dev.within(eps) {
                    return Err(Error::InvalidExtension(format!(
                        "block (x={}, y={}) sums to 1 + {dev}",
                        self.scenario.x.label(x),
                        self.scenario.y.label(y)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn lambda(&self) -> &Alphabet {
        &self.lambda
    }

    pub fn entries(&self) -> &[P] {
        &self.joint
    }

    pub fn get(&self, x: usize, a: usize, y: usize, b: usize, l: usize) -> &P {
        &self.joint[self.scenario.index(x, a, y, b) * self.lambda.len() + l]
    }

    /// `sum_lambda p(a, b, lambda | x, y)`.
    pub fn marginalize(&self, eps: f64) -> Result<BehaviorTable<P>> {
        let nl = self.lambda.len();
        BehaviorTable::from_fn(self.scenario.clone(), eps, |x, a, y, b| {
            (0..nl).fold(P::zero(), |s, l| s + self.get(x, a, y, b, l).clone())
        })
    }

    /// Preparation and measurement roles exchanged: `p'(b, a, lambda | y, x)`.
    pub fn swapped(&self) -> Self {
        let s = self.scenario.swapped();
        let nl = self.lambda.len();
        let joint = s
            .tuples()
            .flat_map(|(y, b, x, a)| (0..nl).map(move |l| (x, a, y, b, l)))
            .map(|(x, a, y, b, l)| self.get(x, a, y, b, l).clone())
            .collect();
        Self {
            scenario: s,
            lambda: self.lambda.clone(),
            joint,
        }
    }

    /// Rename ontic states: `lambda_i` becomes `f[i]` in the new table's label order.
    pub fn relabel(&self, lambda: Alphabet, f: &[usize]) -> Result<Self> {
        let nl = self.lambda.len();
        if lambda.len() != nl || f.len() != nl {
            return Err(Error::InvalidExtension("relabeling must be a bijection".into()));
        }
        let mut seen = vec![false; nl];
        for &j in f {
            if j >= nl || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidExtension("relabeling must be a bijection".into()));
            }
        }
        let mut joint = vec![P::zero(); self.joint.len()];
        for (k, p) in self.joint.iter().enumerate() {
            joint[(k / nl) * nl + f[k % nl]] = p.clone();
        }
        Ok(Self {
            scenario: self.scenario.clone(),
            lambda,
            joint,
        })
    }

    pub fn map<Q: Field>(&self, f: impl Fn(&P) -> Q) -> OnticExtension<Q> {
        OnticExtension {
            scenario: self.scenario.clone(),
            lambda: self.lambda.clone(),
            joint: self.joint.iter().map(f).collect(),
        }
    }

    // Partial sums used by the checks.

    fn p_xy(&self, x: usize, y: usize) -> P {
        let (_, na, _, nb) = self.scenario.sizes();
        let mut s = P::zero();
        for a in 0..na {
            for b in 0..nb {
                for l in 0..self.lambda.len() {
                    s = s + self.get(x, a, y, b, l).clone();
                }
            }
        }
        s
    }

    /// `p(a | x, y)`
    pub(crate) fn p_a(&self, x: usize, a: usize, y: usize) -> P {
        (0..self.lambda.len()).fold(P::zero(), |s, l| s + self.p_al(x, a, y, l))
    }

    /// `p(lambda | x, y)`
    pub(crate) fn p_l(&self, x: usize, y: usize, l: usize) -> P {
        (0..self.scenario.a.len()).fold(P::zero(), |s, a| s + self.p_al(x, a, y, l))
    }

    /// `p(a, lambda | x, y)`
    pub(crate) fn p_al(&self, x: usize, a: usize, y: usize, l: usize) -> P {
        (0..self.scenario.b.len()).fold(P::zero(), |s, b| s + self.get(x, a, y, b, l).clone())
    }

    /// `p(b, lambda | x, y)`
    pub(crate) fn p_bl(&self, x: usize, y: usize, b: usize, l: usize) -> P {
        (0..self.scenario.a.len()).fold(P::zero(), |s, a| s + self.get(x, a, y, b, l).clone())
    }

    /// `p(lambda | a, x)` with `y` averaged uniformly; `None` if `p(a | x)` vanishes.
    pub fn epistemic_state(&self, x: usize, a: usize, eps: f64) -> Option<Vec<P>> {
        let ny = self.scenario.y.len();
        let den = (0..ny).fold(P::zero(), |s, y| s + self.p_a(x, a, y));
        if !den.above(eps) {
            return None;
        }
        Some(
            (0..self.lambda.len())
                .map(|l| (0..ny).fold(P::zero(), |s, y| s + self.p_al(x, a, y, l)) / den.clone())
                .collect(),
        )
    }

    /// `p(lambda | x)` with `y` averaged uniformly.
    pub fn lambda_given_x(&self, x: usize) -> Vec<P> {
        let ny = P::from_count(self.scenario.y.len());
        (0..self.lambda.len())
            .map(|l| (0..self.scenario.y.len()).fold(P::zero(), |s, y| s + self.p_l(x, y, l)) / ny.clone())
            .collect()
    }
}

/// Build `p(a|x) p(lambda|a,x) p(b|lambda,y)` from its factors.
///
/// `outcome[x][a]`, `epistemic[x][a][lambda]`, `response[y][lambda][b]`.
pub fn ontological_model_extension<P: Field>(
    scenario: Scenario,
    lambda: Alphabet,
    outcome: &[Vec<P>],
    epistemic: &[Vec<Vec<P>>],
    response: &[Vec<Vec<P>>],
    eps: f64,
) -> Result<OnticExtension<P>> {
    check_shape(outcome.len(), scenario.x.len(), "outcome distributions")?;
    check_shape(epistemic.len(), scenario.x.len(), "epistemic states")?;
    check_shape(response.len(), scenario.y.len(), "response functions")?;
    OnticExtension::from_fn(scenario, lambda, eps, |x, a, y, b, l| {
        outcome[x][a].clone() * epistemic[x][a][l].clone() * response[y][l][b].clone()
    })
}

/// Build `p(lambda) p(a|x,lambda) p(b|y,lambda)` from its factors.
///
/// `prior[lambda]`, `left[x][lambda][a]`, `right[y][lambda][b]`.
pub fn locally_causal_extension<P: Field>(
    scenario: Scenario,
    lambda: Alphabet,
    prior: &[P],
    left: &[Vec<Vec<P>>],
    right: &[Vec<Vec<P>>],
    eps: f64,
) -> Result<OnticExtension<P>> {
    check_shape(prior.len(), lambda.len(), "prior")?;
    check_shape(left.len(), scenario.x.len(), "preparation responses")?;
    check_shape(right.len(), scenario.y.len(), "measurement responses")?;
    OnticExtension::from_fn(scenario, lambda, eps, |x, a, y, b, l| {
        prior[l].clone() * left[x][l][a].clone() * right[y][l][b].clone()
    })
}

fn check_shape(got: usize, want: usize, what: &str) -> Result<()> {
    if got != want {
        return Err(Error::InvalidExtension(format!("{what}: {got} rows, expected {want}")));
    }
    Ok(())
}

/// Labels of the cell where a condition is worst violated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = [
            ("x", &self.x),
            ("a", &self.a),
            ("y", &self.y),
            ("b", &self.b),
            ("lambda", &self.lambda),
        ]
        .iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| format!("{k}={v}")))
        .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Outcome of one condition check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub condition: String,
    pub holds: bool,
    /// Largest absolute violation found.
    pub worst_violation: f64,
    /// Exact value of the violation when computed in rationals.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_violation: Option<String>,
    pub witness: Option<Witness>,
    /// Tuples excluded because the conditioning event had (near) zero probability.
    pub skipped: usize,
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} (worst violation {:e}",
            self.condition,
            if self.holds { "holds" } else { "FAILS" },
            self.worst_violation
        )?;
        if let Some(w) = &self.witness {
            write!(f, " at {w}")?;
        }
        write!(f, ", {} skipped)", self.skipped)
    }
}

#[cfg(test)]
mod tests;
