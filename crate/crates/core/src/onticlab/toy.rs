//! The four-state toy model, psi-onticity, and the Price contradiction.

use serde::Serialize;

use super::{check_independences, check_no_retrocausality, CheckReport, OnticExtension};
use crate::error::Result;
use crate::opmodel::{Alphabet, Scenario};
use crate::scalar::Field;

/// Toy-model extension of the matched-basis Price experiment.
///
/// `Lambda = {"00", "01", "10", "11"}` (label `l0 l1`) and
/// `p(a, b, l0, l1 | x, y) = 1/4 delta(l_y, b) delta(l_x, a)`.
pub fn build_toy_model_extension<P: Field>() -> OnticExtension<P> {
    let lambda = Alphabet::new(["00", "01", "10", "11"]).expect("distinct labels");
    let quarter = P::ratio(1, 4);
    OnticExtension::from_fn(Scenario::binary(), lambda, 0.0, |x, a, y, b, l| {
        let bits = [l >> 1, l & 1];
        if bits[x] == a && bits[y] == b {
            quarter.clone()
        } else {
            P::zero()
        }
    })
    .expect("toy model is normalized")
}

/// One identifier per preparation `(x, a)`: every prepared state declared distinct.
pub fn distinct_state_labels(scenario: &Scenario) -> Vec<Vec<String>> {
    (0..scenario.x.len())
        .map(|x| {
            (0..scenario.a.len())
                .map(|a| format!("x{}a{}", scenario.x.label(x), scenario.a.label(a)))
                .collect()
        })
        .collect()
}

/// Two distinct states whose epistemic states share an ontic state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapWitness {
    /// `(x, a)` labels of the first preparation.
    pub first: (String, String),
    pub second: (String, String),
    pub lambda: String,
    pub p_first: f64,
    pub p_second: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum PsiClassification {
    Ontic {
        skipped: Vec<(String, String)>,
    },
    Epistemic {
        witness: OverlapWitness,
        skipped: Vec<(String, String)>,
    },
}

impl PsiClassification {
    pub fn is_ontic(&self) -> bool {
        matches!(self, Self::Ontic { .. })
    }
}

/// psi-ontic iff preparations with different identifiers have disjoint
/// supports of `p(lambda | a, x)`. `labels[x][a]` names the prepared state;
/// cells with `p(a|x) = 0` are skipped.
pub fn check_psi_ontic<P: Field>(ext: &OnticExtension<P>, labels: &[Vec<String>], eps: f64) -> PsiClassification {
    let s = ext.scenario();
    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    for x in 0..s.x.len() {
        for a in 0..s.a.len() {
            let key = (s.x.label(x).to_string(), s.a.label(a).to_string());
            match ext.epistemic_state(x, a, eps) {
                Some(mu) => cells.push((x, a, key, mu)),
                None => skipped.push(key),
            }
        }
    }
    for (i, (x, a, key, mu)) in cells.iter().enumerate() {
        for (x2, a2, key2, nu) in &cells[i + 1..] {
            if labels[*x][*a] == labels[*x2][*a2] {
                continue;
            }
            let shared = (0..ext.lambda().len()).find(|&l| mu[l].above(eps) && nu[l].above(eps));
            if let Some(l) = shared {
                return PsiClassification::Epistemic {
                    witness: OverlapWitness {
                        first: key.clone(),
                        second: key2.clone(),
                        lambda: ext.lambda().label(l).to_string(),
                        p_first: mu[l].as_f64(),
                        p_second: nu[l].as_f64(),
                    },
                    skipped,
                };
            }
        }
    }
    PsiClassification::Ontic { skipped }
}

/// psi-ontic extension of the trivial-measurement Price experiment: the ontic
/// state is the label of the prepared state, `p(a, lambda | x) = 1/2 delta`.
pub fn build_price_psi_ontic_extension<P: Field>() -> OnticExtension<P> {
    let scenario = Scenario::new(
        Alphabet::binary(),
        Alphabet::binary(),
        Alphabet::range(1),
        Alphabet::range(1),
    );
    let lambda = Alphabet::new(distinct_state_labels(&scenario).concat()).expect("distinct labels");
    let half = P::ratio(1, 2);
    OnticExtension::from_fn(scenario, lambda, 0.0, |x, a, _, _, l| {
        if l == 2 * x + a {
            half.clone()
        } else {
            P::zero()
        }
    })
    .expect("normalized")
}

/// Result of the Price argument applied to one extension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriceDemoReport {
    pub psi: PsiClassification,
    pub applicable: bool,
    /// `p(lambda | x)` per preparation input, as `(x label, distribution)`.
    pub lambda_given_x: Vec<(String, Vec<f64>)>,
    /// Support of `p(lambda | x)` per preparation input.
    pub supports: Vec<(String, Vec<String>)>,
    /// No two inputs share an ontic state.
    pub disjoint_supports: bool,
    /// No retrocausality for the role-exchanged table (identity relabeling).
    pub reverse_no_retrocausality: Option<CheckReport>,
    /// Measurement independence for the role-exchanged table.
    pub reverse_measurement_independence: Option<CheckReport>,
    pub contradiction: bool,
    pub explanation: String,
}

/// Run the Price argument on `ext` (or the default psi-ontic extension).
///
/// `labels[x][a]` declares which preparations are distinct pure states.
pub fn price_contradiction_demo<P: Field>(
    ext: Option<(&OnticExtension<P>, &[Vec<String>])>,
    eps: f64,
) -> Result<PriceDemoReport> {
    let default_ext;
    let default_labels;
    let (ext, labels) = match ext {
        Some(pair) => pair,
        None => {
            default_ext = build_price_psi_ontic_extension::<P>();
            default_labels = distinct_state_labels(default_ext.scenario());
            (&default_ext, default_labels.as_slice())
        }
    };
    let psi = check_psi_ontic(ext, labels, eps);
    let s = ext.scenario();
    let lambda_given_x: Vec<(String, Vec<P>)> = (0..s.x.len())
        .map(|x| (s.x.label(x).to_string(), ext.lambda_given_x(x)))
        .collect();
    let supports: Vec<(String, Vec<String>)> = lambda_given_x
        .iter()
        .map(|(x, mu)| {
            let sup = (0..mu.len())
                .filter(|&l| mu[l].above(eps))
                .map(|l| ext.lambda().label(l).to_string())
                .collect();
            (x.clone(), sup)
        })
        .collect();
    let disjoint_supports = supports
        .iter()
        .enumerate()
        .all(|(i, (_, u))| supports[i + 1..].iter().all(|(_, v)| u.iter().all(|l| !v.contains(l))));
    let lambda_given_x = lambda_given_x
        .into_iter()
        .map(|(x, mu)| (x, mu.iter().map(Field::as_f64).collect()))
        .collect();

    if !psi.is_ontic() {
        return Ok(PriceDemoReport {
            psi,
            applicable: false,
            lambda_given_x,
            supports,
            disjoint_supports,
            reverse_no_retrocausality: None,
            reverse_measurement_independence: None,
            contradiction: false,
            explanation:
                "extension is psi-epistemic: distinct states share an ontic state, so the argument does not apply"
                    .into(),
        });
    }
    let reversed = ext.swapped();
    let nr = check_no_retrocausality(&reversed, eps);
    let mi = check_independences(&reversed, eps).measurement;
    let contradiction = disjoint_supports && s.x.len() > 1 && !nr.holds && !mi.holds;
    let explanation = if contradiction {
        "p(lambda|x) have disjoint supports across x, so the time reverse would need lambda to depend on its measurement setting: no retrocausality fails in the reverse"
    } else {
        "no contradiction: the reverse table satisfies no retrocausality"
    };
    Ok(PriceDemoReport {
        psi,
        applicable: true,
        lambda_given_x,
        supports,
        disjoint_supports,
        reverse_no_retrocausality: Some(nr),
        reverse_measurement_independence: Some(mi),
        contradiction,
        explanation: explanation.into(),
    })
}
