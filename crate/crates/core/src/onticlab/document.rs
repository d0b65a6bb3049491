//! JSON form of an ontic extension. Probabilities are strings holding an
//! integer, a fraction `n/d` or a decimal; cells that are absent are zero.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::OnticExtension;
use crate::error::{Error, Result};
use crate::opmodel::{Alphabet, Scenario};
use crate::scalar::{format_rational, parse_rational};

pub const ONTIC_SCHEMA: &str = "timesym.ontic/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointEntry {
    pub x: String,
    pub a: String,
    pub y: String,
    pub b: String,
    pub lambda: String,
    pub p: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnticDocument {
    pub schema: String,
    pub inputs: Alphabet,
    pub outputs: Alphabet,
    pub settings: Alphabet,
    pub results: Alphabet,
    pub lambda: Alphabet,
    /// Optional state identifiers `state_labels[x][a]` for the psi-ontic check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_labels: Option<Vec<Vec<String>>>,
    pub joint: Vec<JointEntry>,
}

pub fn extension_to_document(
    ext: &OnticExtension<BigRational>,
    state_labels: Option<Vec<Vec<String>>>,
) -> OnticDocument {
    let s = ext.scenario();
    let mut joint = Vec::new();
    for (x, a, y, b) in s.tuples() {
        for l in 0..ext.lambda().len() {
            let p = ext.get(x, a, y, b, l);
            if !p.is_zero() {
                joint.push(JointEntry {
                    x: s.x.label(x).into(),
                    a: s.a.label(a).into(),
                    y: s.y.label(y).into(),
                    b: s.b.label(b).into(),
                    lambda: ext.lambda().label(l).into(),
                    p: format_rational(p),
                });
            }
        }
    }
    OnticDocument {
        schema: ONTIC_SCHEMA.into(),
        inputs: s.x.clone(),
        outputs: s.a.clone(),
        settings: s.y.clone(),
        results: s.b.clone(),
        lambda: ext.lambda().clone(),
        state_labels,
        joint,
    }
}

/// Rebuild an exact extension; normalization is checked within `eps`.
pub fn extension_from_document(doc: &OnticDocument, eps: f64) -> Result<OnticExtension<BigRational>> {
    if doc.schema != ONTIC_SCHEMA {
        return Err(Error::Document(format!("unsupported schema {:?}", doc.schema)));
    }
    let scenario = Scenario::new(
        doc.inputs.clone(),
        doc.outputs.clone(),
        doc.settings.clone(),
        doc.results.clone(),
    );
    if let Some(labels) = &doc.state_labels {
        if labels.len() != scenario.x.len() || labels.iter().any(|row| row.len() != scenario.a.len()) {
            return Err(Error::Document("state_labels must have one entry per (x, a)".into()));
        }
    }
    let nl = doc.lambda.len();
    let mut joint: Vec<Option<BigRational>> = vec![None; scenario.cells() * nl];
    for e in &doc.joint {
        let k = scenario.index(
            scenario.x.require(&e.x)?,
            scenario.a.require(&e.a)?,
            scenario.y.require(&e.y)?,
            scenario.b.require(&e.b)?,
        ) * nl
            + doc.lambda.require(&e.lambda)?;
        let p = parse_rational(&e.p).ok_or_else(|| Error::Document(format!("bad probability {:?}", e.p)))?;
        if joint[k].replace(p).is_some() {
            return Err(Error::Document(format!(
                "duplicate entry (x={}, a={}, y={}, b={}, lambda={})",
                e.x, e.a, e.y, e.b, e.lambda
            )));
        }
    }
    let joint = joint.into_iter().map(|p| p.unwrap_or_else(BigRational::zero)).collect();
    OnticExtension::new(scenario, doc.lambda.clone(), joint, eps)
}

pub fn extension_to_json(ext: &OnticExtension<BigRational>, state_labels: Option<Vec<Vec<String>>>) -> String {
    serde_json::to_string_pretty(&extension_to_document(ext, state_labels)).expect("documents serialize")
}

/// `labels[x][a]`: which preparations are the same pure state.
pub type StateLabels = Vec<Vec<String>>;

pub fn extension_from_json(text: &str, eps: f64) -> Result<(OnticExtension<BigRational>, Option<StateLabels>)> {
    let doc: OnticDocument = serde_json::from_str(text)?;
    let ext = extension_from_document(&doc, eps)?;
    Ok((ext, doc.state_labels))
}
