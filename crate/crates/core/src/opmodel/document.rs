//! Text documents for experiments and operators (JSON, schema-versioned).
//!
//! Complex entries are written as `[re, im]` decimal pairs, row-major, using
//! the shortest representation that round-trips an `f64`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{Alphabet, Channel, Experiment, Measurement, Preparation};
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, HermitianOperator, ToleranceConfig};
use crate::scalar::Real;

pub const EXPERIMENT_SCHEMA: &str = "timesym.experiment/1";
pub const MATRIX_SCHEMA: &str = "timesym.matrix/1";

/// Row-major nested `[re, im]` pairs.
pub type MatrixEntries = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_entries<T: Real>(m: &ComplexMatrix<T>) -> MatrixEntries {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()])
                .collect()
        })
        .collect()
}

pub fn entries_to_matrix<T: Real>(e: &MatrixEntries) -> Result<ComplexMatrix<T>> {
    let rows = e.len();
    let cols = e.first().map_or(0, Vec::len);
    if e.iter().any(|r| r.len() != cols) {
        return Err(Error::Document("ragged matrix rows".into()));
    }
    let data = e
        .iter()
        .flatten()
        .map(|[re, im]| Complex::new(T::from_f64_lossy(*re), T::from_f64_lossy(*im)))
        .collect();
    ComplexMatrix::new(rows, cols, data)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub x: String,
    pub a: String,
    pub matrix: MatrixEntries,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectEntry {
    pub y: String,
    pub b: String,
    pub matrix: MatrixEntries,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreparationDocument {
    pub dim: usize,
    pub inputs: Alphabet,
    pub outputs: Alphabet,
    pub states: Vec<StateEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementDocument {
    pub dim: usize,
    pub inputs: Alphabet,
    pub outputs: Alphabet,
    pub effects: Vec<EffectEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDocument {
    pub dim_in: usize,
    pub dim_out: usize,
    pub choi: MatrixEntries,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentDocument {
    pub schema: String,
    pub preparation: PreparationDocument,
    pub channel: ChannelDocument,
    pub measurement: MeasurementDocument,
}

/// A bare operator on `dims.0 x dims.1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub schema: String,
    pub dims: Vec<usize>,
    pub matrix: MatrixEntries,
}

impl MatrixDocument {
    pub fn new<T: Real>(dims: Vec<usize>, m: &ComplexMatrix<T>) -> Self {
        Self {
            schema: MATRIX_SCHEMA.into(),
            dims,
            matrix: matrix_to_entries(m),
        }
    }
}

pub fn experiment_to_document<T: Real>(e: &Experiment<T>) -> ExperimentDocument {
    let p = &e.preparation;
    let m = &e.measurement;
    let states = (0..p.inputs().len())
        .flat_map(|x| (0..p.outputs().len()).map(move |a| (x, a)))
        .map(|(x, a)| StateEntry {
            x: p.inputs().label(x).into(),
            a: p.outputs().label(a).into(),
            matrix: matrix_to_entries(p.state(x, a).matrix()),
        })
        .collect();
    let effects = (0..m.inputs().len())
        .flat_map(|y| (0..m.outputs().len()).map(move |b| (y, b)))
        .map(|(y, b)| EffectEntry {
            y: m.inputs().label(y).into(),
            b: m.outputs().label(b).into(),
            matrix: matrix_to_entries(m.effect(y, b).matrix()),
        })
        .collect();
    ExperimentDocument {
        schema: EXPERIMENT_SCHEMA.into(),
        preparation: PreparationDocument {
            dim: p.dim(),
            inputs: p.inputs().clone(),
            outputs: p.outputs().clone(),
            states,
        },
        channel: ChannelDocument {
            dim_in: e.channel.dim_in(),
            dim_out: e.channel.dim_out(),
            choi: matrix_to_entries(e.channel.choi()),
        },
        measurement: MeasurementDocument {
            dim: m.dim(),
            inputs: m.inputs().clone(),
            outputs: m.outputs().clone(),
            effects,
        },
    }
}

fn place<T: Real>(
    inputs: &Alphabet,
    outputs: &Alphabet,
    dim: usize,
    entries: impl Iterator<Item = (String, String, MatrixEntries)>,
    tol: &ToleranceConfig,
    what: &str,
) -> Result<Vec<HermitianOperator<T>>> {
    let mut slots: Vec<Option<HermitianOperator<T>>> = vec![None; inputs.len() * outputs.len()];
    for (i, o, m) in entries {
        let k = inputs.require(&i)? * outputs.len() + outputs.require(&o)?;
        let m = entries_to_matrix::<T>(&m)?;
        if m.rows() != dim {
            return Err(Error::Document(format!(
                "{what} ({i}, {o}) has dimension {} != {dim}",
                m.rows()
            )));
        }
        if slots[k].replace(HermitianOperator::new(m, tol)?).is_some() {
            return Err(Error::Document(format!("duplicate {what} ({i}, {o})")));
        }
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            s.ok_or_else(|| {
                Error::Document(format!(
                    "missing {what} ({}, {})",
                    inputs.label(k / outputs.len()),
                    outputs.label(k % outputs.len())
                ))
            })
        })
        .collect()
}

/// Rebuild and validate an experiment.
pub fn experiment_from_document<T: Real>(doc: &ExperimentDocument, tol: &ToleranceConfig) -> Result<Experiment<T>> {
    if doc.schema != EXPERIMENT_SCHEMA {
        return Err(Error::Document(format!("unsupported schema {:?}", doc.schema)));
    }
    let p = &doc.preparation;
    let states = place(
        &p.inputs,
        &p.outputs,
        p.dim,
        p.states.iter().map(|s| (s.x.clone(), s.a.clone(), s.matrix.clone())),
        tol,
        "state",
    )?;
    let preparation = Preparation::new(p.dim, p.inputs.clone(), p.outputs.clone(), states, tol)?;
    let m = &doc.measurement;
    let effects = place(
        &m.inputs,
        &m.outputs,
        m.dim,
        m.effects.iter().map(|s| (s.y.clone(), s.b.clone(), s.matrix.clone())),
        tol,
        "effect",
    )?;
    let measurement = Measurement::new(m.dim, m.inputs.clone(), m.outputs.clone(), effects, tol)?;
    let c = &doc.channel;
    let channel = Channel::new(c.dim_in, c.dim_out, entries_to_matrix(&c.choi)?, tol)?;
    Experiment::new(preparation, channel, measurement)
}

pub fn experiment_to_json<T: Real>(e: &Experiment<T>) -> String {
    serde_json::to_string_pretty(&experiment_to_document(e)).expect("documents serialize")
}

pub fn experiment_from_json<T: Real>(text: &str, tol: &ToleranceConfig) -> Result<Experiment<T>> {
    let doc: ExperimentDocument = serde_json::from_str(text)?;
    experiment_from_document(&doc, tol)
}
