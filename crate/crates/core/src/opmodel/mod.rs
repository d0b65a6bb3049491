//! Preparations, channels, measurements and the Born rule.
//!
//! States `rho_{a|x}` are stored unnormalized; `p(a|x)` is always read off as
//! their trace. Channels are stored as conditional states (Choi operators),
//! see [`crate::choibridge`].

mod alphabet;
mod behavior;
mod builders;
pub mod document;

pub use alphabet::Alphabet;
pub use behavior::{check_forward_no_signalling, chsh_value, BehaviorCsv, BehaviorTable, Scenario};
pub use builders::{build_chsh_experiment, build_cr_experiment, build_price_experiment, cr_angles};

use crate::choibridge::ChoiMap;
use crate::error::{Error, Result};
use crate::matcore::{partial_trace, ComplexMatrix, HermitianOperator, Subsystem, ToleranceConfig};
use crate::scalar::Real;

/// Preparation `{rho_{a|x}}` on a `dim`-dimensional system.
#[derive(Clone, Debug, PartialEq)]
pub struct Preparation<T> {
    dim: usize,
    inputs: Alphabet,
    outputs: Alphabet,
    /// `states[x * |A| + a]`
    states: Vec<HermitianOperator<T>>,
}

impl<T: Real> Preparation<T> {
    /// Requires every state PSD and every ensemble average of unit trace.
    pub fn new(
        dim: usize,
        inputs: Alphabet,
        outputs: Alphabet,
        states: Vec<HermitianOperator<T>>,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        if states.len() != inputs.len() * outputs.len() {
            return Err(Error::InvalidPreparation(format!(
                "{} states for {} inputs x {} outputs",
                states.len(),
                inputs.len(),
                outputs.len()
            )));
        }
        for (k, s) in states.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::InvalidPreparation(format!(
                    "state {k} has dimension {} != {dim}",
                    s.dim()
                )));
            }
            let min = s.min_eigenvalue().as_f64();
            if min < -tol.psd {
                return Err(Error::InvalidPreparation(format!(
                    "state {k} not PSD (eigenvalue {min:e})"
                )));
            }
        }
        let prep = Self {
            dim,
            inputs,
            outputs,
            states,
        };
        for x in 0..prep.inputs.len() {
            let tr = prep.ensemble(x).trace().as_f64();
            if (tr - 1.0).abs() > tol.prob {
                return Err(Error::InvalidPreparation(format!(
                    "ensemble for input {} has trace {tr}",
                    prep.inputs.label(x)
                )));
            }
        }
        Ok(prep)
    }

    /// Single input, single output, preparing `rho`.
    pub fn single(rho: HermitianOperator<T>, tol: &ToleranceConfig) -> Result<Self> {
        Self::new(rho.dim(), Alphabet::range(1), Alphabet::range(1), vec![rho], tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inputs(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn outputs(&self) -> &Alphabet {
        &self.outputs
    }

    pub fn state(&self, x: usize, a: usize) -> &HermitianOperator<T> {
        &self.states[x * self.outputs.len() + a]
    }

    pub fn states(&self) -> &[HermitianOperator<T>] {
        &self.states
    }

    /// `p(a|x) = Tr rho_{a|x}`.
    pub fn outcome_probability(&self, x: usize, a: usize) -> T {
        self.state(x, a).trace()
    }

    /// Ensemble average `rho_{A|x} = sum_a rho_{a|x}`.
    pub fn ensemble(&self, x: usize) -> HermitianOperator<T> {
        HermitianOperator::sum(self.dim, (0..self.outputs.len()).map(|a| self.state(x, a)))
    }

    /// Largest Frobenius distance between the ensemble average of any input and
    /// that of the first input.
    pub fn signalling_defect(&self) -> T {
        let base = self.ensemble(0);
        (1..self.inputs.len()).fold(T::zero(), |acc, x| {
            acc.max(self.ensemble(x).matrix().frobenius_distance(base.matrix()))
        })
    }

    pub(crate) fn from_parts(
        dim: usize,
        inputs: Alphabet,
        outputs: Alphabet,
        states: Vec<HermitianOperator<T>>,
    ) -> Self {
        Self {
            dim,
            inputs,
            outputs,
            states,
        }
    }

    pub fn map_states(&self, f: impl Fn(&HermitianOperator<T>) -> HermitianOperator<T>) -> Self {
        Self {
            dim: self.dim,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            states: self.states.iter().map(f).collect(),
        }
    }
}

/// A preparation is no-signalling iff its ensemble average state does not depend on the input.
pub fn is_no_signalling<T: Real>(p: &Preparation<T>, tol: &ToleranceConfig) -> bool {
    p.signalling_defect().as_f64() <= tol.prob
}

/// Measurement `{E_{b|y}}` on a `dim`-dimensional system.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement<T> {
    dim: usize,
    inputs: Alphabet,
    outputs: Alphabet,
    /// `effects[y * |B| + b]`
    effects: Vec<HermitianOperator<T>>,
}

impl<T: Real> Measurement<T> {
    /// Requires PSD effects summing to the identity for every input.
    pub fn new(
        dim: usize,
        inputs: Alphabet,
        outputs: Alphabet,
        effects: Vec<HermitianOperator<T>>,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        if effects.len() != inputs.len() * outputs.len() {
            return Err(Error::InvalidMeasurement(format!(
                "{} effects for {} inputs x {} outputs",
                effects.len(),
                inputs.len(),
                outputs.len()
            )));
        }
        for (k, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::InvalidMeasurement(format!(
                    "effect {k} has dimension {} != {dim}",
                    e.dim()
                )));
            }
            let min = e.min_eigenvalue().as_f64();
            if min < -tol.psd {
                return Err(Error::InvalidMeasurement(format!(
                    "effect {k} not PSD (eigenvalue {min:e})"
                )));
            }
        }
        let m = Self {
            dim,
            inputs,
            outputs,
            effects,
        };
        let id = ComplexMatrix::identity(dim);
        for y in 0..m.inputs.len() {
            let dev = m.completeness(y).matrix().max_abs_diff(&id).as_f64();
            if dev > tol.prob {
                return Err(Error::InvalidMeasurement(format!(
                    "effects for input {} sum to identity only within {dev:e}",
                    m.inputs.label(y)
                )));
            }
        }
        Ok(m)
    }

    /// The single-outcome POVM `{I}`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            inputs: Alphabet::range(1),
            outputs: Alphabet::range(1),
            effects: vec![HermitianOperator::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inputs(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn outputs(&self) -> &Alphabet {
        &self.outputs
    }

    pub fn effect(&self, y: usize, b: usize) -> &HermitianOperator<T> {
        &self.effects[y * self.outputs.len() + b]
    }

    pub fn effects(&self) -> &[HermitianOperator<T>] {
        &self.effects
    }

    /// `sum_b E_{b|y}`.
    pub fn completeness(&self, y: usize) -> HermitianOperator<T> {
        HermitianOperator::sum(self.dim, (0..self.outputs.len()).map(|b| self.effect(y, b)))
    }

    pub(crate) fn from_parts(
        dim: usize,
        inputs: Alphabet,
        outputs: Alphabet,
        effects: Vec<HermitianOperator<T>>,
    ) -> Self {
        Self {
            dim,
            inputs,
            outputs,
            effects,
        }
    }

    pub fn map_effects(&self, f: impl Fn(&HermitianOperator<T>) -> HermitianOperator<T>) -> Self {
        Self {
            dim: self.dim,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            effects: self.effects.iter().map(f).collect(),
        }
    }
}

/// CPT map stored as its conditional state `rho_{B|A}` on `A (x) B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel<T> {
    map: ChoiMap<T>,
}

impl<T: Real> Channel<T> {
    /// Requires a PSD conditional state with `Tr_B = I_A`.
    pub fn new(dim_in: usize, dim_out: usize, choi: ComplexMatrix<T>, tol: &ToleranceConfig) -> Result<Self> {
        if !choi.is_square() || choi.rows() != dim_in * dim_out {
            return Err(Error::InvalidChannel(format!(
                "conditional state is {}x{}, expected {}",
                choi.rows(),
                choi.cols(),
                dim_in * dim_out
            )));
        }
        let h = HermitianOperator::new(choi, tol).map_err(|e| Error::InvalidChannel(e.to_string()))?;
        let min = h.min_eigenvalue().as_f64();
        if min < -tol.psd {
            return Err(Error::InvalidChannel(format!(
                "not completely positive (eigenvalue {min:e})"
            )));
        }
        let reduced = partial_trace(h.matrix(), (dim_in, dim_out), Subsystem::B)?;
        let dev = reduced.max_abs_diff(&ComplexMatrix::identity(dim_in)).as_f64();
        if dev > tol.prob {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving (Tr_B deviates by {dev:e})"
            )));
        }
        Ok(Self {
            map: ChoiMap::new(dim_in, dim_out, h.into_matrix()),
        })
    }

    pub fn identity(dim: usize) -> Self {
        let choi = ComplexMatrix::from_fn(dim * dim, dim * dim, |r, c| {
            let hit = r / dim == r % dim && c / dim == c % dim;
            if hit {
                num_complex::Complex::new(T::one(), T::zero())
            } else {
                num_complex::Complex::new(T::zero(), T::zero())
            }
        });
        Self {
            map: ChoiMap::new(dim, dim, choi),
        }
    }

    /// `M -> sum_k K_k M K_k^dag`; trace preservation is checked.
    pub fn from_kraus(kraus: &[ComplexMatrix<T>], tol: &ToleranceConfig) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        let mut choi = ComplexMatrix::zeros(dim_in * dim_out, dim_in * dim_out);
        for k in kraus {
            if (k.rows(), k.cols()) != (dim_out, dim_in) {
                return Err(Error::InvalidChannel("Kraus operators of differing shapes".into()));
            }
            // (I (x) K)|Phi+> has components v[i * d_out + j] = K[j, i]
            let v: Vec<_> = (0..dim_in * dim_out).map(|r| k[(r % dim_out, r / dim_out)]).collect();
            choi = &choi + &ComplexMatrix::outer(&v, &v);
        }
        Self::new(dim_in, dim_out, choi, tol)
    }

    /// `M -> U M U^dag`.
    pub fn unitary(u: &ComplexMatrix<T>, tol: &ToleranceConfig) -> Result<Self> {
        Self::from_kraus(std::slice::from_ref(u), tol)
    }

    /// `M -> Tr(M) sigma`.
    pub fn constant(dim_in: usize, sigma: &HermitianOperator<T>) -> Self {
        let choi = crate::matcore::tensor_product(&ComplexMatrix::identity(dim_in), sigma.matrix());
        Self {
            map: ChoiMap::new(dim_in, sigma.dim(), choi),
        }
    }

    /// `M -> Tr(M) I / d_out`.
    pub fn completely_depolarizing(dim_in: usize, dim_out: usize) -> Self {
        let sigma = HermitianOperator::identity(dim_out).scale(T::one() / T::from_f64_lossy(dim_out as f64));
        Self::constant(dim_in, &sigma)
    }

    pub fn dim_in(&self) -> usize {
        self.map.dim_in()
    }

    pub fn dim_out(&self) -> usize {
        self.map.dim_out()
    }

    /// Conditional state `rho_{B|A}`.
    pub fn choi(&self) -> &ComplexMatrix<T> {
        self.map.choi()
    }

    pub fn as_map(&self) -> &ChoiMap<T> {
        &self.map
    }

    pub fn apply(&self, rho: &HermitianOperator<T>) -> HermitianOperator<T> {
        HermitianOperator::symmetrized(&self.map.apply(rho.matrix()))
    }

    /// Whether this is the identity channel within `tol.prob`.
    pub fn is_identity(&self, tol: &ToleranceConfig) -> bool {
        self.dim_in() == self.dim_out()
            && self.choi().max_abs_diff(Self::identity(self.dim_in()).choi()).as_f64() <= tol.prob
    }
}

/// Compatible `(preparation, channel, measurement)` triple.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment<T> {
    pub preparation: Preparation<T>,
    pub channel: Channel<T>,
    pub measurement: Measurement<T>,
}

impl<T: Real> Experiment<T> {
    pub fn new(preparation: Preparation<T>, channel: Channel<T>, measurement: Measurement<T>) -> Result<Self> {
        if preparation.dim() != channel.dim_in() {
            return Err(Error::DimensionMismatch(format!(
                "preparation dimension {} != channel input {}",
                preparation.dim(),
                channel.dim_in()
            )));
        }
        if channel.dim_out() != measurement.dim() {
            return Err(Error::DimensionMismatch(format!(
                "channel output {} != measurement dimension {}",
                channel.dim_out(),
                measurement.dim()
            )));
        }
        Ok(Self {
            preparation,
            channel,
            measurement,
        })
    }

    pub fn scenario(&self) -> Scenario {
        Scenario::new(
            self.preparation.inputs().clone(),
            self.preparation.outputs().clone(),
            self.measurement.inputs().clone(),
            self.measurement.outputs().clone(),
        )
    }

    /// Average input state `rho_A` (ensemble of the first input).
    pub fn input_average(&self) -> HermitianOperator<T> {
        self.preparation.ensemble(0)
    }
}

/// Born rule: `p(a, b | x, y) = Tr[E_{b|y} E(rho_{a|x})]`.
pub fn born_predict<T: Real>(e: &Experiment<T>) -> Result<BehaviorTable<T>> {
    born_predict_with(e, &T::default_tolerances())
}

pub fn born_predict_with<T: Real>(e: &Experiment<T>, tol: &ToleranceConfig) -> Result<BehaviorTable<T>> {
    if e.preparation.dim() != e.channel.dim_in() || e.channel.dim_out() != e.measurement.dim() {
        return Err(Error::DimensionMismatch("experiment components do not compose".into()));
    }
    let scenario = e.scenario();
    let (nx, na, _, _) = scenario.sizes();
    let evolved: Vec<HermitianOperator<T>> = (0..nx)
        .flat_map(|x| (0..na).map(move |a| (x, a)))
        .map(|(x, a)| e.channel.apply(e.preparation.state(x, a)))
        .collect();
    // slack on top of prob: per-entry roundoff accumulates over the block
    let eps = tol.prob.max(64.0 * T::epsilon().as_f64());
    BehaviorTable::from_fn(scenario, eps, |x, a, y, b| {
        e.measurement.effect(y, b).expectation(&evolved[x * na + a])
    })
}

#[cfg(test)]
mod tests;
