//! Time reversal of classical (diagonal) experiments over any ordered field.
//!
//! A classical experiment is the diagonal special case of the quantum one:
//! sub-normalized distributions `p(a, i | x)` over hidden states `i`, a
//! stochastic matrix `T(j | i)`, and response functions `q(b | y, j)`. The
//! reverse follows the same recipe as [`super::operational_time_reverse`],
//! which on diagonal operators reduces to ratios, so it is exact over
//! `BigRational`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, HermitianOperator, ToleranceConfig};
use crate::opmodel::{Alphabet, BehaviorTable, Channel, Experiment, Measurement, Preparation, Scenario};
use crate::scalar::{Field, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalExperiment<P> {
    pub inputs: Alphabet,
    pub outputs: Alphabet,
    pub settings: Alphabet,
    pub results: Alphabet,
    /// `prep[x][a][i] = p(a, i | x)`
    pub prep: Vec<Vec<Vec<P>>>,
    /// `transition[i][j] = T(j | i)`
    pub transition: Vec<Vec<P>>,
    /// `response[y][b][j] = q(b | y, j)`
    pub response: Vec<Vec<Vec<P>>>,
}

impl<P: Field> ClassicalExperiment<P> {
    pub fn dim_in(&self) -> usize {
        self.transition.len()
    }

    pub fn dim_out(&self) -> usize {
        self.transition.first().map_or(0, Vec::len)
    }

    pub fn scenario(&self) -> Scenario {
        Scenario::new(
            self.inputs.clone(),
            self.outputs.clone(),
            self.settings.clone(),
            self.results.clone(),
        )
    }

    /// Checks shapes, nonnegativity and normalization (exactly for exact fields).
    pub fn validate(&self, eps: f64) -> Result<()> {
        let (n, m) = (self.dim_in(), self.dim_out());
        let bad = |what: &str| Err(Error::InvalidPreparation(format!("classical experiment: {what}")));
        if self.prep.len() != self.inputs.len()
            || self
                .prep
                .iter()
                .any(|r| r.len() != self.outputs.len() || r.iter().any(|v| v.len() != n))
        {
            return bad("preparation shape");
        }
        if self.transition.iter().any(|r| r.len() != m) {
            return bad("transition shape");
        }
        if self.response.len() != self.settings.len()
            || self
                .response
                .iter()
                .any(|r| r.len() != self.results.len() || r.iter().any(|v| v.len() != m))
        {
            return bad("response shape");
        }
        let all = self
            .prep
            .iter()
            .flatten()
            .flatten()
            .chain(self.transition.iter().flatten())
            .chain(self.response.iter().flatten().flatten());
        if all.clone().any(|v| (-v.clone()).above(eps)) {
            return bad("negative entry");
        }
        for x in &self.prep {
            let total = x.iter().flatten().fold(P::zero(), |s, v| s + v.clone());
            if !(total - P::one()).within(eps) {
                return bad("preparation not normalized");
            }
        }
        for row in &self.transition {
            let total = row.iter().fold(P::zero(), |s, v| s + v.clone());
            if !(total - P::one()).within(eps) {
                return bad("transition not stochastic");
            }
        }
        for y in &self.response {
            for j in 0..m {
                let total = y.iter().fold(P::zero(), |s, v| s + v[j].clone());
                if !(total - P::one()).within(eps) {
                    return bad("response not normalized");
                }
            }
        }
        Ok(())
    }

    /// Average hidden-state distribution `p(i)`, averaged over inputs.
    pub fn input_average(&self) -> Vec<P> {
        let n = self.dim_in();
        let k = P::from_count(self.inputs.len());
        (0..n)
            .map(|i| {
                self.prep
                    .iter()
                    .flat_map(|x| x.iter().map(move |a| a[i].clone()))
                    .fold(P::zero(), |s, v| s + v)
                    / k.clone()
            })
            .collect()
    }

    /// `p(a, b | x, y) = sum_{i,j} p(a, i | x) T(j | i) q(b | y, j)`.
    pub fn behavior(&self, eps: f64) -> Result<BehaviorTable<P>> {
        let (n, m) = (self.dim_in(), self.dim_out());
        BehaviorTable::from_fn(self.scenario(), eps, |x, a, y, b| {
            let mut s = P::zero();
            for i in 0..n {
                for j in 0..m {
                    s = s + self.prep[x][a][i].clone() * self.transition[i][j].clone() * self.response[y][b][j].clone();
                }
            }
            s
        })
    }

    /// Whether `sum_a p(a, i | x)` is independent of `x`.
    pub fn is_no_signalling(&self, eps: f64) -> bool {
        let n = self.dim_in();
        let marg = |x: &Vec<Vec<P>>, i: usize| x.iter().fold(P::zero(), |s, a| s + a[i].clone());
        self.prep
            .iter()
            .all(|x| (0..n).all(|i| (marg(x, i) - marg(&self.prep[0], i)).within(eps)))
    }

    /// Reverse experiment on the supports of `p(i)` and `p(j)`.
    pub fn reverse(&self, eps: f64) -> Result<Self> {
        if !self.is_no_signalling(eps) {
            return Err(Error::SignallingPreparation(f64::NAN));
        }
        let (n, m) = (self.dim_in(), self.dim_out());
        let p_i = self.input_average();
        let p_j: Vec<P> = (0..m)
            .map(|j| (0..n).fold(P::zero(), |s, i| s + p_i[i].clone() * self.transition[i][j].clone()))
            .collect();
        let supp_i: Vec<usize> = (0..n).filter(|&i| p_i[i].above(eps)).collect();
        let supp_j: Vec<usize> = (0..m).filter(|&j| p_j[j].above(eps)).collect();

        // preparation p'(b, j | y) = p(j) q(b | y, j)
        let prep = self
            .response
            .iter()
            .map(|y| {
                y.iter()
                    .map(|b| supp_j.iter().map(|&j| p_j[j].clone() * b[j].clone()).collect())
                    .collect()
            })
            .collect();
        // transition T'(i | j) = T(j | i) p(i) / p(j)
        let transition = supp_j
            .iter()
            .map(|&j| {
                supp_i
                    .iter()
                    .map(|&i| self.transition[i][j].clone() * p_i[i].clone() / p_j[j].clone())
                    .collect()
            })
            .collect();
        // response q'(a | x, i) = p(a, i | x) / p(i)
        let response = self
            .prep
            .iter()
            .map(|x| {
                x.iter()
                    .map(|a| supp_i.iter().map(|&i| a[i].clone() / p_i[i].clone()).collect())
                    .collect()
            })
            .collect();
        let rev = Self {
            inputs: self.settings.clone(),
            outputs: self.results.clone(),
            settings: self.inputs.clone(),
            results: self.outputs.clone(),
            prep,
            transition,
            response,
        };
        rev.validate(eps)?;
        Ok(rev)
    }

    /// Diagonal quantum embedding of this experiment.
    pub fn to_quantum<T: Real>(&self, tol: &ToleranceConfig) -> Result<Experiment<T>> {
        let (n, m) = (self.dim_in(), self.dim_out());
        let cast = |v: &P| T::from_f64_lossy(v.as_f64());
        let diag = |v: &Vec<P>| HermitianOperator::diag(&v.iter().map(cast).collect::<Vec<_>>());
        let states = self.prep.iter().flatten().map(diag).collect();
        let preparation = Preparation::new(n, self.inputs.clone(), self.outputs.clone(), states, tol)?;
        let effects = self.response.iter().flatten().map(diag).collect();
        let measurement = Measurement::new(m, self.settings.clone(), self.results.clone(), effects, tol)?;
        let choi = ComplexMatrix::from_fn(n * m, n * m, |r, c| {
            if r == c {
                Complex::new(cast(&self.transition[r / m][r % m]), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        let channel = Channel::new(n, m, choi, tol)?;
        Experiment::new(preparation, channel, measurement)
    }
}
