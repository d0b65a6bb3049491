//! Channels as conditional states, `(rho_A, channel)` pairs as bipartite
//! states, and the equality of timelike and spacelike predictions.
//!
//! Conventions. The conditional state of a channel is
//! `rho_{B|A} = sum_{ij} |i><j| (x) E(|i><j|)` in the computational basis, and
//! the channel is recovered as `E(M) = Tr_A[rho_{B|A}^{T_A} (M (x) I)]`.
//!
//! The bipartite image of `(rho_A, E)` is stored in the *transposed A frame*:
//! `rho_AB = (sqrt(rho_A)^T (x) I) rho_{B|A} (sqrt(rho_A)^T (x) I)`, whose
//! reduced state is `rho_A^T`, and an A-side effect `E` is evaluated as `E^T`.
//! With these conventions
//! `Tr[F E(rho_{a|x})] = Tr[(E_{a|x}^T (x) F) rho_AB]` holds for complex
//! amplitudes as well. For real-amplitude `rho_A` the frame coincides with the
//! untransposed one; [`IsomorphismReport::untransposed_deviation`] reports how
//! far the untransposed formula is off.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matcore::{
    partial_trace, pinv_sqrt_psd, sqrt_psd, swap_factors, tensor_product, ComplexMatrix, HermitianOperator, Subsystem,
    ToleranceConfig,
};
use crate::opmodel::{born_predict_with, is_no_signalling, BehaviorTable, Channel, Experiment, Measurement};
use crate::scalar::Real;
use crate::timerev::retro_effects;

/// Linear map given by its Choi operator on `in (x) out`.
///
/// Not necessarily trace preserving; [`Channel`] adds the CPT invariants.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMap<T> {
    dim_in: usize,
    dim_out: usize,
    choi: ComplexMatrix<T>,
}

impl<T: Real> ChoiMap<T> {
    pub(crate) fn new(dim_in: usize, dim_out: usize, choi: ComplexMatrix<T>) -> Self {
        debug_assert_eq!(choi.rows(), dim_in * dim_out);
        Self { dim_in, dim_out, choi }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn choi(&self) -> &ComplexMatrix<T> {
        &self.choi
    }

    /// `E(M)_{jl} = sum_{k,i} M_{ki} J_{(k,j),(i,l)}`, the entry-wise form of
    /// `Tr_A[J^{T_A} (M (x) I)]`.
    pub fn apply(&self, m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let (di, dout) = (self.dim_in, self.dim_out);
        assert_eq!((m.rows(), m.cols()), (di, di), "operator does not match map input");
        let mut out = ComplexMatrix::zeros(dout, dout);
        for k in 0..di {
            for i in 0..di {
                let mki = m[(k, i)];
                if mki.is_zero() {
                    continue;
                }
                for j in 0..dout {
                    for l in 0..dout {
                        out[(j, l)] = out[(j, l)] + mki * self.choi[(k * dout + j, i * dout + l)];
                    }
                }
            }
        }
        out
    }

    /// Adjoint map: Choi operator is the factor-swapped, entry-conjugated Choi of `self`.
    pub fn adjoint(&self) -> Self {
        let swapped = swap_factors(&self.choi, (self.dim_in, self.dim_out)).expect("square bipartite choi");
        Self::new(self.dim_out, self.dim_in, swapped.conj())
    }

    /// Choi operator of an arbitrary linear action, built column by column.
    pub fn from_action(dim_in: usize, dim_out: usize, f: impl Fn(&ComplexMatrix<T>) -> ComplexMatrix<T>) -> Self {
        let mut choi = ComplexMatrix::zeros(dim_in * dim_out, dim_in * dim_out);
        for i in 0..dim_in {
            for j in 0..dim_in {
                let unit = ComplexMatrix::from_fn(dim_in, dim_in, |r, c| {
                    if (r, c) == (i, j) {
                        Complex::new(T::one(), T::zero())
                    } else {
                        Complex::zero()
                    }
                });
                let img = f(&unit);
                for k in 0..dim_out {
                    for l in 0..dim_out {
                        choi[(i * dim_out + k, j * dim_out + l)] = img[(k, l)];
                    }
                }
            }
        }
        Self::new(dim_in, dim_out, choi)
    }

    /// Map `N -> V^dag E(W N W^dag) V` for isometries `W` on the input and `V` on the output.
    pub fn restrict(&self, input: &ComplexMatrix<T>, output: &ComplexMatrix<T>) -> Self {
        Self::from_action(input.cols(), output.cols(), |n| {
            self.apply(&n.expand(input)).compress(output)
        })
    }
}

/// PSD operator on `A (x) B` with `Tr_B = I_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalState<T> {
    dim_a: usize,
    dim_b: usize,
    matrix: HermitianOperator<T>,
}

impl<T: Real> ConditionalState<T> {
    pub fn new(dim_a: usize, dim_b: usize, m: ComplexMatrix<T>, tol: &ToleranceConfig) -> Result<Self> {
        // Channel::new enforces exactly the conditional-state invariants.
        let c = Channel::new(dim_a, dim_b, m, tol)?;
        Ok(Self {
            dim_a,
            dim_b,
            matrix: HermitianOperator::symmetrized(c.choi()),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn matrix(&self) -> &HermitianOperator<T> {
        &self.matrix
    }
}

/// Unit-trace PSD operator on `A (x) B`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState<T> {
    dim_a: usize,
    dim_b: usize,
    matrix: HermitianOperator<T>,
}

impl<T: Real> BipartiteState<T> {
    pub fn new(dim_a: usize, dim_b: usize, m: ComplexMatrix<T>, tol: &ToleranceConfig) -> Result<Self> {
        if !m.is_square() || m.rows() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not on {dim_a}x{dim_b}",
                m.rows(),
                m.cols()
            )));
        }
        let h = HermitianOperator::new_psd(m, tol)?;
        let tr = h.trace().as_f64();
        if (tr - 1.0).abs() > tol.prob {
            return Err(Error::NotNormalized(tr));
        }
        Ok(Self {
            dim_a,
            dim_b,
            matrix: h,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn matrix(&self) -> &HermitianOperator<T> {
        &self.matrix
    }

    /// `Tr_B rho_AB`.
    pub fn reduced_a(&self) -> HermitianOperator<T> {
        HermitianOperator::symmetrized(
            &partial_trace(self.matrix.matrix(), (self.dim_a, self.dim_b), Subsystem::B).expect("dims checked"),
        )
    }

    /// `Tr[(E_A^T (x) F_B) rho_AB]`, the A factor read in the transposed frame.
    pub fn local_expectation(&self, effect_a: &HermitianOperator<T>, effect_b: &HermitianOperator<T>) -> T {
        let op = tensor_product(&effect_a.matrix().transpose(), effect_b.matrix());
        op.trace_product(self.matrix.matrix()).re
    }
}

pub fn channel_to_conditional_state<T: Real>(c: &Channel<T>) -> ConditionalState<T> {
    ConditionalState {
        dim_a: c.dim_in(),
        dim_b: c.dim_out(),
        matrix: HermitianOperator::symmetrized(c.choi()),
    }
}

pub fn conditional_state_to_channel<T: Real>(cs: &ConditionalState<T>, tol: &ToleranceConfig) -> Result<Channel<T>> {
    Channel::new(cs.dim_a, cs.dim_b, cs.matrix.matrix().clone(), tol)
}

fn check_density<T: Real>(rho: &HermitianOperator<T>, tol: &ToleranceConfig) -> Result<()> {
    let min = rho.min_eigenvalue().as_f64();
    if min < -tol.psd {
        return Err(Error::NotPsd(min));
    }
    let tr = rho.trace().as_f64();
    if (tr - 1.0).abs() > tol.prob {
        return Err(Error::NotNormalized(tr));
    }
    Ok(())
}

/// Bipartite image of `(rho_A, E)` in the transposed A frame (see module docs).
pub fn experiment_to_bipartite<T: Real>(
    rho_a: &HermitianOperator<T>,
    c: &Channel<T>,
    tol: &ToleranceConfig,
) -> Result<BipartiteState<T>> {
    if rho_a.dim() != c.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} != channel input {}",
            rho_a.dim(),
            c.dim_in()
        )));
    }
    check_density(rho_a, tol)?;
    let root_t = sqrt_psd(rho_a, tol)?.into_matrix().transpose();
    let left = tensor_product(&root_t, &ComplexMatrix::identity(c.dim_out()));
    let m = &(&left * c.choi()) * &left;
    BipartiteState::new(
        c.dim_in(),
        c.dim_out(),
        HermitianOperator::symmetrized(&m).into_matrix(),
        tol,
    )
}

/// Verbatim sandwich `(sqrt(rho_A) (x) I) rho_{B|A} (sqrt(rho_A) (x) I)`; a
/// diagnostic that differs from [`experiment_to_bipartite`] only for complex `rho_A`.
pub fn untransposed_bipartite<T: Real>(
    rho_a: &HermitianOperator<T>,
    c: &Channel<T>,
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix<T>> {
    let root = sqrt_psd(rho_a, tol)?;
    let left = tensor_product(root.matrix(), &ComplexMatrix::identity(c.dim_out()));
    Ok(&(&left * c.choi()) * &left)
}

/// A channel known only on the support of an input state.
#[derive(Clone, Debug)]
pub struct SupportChannel<T> {
    /// Isometry `d_A x r` whose columns span the support.
    pub support: ComplexMatrix<T>,
    /// CPT map from the `r`-dimensional support to `B`.
    pub channel: Channel<T>,
}

impl<T: Real> SupportChannel<T> {
    /// Extend to all of `A`, sending the orthogonal complement to `sigma`.
    pub fn extend(&self, sigma: &HermitianOperator<T>, tol: &ToleranceConfig) -> Result<Channel<T>> {
        let w = &self.support;
        let da = w.rows();
        let db = self.channel.dim_out();
        // Choi of N -> E_W(W^dag N W) is (conj(W) (x) I) J_W (W^T (x) I).
        let lift = tensor_product(&w.conj(), &ComplexMatrix::identity(db));
        let on_support = &(&lift * self.channel.choi()) * &lift.adjoint();
        let proj_t = &w.conj() * &w.transpose();
        let complement = &ComplexMatrix::identity(da) - &proj_t;
        let full = &on_support + &tensor_product(&complement, sigma.matrix());
        Channel::new(da, db, full, tol)
    }
}

/// Invert [`experiment_to_bipartite`]: returns `rho_A` and the channel on `supp(rho_A)`.
pub fn bipartite_round_trip<T: Real>(
    rho_ab: &BipartiteState<T>,
    tol: &ToleranceConfig,
) -> Result<(HermitianOperator<T>, SupportChannel<T>)> {
    let (da, db) = rho_ab.dims();
    let reduced = rho_ab.reduced_a();
    let rho_a = HermitianOperator::symmetrized(&reduced.matrix().transpose());
    let v = reduced.support_isometry(tol);
    let inv = pinv_sqrt_psd(&reduced, tol);
    let left = tensor_product(&(&v.adjoint() * inv.matrix()), &ComplexMatrix::identity(db));
    let choi = &(&left * rho_ab.matrix().matrix()) * &left.adjoint();
    let channel = Channel::new(v.cols(), db, choi, tol)?;
    debug_assert_eq!(v.rows(), da);
    Ok((
        rho_a,
        SupportChannel {
            support: v.conj(),
            channel,
        },
    ))
}

/// Both sides of the timelike/spacelike prediction equality.
#[derive(Clone, Debug)]
pub struct IsomorphismReport<T> {
    /// `Tr[E_{b|y} E(rho_{a|x})]`
    pub timelike: BehaviorTable<T>,
    /// `Tr[(E_{a|x}^T (x) E_{b|y}) rho_AB]`
    pub spacelike: BehaviorTable<T>,
    pub bipartite: BipartiteState<T>,
    /// Max absolute difference of the two tables.
    pub max_deviation: f64,
    /// Same comparison with the untransposed state and effects.
    pub untransposed_deviation: f64,
}

/// Spacelike behavior of local measurements on a bipartite state (A side in the transposed frame).
pub fn bipartite_behavior<T: Real>(
    rho_ab: &BipartiteState<T>,
    a_side: &Measurement<T>,
    b_side: &Measurement<T>,
    tol: &ToleranceConfig,
) -> Result<BehaviorTable<T>> {
    let scenario = crate::opmodel::Scenario::new(
        a_side.inputs().clone(),
        a_side.outputs().clone(),
        b_side.inputs().clone(),
        b_side.outputs().clone(),
    );
    let eps = tol.prob.max(64.0 * T::epsilon().as_f64());
    BehaviorTable::from_fn(scenario, eps, |x, a, y, b| {
        rho_ab.local_expectation(a_side.effect(x, a), b_side.effect(y, b))
    })
}

pub fn prediction_isomorphism_check<T: Real>(e: &Experiment<T>, tol: &ToleranceConfig) -> Result<IsomorphismReport<T>> {
    if !is_no_signalling(&e.preparation, tol) {
        return Err(Error::SignallingPreparation(e.preparation.signalling_defect().as_f64()));
    }
    let rho_a = e.input_average();
    let timelike = born_predict_with(e, tol)?;
    let bipartite = experiment_to_bipartite(&rho_a, &e.channel, tol)?;
    let effects = retro_effects(&e.preparation, tol)?;
    let a_side = Measurement::from_parts(
        rho_a.dim(),
        e.preparation.inputs().clone(),
        e.preparation.outputs().clone(),
        effects,
    );
    let spacelike = bipartite_behavior(&bipartite, &a_side, &e.measurement, tol)?;
    let max_deviation = timelike.max_deviation(&spacelike)?.as_f64();

    let plain = untransposed_bipartite(&rho_a, &e.channel, tol)?;
    let mut untransposed_deviation = 0.0_f64;
    for (x, a, y, b) in timelike.scenario().tuples() {
        let op = tensor_product(a_side.effect(x, a).matrix(), e.measurement.effect(y, b).matrix());
        let v = op.trace_product(&plain).re;
        untransposed_deviation = untransposed_deviation.max((v - *timelike.get(x, a, y, b)).abs().as_f64());
    }
    Ok(IsomorphismReport {
        timelike,
        spacelike,
        bipartite,
        max_deviation,
        untransposed_deviation,
    })
}
