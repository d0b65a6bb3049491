//! Operational time reversal of no-signalling experiments.
//!
//! Given `(P, T, M)` with input average `rho_A` and `rho_B = E(rho_A)`, the
//! reverse experiment `(P', T', M')` uses
//!
//! * `E'_{a|x} = rho_A^{-1/2} rho_{a|x} rho_A^{-1/2}` as its measurement,
//! * `rho'_{b|y} = rho_B^{1/2} E_{b|y} rho_B^{1/2}` as its preparation,
//! * `E'(X) = rho_A^{1/2} E^dag(rho_B^{-1/2} X rho_B^{-1/2}) rho_A^{1/2}` as its channel.
//!
//! Reversed objects live on the supports of `rho_A` and `rho_B`; the support
//! dimensions become the Hilbert dimensions of the reverse experiment.

pub mod classical;
mod gauge;

pub use gauge::{apply_unitary_gauge, find_self_reversal_gauge, gauge_unitary, GaugeCertificate};

use crate::choibridge::ChoiMap;
use crate::error::{Error, Result};
use crate::matcore::{pinv_sqrt_psd, sqrt_psd, ComplexMatrix, HermitianOperator, ToleranceConfig};
use crate::opmodel::{born_predict_with, is_no_signalling, Channel, Experiment, Measurement, Preparation};
use crate::scalar::Real;

fn average_state<T: Real>(p: &Preparation<T>, tol: &ToleranceConfig) -> Result<HermitianOperator<T>> {
    if !is_no_signalling(p, tol) {
        return Err(Error::SignallingPreparation(p.signalling_defect().as_f64()));
    }
    let n = p.inputs().len();
    let sum = HermitianOperator::sum(p.dim(), (0..n).map(|x| p.ensemble(x)).collect::<Vec<_>>().iter());
    Ok(sum.scale(T::one() / T::from_f64_lossy(n as f64)))
}

/// Retrodictive effects on the full space `H_A` (zero off the support of `rho_A`).
pub fn retro_effects<T: Real>(p: &Preparation<T>, tol: &ToleranceConfig) -> Result<Vec<HermitianOperator<T>>> {
    let rho_a = average_state(p, tol)?;
    let inv = pinv_sqrt_psd(&rho_a, tol);
    Ok(p.states().iter().map(|s| s.congruence(inv.matrix())).collect())
}

/// Tolerances widened by the condition number of `rho` on its support.
///
/// `rho^{-1/2}` multiplies rounding errors in the states by up to `cond`.
fn conditioned<T: Real>(rho: &HermitianOperator<T>, tol: &ToleranceConfig) -> ToleranceConfig {
    let values = rho.eig().values;
    let top = values.first().map_or(0.0, |v| v.as_f64());
    let bottom = values
        .iter()
        .map(|v| v.as_f64())
        .filter(|&v| v > tol.support * top)
        .fold(top, f64::min);
    if bottom <= 0.0 {
        return *tol;
    }
    let noise = 64.0 * T::epsilon().as_f64() * top / bottom;
    ToleranceConfig {
        herm: tol.herm.max(noise),
        psd: tol.psd.max(noise),
        prob: tol.prob.max(noise),
        ..*tol
    }
}

/// Retrodictive POVM `{E_{a|x}}` on `supp(rho_A)`.
pub fn retro_povm<T: Real>(p: &Preparation<T>, tol: &ToleranceConfig) -> Result<Measurement<T>> {
    let rho_a = average_state(p, tol)?;
    let v = rho_a.support_isometry(tol);
    let effects = retro_effects(p, tol)?
        .into_iter()
        .map(|e| HermitianOperator::symmetrized(&e.matrix().compress(&v)))
        .collect();
    Measurement::new(
        v.cols(),
        p.inputs().clone(),
        p.outputs().clone(),
        effects,
        &conditioned(&rho_a, tol),
    )
}

/// Retrodictive states `rho_B^{1/2} E_{b|y} rho_B^{1/2}` on the full space `H_B`.
pub fn retro_states<T: Real>(
    m: &Measurement<T>,
    rho_b: &HermitianOperator<T>,
    tol: &ToleranceConfig,
) -> Result<Preparation<T>> {
    if rho_b.dim() != m.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} != measurement dimension {}",
            rho_b.dim(),
            m.dim()
        )));
    }
    let tr = rho_b.trace().as_f64();
    if (tr - 1.0).abs() > tol.prob {
        return Err(Error::NotNormalized(tr));
    }
    let root = sqrt_psd(rho_b, tol)?;
    let states = m.effects().iter().map(|e| e.congruence(root.matrix())).collect();
    Preparation::new(m.dim(), m.inputs().clone(), m.outputs().clone(), states, tol)
}

/// Reverse channel from `supp(rho_B)` back to `H_A`.
#[derive(Clone, Debug)]
pub struct ReverseChannel<T> {
    /// `rho_B = E(rho_A)`.
    pub rho_b: HermitianOperator<T>,
    /// Isometry `d_B x r_B` spanning `supp(rho_B)`.
    pub support: ComplexMatrix<T>,
    /// CPT map `r_B -> d_A`.
    pub channel: Channel<T>,
}

/// Petz-type reverse of `c` with respect to the input state `rho_a`.
pub fn reverse_channel<T: Real>(
    c: &Channel<T>,
    rho_a: &HermitianOperator<T>,
    tol: &ToleranceConfig,
) -> Result<ReverseChannel<T>> {
    if rho_a.dim() != c.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} != channel input {}",
            rho_a.dim(),
            c.dim_in()
        )));
    }
    let tr = rho_a.trace().as_f64();
    if (tr - 1.0).abs() > tol.prob {
        return Err(Error::NotNormalized(tr));
    }
    let root_a = sqrt_psd(rho_a, tol)?;
    let rho_b = c.apply(rho_a);
    let inv_b = pinv_sqrt_psd(&rho_b, tol);
    let support = rho_b.support_isometry(tol);
    let adjoint = c.as_map().adjoint();
    let map = ChoiMap::from_action(support.cols(), c.dim_in(), |x| {
        let lifted = x.expand(&support);
        let inner = &(inv_b.matrix() * &lifted) * inv_b.matrix();
        let pulled = adjoint.apply(&inner);
        &(root_a.matrix() * &pulled) * root_a.matrix()
    });
    let channel = Channel::new(map.dim_in(), map.dim_out(), map.choi().clone(), tol)?;
    Ok(ReverseChannel {
        rho_b,
        support,
        channel,
    })
}

/// The reverse experiment `(P', T', M')` of a no-signalling experiment.
pub fn operational_time_reverse<T: Real>(e: &Experiment<T>, tol: &ToleranceConfig) -> Result<Experiment<T>> {
    let rho_a = average_state(&e.preparation, tol)?;
    let support_a = rho_a.support_isometry(tol);
    let measurement = retro_povm(&e.preparation, tol)?;
    let rev = reverse_channel(&e.channel, &rho_a, tol)?;
    let full_states = retro_states(&e.measurement, &rev.rho_b, tol)?;
    let preparation = Preparation::new(
        rev.support.cols(),
        full_states.inputs().clone(),
        full_states.outputs().clone(),
        full_states
            .states()
            .iter()
            .map(|s| HermitianOperator::symmetrized(&s.matrix().compress(&rev.support)))
            .collect(),
        tol,
    )?;
    let identity_in = ComplexMatrix::identity(rev.support.cols());
    let restricted = rev.channel.as_map().restrict(&identity_in, &support_a);
    let channel = Channel::new(
        restricted.dim_in(),
        restricted.dim_out(),
        restricted.choi().clone(),
        tol,
    )?;
    Experiment::new(preparation, channel, measurement)
}

/// Largest `|p_{e'}(b, a | y, x) - p_e(a, b | x, y)|`, matched by label.
pub fn reverse_deviation<T: Real>(e: &Experiment<T>, reversed: &Experiment<T>, tol: &ToleranceConfig) -> Result<f64> {
    let forward = born_predict_with(e, tol)?;
    let backward = born_predict_with(reversed, tol)?;
    let expected = forward.scenario().swapped();
    let got = backward.scenario();
    for (want, have, role) in [
        (&expected.x, &got.x, "preparation inputs"),
        (&expected.a, &got.a, "preparation outputs"),
        (&expected.y, &got.y, "measurement inputs"),
        (&expected.b, &got.b, "measurement outputs"),
    ] {
        if want.len() != have.len() || want.labels().iter().any(|l| have.index_of(l).is_none()) {
            return Err(Error::AlphabetMismatch(format!(
                "{role}: expected {want}, found {have}"
            )));
        }
    }
    Ok(backward.max_deviation(&forward.swapped())?.as_f64())
}

/// Whether `reversed` reproduces `e` with preparation and measurement exchanged, within `tol.prob`.
pub fn is_operational_time_reverse<T: Real>(
    e: &Experiment<T>,
    reversed: &Experiment<T>,
    tol: &ToleranceConfig,
) -> Result<bool> {
    Ok(reverse_deviation(e, reversed, tol)? <= tol.prob)
}
