//! Unitary gauge freedom of identity-channel experiments.

use num_complex::Complex;

use super::{operational_time_reverse, reverse_deviation};
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, ToleranceConfig};
use crate::opmodel::{born_predict_with, Experiment, Measurement, Preparation};
use crate::scalar::Real;

/// Conjugate states by `U` and effects by `U` as well (`E -> U E U^dag`), which
/// is the Heisenberg action of `U^dag` and leaves every `Tr[E rho]` unchanged.
pub fn apply_unitary_gauge<T: Real>(
    e: &Experiment<T>,
    u: &ComplexMatrix<T>,
    tol: &ToleranceConfig,
) -> Result<Experiment<T>> {
    if !e.channel.is_identity(tol) {
        return Err(Error::NonIdentityChannel);
    }
    let d = e.preparation.dim();
    if !u.is_square() || u.rows() != d {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} gauge on dimension {d}",
            u.rows(),
            u.cols()
        )));
    }
    let defect = (&u.adjoint() * u).max_abs_diff(&ComplexMatrix::identity(d)).as_f64();
    if defect > tol.herm.max(1e-12) {
        return Err(Error::NotUnitary(defect));
    }
    let preparation: Preparation<T> = e.preparation.map_states(|s| s.congruence(u));
    let measurement: Measurement<T> = e.measurement.map_effects(|m| m.congruence(u));
    Experiment::new(preparation, e.channel.clone(), measurement)
}

/// Real qubit gauge: rotation `[[c, -s], [s, c]]` or reflection `[[c, s], [s, -c]]`, `c = cos(angle)`.
///
/// On the X-Z Bloch angle of `[theta]` the rotation acts as `theta -> theta + 2 angle`
/// and the reflection as `theta -> 2 angle - theta`.
pub fn gauge_unitary<T: Real>(angle: T, reflect: bool) -> ComplexMatrix<T> {
    let (s, c) = angle.sin_cos();
    let z = T::zero();
    let m = if reflect { [[c, s], [s, -c]] } else { [[c, -s], [s, c]] };
    ComplexMatrix::from_fn(2, 2, |i, j| Complex::new(m[i][j], z))
}

/// Result of the self-reversal gauge search.
#[derive(Clone, Debug)]
pub struct GaugeCertificate<T> {
    pub angle: f64,
    pub reflect: bool,
    pub unitary: ComplexMatrix<T>,
    /// Max-norm distance between the gauged reverse and the original operators.
    pub operator_deviation: f64,
    /// Max behavior deviation between the gauged reverse and the original.
    pub behavior_deviation: f64,
    /// Definition-level check of the gauged reverse against the original.
    pub reverse_deviation: f64,
}

fn operator_distance<T: Real>(a: &Experiment<T>, b: &Experiment<T>) -> f64 {
    let (pa, pb) = (&a.preparation, &b.preparation);
    let (ma, mb) = (&a.measurement, &b.measurement);
    let mut worst = 0.0_f64;
    let lookup = |alph: &crate::opmodel::Alphabet, l: &str| alph.index_of(l);
    for x in 0..pa.inputs().len() {
        for o in 0..pa.outputs().len() {
            let (Some(xb), Some(ob)) = (
                lookup(pb.inputs(), pa.inputs().label(x)),
                lookup(pb.outputs(), pa.outputs().label(o)),
            ) else {
                return f64::INFINITY;
            };
            worst = worst.max(pa.state(x, o).matrix().max_abs_diff(pb.state(xb, ob).matrix()).as_f64());
        }
    }
    for y in 0..ma.inputs().len() {
        for o in 0..ma.outputs().len() {
            let (Some(yb), Some(ob)) = (
                lookup(mb.inputs(), ma.inputs().label(y)),
                lookup(mb.outputs(), ma.outputs().label(o)),
            ) else {
                return f64::INFINITY;
            };
            worst = worst.max(
                ma.effect(y, o)
                    .matrix()
                    .max_abs_diff(mb.effect(yb, ob).matrix())
                    .as_f64(),
            );
        }
    }
    worst.max(a.channel.choi().max_abs_diff(b.channel.choi()).as_f64())
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    (lo + hi) / 2.0
}

/// Search real qubit rotations and reflections for a gauge mapping the
/// operational time reverse of `e` back onto `e` itself.
///
/// Returns `None` when `e` is not an identity-channel qubit experiment whose
/// reverse shares its labels, or when no gauge brings the operators within
/// `max(tol.prob, 1e-9)`.
pub fn find_self_reversal_gauge<T: Real>(
    e: &Experiment<T>,
    tol: &ToleranceConfig,
) -> Result<Option<GaugeCertificate<T>>> {
    let reversed = operational_time_reverse(e, tol)?;
    if reversed.preparation.dim() != 2 || e.preparation.dim() != 2 || !reversed.channel.is_identity(tol) {
        return Ok(None);
    }
    let distance = |angle: f64, reflect: bool| -> f64 {
        let u = gauge_unitary(T::from_f64_lossy(angle), reflect);
        match apply_unitary_gauge(&reversed, &u, tol) {
            Ok(g) => operator_distance(&g, e),
            Err(_) => f64::INFINITY,
        }
    };
    let steps = 720;
    let step = std::f64::consts::PI / steps as f64;
    let mut best = (f64::INFINITY, 0.0, false);
    for reflect in [false, true] {
        for k in 0..steps {
            let angle = k as f64 * step;
            let d = distance(angle, reflect);
            if d < best.0 {
                best = (d, angle, reflect);
            }
        }
    }
    if !best.0.is_finite() {
        return Ok(None);
    }
    let (_, coarse, reflect) = best;
    let angle = golden_min(|a| distance(a, reflect), coarse - step, coarse + step);
    let operator_deviation = distance(angle, reflect);
    let accept = tol.prob.max(1e-9);
    if operator_deviation > accept {
        return Ok(None);
    }
    let unitary = gauge_unitary(T::from_f64_lossy(angle), reflect);
    let gauged = apply_unitary_gauge(&reversed, &unitary, tol)?;
    let behavior_deviation = born_predict_with(&gauged, tol)?
        .max_deviation(&born_predict_with(e, tol)?)?
        .as_f64();
    let reverse_deviation = reverse_deviation(e, &gauged, tol)?;
    Ok(Some(GaugeCertificate {
        angle,
        reflect,
        unitary,
        operator_deviation,
        behavior_deviation,
        reverse_deviation,
    }))
}
