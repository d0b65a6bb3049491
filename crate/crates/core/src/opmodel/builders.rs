//! The named qubit experiments.
//!
//! Alphabet orderings follow the displayed layout of the source formulas
//! literally: `x`/`y` index rows, `a`/`b` index columns, labels `"0"`, `"1"`, ...

use super::{Alphabet, Channel, Experiment, Measurement, Preparation};
use crate::matcore::{projector_from_angle, HermitianOperator};
use crate::scalar::Real;

fn half_projectors<T: Real>(angles: &[T]) -> Vec<HermitianOperator<T>> {
    let half = T::from_f64_lossy(0.5);
    angles.iter().map(|&t| projector_from_angle(t).scale(half)).collect()
}

fn projectors<T: Real>(angles: &[T]) -> Vec<HermitianOperator<T>> {
    angles.iter().map(|&t| projector_from_angle(t)).collect()
}

fn bloch_states<T: Real>() -> Preparation<T> {
    let pi = T::pi();
    let two = T::one() + T::one();
    Preparation::from_parts(
        2,
        Alphabet::binary(),
        Alphabet::binary(),
        half_projectors(&[T::zero(), pi, pi / two, -pi / two]),
    )
}

/// Single-qubit temporal CHSH experiment with the identity channel.
///
/// States `1/2 [0], 1/2 [pi], 1/2 [pi/2], 1/2 [-pi/2]`,
/// effects `[pi/4], [-3pi/4]` for `y = 0` and `[-pi/4], [3pi/4]` for `y = 1`.
pub fn build_chsh_experiment<T: Real>() -> Experiment<T> {
    let pi = T::pi();
    let four = T::from_f64_lossy(4.0);
    let three = T::from_f64_lossy(3.0);
    let measurement = Measurement::from_parts(
        2,
        Alphabet::binary(),
        Alphabet::binary(),
        projectors(&[pi / four, -three * pi / four, -pi / four, three * pi / four]),
    );
    Experiment::new(bloch_states(), Channel::identity(2), measurement).expect("qubit dimensions agree")
}

/// Four pure qubit states in the Z and X bases, optionally followed by a
/// matching Z/X measurement (otherwise the trivial POVM `{I}`).
pub fn build_price_experiment<T: Real>(with_measurement: bool) -> Experiment<T> {
    let measurement = if with_measurement {
        let pi = T::pi();
        let two = T::one() + T::one();
        Measurement::from_parts(
            2,
            Alphabet::binary(),
            Alphabet::binary(),
            projectors(&[T::zero(), pi, pi / two, -pi / two]),
        )
    } else {
        Measurement::trivial(2)
    };
    Experiment::new(bloch_states(), Channel::identity(2), measurement).expect("qubit dimensions agree")
}

/// Preparation and measurement angles of the chained family:
/// `theta(x, a) = (x/N + a) pi`, `phi(y, b) = ((2y + 1)/(2N) + b) pi`.
pub fn cr_angles(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pi = std::f64::consts::PI;
    let nf = n as f64;
    let prep = (0..n)
        .flat_map(|x| (0..2).map(move |a| (x as f64 / nf + a as f64) * pi))
        .collect();
    let meas = (0..n)
        .flat_map(|y| (0..2).map(move |b| ((2 * y + 1) as f64 / (2.0 * nf) + b as f64) * pi))
        .collect();
    (prep, meas)
}

/// Chained qubit experiment with `N` settings per side and binary outcomes.
///
/// # Panics
/// If `n == 0`.
pub fn build_cr_experiment<T: Real>(n: usize) -> Experiment<T> {
    assert!(n >= 1, "chained experiment needs at least one setting");
    let (prep, meas) = cr_angles(n);
    let prep: Vec<T> = prep.into_iter().map(T::from_f64_lossy).collect();
    let meas: Vec<T> = meas.into_iter().map(T::from_f64_lossy).collect();
    let preparation = Preparation::from_parts(2, Alphabet::range(n), Alphabet::binary(), half_projectors(&prep));
    let measurement = Measurement::from_parts(2, Alphabet::range(n), Alphabet::binary(), projectors(&meas));
    Experiment::new(preparation, Channel::identity(2), measurement).expect("qubit dimensions agree")
}
