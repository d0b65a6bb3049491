//! Random operators and experiments for property checks.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matcore::{pinv_sqrt_psd, sqrt_psd, ComplexMatrix, HermitianOperator, ToleranceConfig};
use crate::opmodel::{Alphabet, Channel, Experiment, Measurement, Preparation};
use crate::timerev::classical::ClassicalExperiment;

type C = Complex<f64>;

fn gaussian(rng: &mut impl Rng, complex: bool) -> C {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
    C::new(re, im)
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize, complex: bool) -> ComplexMatrix<f64> {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng, complex))
}

/// Orthonormalize the columns of a Gaussian matrix (`rows >= cols`).
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize, complex: bool) -> ComplexMatrix<f64> {
    assert!(rows >= cols);
    let g = gaussian_matrix(rng, rows, cols, complex);
    let mut q: Vec<Vec<C>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = g.column(j);
        for _ in 0..2 {
            for u in &q {
                let dot: C = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= dot * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        q.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(rows, cols, |i, j| q[j][i])
}

pub fn random_unitary(rng: &mut impl Rng, dim: usize, complex: bool) -> ComplexMatrix<f64> {
    random_isometry(rng, dim, dim, complex)
}

/// Density operator of the given rank (Wishart-like).
pub fn random_density(rng: &mut impl Rng, dim: usize, rank: usize, complex: bool) -> HermitianOperator<f64> {
    let g = gaussian_matrix(rng, dim, rank, complex);
    let w = HermitianOperator::new(&g * &g.adjoint(), &ToleranceConfig::default()).expect("Gram matrix is Hermitian");
    let tr = w.trace();
    w.scale(1.0 / tr)
}

/// Channel with `kraus` Kraus operators from a random Stinespring isometry.
pub fn random_channel(rng: &mut impl Rng, dim_in: usize, dim_out: usize, kraus: usize, complex: bool) -> Channel<f64> {
    let v = random_isometry(rng, dim_out * kraus, dim_in, complex);
    let ops: Vec<ComplexMatrix<f64>> = (0..kraus)
        .map(|k| ComplexMatrix::from_fn(dim_out, dim_in, |i, j| v[(k * dim_out + i, j)]))
        .collect();
    Channel::from_kraus(&ops, &ToleranceConfig::default()).expect("isometry blocks form a channel")
}

/// POVM with `outcomes` effects from normalized random PSD operators.
pub fn random_povm_effects(
    rng: &mut impl Rng,
    dim: usize,
    outcomes: usize,
    complex: bool,
) -> Vec<HermitianOperator<f64>> {
    let tol = ToleranceConfig::default();
    let raw: Vec<HermitianOperator<f64>> = (0..outcomes)
        .map(|_| {
            // enough rank that the effects sum to a full-rank operator
            let rank = rng.random_range(dim.div_ceil(outcomes)..=dim);
            random_density(rng, dim, rank, complex)
        })
        .collect();
    let total = HermitianOperator::sum(dim, raw.iter());
    let inv = pinv_sqrt_psd(&total, &tol);
    raw.iter().map(|g| g.congruence(inv.matrix())).collect()
}

pub fn random_measurement(
    rng: &mut impl Rng,
    dim: usize,
    settings: usize,
    outcomes: usize,
    complex: bool,
) -> Measurement<f64> {
    let effects = (0..settings)
        .flat_map(|_| random_povm_effects(rng, dim, outcomes, complex))
        .collect();
    Measurement::new(
        dim,
        Alphabet::range(settings),
        Alphabet::range(outcomes),
        effects,
        &ToleranceConfig::default(),
    )
    .expect("normalized effects")
}

/// No-signalling preparation: every input decomposes the same average state `rho`.
pub fn random_ns_preparation(
    rng: &mut impl Rng,
    rho: &HermitianOperator<f64>,
    inputs: usize,
    outputs: usize,
    complex: bool,
) -> Preparation<f64> {
    let tol = ToleranceConfig::default();
    let root = sqrt_psd(rho, &tol).expect("density operator");
    let states = (0..inputs)
        .flat_map(|_| random_povm_effects(rng, rho.dim(), outputs, complex))
        .map(|f| f.congruence(root.matrix()))
        .collect();
    Preparation::new(
        rho.dim(),
        Alphabet::range(inputs),
        Alphabet::range(outputs),
        states,
        &tol,
    )
    .expect("decomposition of a density operator")
}

/// Shape of a random experiment.
#[derive(Clone, Copy, Debug)]
pub struct ExperimentShape {
    pub dim_in: usize,
    pub dim_out: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub settings: usize,
    pub results: usize,
    pub kraus: usize,
    pub complex: bool,
}

impl ExperimentShape {
    pub fn qubit(complex: bool) -> Self {
        Self {
            dim_in: 2,
            dim_out: 2,
            inputs: 2,
            outputs: 2,
            settings: 2,
            results: 2,
            kraus: 2,
            complex,
        }
    }

    pub fn qutrit(complex: bool) -> Self {
        Self {
            dim_in: 3,
            dim_out: 3,
            inputs: 2,
            outputs: 3,
            settings: 2,
            results: 3,
            kraus: 3,
            complex,
        }
    }
}

/// Random no-signalling experiment with a full-rank input average.
pub fn random_experiment(rng: &mut impl Rng, shape: ExperimentShape) -> Experiment<f64> {
    // a little white noise keeps the smallest eigenvalue away from zero
    let noise = HermitianOperator::identity(shape.dim_in).scale(0.05 / shape.dim_in as f64);
    let rho = random_density(rng, shape.dim_in, shape.dim_in, shape.complex)
        .scale(0.95)
        .add(&noise);
    let preparation = random_ns_preparation(rng, &rho, shape.inputs, shape.outputs, shape.complex);
    let channel = random_channel(rng, shape.dim_in, shape.dim_out, shape.kraus, shape.complex);
    let measurement = random_measurement(rng, shape.dim_out, shape.settings, shape.results, shape.complex);
    Experiment::new(preparation, channel, measurement).expect("shapes agree")
}

fn random_distribution(rng: &mut impl Rng, n: usize, denom: i64) -> Vec<BigRational> {
    // integer weights in 0..denom, at least one positive
    let mut w: Vec<i64> = (0..n).map(|_| rng.random_range(0..denom)).collect();
    if w.iter().all(|&v| v == 0) {
        w[0] = 1;
    }
    let total: i64 = w.iter().sum();
    w.into_iter()
        .map(|v| BigRational::new(BigInt::from(v), BigInt::from(total)))
        .collect()
}

/// Random classical no-signalling experiment with small-denominator rationals.
///
/// Sizes are `(hidden_in, hidden_out, inputs, outputs, settings, results)`.
pub fn random_classical(
    rng: &mut impl Rng,
    sizes: (usize, usize, usize, usize, usize, usize),
) -> ClassicalExperiment<BigRational> {
    let (n, m, nx, na, ny, nb) = sizes;
    let p_i = random_distribution(rng, n, 5);
    // p(a, i | x) = p(i) r(a | x, i): same marginal over i for every x
    let prep = (0..nx)
        .map(|_| {
            let split: Vec<Vec<BigRational>> = (0..n).map(|_| random_distribution(rng, na, 4)).collect();
            (0..na)
                .map(|a| (0..n).map(|i| p_i[i].clone() * split[i][a].clone()).collect())
                .collect()
        })
        .collect();
    let transition = (0..n).map(|_| random_distribution(rng, m, 4)).collect();
    let response = (0..ny)
        .map(|_| {
            let cols: Vec<Vec<BigRational>> = (0..m).map(|_| random_distribution(rng, nb, 4)).collect();
            (0..nb).map(|b| (0..m).map(|j| cols[j][b].clone()).collect()).collect()
        })
        .collect();
    ClassicalExperiment {
        inputs: Alphabet::range(nx),
        outputs: Alphabet::range(na),
        settings: Alphabet::range(ny),
        results: Alphabet::range(nb),
        prep,
        transition,
        response,
    }
}
