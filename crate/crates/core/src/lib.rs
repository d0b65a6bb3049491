//! Prepare-transform-measure experiments: operational time reversal, the
//! channel/bipartite-state correspondence, finite ontic extensions and
//! local-causality certificates.
//!
//! Quantum objects are generic over a floating scalar ([`scalar::Real`]);
//! probability tables, ontic extensions and the LP are generic over an
//! ordered field ([`scalar::Field`]) so the dyadic examples can be checked in
//! exact rational arithmetic. The aliases below fix the usual instantiations.

pub mod choibridge;
pub mod error;
pub mod lhv;
pub mod matcore;
pub mod onticlab;
pub mod opmodel;
pub mod random;
pub mod scalar;
pub mod suite;
pub mod timerev;

pub use error::{Error, Result};
pub use num_rational::BigRational;

pub type Matrix = matcore::ComplexMatrix<f64>;
pub type Operator = matcore::HermitianOperator<f64>;
pub type Experiment = opmodel::Experiment<f64>;
pub type Behavior = opmodel::BehaviorTable<f64>;
pub type ExactBehavior = opmodel::BehaviorTable<BigRational>;
