//! Regularized inference of Gaussian and Potts graphical models, with tools for
//! locating the regularization strengths at which train, test and generated
//! likelihoods meet.

// Negated float comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod gamma;
pub mod io;
pub mod lasso;
pub mod likelihoods;
pub mod linalg;
pub mod map_l2;
pub mod optim;
pub mod posterior;
pub mod potts;
pub mod rng;
pub mod roots;
pub mod sampling;
pub mod spherical;

pub use error::{Error, Result};
