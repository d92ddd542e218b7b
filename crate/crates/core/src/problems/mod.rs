//! Concrete stochastic convex objectives behind a shared two-point oracle
//! contract, plus sparse dataset ingestion.
//!
//! Every problem exposes `F(x; xi)` through [`StochasticProblem::component`]
//! and produces both values of a paired evaluation under one shared noise
//! draw, so the oracle never leaks two different realizations into a single
//! finite difference.

mod dataset;
mod hard;
mod hinge;
mod synthetic;

pub use dataset::{
    known_dataset_dim, load_dataset, parse_libsvm, synthetic_classification, DatasetError,
    SparseDataset, SparseExample,
};
pub use hard::{make_hard_instance, HardInstance, HardInstanceKind};
pub use hinge::{make_hinge_svm, HingeSvm};
pub use synthetic::{make_synthetic_known_optimum, LinearProblem, SyntheticNormProblem};

use thiserror::Error;

use crate::sampling::RngStream;
use crate::vectorspace::{Domain, Vector, VectorSpaceError};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Vector(#[from] VectorSpaceError),
    #[error("noise draw kind mismatch: expected {expected}")]
    NoiseKindMismatch { expected: &'static str },
    #[error("dataset must contain at least one example")]
    EmptyDataset,
    #[error("hard instance requires a horizon of at least 2, got {0}")]
    HorizonTooSmall(u64),
}

/// One realization of the noise variable: a dataset index, a Bernoulli bit,
/// or a real direction vector, depending on the problem family.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseDraw {
    Index(usize),
    Bit(bool),
    Direction(Vector),
}

/// A stochastic convex objective accessed only through noisy value queries.
///
/// Each component `F(. ; xi)` is convex and Lipschitz by construction of the
/// concrete problem; `lipschitz_bound` returns a constant valid uniformly
/// over noise draws with respect to the Euclidean norm.
pub trait StochasticProblem: Sync {
    fn dim(&self) -> usize;

    fn domain(&self) -> &Domain;

    /// Uniform-in-noise Euclidean Lipschitz constant of the components.
    fn lipschitz_bound(&self) -> f64;

    /// Draws one noise realization from the problem's distribution.
    fn sample_noise(&self, rng: &mut RngStream) -> NoiseDraw;

    /// Evaluates the stochastic component F(x; xi).
    fn component(&self, x: &Vector, noise: &NoiseDraw) -> Result<f64, ProblemError>;

    /// Paired evaluation (F(x; xi), F(y; xi)) under one shared draw.
    fn evaluate_pair(
        &self,
        x: &Vector,
        y: &Vector,
        noise: &NoiseDraw,
    ) -> Result<(f64, f64), ProblemError> {
        Ok((self.component(x, noise)?, self.component(y, noise)?))
    }

    /// Exact expected objective f(x), when it admits a closed or
    /// full-dataset form.
    fn exact_objective(&self, _x: &Vector) -> Option<f64> {
        None
    }

    /// Minimum value of f over the domain, when known.
    fn optimum_value(&self) -> Option<f64> {
        None
    }

    /// A minimizer of f over the domain, when known.
    fn minimizer(&self) -> Option<&Vector> {
        None
    }
}

pub(crate) fn check_problem_dims(expected: usize, x: &Vector) -> Result<(), ProblemError> {
    if x.dim() == expected {
        Ok(())
    } else {
        Err(ProblemError::Vector(VectorSpaceError::DimensionMismatch {
            left: expected,
            right: x.dim(),
        }))
    }
}
