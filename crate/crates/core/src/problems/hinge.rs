//! Hinge loss over a sparse dataset, the ball-constrained SVM objective.

use super::{check_problem_dims, NoiseDraw, ProblemError, SparseDataset, StochasticProblem};
use crate::sampling::RngStream;
use crate::vectorspace::{Domain, Vector};

/// F(x; (a, b)) = max{0, 1 - b a'x} with (a, b) drawn uniformly from the
/// dataset; the feasible set is a centered Euclidean ball.
#[derive(Debug, Clone)]
pub struct HingeSvm {
    dataset: SparseDataset,
    domain: Domain,
    lipschitz: f64,
}

/// Builds the hinge problem on `Ball(0, radius)`. The Lipschitz bound is
/// max_i ||a_i||, the tightest constant valid for every per-example
/// subgradient.
pub fn make_hinge_svm(dataset: SparseDataset, radius: f64) -> Result<HingeSvm, ProblemError> {
    if dataset.is_empty() {
        return Err(ProblemError::EmptyDataset);
    }
    let domain = Domain::origin_ball(dataset.dim(), radius)?;
    let lipschitz = dataset.max_feature_norm();
    Ok(HingeSvm {
        dataset,
        domain,
        lipschitz,
    })
}

impl HingeSvm {
    pub fn dataset(&self) -> &SparseDataset {
        &self.dataset
    }

    fn hinge(&self, x: &Vector, index: usize) -> f64 {
        let (a, b) = self.dataset.example(index);
        (1.0 - b * a.dot(x)).max(0.0)
    }
}

impl StochasticProblem for HingeSvm {
    fn dim(&self) -> usize {
        self.dataset.dim()
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }

    fn sample_noise(&self, rng: &mut RngStream) -> NoiseDraw {
        NoiseDraw::Index(
            rng.sample_uniform_index(self.dataset.len())
                .expect("dataset is nonempty"),
        )
    }

    fn component(&self, x: &Vector, noise: &NoiseDraw) -> Result<f64, ProblemError> {
        check_problem_dims(self.dim(), x)?;
        match noise {
            NoiseDraw::Index(i) => Ok(self.hinge(x, *i)),
            _ => Err(ProblemError::NoiseKindMismatch {
                expected: "dataset index",
            }),
        }
    }

    /// Mean hinge loss over the whole dataset.
    fn exact_objective(&self, x: &Vector) -> Option<f64> {
        let n = self.dataset.len();
        let total: f64 = (0..n).map(|i| self.hinge(x, i)).sum();
        Some(total / n as f64)
    }
}
