//! Two-point sphere-sampled finite differences and Monte-Carlo smoothing
//! oracles.
//!
//! The central object is
//!
//! ```text
//! g = (d / 2 mu) * (F(x + mu v; xi) - F(x - mu v; xi)) * v
//! ```
//!
//! for a unit direction v. Averaged over v on the unit sphere and the noise
//! xi, g is an unbiased estimate of the gradient of the ball-smoothed
//! surrogate f_mu(x) = E[f(x + mu u)], and its norm never exceeds L*d for
//! L-Lipschitz components. Probe points x +- mu v are evaluated without
//! projection: every implemented problem is defined on all of R^d.

use thiserror::Error;

use crate::numeric::RunningMoments;
use crate::problems::{ProblemError, StochasticProblem, NoiseDraw};
use crate::sampling::RngStream;
use crate::vectorspace::Vector;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("smoothing parameter must be positive, got {0}")]
    NonPositiveSmoothing(f64),
    #[error("direction must be a unit vector (norm {0})")]
    NonUnitDirection(f64),
    #[error("monte carlo oracles need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// One two-point gradient estimate together with its bookkeeping: the
/// smoothing radius and direction that produced it, and the oracle cost
/// (always two stochastic value queries).
#[derive(Debug, Clone)]
pub struct TwoPointEstimate {
    pub g: Vector,
    pub mu: f64,
    pub direction: Vector,
    pub szo_cost: u32,
}

/// Evaluates the paired oracle at x +- mu v under the shared draw `noise`
/// and forms the finite-difference estimate.
pub fn finite_difference(
    problem: &dyn StochasticProblem,
    x: &Vector,
    mu: f64,
    v: &Vector,
    noise: &NoiseDraw,
) -> Result<TwoPointEstimate, EstimatorError> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(EstimatorError::NonPositiveSmoothing(mu));
    }
    let vnorm = v.norm();
    if (vnorm - 1.0).abs() > 1e-9 {
        return Err(EstimatorError::NonUnitDirection(vnorm));
    }
    let plus = x.add_scaled(mu, v).map_err(ProblemError::from)?;
    let minus = x.add_scaled(-mu, v).map_err(ProblemError::from)?;
    let (f_plus, f_minus) = problem.evaluate_pair(&plus, &minus, noise)?;
    let d = problem.dim() as f64;
    let coeff = d / (2.0 * mu) * (f_plus - f_minus);
    Ok(TwoPointEstimate {
        g: v.scale(coeff),
        mu,
        direction: v.clone(),
        szo_cost: 2,
    })
}

/// Monte-Carlo estimate of the smoothed value f_mu(x) = E[f(x + mu u)]
/// over uniform ball directions and fresh noise draws. Returns the sample
/// mean and its standard error.
pub fn smoothed_value_mc(
    problem: &dyn StochasticProblem,
    x: &Vector,
    mu: f64,
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64), EstimatorError> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(EstimatorError::NonPositiveSmoothing(mu));
    }
    if n_samples < 2 {
        return Err(EstimatorError::TooFewSamples(n_samples));
    }
    let d = problem.dim();
    let mut moments = RunningMoments::new();
    for _ in 0..n_samples {
        let u = rng.sample_unit_ball(d).expect("dim >= 1");
        let probe = x.add_scaled(mu, &u).map_err(ProblemError::from)?;
        let noise = problem.sample_noise(rng);
        moments.push(problem.component(&probe, &noise)?);
    }
    Ok((moments.mean(), moments.stderr()))
}

/// Monte-Carlo estimate of the smoothed gradient: the componentwise mean
/// and standard error of the two-point estimator over fresh directions and
/// noise draws.
pub fn smoothed_grad_mc(
    problem: &dyn StochasticProblem,
    x: &Vector,
    mu: f64,
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<(Vector, Vector), EstimatorError> {
    if n_samples < 2 {
        return Err(EstimatorError::TooFewSamples(n_samples));
    }
    let d = problem.dim();
    let mut moments = vec![RunningMoments::new(); d];
    for _ in 0..n_samples {
        let v = rng.sample_unit_sphere(d).expect("dim >= 1");
        let noise = problem.sample_noise(rng);
        let est = finite_difference(problem, x, mu, &v, &noise)?;
        for (m, &gi) in moments.iter_mut().zip(est.g.as_slice()) {
            m.push(gi);
        }
    }
    let mean = Vector::new(moments.iter().map(RunningMoments::mean).collect())
        .map_err(ProblemError::from)?;
    let stderr = Vector::new(moments.iter().map(RunningMoments::stderr).collect())
        .map_err(ProblemError::from)?;
    Ok((mean, stderr))
}
