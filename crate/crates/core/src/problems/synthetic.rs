//! Synthetic objectives with known optima, used by convergence-rate and
//! bound-frequency tests where real datasets cannot supply f_star.

use super::{check_problem_dims, NoiseDraw, ProblemError, StochasticProblem};
use crate::sampling::RngStream;
use crate::vectorspace::{Domain, Vector};

/// F(x; xi) = ||x - x_star|| + <xi, x> with xi uniform on a sphere of
/// radius `noise_level`. The noise has zero mean, so f(x) = ||x - x_star||
/// exactly, f_star = 0, and every component is (1 + noise_level)-Lipschitz.
#[derive(Debug, Clone)]
pub struct SyntheticNormProblem {
    x_star: Vector,
    noise_level: f64,
    domain: Domain,
}

/// Standard construction: x_star is a random unit vector drawn from `seed`
/// and the domain is the origin ball of radius 2, which contains x_star
/// strictly.
pub fn make_synthetic_known_optimum(
    dim: usize,
    noise_level: f64,
    seed: u64,
) -> SyntheticNormProblem {
    let mut rng = RngStream::new(seed);
    let x_star = rng.sample_unit_sphere(dim).expect("dim >= 1");
    let domain = Domain::origin_ball(dim, 2.0).expect("positive radius");
    SyntheticNormProblem::new(x_star, noise_level, domain).expect("x_star lies inside")
}

impl SyntheticNormProblem {
    /// Builds the problem over an explicit domain; the domain must contain
    /// x_star so that f_star = 0 is attained.
    pub fn new(
        x_star: Vector,
        noise_level: f64,
        domain: Domain,
    ) -> Result<Self, ProblemError> {
        check_problem_dims(domain.dim(), &x_star)?;
        assert!(noise_level >= 0.0, "noise level must be nonnegative");
        assert!(
            domain.contains(&x_star, 1e-12),
            "domain must contain the minimizer"
        );
        Ok(Self {
            x_star,
            noise_level,
            domain,
        })
    }

    /// Same objective on all of R^d.
    pub fn unbounded(x_star: Vector, noise_level: f64) -> Self {
        let domain = Domain::unbounded(x_star.dim());
        Self::new(x_star, noise_level, domain).expect("unbounded contains everything")
    }

    pub fn x_star(&self) -> &Vector {
        &self.x_star
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }
}

impl StochasticProblem for SyntheticNormProblem {
    fn dim(&self) -> usize {
        self.x_star.dim()
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn lipschitz_bound(&self) -> f64 {
        1.0 + self.noise_level
    }

    fn sample_noise(&self, rng: &mut RngStream) -> NoiseDraw {
        let v = rng.sample_unit_sphere(self.dim()).expect("dim >= 1");
        NoiseDraw::Direction(v.scale(self.noise_level))
    }

    fn component(&self, x: &Vector, noise: &NoiseDraw) -> Result<f64, ProblemError> {
        check_problem_dims(self.dim(), x)?;
        match noise {
            NoiseDraw::Direction(xi) => {
                Ok(x.sub(&self.x_star)?.norm() + xi.dot(x)?)
            }
            _ => Err(ProblemError::NoiseKindMismatch {
                expected: "noise direction",
            }),
        }
    }

    fn exact_objective(&self, x: &Vector) -> Option<f64> {
        Some(x.sub(&self.x_star).ok()?.norm())
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn minimizer(&self) -> Option<&Vector> {
        Some(&self.x_star)
    }
}

/// F(x; xi) = c'x + <xi, x>: the calibration objective. Its smoothed
/// surrogate has gradient exactly c at every point and every smoothing
/// radius, which makes it the reference case for estimator unbiasedness
/// and for noise-term diagnostics that need the surrogate gradient in
/// closed form.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    slope: Vector,
    noise_level: f64,
    domain: Domain,
    minimizer: Option<Vector>,
}

impl LinearProblem {
    pub fn new(slope: Vector, noise_level: f64, domain: Domain) -> Result<Self, ProblemError> {
        check_problem_dims(domain.dim(), &slope)?;
        assert!(noise_level >= 0.0);
        // On a centered ball the minimizer is the antipodal boundary point.
        let minimizer = match &domain {
            Domain::Ball { center, radius } => {
                let norm = slope.norm();
                if norm > 0.0 {
                    Some(center.add_scaled(-radius / norm, &slope)?)
                } else {
                    Some(center.clone())
                }
            }
            _ => None,
        };
        Ok(Self {
            slope,
            noise_level,
            domain,
            minimizer,
        })
    }

    pub fn slope(&self) -> &Vector {
        &self.slope
    }
}

impl StochasticProblem for LinearProblem {
    fn dim(&self) -> usize {
        self.slope.dim()
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn lipschitz_bound(&self) -> f64 {
        self.slope.norm() + self.noise_level
    }

    fn sample_noise(&self, rng: &mut RngStream) -> NoiseDraw {
        let v = rng.sample_unit_sphere(self.dim()).expect("dim >= 1");
        NoiseDraw::Direction(v.scale(self.noise_level))
    }

    fn component(&self, x: &Vector, noise: &NoiseDraw) -> Result<f64, ProblemError> {
        check_problem_dims(self.dim(), x)?;
        match noise {
            NoiseDraw::Direction(xi) => Ok(self.slope.dot(x)? + xi.dot(x)?),
            _ => Err(ProblemError::NoiseKindMismatch {
                expected: "noise direction",
            }),
        }
    }

    fn exact_objective(&self, x: &Vector) -> Option<f64> {
        self.slope.dot(x).ok()
    }

    fn optimum_value(&self) -> Option<f64> {
        let m = self.minimizer.as_ref()?;
        self.slope.dot(m).ok()
    }

    fn minimizer(&self) -> Option<&Vector> {
        self.minimizer.as_ref()
    }
}
