//! An adversarial pair of piecewise-linear objectives on an unbounded
//! domain.
//!
//! The two instances share identical oracle output whenever the Bernoulli
//! noise draws all come up zero, which happens with probability
//! (1 - 1/T)^T >= 1/e over a horizon of T calls, yet their minimizers sit
//! at distance ~sqrt(d) from each other. They serve as a stress test for
//! any method claiming parameter-freeness without a bounded domain.

use super::{check_problem_dims, NoiseDraw, ProblemError, StochasticProblem};
use crate::sampling::RngStream;
use crate::vectorspace::{Domain, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardInstanceKind {
    /// f1(x) = L ||x||_1, noise-free oracle.
    F1,
    /// f2(x) = L ||x - u||_1 with u = (1 - 1/T) 1_d; the oracle mixes
    /// F2(x; 0) = L ||x||_1 and F2(x; 1) = T L ||x - u||_1 - (T-1) L ||x||_1.
    /// The rare branch trades per-draw convexity (it has concave kinks at
    /// coordinate hyperplanes) for an unbiased match with the common
    /// branch; the mixture mean is the convex shifted l1 norm.
    F2,
}

#[derive(Debug, Clone)]
pub struct HardInstance {
    kind: HardInstanceKind,
    scale: f64,
    horizon: u64,
    domain: Domain,
    shift: Vector,
    minimizer: Vector,
    lipschitz: f64,
}

/// Builds one side of the pair. `scale` is the l1 coefficient L of the
/// objective and `horizon` the oracle budget T that parameterizes the
/// Bernoulli distribution P(xi = 1) = 1/T.
pub fn make_hard_instance(
    kind: HardInstanceKind,
    scale: f64,
    horizon: u64,
    dim: usize,
) -> Result<HardInstance, ProblemError> {
    if horizon < 2 {
        return Err(ProblemError::HorizonTooSmall(horizon));
    }
    let shift = Vector::ones(dim).scale(1.0 - 1.0 / horizon as f64);
    let sqrt_d = (dim as f64).sqrt();
    // Euclidean Lipschitz constants: the l1 norm is sqrt(d)-Lipschitz in
    // the 2-norm, and the xi = 1 component of f2 stacks T + (T-1) of them.
    let lipschitz = match kind {
        HardInstanceKind::F1 => scale * sqrt_d,
        HardInstanceKind::F2 => (2 * horizon - 1) as f64 * scale * sqrt_d,
    };
    let minimizer = match kind {
        HardInstanceKind::F1 => Vector::zeros(dim),
        HardInstanceKind::F2 => shift.clone(),
    };
    Ok(HardInstance {
        kind,
        scale,
        horizon,
        domain: Domain::unbounded(dim),
        shift,
        minimizer,
        lipschitz,
    })
}

impl HardInstance {
    pub fn kind(&self) -> HardInstanceKind {
        self.kind
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// The f2 minimizer u = (1 - 1/T) 1_d.
    pub fn shift(&self) -> &Vector {
        &self.shift
    }
}

impl StochasticProblem for HardInstance {
    fn dim(&self) -> usize {
        self.shift.dim()
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }

    fn sample_noise(&self, rng: &mut RngStream) -> NoiseDraw {
        NoiseDraw::Bit(rng.sample_bernoulli(1.0 / self.horizon as f64))
    }

    fn component(&self, x: &Vector, noise: &NoiseDraw) -> Result<f64, ProblemError> {
        check_problem_dims(self.dim(), x)?;
        let bit = match noise {
            NoiseDraw::Bit(b) => *b,
            _ => {
                return Err(ProblemError::NoiseKindMismatch {
                    expected: "bernoulli bit",
                })
            }
        };
        let l1 = self.scale * x.norm_l1();
        Ok(match (self.kind, bit) {
            (HardInstanceKind::F1, _) => l1,
            (HardInstanceKind::F2, false) => l1,
            (HardInstanceKind::F2, true) => {
                let t = self.horizon as f64;
                let shifted = self.scale * x.sub(&self.shift)?.norm_l1();
                t * shifted - (t - 1.0) * l1
            }
        })
    }

    fn exact_objective(&self, x: &Vector) -> Option<f64> {
        Some(match self.kind {
            HardInstanceKind::F1 => self.scale * x.norm_l1(),
            HardInstanceKind::F2 => {
                self.scale * x.sub(&self.shift).ok()?.norm_l1()
            }
        })
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn minimizer(&self) -> Option<&Vector> {
        Some(&self.minimizer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_is_scaled_l1_norm() {
        let p = make_hard_instance(HardInstanceKind::F1, 1.5, 10, 4).unwrap();
        let x = Vector::ones(4);
        for bit in [false, true] {
            assert_eq!(p.component(&x, &NoiseDraw::Bit(bit)).unwrap(), 6.0);
        }
    }

    #[test]
    fn f2_zero_draw_matches_f1_values() {
        let f1 = make_hard_instance(HardInstanceKind::F1, 2.0, 5, 3).unwrap();
        let f2 = make_hard_instance(HardInstanceKind::F2, 2.0, 5, 3).unwrap();
        let x = Vector::new(vec![0.3, -0.7, 2.0]).unwrap();
        assert_eq!(
            f1.component(&x, &NoiseDraw::Bit(false)).unwrap(),
            f2.component(&x, &NoiseDraw::Bit(false)).unwrap()
        );
        // at the all-ones point the silent branch is L * d
        let ones = Vector::ones(3);
        assert_eq!(f2.component(&ones, &NoiseDraw::Bit(false)).unwrap(), 6.0);
    }

    #[test]
    fn f2_at_minimizer_under_one_draw() {
        // F2(u; 1) = 0 - (T-1) L ||u||_1 = -(T-1) L d (1 - 1/T)
        let (l, t, d) = (1.25, 4u64, 6usize);
        let p = make_hard_instance(HardInstanceKind::F2, l, t, d).unwrap();
        let u = p.shift().clone();
        let expected = -((t - 1) as f64) * l * d as f64 * (1.0 - 1.0 / t as f64);
        let got = p.component(&u, &NoiseDraw::Bit(true)).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn f2_unbiasedness_identity_at_origin() {
        // (1 - 1/T) F2(0;0) + (1/T) F2(0;1) = L d (1 - 1/T) = f2(0)
        let (l, t, d) = (1.0, 7u64, 5usize);
        let p = make_hard_instance(HardInstanceKind::F2, l, t, d).unwrap();
        let zero = Vector::zeros(d);
        let tf = t as f64;
        let mixture = (1.0 - 1.0 / tf) * p.component(&zero, &NoiseDraw::Bit(false)).unwrap()
            + (1.0 / tf) * p.component(&zero, &NoiseDraw::Bit(true)).unwrap();
        let expected = p.exact_objective(&zero).unwrap();
        assert!((mixture - expected).abs() < 1e-12);
        assert!((expected - l * d as f64 * (1.0 - 1.0 / tf)).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_rate_matches_horizon() {
        let p = make_hard_instance(HardInstanceKind::F2, 1.0, 100, 2).unwrap();
        let mut rng = RngStream::new(12);
        let n = 1_000_000;
        let mut ones = 0u64;
        for _ in 0..n {
            if matches!(p.sample_noise(&mut rng), NoiseDraw::Bit(true)) {
                ones += 1;
            }
        }
        let freq = ones as f64 / n as f64;
        let sigma = (0.01_f64 * 0.99 / n as f64).sqrt();
        assert!((freq - 0.01).abs() < 3.0 * sigma, "freq {freq}");
    }

    #[test]
    fn horizon_below_two_is_rejected() {
        assert!(matches!(
            make_hard_instance(HardInstanceKind::F1, 1.0, 1, 3),
            Err(ProblemError::HorizonTooSmall(1))
        ));
    }

    #[test]
    fn domain_is_unbounded() {
        let p = make_hard_instance(HardInstanceKind::F1, 1.0, 2, 3).unwrap();
        assert!(!p.domain().is_bounded());
    }
}
