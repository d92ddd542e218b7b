//! Deterministic, seedable random streams and the uniform sphere/ball
//! samplers the two-point estimator is built on.
//!
//! Streams are ChaCha-based so a given seed reproduces the same sample
//! sequence bit-for-bit on every platform. Replications and grid points of
//! an experiment take derived substreams, which are independent by key
//! separation rather than by sequential splitting, so parallel sweeps stay
//! order-independent.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::vectorspace::Vector;

#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("index range must be nonempty")]
    EmptyRange,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

// SplitMix64 finalizer; used to turn (seed, lane) pairs into ChaCha keys.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_from_lineage(lineage: u64) -> [u8; 32] {
    let mut state = lineage;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// A single-owner random stream. `new(seed)` always yields the same
/// sequence; `substream(i)` derives the i-th independent child stream
/// without consuming any state from the parent.
#[derive(Debug, Clone)]
pub struct RngStream {
    lineage: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let mut s = seed;
        let lineage = splitmix64(&mut s);
        Self::from_lineage(lineage)
    }

    fn from_lineage(lineage: u64) -> Self {
        Self {
            lineage,
            rng: ChaCha12Rng::from_seed(key_from_lineage(lineage)),
        }
    }

    /// Derived child stream `index`. Children of distinct indices, and of
    /// distinct parents, use unrelated ChaCha keys.
    pub fn substream(&self, index: u64) -> Self {
        let mut s = self.lineage ^ index.wrapping_mul(GOLDEN_GAMMA).wrapping_add(1);
        Self::from_lineage(splitmix64(&mut s))
    }

    /// Uniform draw from the unit sphere S^{d-1}: a standard-normal vector
    /// normalized to unit length. The zero draw (possible only in floating
    /// point) is rejected and resampled.
    pub fn sample_unit_sphere(&mut self, d: usize) -> Result<Vector, SamplingError> {
        if d == 0 {
            return Err(SamplingError::ZeroDimension);
        }
        loop {
            let coords: Vec<f64> = (0..d).map(|_| self.rng.sample(StandardNormal)).collect();
            let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 0.0 && norm.is_finite() {
                return Ok(Vector::new(coords.iter().map(|c| c / norm).collect())
                    .expect("normalized gaussian is finite"));
            }
        }
    }

    /// Uniform draw from the unit ball B^d: sphere sample scaled by
    /// U^{1/d}.
    pub fn sample_unit_ball(&mut self, d: usize) -> Result<Vector, SamplingError> {
        let sphere = self.sample_unit_sphere(d)?;
        let u: f64 = self.rng.gen::<f64>();
        Ok(sphere.scale(u.powf(1.0 / d as f64)))
    }

    /// Uniform index in [0, n).
    pub fn sample_uniform_index(&mut self, n: usize) -> Result<usize, SamplingError> {
        if n == 0 {
            return Err(SamplingError::EmptyRange);
        }
        Ok(self.rng.gen_range(0..n))
    }

    /// Bernoulli draw with success probability `p`.
    pub fn sample_bernoulli(&mut self, p: f64) -> bool {
        self.rng.gen::<f64>() < p
    }

    /// Uniform draw from [0, 1).
    pub fn sample_uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngStream::new(7);
        let mut b = RngStream::new(7);
        for _ in 0..10_000 {
            assert_eq!(
                a.sample_unit_sphere(5).unwrap(),
                b.sample_unit_sphere(5).unwrap()
            );
        }
    }

    #[test]
    fn sphere_isotropy_and_symmetry_across_dimensions() {
        // E[v v'] = I/d entrywise within 5e-3 at 2e5 samples, and the
        // sample mean stays within 4/sqrt(N) in norm.
        let n = 200_000usize;
        for d in [2usize, 5, 10] {
            let mut rng = RngStream::new(40 + d as u64);
            let mut second = vec![0.0f64; d * d];
            let mut mean = vec![0.0f64; d];
            for _ in 0..n {
                let v = rng.sample_unit_sphere(d).unwrap();
                let v = v.as_slice();
                for i in 0..d {
                    mean[i] += v[i];
                    for j in 0..d {
                        second[i * d + j] += v[i] * v[j];
                    }
                }
            }
            let mut max_err = 0.0f64;
            for i in 0..d {
                for j in 0..d {
                    let expect = if i == j { 1.0 / d as f64 } else { 0.0 };
                    max_err = max_err.max((second[i * d + j] / n as f64 - expect).abs());
                }
            }
            assert!(max_err < 5e-3, "d={d}: covariance error {max_err}");
            let mean_norm = mean
                .iter()
                .map(|m| (m / n as f64) * (m / n as f64))
                .sum::<f64>()
                .sqrt();
            assert!(
                mean_norm < 4.0 / (n as f64).sqrt(),
                "d={d}: mean norm {mean_norm}"
            );
        }
    }

    #[test]
    fn substreams_differ_from_parent_and_each_other() {
        let root = RngStream::new(7);
        let mut c0 = root.substream(0);
        let mut c1 = root.substream(1);
        let mut root = root;
        let a = root.sample_unit_sphere(4).unwrap();
        let b = c0.sample_unit_sphere(4).unwrap();
        let c = c1.sample_unit_sphere(4).unwrap();
        assert_ne!(a, b);
        assert_ne!(b, c);
        assert_ne!(a, c);
    }

    #[test]
    fn substream_derivation_does_not_consume_parent() {
        let mut a = RngStream::new(11);
        let mut b = RngStream::new(11);
        let _ = b.substream(3);
        assert_eq!(
            a.sample_unit_sphere(3).unwrap(),
            b.sample_unit_sphere(3).unwrap()
        );
    }

    #[test]
    fn sphere_samples_have_unit_norm() {
        let mut rng = RngStream::new(1);
        for d in [1, 2, 3, 17, 112] {
            for _ in 0..50 {
                let v = rng.sample_unit_sphere(d).unwrap();
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_d1_is_sign_flip() {
        let mut rng = RngStream::new(2);
        let mut seen_pos = false;
        let mut seen_neg = false;
        for _ in 0..200 {
            let v = rng.sample_unit_sphere(1).unwrap();
            let c = v.as_slice()[0];
            assert!((c.abs() - 1.0).abs() < 1e-15);
            if c > 0.0 {
                seen_pos = true;
            } else {
                seen_neg = true;
            }
        }
        assert!(seen_pos && seen_neg);
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = RngStream::new(3);
        for _ in 0..2000 {
            let u = rng.sample_unit_ball(4).unwrap();
            assert!(u.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn ball_radius_fraction_matches_volume_ratio() {
        // In d = 2 the fraction of mass with ||u|| <= 1/2 is exactly 1/4.
        let mut rng = RngStream::new(4);
        let n = 1_000_000;
        let mut hits = 0u64;
        for _ in 0..n {
            if rng.sample_unit_ball(2).unwrap().norm() <= 0.5 {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let sigma = (0.25_f64 * 0.75 / n as f64).sqrt();
        assert!(
            (p - 0.25).abs() < 3.0 * sigma + 1e-9,
            "fraction {p} vs 0.25 (3 sigma = {})",
            3.0 * sigma
        );
    }

    #[test]
    fn ball_d1_mean_is_centered() {
        let mut rng = RngStream::new(5);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += rng.sample_unit_ball(1).unwrap().as_slice()[0];
        }
        let mean = sum / n as f64;
        // Var of U(-1,1) is 1/3.
        let sigma = (1.0 / 3.0 / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma);
    }

    #[test]
    fn uniform_index_bounds_and_degenerate_case() {
        let mut rng = RngStream::new(6);
        assert_eq!(rng.sample_uniform_index(1).unwrap(), 0);
        for _ in 0..10_000 {
            assert!(rng.sample_uniform_index(8124).unwrap() < 8124);
        }
        assert_eq!(rng.sample_uniform_index(0), Err(SamplingError::EmptyRange));
    }

    #[test]
    fn uniform_index_is_balanced_for_two() {
        let mut rng = RngStream::new(7);
        let n = 1_000_000;
        let mut zeros = 0u64;
        for _ in 0..n {
            if rng.sample_uniform_index(2).unwrap() == 0 {
                zeros += 1;
            }
        }
        let p = zeros as f64 / n as f64;
        let sigma = (0.25_f64 / n as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        let mut rng = RngStream::new(8);
        assert_eq!(
            rng.sample_unit_sphere(0),
            Err(SamplingError::ZeroDimension)
        );
        assert_eq!(rng.sample_unit_ball(0), Err(SamplingError::ZeroDimension));
    }
}
