//! Compensated summation helpers.
//!
//! Long runs accumulate millions of terms into the squared-gradient sum and
//! the weighted iterate averages; plain f64 addition drifts enough to distort
//! step-size traces at that scale. Neumaier's variant of Kahan summation
//! keeps the error bounded independently of the term count.

/// Scalar compensated accumulator (Neumaier).
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Coordinate-wise compensated accumulator for vector sums.
#[derive(Debug, Clone)]
pub struct KahanVec {
    sums: Vec<KahanSum>,
}

impl KahanVec {
    pub fn zeros(dim: usize) -> Self {
        Self {
            sums: vec![KahanSum::default(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.sums.len()
    }

    /// Adds `scale * values` coordinate-wise.
    pub fn add_scaled(&mut self, scale: f64, values: &[f64]) {
        debug_assert_eq!(self.sums.len(), values.len());
        for (acc, &v) in self.sums.iter_mut().zip(values) {
            acc.add(scale * v);
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.sums.iter().map(|s| s.value()).collect()
    }
}

/// Welford online mean/variance, used by the Monte-Carlo oracles.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (n - 1 denominator); zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// log_+(z) = log(z) + 1.
pub fn log_plus(z: f64) -> f64 {
    z.ln() + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        // 1 + 1e-16 * 1e4 loses everything in naive f64 addition.
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        let exact = 1.0 + 1e-12;
        assert!((acc.value() - exact).abs() < 1e-15);
    }

    #[test]
    fn moments_match_direct_formulas() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        let mut m = RunningMoments::new();
        for &x in &xs {
            m.push(x);
        }
        assert_eq!(m.count(), 8);
        assert!((m.mean() - 5.0).abs() < 1e-12);
        // sample variance of the classic example is 32/7
        assert!((m.variance() - 32.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn log_plus_of_one_is_one() {
        assert_eq!(log_plus(1.0), 1.0);
    }
}
