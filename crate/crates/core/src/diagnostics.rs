//! Executable checkers for the inequalities the optimizer loops are
//! supposed to satisfy along every sample path.
//!
//! Each checker compares a left-hand quantity against its claimed bound at
//! every step of a trace and reports the rows, the worst ratio, and a
//! violation flag. Deterministic bounds (weighted regret, smoothing-noise
//! partial sums, estimate norms, the damped-denominator domination, the
//! output-score lower bound) must never flag on any trace; probabilistic
//! bounds are meant to be aggregated as violation frequencies across
//! seeded runs rather than asserted per path.

use thiserror::Error;

use crate::numeric::{log_plus, KahanSum};
use crate::optimizers::{theta_log_log, RunHistory, RunOutput};
use crate::problems::StochasticProblem;
use crate::vectorspace::{distance, Vector, VectorSpaceError};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("run was recorded without full history; rerun with keep_history")]
    MissingHistory,
    #[error("problem does not expose a minimizer/optimum, required here")]
    MissingOptimum,
    #[error("sequence must be positive at index {0}")]
    NonPositive(usize),
    #[error("sequence must be nondecreasing at index {0}")]
    NotNondecreasing(usize),
    #[error("trace does not follow the expected smoothing schedule at step {0}")]
    ScheduleMismatch(usize),
    #[error(transparent)]
    Vector(#[from] VectorSpaceError),
}

/// One compared pair; the claim under test is `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub t: u64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of checking one bound along a trace.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub name: &'static str,
    pub rows: Vec<BoundRow>,
    pub worst_ratio: f64,
    pub violated: bool,
    /// Step indices the bound is not evaluated at (out of its domain).
    pub skipped: Vec<u64>,
}

const REL_SLACK: f64 = 1e-9;

impl BoundReport {
    fn from_rows(name: &'static str, rows: Vec<BoundRow>, skipped: Vec<u64>) -> Self {
        let mut worst_ratio = f64::NEG_INFINITY;
        let mut violated = false;
        for row in &rows {
            if row.lhs > row.rhs * (1.0 + REL_SLACK) {
                violated = true;
            }
            let ratio = if row.rhs > 0.0 {
                row.lhs / row.rhs
            } else if row.lhs <= 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst_ratio = worst_ratio.max(ratio);
        }
        if rows.is_empty() {
            worst_ratio = 0.0;
        }
        Self {
            name,
            rows,
            worst_ratio,
            violated,
            skipped,
        }
    }

    /// One CSV row per compared step plus a summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,lhs,rhs,ratio\n");
        for row in &self.rows {
            let ratio = if row.rhs > 0.0 { row.lhs / row.rhs } else { f64::NAN };
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                row.t, row.lhs, row.rhs, ratio
            ));
        }
        out.push_str(&format!(
            "# {}: rows={} skipped={} worst_ratio={:.16e} violated={}\n",
            self.name,
            self.rows.len(),
            self.skipped.len(),
            self.worst_ratio,
            self.violated
        ));
        out
    }
}

fn history_of(run: &RunOutput) -> Result<&RunHistory, DiagnosticsError> {
    run.history.as_ref().ok_or(DiagnosticsError::MissingHistory)
}

/// Lower bound on the best output score of a positive nondecreasing
/// sequence a_0..a_T:
/// max_t sum_{i<t} a_i/a_t >= (1/e)(T/log_+(a_T/a_0) - 1).
/// The report's single row puts the lower bound on the left and the
/// brute-force best score on the right.
pub fn check_dog_tau(sequence: &[f64]) -> Result<BoundReport, DiagnosticsError> {
    if sequence.len() < 2 {
        return Err(DiagnosticsError::NotNondecreasing(0));
    }
    for (i, &a) in sequence.iter().enumerate() {
        if a.is_nan() || a <= 0.0 {
            return Err(DiagnosticsError::NonPositive(i));
        }
        if i > 0 && a < sequence[i - 1] {
            return Err(DiagnosticsError::NotNondecreasing(i));
        }
    }
    let big_t = (sequence.len() - 1) as u64;
    let mut prefix = KahanSum::new();
    let mut best = f64::NEG_INFINITY;
    for t in 1..sequence.len() {
        prefix.add(sequence[t - 1]);
        best = best.max(prefix.value() / sequence[t]);
    }
    let lower = (big_t as f64 / log_plus(sequence[sequence.len() - 1] / sequence[0]) - 1.0)
        / std::f64::consts::E;
    let rows = vec![BoundRow {
        t: big_t,
        lhs: lower,
        rhs: best,
    }];
    Ok(BoundReport::from_rows("tau-score-lower-bound", rows, vec![]))
}

/// Weighted regret along a recorded run with known minimizer:
/// sum_{k<t} rbar_k <g_k, x_k - x_star>
///   <= rbar_t (2 sbar_t + rbar_t) sqrt(D_{t-1})
/// where D is the step-size denominator sequence the run actually used
/// (G for the plain rule, G' for the unbounded rule).
pub fn check_regret_bound(
    run: &RunOutput,
    x_star: &Vector,
) -> Result<BoundReport, DiagnosticsError> {
    let h = history_of(run)?;
    let denom = h.g_primes.as_deref().unwrap_or(&h.g_cums);
    let horizon = h.grads.len();
    let mut lhs_acc = KahanSum::new();
    let mut sbar = 0.0f64;
    let mut rows = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let k = t - 1;
        let x_k = &h.points[k];
        lhs_acc.add(run.rbars[k] * h.grads[k].dot(&x_k.sub(x_star)?)?);
        sbar = sbar.max(distance(x_k, x_star)?);
        // sbar_t includes s_t itself
        let s_t = distance(&h.points[t], x_star)?;
        let sbar_t = sbar.max(s_t);
        let rhs = run.rbars[t] * (2.0 * sbar_t + run.rbars[t]) * denom[k].sqrt();
        rows.push(BoundRow {
            t: t as u64,
            lhs: lhs_acc.value(),
            rhs,
        });
    }
    Ok(BoundReport::from_rows("weighted-regret", rows, vec![]))
}

/// Smoothing-noise partial sums for the adaptive schedule
/// mu_k = rbar_k sqrt(d/(k+1)):
/// sum_{k<t} 2 L rbar_k mu_k <= 4 L rbar_{t-1}^2 sqrt(d t).
pub fn check_mu_noise_bound(
    run: &RunOutput,
    lipschitz: f64,
    dim: usize,
) -> Result<BoundReport, DiagnosticsError> {
    let h = history_of(run)?;
    let d = dim as f64;
    for (k, &mu) in h.mus.iter().enumerate() {
        let expect = run.rbars[k] * (d / (k + 1) as f64).sqrt();
        if (mu - expect).abs() > 1e-12 * expect.max(1.0) {
            return Err(DiagnosticsError::ScheduleMismatch(k));
        }
    }
    let mut acc = KahanSum::new();
    let mut rows = Vec::with_capacity(h.mus.len());
    for t in 1..=h.mus.len() {
        let k = t - 1;
        acc.add(2.0 * lipschitz * run.rbars[k] * h.mus[k]);
        let rhs = 4.0 * lipschitz * run.rbars[k] * run.rbars[k] * (d * t as f64).sqrt();
        rows.push(BoundRow {
            t: t as u64,
            lhs: acc.value(),
            rhs,
        });
    }
    Ok(BoundReport::from_rows("smoothing-noise", rows, vec![]))
}

/// Deterministic estimate-norm bound ||g_t|| <= L d.
pub fn check_estimate_norm(g_norms: &[f64], lipschitz: f64, dim: usize) -> BoundReport {
    let rhs = lipschitz * dim as f64;
    let rows = g_norms
        .iter()
        .enumerate()
        .map(|(t, &n)| BoundRow {
            t: t as u64,
            lhs: n,
            rhs,
        })
        .collect();
    BoundReport::from_rows("estimate-norm", rows, vec![])
}

/// G'_t >= G_t along an unbounded-rule run (requires Lbar >= L).
pub fn check_gprime_dominates(run: &RunOutput) -> Result<BoundReport, DiagnosticsError> {
    let h = history_of(run)?;
    let g_primes = h
        .g_primes
        .as_deref()
        .ok_or(DiagnosticsError::MissingHistory)?;
    let rows = h
        .g_cums
        .iter()
        .zip(g_primes)
        .enumerate()
        .map(|(t, (&g, &gp))| BoundRow {
            t: t as u64,
            lhs: g,
            rhs: gp,
        })
        .collect();
    Ok(BoundReport::from_rows("gprime-dominates", rows, vec![]))
}

/// High-probability gap bound for the averaged iterate of the adaptive
/// rule:
/// f(xbar_t) - f_star <= 16 theta_{t,delta} (rbar_t + s_0)
///   (sqrt(G_{t-1}) + L d + L sqrt(d t)) / (sum_{k<t} rbar_k / rbar_t).
/// Holds with probability at least 1 - delta over the whole path, so
/// aggregate `violated` as a frequency across seeds.
pub fn proposition1_bound(
    run: &RunOutput,
    problem: &dyn StochasticProblem,
    delta: f64,
) -> Result<BoundReport, DiagnosticsError> {
    let h = history_of(run)?;
    let x_star = problem.minimizer().ok_or(DiagnosticsError::MissingOptimum)?;
    let f_star = problem
        .optimum_value()
        .ok_or(DiagnosticsError::MissingOptimum)?;
    let lipschitz = problem.lipschitz_bound();
    let d = problem.dim() as f64;
    let s0 = distance(&h.points[0], x_star)?;

    let horizon = h.grads.len();
    let mut weight_prefix = KahanSum::new();
    let mut avg = crate::numeric::KahanVec::zeros(problem.dim());
    let mut rows = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let k = t - 1;
        weight_prefix.add(run.rbars[k]);
        avg.add_scaled(run.rbars[k], h.points[k].as_slice());
        let total = weight_prefix.value();
        let xbar = Vector::new(avg.values().iter().map(|s| s / total).collect())?;
        let gap = problem
            .exact_objective(&xbar)
            .ok_or(DiagnosticsError::MissingOptimum)?
            - f_star;
        let theta = theta_log_log(t as u64, delta);
        let g_prev = if k == 0 { 0.0 } else { h.g_cums[k - 1] };
        let score = total / run.rbars[t];
        let rhs = 16.0 * theta * (run.rbars[t] + s0)
            * (g_prev.sqrt() + lipschitz * d + lipschitz * (d * t as f64).sqrt())
            / score;
        rows.push(BoundRow {
            t: t as u64,
            lhs: gap,
            rhs,
        });
    }
    Ok(BoundReport::from_rows("averaged-gap", rows, vec![0]))
}

/// Martingale-noise envelope: with probability at least 1 - delta, for all
/// t <= T,
/// |sum_{k<t} rbar_k <Delta_k, x_k - x_star>| < b_t with
/// b_t = 8 rbar_{t-1} sbar_{t-1} sqrt(theta_{t,delta} G_{t-1}
///       + 4 L^2 d^2 theta_{t,delta}^2),
/// where Delta_k is the gap between the smoothed-surrogate gradient and
/// the estimate. Needs the surrogate gradient in closed form, so it is
/// checked on calibration objectives (`grad_smoothed(x, mu)`).
pub fn check_noise_event(
    run: &RunOutput,
    x_star: &Vector,
    grad_smoothed: impl Fn(&Vector, f64) -> Vector,
    delta: f64,
    lipschitz: f64,
) -> Result<BoundReport, DiagnosticsError> {
    let h = history_of(run)?;
    let d = run.output.dim() as f64;
    let mut acc = KahanSum::new();
    let mut sbar_prev = 0.0f64;
    let mut rows = Vec::with_capacity(h.grads.len());
    for t in 1..=h.grads.len() {
        let k = t - 1;
        let x_k = &h.points[k];
        let delta_k = grad_smoothed(x_k, h.mus[k]).sub(&h.grads[k])?;
        acc.add(run.rbars[k] * delta_k.dot(&x_k.sub(x_star)?)?);
        sbar_prev = sbar_prev.max(distance(x_k, x_star)?);
        let theta = theta_log_log(t as u64, delta);
        let g_prev = h.g_cums[k];
        let b_t = 8.0
            * run.rbars[k]
            * sbar_prev
            * (theta * g_prev + 4.0 * lipschitz * lipschitz * d * d * theta * theta).sqrt();
        rows.push(BoundRow {
            t: t as u64,
            lhs: acc.value().abs(),
            rhs: b_t,
        });
    }
    Ok(BoundReport::from_rows("estimator-noise-envelope", rows, vec![0]))
}
