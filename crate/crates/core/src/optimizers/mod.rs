//! Projected stochastic zeroth-order optimizers over a shared scaffold.
//!
//! All methods iterate x_{t+1} = project(x_t - eta_t g_t) with g_t the
//! two-point finite-difference estimate at smoothing radius mu_t, and they
//! differ only in how (eta_t, mu_t) are scheduled and which point is
//! returned:
//!
//! * [`poem_run`] — distance-over-gradients step sizes
//!   eta_t = rbar_t / sqrt(G_t) with adaptive smoothing
//!   mu_t = rbar_t sqrt(d/(t+1)), output at the selected index tau;
//! * [`poem_unbounded_run`] — the same iteration made safe without a
//!   bounded domain by inflating the denominator to G'_t and shrinking
//!   mu_t to d rbar_t/(t+1)^2;
//! * [`projected_sgd_fixed`] — externally fixed (eta_t, mu_t) schedules,
//!   covering the published constant and time-decaying baselines.
//!
//! Every run is strictly sequential, owns its random stream, and emits the
//! same trace schema, so runs across seeds and parameter grids can execute
//! concurrently without coordination.

mod poem;
mod schedules;
mod unbounded;

pub use poem::{poem_run, select_tau, PoemState};
pub use schedules::{
    projected_sgd_fixed, rsnso_schedule, tpbco_schedule, tpge_schedule, tpge_schedule_fine_mu,
    Averaging, FixedSchedule, ScheduleCurve,
};
pub use unbounded::{gprime, poem_unbounded_run, theta_log_log};

use thiserror::Error;

use crate::estimator::EstimatorError;
use crate::numeric::{KahanSum, KahanVec};
use crate::problems::{ProblemError, StochasticProblem};
use crate::vectorspace::{Vector, VectorSpaceError};

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Vector(#[from] VectorSpaceError),
    #[error("initial movement r_eps must be positive, got {0}")]
    InvalidInitialMovement(f64),
    #[error("starting point lies outside the domain")]
    StartOutsideDomain,
    #[error("iteration budget must be at least 1")]
    EmptyBudget,
    #[error("confidence level delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("lipschitz overestimate must be positive, got {0}")]
    InvalidLipschitzEstimate(f64),
    #[error("rbar history needs at least two entries to select tau")]
    HistoryTooShort,
    #[error("fixed schedule produced non-positive mu {mu} at step {t}")]
    NonPositiveMu { t: u64, mu: f64 },
}

/// One telemetry row. `eta`, `mu`, `rbar` are the values used by step `t`;
/// `g_cum` is G_t for plain runs and G'_t for the unbounded variant; `r` is
/// the distance from the start at the point where the step was taken. The
/// objective columns are filled only at recorded rows when the problem has
/// an exact objective.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    pub szo_calls: u64,
    pub eta: f64,
    pub mu: f64,
    pub rbar: f64,
    pub g_cum: f64,
    pub f_at_xbar: Option<f64>,
    pub f_at_xt: Option<f64>,
    pub r: f64,
}

/// Knobs shared by all runners.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Emit a trace row every `record_stride` steps (the final step is
    /// always recorded). Objective columns are computed only at emitted
    /// rows, since a full-dataset evaluation can dominate the runtime.
    pub record_stride: u64,
    /// Keep the full per-step history (memory grows as T*d); intended for
    /// diagnostic-scale runs.
    pub keep_history: bool,
    /// Fill the objective columns of emitted rows when the problem exposes
    /// an exact objective.
    pub eval_objective: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            record_stride: 1,
            keep_history: false,
            eval_objective: false,
        }
    }
}

/// Full per-step history of a run, for pathwise diagnostics.
#[derive(Debug, Clone, Default)]
pub struct RunHistory {
    /// x_0, ..., x_T (length T+1).
    pub points: Vec<Vector>,
    /// g_0, ..., g_{T-1}.
    pub grads: Vec<Vector>,
    /// eta_t used at each step.
    pub etas: Vec<f64>,
    /// mu_t used at each step.
    pub mus: Vec<f64>,
    /// Raw cumulative squared norms G_0, ..., G_{T-1}.
    pub g_cums: Vec<f64>,
    /// G'_t sequence for unbounded runs.
    pub g_primes: Option<Vec<f64>>,
}

/// Result of a run: the returned point, bookkeeping, the (possibly
/// thinned) trace, and the full rbar sequence rbar_0..rbar_T.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub output: Vector,
    /// Selected output index for tau-weighted runs.
    pub tau: Option<u64>,
    pub x_final: Vector,
    pub szo_calls: u64,
    pub trace: Vec<TraceRecord>,
    pub rbars: Vec<f64>,
    pub history: Option<RunHistory>,
}

/// The rbar-weighted running average used for POEM outputs, computed with
/// the same compensated accumulation the runners use, so reconstructing an
/// output from stored (rbar_k, x_k) pairs reproduces it exactly.
pub fn weighted_average<'a, I>(pairs: I) -> Option<Vector>
where
    I: IntoIterator<Item = (f64, &'a Vector)>,
{
    let mut iter = pairs.into_iter();
    let (w0, x0) = iter.next()?;
    let mut sum = KahanVec::zeros(x0.dim());
    let mut total = KahanSum::new();
    sum.add_scaled(w0, x0.as_slice());
    total.add(w0);
    for (w, x) in iter {
        sum.add_scaled(w, x.as_slice());
        total.add(w);
    }
    Some(divide_sum(&sum, &total))
}

pub(crate) fn divide_sum(sum: &KahanVec, total: &KahanSum) -> Vector {
    let denom = total.value();
    Vector::new(sum.values().iter().map(|s| s / denom).collect())
        .expect("finite weighted average")
}

/// Shared output bookkeeping for tau-weighted runs: the compensated
/// (rbar_k, x_k) sums, and the running argmax of the output score
/// sum_{k<t} rbar_k / rbar_t with its attached average, so runs do not
/// store the iterate history just to produce their output.
#[derive(Debug, Clone)]
pub(crate) struct OutputTracker {
    weighted_sum: KahanVec,
    weight_total: KahanSum,
    tau_best: u64,
    tau_score: f64,
    tau_avg: Option<Vector>,
}

impl OutputTracker {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            weighted_sum: KahanVec::zeros(dim),
            weight_total: KahanSum::new(),
            tau_best: 0,
            tau_score: f64::NEG_INFINITY,
            tau_avg: None,
        }
    }

    /// Scores candidate output index `t` (sums exclude x_t, so call before
    /// folding the current iterate). Ties keep the earliest index. Inert
    /// until some weight has been folded, which also keeps zero-weight
    /// prefixes (possible only with the telemetry-level rbar of fixed
    /// schedules) from producing a 0/0 average.
    pub(crate) fn consider(&mut self, t: u64, rbar: f64) {
        if t >= 1 && self.weight_total.value() > 0.0 {
            let score = self.weight_total.value() / rbar;
            if score > self.tau_score {
                self.tau_score = score;
                self.tau_best = t;
                self.tau_avg = Some(divide_sum(&self.weighted_sum, &self.weight_total));
            }
        }
    }

    pub(crate) fn fold(&mut self, rbar: f64, x: &Vector) {
        self.weighted_sum.add_scaled(rbar, x.as_slice());
        self.weight_total.add(rbar);
    }

    pub(crate) fn weight_total(&self) -> f64 {
        self.weight_total.value()
    }

    pub(crate) fn tau_best(&self) -> u64 {
        self.tau_best
    }

    /// Average over everything folded so far; `fallback` before any fold.
    pub(crate) fn current_average(&self, fallback: &Vector) -> Vector {
        if self.weight_total.value() > 0.0 {
            divide_sum(&self.weighted_sum, &self.weight_total)
        } else {
            fallback.clone()
        }
    }

    pub(crate) fn selected_output(&self, fallback: &Vector) -> (Vector, u64) {
        (
            self.tau_avg.clone().unwrap_or_else(|| fallback.clone()),
            self.tau_best,
        )
    }
}

pub(crate) fn should_record(t: u64, horizon: u64, stride: u64) -> bool {
    t.is_multiple_of(stride.max(1)) || t + 1 == horizon
}

pub(crate) fn check_start(
    problem: &dyn StochasticProblem,
    x0: &Vector,
) -> Result<(), OptimizerError> {
    if x0.dim() != problem.dim() {
        return Err(VectorSpaceError::DimensionMismatch {
            left: problem.dim(),
            right: x0.dim(),
        }
        .into());
    }
    if !problem.domain().contains(x0, 1e-12) {
        return Err(OptimizerError::StartOutsideDomain);
    }
    Ok(())
}

pub(crate) fn objective_columns(
    problem: &dyn StochasticProblem,
    opts: &RunOptions,
    xbar: &Vector,
    xt: &Vector,
) -> (Option<f64>, Option<f64>) {
    if !opts.eval_objective {
        return (None, None);
    }
    (problem.exact_objective(xbar), problem.exact_objective(xt))
}
