//! The parameter-free bounded-domain optimizer.

use super::{
    objective_columns, should_record, OptimizerError, OutputTracker, RunHistory, RunOptions,
    RunOutput, TraceRecord,
};
use crate::estimator::{finite_difference, TwoPointEstimate};
use crate::numeric::KahanSum;
use crate::problems::StochasticProblem;
use crate::sampling::RngStream;
use crate::vectorspace::{distance, Vector};

/// Full per-iteration state of the distance-over-gradients loop.
///
/// `rbar` is the running max of the distance from the start (floored at the
/// initial movement), `g_cum` the compensated sum of squared estimate
/// norms, and the weighted sums accumulate (rbar_k, x_k) pairs for the
/// averaged output. Output-index bookkeeping tracks the best score
/// sum_{k<t} rbar_k / rbar_t seen so far together with the corresponding
/// average, so a run never has to store the whole iterate history.
#[derive(Debug, Clone)]
pub struct PoemState {
    t: u64,
    x: Vector,
    x0: Vector,
    rbar: f64,
    g_cum: KahanSum,
    output: OutputTracker,
    szo_calls: u64,
}

impl PoemState {
    /// Starts a run at `x0` with initial movement `r_eps > 0`. The starting
    /// point must be feasible.
    pub fn new(
        problem: &dyn StochasticProblem,
        x0: Vector,
        r_eps: f64,
    ) -> Result<Self, OptimizerError> {
        if !(r_eps > 0.0 && r_eps.is_finite()) {
            return Err(OptimizerError::InvalidInitialMovement(r_eps));
        }
        super::check_start(problem, &x0)?;
        let dim = x0.dim();
        Ok(Self {
            t: 0,
            x: x0.clone(),
            x0,
            rbar: r_eps,
            g_cum: KahanSum::new(),
            output: OutputTracker::new(dim),
            szo_calls: 0,
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    pub fn rbar(&self) -> f64 {
        self.rbar
    }

    /// Cumulative squared estimate norm after the steps taken so far.
    pub fn g_cum(&self) -> f64 {
        self.g_cum.value()
    }

    pub fn szo_calls(&self) -> u64 {
        self.szo_calls
    }

    /// Sum of the weights rbar_k folded in so far.
    pub fn weight_total(&self) -> f64 {
        self.output.weight_total()
    }

    /// Best output index found so far.
    pub fn tau(&self) -> u64 {
        self.output.tau_best()
    }

    /// The rbar-weighted average of the iterates folded in so far; the
    /// start point before any step.
    pub fn current_average(&self) -> Vector {
        self.output.current_average(&self.x0)
    }

    /// Executes one iteration: the rbar and mu updates, the paired oracle
    /// call, the step-size rule, and the projected step. Returns the
    /// telemetry row (objective columns unfilled) and the gradient
    /// estimate that drove the step.
    pub fn step(
        &mut self,
        problem: &dyn StochasticProblem,
        rng: &mut RngStream,
    ) -> Result<(TraceRecord, TwoPointEstimate), OptimizerError> {
        let d = problem.dim() as f64;
        let r = distance(&self.x, &self.x0)?;
        self.rbar = self.rbar.max(r);

        self.output.consider(self.t, self.rbar);
        self.output.fold(self.rbar, &self.x);

        let mu = self.rbar * (d / (self.t + 1) as f64).sqrt();
        let v = rng.sample_unit_sphere(self.x.dim()).expect("dim >= 1");
        let noise = problem.sample_noise(rng);
        let est = finite_difference(problem, &self.x, mu, &v, &noise)?;
        self.szo_calls += u64::from(est.szo_cost);
        self.g_cum.add(est.g.dot(&est.g)?);
        let g_tot = self.g_cum.value();

        // All estimates so far exactly zero: stand still rather than
        // divide 0/0.
        let eta = if g_tot > 0.0 {
            self.rbar / g_tot.sqrt()
        } else {
            0.0
        };
        if eta > 0.0 {
            let moved = self.x.add_scaled(-eta, &est.g)?;
            self.x = problem.domain().project(&moved)?;
        }

        let record = TraceRecord {
            t: self.t,
            szo_calls: self.szo_calls,
            eta,
            mu,
            rbar: self.rbar,
            g_cum: g_tot,
            f_at_xbar: None,
            f_at_xt: None,
            r,
        };
        self.t += 1;
        Ok((record, est))
    }

    /// Evaluates the final output candidate (index T) after the last step
    /// and returns (selected average, tau, rbar_T).
    fn finalize(&mut self) -> (Vector, u64, f64) {
        let r = distance(&self.x, &self.x0).expect("state dims agree");
        self.rbar = self.rbar.max(r);
        self.output.consider(self.t, self.rbar);
        let (output, tau) = self.output.selected_output(&self.x0);
        (output, tau, self.rbar)
    }
}

/// Smallest index t in {1, ..., T} maximizing sum_{k<t} rbar_k / rbar_t
/// over a history rbar_0..rbar_T. Uses the same compensated prefix sums as
/// the runner, so it reproduces the runner's selection bit-for-bit.
pub fn select_tau(rbars: &[f64]) -> Result<u64, OptimizerError> {
    if rbars.len() < 2 {
        return Err(OptimizerError::HistoryTooShort);
    }
    let mut prefix = KahanSum::new();
    let mut best_t = 0u64;
    let mut best_score = f64::NEG_INFINITY;
    for (t, &rbar) in rbars.iter().enumerate().skip(1) {
        prefix.add(rbars[t - 1]);
        let score = prefix.value() / rbar;
        if score > best_score {
            best_score = score;
            best_t = t as u64;
        }
    }
    Ok(best_t)
}

/// Runs T iterations from `x0` and returns the rbar-weighted average at
/// the selected index, along with the trace and the rbar sequence.
///
/// ```
/// use poem_core::optimizers::{poem_run, RunOptions};
/// use poem_core::problems::{make_synthetic_known_optimum, StochasticProblem};
/// use poem_core::sampling::RngStream;
/// use poem_core::vectorspace::Vector;
///
/// let problem = make_synthetic_known_optimum(10, 0.5, 7);
/// let mut rng = RngStream::new(42);
/// let run = poem_run(
///     &problem,
///     &Vector::zeros(10),
///     1e-2,      // initial movement: the only scale to choose
///     20_000,
///     &mut rng,
///     &RunOptions::default(),
/// )
/// .unwrap();
/// assert_eq!(run.szo_calls, 40_000);
/// let gap = problem.exact_objective(&run.output).unwrap();
/// assert!(gap < 0.05, "distance to the optimum is {gap}");
/// ```
pub fn poem_run(
    problem: &dyn StochasticProblem,
    x0: &Vector,
    r_eps: f64,
    horizon: u64,
    rng: &mut RngStream,
    opts: &RunOptions,
) -> Result<RunOutput, OptimizerError> {
    if horizon == 0 {
        return Err(OptimizerError::EmptyBudget);
    }
    let mut state = PoemState::new(problem, x0.clone(), r_eps)?;
    let mut trace = Vec::new();
    let mut rbars = Vec::with_capacity(horizon as usize + 1);
    let mut history = opts.keep_history.then(|| RunHistory {
        points: vec![x0.clone()],
        ..RunHistory::default()
    });

    for t in 0..horizon {
        let x_before = state.x().clone();
        let (mut record, est) = state.step(problem, rng)?;
        rbars.push(record.rbar);
        if let Some(h) = history.as_mut() {
            h.points.push(state.x().clone());
            h.grads.push(est.g);
            h.etas.push(record.eta);
            h.mus.push(record.mu);
            h.g_cums.push(record.g_cum);
        }
        if should_record(t, horizon, opts.record_stride) {
            let (f_xbar, f_xt) =
                objective_columns(problem, opts, &state.current_average(), &x_before);
            record.f_at_xbar = f_xbar;
            record.f_at_xt = f_xt;
            trace.push(record);
        }
    }

    let (output, tau, rbar_final) = state.finalize();
    rbars.push(rbar_final);

    Ok(RunOutput {
        output,
        tau: Some(tau),
        x_final: state.x().clone(),
        szo_calls: state.szo_calls(),
        trace,
        rbars,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_synthetic_known_optimum, NoiseDraw, ProblemError};
    use crate::vectorspace::Domain;

    /// F identically zero; the loop must stand exactly still.
    struct ZeroProblem {
        domain: Domain,
    }

    impl StochasticProblem for ZeroProblem {
        fn dim(&self) -> usize {
            self.domain.dim()
        }
        fn domain(&self) -> &Domain {
            &self.domain
        }
        fn lipschitz_bound(&self) -> f64 {
            0.0
        }
        fn sample_noise(&self, _rng: &mut RngStream) -> NoiseDraw {
            NoiseDraw::Bit(false)
        }
        fn component(&self, _x: &Vector, _noise: &NoiseDraw) -> Result<f64, ProblemError> {
            Ok(0.0)
        }
        fn exact_objective(&self, _x: &Vector) -> Option<f64> {
            Some(0.0)
        }
    }

    #[test]
    fn mu_formula_at_start() {
        // t = 0, r_eps = 2, d = 4 -> mu_0 = 2 * sqrt(4/1) = 4
        let p = ZeroProblem {
            domain: Domain::origin_ball(4, 10.0).unwrap(),
        };
        let mut state = PoemState::new(&p, Vector::zeros(4), 2.0).unwrap();
        let mut rng = RngStream::new(0);
        let (record, _) = state.step(&p, &mut rng).unwrap();
        assert_eq!(record.mu, 4.0);
    }

    #[test]
    fn zero_objective_never_moves() {
        let p = ZeroProblem {
            domain: Domain::origin_ball(3, 1.0).unwrap(),
        };
        let x0 = Vector::new(vec![0.1, -0.2, 0.3]).unwrap();
        let mut rng = RngStream::new(1);
        let out = poem_run(&p, &x0, 0.5, 50, &mut rng, &RunOptions::default()).unwrap();
        assert_eq!(out.x_final, x0);
        assert_eq!(out.output, x0);
        for rec in &out.trace {
            assert_eq!(rec.eta, 0.0);
            assert_eq!(rec.g_cum, 0.0);
            assert_eq!(rec.rbar, 0.5);
        }
        assert!(out.rbars.iter().all(|&r| r == 0.5));
    }

    #[test]
    fn single_step_output_is_start_point() {
        let p = make_synthetic_known_optimum(5, 0.3, 2);
        let x0 = Vector::zeros(5);
        let mut rng = RngStream::new(3);
        let out = poem_run(&p, &x0, 0.1, 1, &mut rng, &RunOptions::default()).unwrap();
        assert_eq!(out.tau, Some(1));
        assert_eq!(out.output, x0);
        assert_eq!(out.szo_calls, 2);
    }

    #[test]
    fn eta_is_rbar_over_sqrt_g() {
        let p = make_synthetic_known_optimum(6, 0.2, 4);
        let x0 = Vector::zeros(6);
        let mut rng = RngStream::new(4);
        let out = poem_run(
            &p,
            &x0,
            0.05,
            200,
            &mut rng,
            &RunOptions {
                keep_history: true,
                ..RunOptions::default()
            },
        )
        .unwrap();
        let h = out.history.unwrap();
        for t in 0..200 {
            let expect = out.rbars[t] / h.g_cums[t].sqrt();
            assert_eq!(h.etas[t], expect);
        }
    }

    #[test]
    fn szo_accounting_is_two_per_step() {
        let p = make_synthetic_known_optimum(3, 0.0, 5);
        let x0 = Vector::zeros(3);
        let mut rng = RngStream::new(5);
        let out = poem_run(&p, &x0, 0.1, 37, &mut rng, &RunOptions::default()).unwrap();
        assert_eq!(out.szo_calls, 74);
        for rec in &out.trace {
            assert_eq!(rec.szo_calls, 2 * (rec.t + 1));
        }
    }

    #[test]
    fn select_tau_constant_sequence_picks_the_end() {
        let rbars = vec![1.5; 8];
        assert_eq!(select_tau(&rbars).unwrap(), 7);
    }

    #[test]
    fn select_tau_growing_tail() {
        // rbar_0 = 1, rbar_1 = 100: score(1) = 1/100; tau = 1 trivially.
        assert_eq!(select_tau(&[1.0, 100.0]).unwrap(), 1);
        // scores: t=1 -> 1, t=2 -> 2/100, t=3 -> 102/100; tau = 3.
        assert_eq!(select_tau(&[1.0, 1.0, 100.0, 100.0]).unwrap(), 3);
    }

    #[test]
    fn select_tau_breaks_ties_toward_smaller_t() {
        // scores: t=1 -> 1, t=2 -> 2, t=3 -> 3. strictly increasing; then
        // duplicate the winning score by a jump.
        // [1,1,2,4]: t=1 -> 1, t=2 -> 1, t=3 -> 1. tau = 1.
        assert_eq!(select_tau(&[1.0, 1.0, 2.0, 4.0]).unwrap(), 1);
    }

    #[test]
    fn select_tau_needs_two_entries() {
        assert!(matches!(
            select_tau(&[1.0]),
            Err(OptimizerError::HistoryTooShort)
        ));
        assert!(matches!(
            select_tau(&[]),
            Err(OptimizerError::HistoryTooShort)
        ));
    }

    #[test]
    fn run_tau_matches_brute_force_selection() {
        let p = make_synthetic_known_optimum(8, 0.4, 6);
        let x0 = Vector::zeros(8);
        for seed in 0..5 {
            let mut rng = RngStream::new(seed);
            let out = poem_run(&p, &x0, 1e-3, 300, &mut rng, &RunOptions::default()).unwrap();
            assert_eq!(out.tau.unwrap(), select_tau(&out.rbars).unwrap());
        }
    }

    #[test]
    fn output_reconstructs_from_history() {
        let p = make_synthetic_known_optimum(4, 0.5, 7);
        let x0 = Vector::zeros(4);
        let mut rng = RngStream::new(8);
        let out = poem_run(
            &p,
            &x0,
            0.01,
            128,
            &mut rng,
            &RunOptions {
                keep_history: true,
                ..RunOptions::default()
            },
        )
        .unwrap();
        let tau = out.tau.unwrap() as usize;
        let h = out.history.as_ref().unwrap();
        let rebuilt = super::super::weighted_average(
            (0..tau).map(|k| (out.rbars[k], &h.points[k])),
        )
        .unwrap();
        assert_eq!(rebuilt, out.output);
    }

    #[test]
    fn rejects_bad_configuration() {
        let p = make_synthetic_known_optimum(3, 0.0, 9);
        let inside = Vector::zeros(3);
        let outside = Vector::new(vec![5.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            PoemState::new(&p, inside.clone(), 0.0),
            Err(OptimizerError::InvalidInitialMovement(_))
        ));
        assert!(matches!(
            PoemState::new(&p, outside, 1.0),
            Err(OptimizerError::StartOutsideDomain)
        ));
        let mut rng = RngStream::new(0);
        assert!(matches!(
            poem_run(&p, &inside, 1.0, 0, &mut rng, &RunOptions::default()),
            Err(OptimizerError::EmptyBudget)
        ));
    }

    #[test]
    fn iterates_stay_feasible_and_monotone_state() {
        let p = make_synthetic_known_optimum(5, 1.0, 11);
        let x0 = Vector::zeros(5);
        let mut rng = RngStream::new(12);
        let out = poem_run(
            &p,
            &x0,
            0.02,
            500,
            &mut rng,
            &RunOptions {
                keep_history: true,
                ..RunOptions::default()
            },
        )
        .unwrap();
        let h = out.history.unwrap();
        for x in &h.points {
            assert!(p.domain().contains(x, 1e-12));
        }
        for w in out.rbars.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for w in h.g_cums.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn replay_is_bit_identical() {
        let p = make_synthetic_known_optimum(7, 0.6, 13);
        let x0 = Vector::zeros(7);
        let run = |seed: u64| {
            let mut rng = RngStream::new(seed);
            poem_run(&p, &x0, 0.1, 100, &mut rng, &RunOptions::default()).unwrap()
        };
        let a = run(21);
        let b = run(21);
        assert_eq!(a.output, b.output);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.rbars, b.rbars);
    }
}
