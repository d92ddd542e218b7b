//! The unbounded-domain variant: same loop, but the step-size denominator
//! is inflated to a quantity G'_t that stays positive and heavily damped
//! even before any gradient signal arrives, and the smoothing radius
//! shrinks as d rbar_t/(t+1)^2. Under an overestimate Lbar >= L of the
//! Lipschitz constant, the iterates then stay within 3 ||x_0 - x_star|| of
//! the start with probability at least 1 - delta.

use super::{
    objective_columns, should_record, OptimizerError, OutputTracker, RunHistory, RunOptions,
    RunOutput, TraceRecord,
};
use crate::estimator::finite_difference;
use crate::numeric::{log_plus, KahanSum};
use crate::problems::StochasticProblem;
use crate::sampling::RngStream;
use crate::vectorspace::{distance, Vector};

/// theta_{T,delta} = log(60 log(6T/delta)).
pub fn theta_log_log(horizon: u64, delta: f64) -> f64 {
    (60.0 * (6.0 * horizon as f64 / delta).ln()).ln()
}

/// The damped step-size denominator
/// G'_t = 8^4 theta_{T,delta} log_+^2(t+2) (G_{t-1} + 16 theta_{T,delta} d^2 Lbar^2).
///
/// The additive d^2 Lbar^2 term keeps it strictly positive even at
/// G_{-1} = 0, and the coefficient is always at least one, so G'_t
/// dominates G_{t-1}.
pub fn gprime(
    g_prev: f64,
    t: u64,
    horizon: u64,
    delta: f64,
    lbar: f64,
    dim: usize,
) -> Result<f64, OptimizerError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(OptimizerError::InvalidDelta(delta));
    }
    if !(lbar > 0.0 && lbar.is_finite()) {
        return Err(OptimizerError::InvalidLipschitzEstimate(lbar));
    }
    let theta = theta_log_log(horizon, delta);
    let lp = log_plus((t + 2) as f64);
    let d = dim as f64;
    Ok(4096.0 * theta * lp * lp * (g_prev + 16.0 * theta * d * d * lbar * lbar))
}

/// Runs T iterations of the unbounded-domain loop. Unlike the bounded
/// rule, eta_t here depends only on information available before the
/// current draw (G' uses G_{t-1}).
#[allow(clippy::too_many_arguments)]
pub fn poem_unbounded_run(
    problem: &dyn StochasticProblem,
    x0: &Vector,
    r_eps: f64,
    horizon: u64,
    delta: f64,
    lbar: f64,
    rng: &mut RngStream,
    opts: &RunOptions,
) -> Result<RunOutput, OptimizerError> {
    if horizon == 0 {
        return Err(OptimizerError::EmptyBudget);
    }
    if !(r_eps > 0.0 && r_eps.is_finite()) {
        return Err(OptimizerError::InvalidInitialMovement(r_eps));
    }
    super::check_start(problem, x0)?;
    // Validate the (delta, lbar) pair once up front.
    gprime(0.0, 0, horizon, delta, lbar, problem.dim())?;

    let d = problem.dim() as f64;
    let mut x = x0.clone();
    let mut rbar = r_eps;
    let mut g_cum = KahanSum::new();
    let mut output = OutputTracker::new(x0.dim());
    let mut szo_calls = 0u64;
    let mut trace = Vec::new();
    let mut rbars = Vec::with_capacity(horizon as usize + 1);
    let mut history = opts.keep_history.then(|| RunHistory {
        points: vec![x0.clone()],
        g_primes: Some(Vec::new()),
        ..RunHistory::default()
    });

    for t in 0..horizon {
        let r = distance(&x, x0)?;
        rbar = rbar.max(r);
        output.consider(t, rbar);
        output.fold(rbar, &x);
        rbars.push(rbar);

        let mu = d * rbar / ((t + 1) as f64).powi(2);
        let g_prime = gprime(g_cum.value(), t, horizon, delta, lbar, problem.dim())?;
        let eta = rbar / g_prime.sqrt();

        let v = rng.sample_unit_sphere(x.dim()).expect("dim >= 1");
        let noise = problem.sample_noise(rng);
        let est = finite_difference(problem, &x, mu, &v, &noise)?;
        szo_calls += u64::from(est.szo_cost);
        g_cum.add(est.g.dot(&est.g)?);

        let x_before = x.clone();
        let moved = x.add_scaled(-eta, &est.g)?;
        x = problem.domain().project(&moved)?;

        if let Some(h) = history.as_mut() {
            h.points.push(x.clone());
            h.grads.push(est.g);
            h.etas.push(eta);
            h.mus.push(mu);
            h.g_cums.push(g_cum.value());
            h.g_primes.as_mut().expect("allocated above").push(g_prime);
        }
        if should_record(t, horizon, opts.record_stride) {
            let (f_xbar, f_xt) =
                objective_columns(problem, opts, &output.current_average(&x_before), &x_before);
            trace.push(TraceRecord {
                t,
                szo_calls,
                eta,
                mu,
                rbar,
                g_cum: g_prime,
                f_at_xbar: f_xbar,
                f_at_xt: f_xt,
                r,
            });
        }
    }

    let r = distance(&x, x0)?;
    rbar = rbar.max(r);
    output.consider(horizon, rbar);
    rbars.push(rbar);
    let (out, tau) = output.selected_output(x0);

    Ok(RunOutput {
        output: out,
        tau: Some(tau),
        x_final: x,
        szo_calls,
        trace,
        rbars,
        history,
    })
}
