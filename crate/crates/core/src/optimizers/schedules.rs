//! Fixed (eta_t, mu_t) schedules from the literature, run over the same
//! projected two-point scaffold as the adaptive methods.

use super::{
    objective_columns, should_record, OptimizerError, OutputTracker, RunHistory, RunOptions,
    RunOutput, TraceRecord,
};
use crate::estimator::finite_difference;
use crate::numeric::{KahanSum, KahanVec};
use crate::problems::StochasticProblem;
use crate::sampling::RngStream;
use crate::vectorspace::{distance, Vector};

/// A one-parameter family of per-step values: either constant or
/// scale/(t+1)^exponent with the step counter starting at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleCurve {
    Constant(f64),
    PowerDecay { scale: f64, exponent: f64 },
}

impl ScheduleCurve {
    /// Value at 0-based iteration index `t`; decaying curves are indexed
    /// from 1 to avoid a division by zero at the first step.
    pub fn at(&self, t: u64) -> f64 {
        match *self {
            ScheduleCurve::Constant(v) => v,
            ScheduleCurve::PowerDecay { scale, exponent } => {
                scale / ((t + 1) as f64).powf(exponent)
            }
        }
    }
}

/// A fixed step-size and smoothing schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedSchedule {
    pub eta: ScheduleCurve,
    pub mu: ScheduleCurve,
}

impl FixedSchedule {
    pub fn constant(eta: f64, mu: f64) -> Self {
        Self {
            eta: ScheduleCurve::Constant(eta),
            mu: ScheduleCurve::Constant(mu),
        }
    }

    /// Rescales the step-size curve, leaving smoothing untouched; used by
    /// sweeps that tune the 1/L factor of a published schedule.
    pub fn scale_eta(&self, factor: f64) -> Self {
        let eta = match self.eta {
            ScheduleCurve::Constant(v) => ScheduleCurve::Constant(v * factor),
            ScheduleCurve::PowerDecay { scale, exponent } => ScheduleCurve::PowerDecay {
                scale: scale * factor,
                exponent,
            },
        };
        Self { eta, mu: self.mu }
    }
}

/// Constant schedule eta = D/(L sqrt(dT)), mu = D sqrt(d/T).
pub fn tpbco_schedule(diameter: f64, lipschitz: f64, horizon: u64, dim: usize) -> FixedSchedule {
    let d = dim as f64;
    let t = horizon as f64;
    FixedSchedule::constant(
        diameter / (lipschitz * (d * t).sqrt()),
        diameter * (d / t).sqrt(),
    )
}

/// Time-decaying schedule eta_t = D/(L sqrt(d log(2d) t)) with the coarse
/// smoothing sequence mu_t = D/t.
pub fn tpge_schedule(diameter: f64, lipschitz: f64, dim: usize) -> FixedSchedule {
    let d = dim as f64;
    FixedSchedule {
        eta: ScheduleCurve::PowerDecay {
            scale: diameter / (lipschitz * (d * (2.0 * d).ln()).sqrt()),
            exponent: 0.5,
        },
        mu: ScheduleCurve::PowerDecay {
            scale: diameter,
            exponent: 1.0,
        },
    }
}

/// The same step sizes with the fine smoothing sequence mu_t = D/(d^2 t^2).
pub fn tpge_schedule_fine_mu(diameter: f64, lipschitz: f64, dim: usize) -> FixedSchedule {
    let d = dim as f64;
    FixedSchedule {
        mu: ScheduleCurve::PowerDecay {
            scale: diameter / (d * d),
            exponent: 2.0,
        },
        ..tpge_schedule(diameter, lipschitz, dim)
    }
}

/// Constant schedule eta = s0/(d L sqrt(T)), mu = s0 sqrt(d/T), valid on
/// unbounded domains; s0 is a caller-supplied estimate of the distance
/// from the start to a minimizer.
pub fn rsnso_schedule(s0: f64, lipschitz: f64, horizon: u64, dim: usize) -> FixedSchedule {
    let d = dim as f64;
    let t = horizon as f64;
    FixedSchedule::constant(s0 / (d * lipschitz * t.sqrt()), s0 * (d / t).sqrt())
}

/// Which point a fixed-schedule run returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    /// Plain average of the queried iterates x_0 .. x_{T-1} (the mode the
    /// baseline analyses bound).
    Uniform,
    /// The last iterate x_T.
    Last,
    /// The rbar-weighted average at the selected index, as in the adaptive
    /// method.
    PoemWeighted,
}

/// Projected SGD with externally fixed schedules. The estimator, oracle
/// accounting, and trace schema are shared with the adaptive runs; only
/// (eta_t, mu_t) and the output rule differ. A zero step size is legal and
/// leaves the iterate in place (the oracle is still charged).
pub fn projected_sgd_fixed(
    problem: &dyn StochasticProblem,
    x0: &Vector,
    schedule: &FixedSchedule,
    horizon: u64,
    rng: &mut RngStream,
    averaging: Averaging,
    opts: &RunOptions,
) -> Result<RunOutput, OptimizerError> {
    if horizon == 0 {
        return Err(OptimizerError::EmptyBudget);
    }
    super::check_start(problem, x0)?;

    let mut x = x0.clone();
    let mut rbar = 0.0f64; // distance telemetry only; no initial movement
    let mut g_cum = KahanSum::new();
    let mut uniform_sum = KahanVec::zeros(x0.dim());
    let mut tracker = OutputTracker::new(x0.dim());
    let mut szo_calls = 0u64;
    let mut trace = Vec::new();
    let mut rbars = Vec::with_capacity(horizon as usize + 1);
    let mut history = opts.keep_history.then(|| RunHistory {
        points: vec![x0.clone()],
        ..RunHistory::default()
    });

    for t in 0..horizon {
        let r = distance(&x, x0)?;
        rbar = rbar.max(r);
        rbars.push(rbar);
        match averaging {
            Averaging::Uniform => uniform_sum.add_scaled(1.0, x.as_slice()),
            Averaging::PoemWeighted => {
                tracker.consider(t, rbar);
                tracker.fold(rbar, &x);
            }
            Averaging::Last => {}
        }

        let mu = schedule.mu.at(t);
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(OptimizerError::NonPositiveMu { t, mu });
        }
        let eta = schedule.eta.at(t);

        let v = rng.sample_unit_sphere(x.dim()).expect("dim >= 1");
        let noise = problem.sample_noise(rng);
        let est = finite_difference(problem, &x, mu, &v, &noise)?;
        szo_calls += u64::from(est.szo_cost);
        g_cum.add(est.g.dot(&est.g)?);

        let x_before = x.clone();
        if eta != 0.0 {
            let moved = x.add_scaled(-eta, &est.g)?;
            x = problem.domain().project(&moved)?;
        }

        if let Some(h) = history.as_mut() {
            h.points.push(x.clone());
            h.grads.push(est.g);
            h.etas.push(eta);
            h.mus.push(mu);
            h.g_cums.push(g_cum.value());
        }
        if should_record(t, horizon, opts.record_stride) {
            let running_avg = match averaging {
                Averaging::Uniform => mean_of(&uniform_sum, t + 1),
                Averaging::Last => x_before.clone(),
                Averaging::PoemWeighted => tracker.current_average(&x_before),
            };
            let (f_xbar, f_xt) = objective_columns(problem, opts, &running_avg, &x_before);
            trace.push(TraceRecord {
                t,
                szo_calls,
                eta,
                mu,
                rbar,
                g_cum: g_cum.value(),
                f_at_xbar: f_xbar,
                f_at_xt: f_xt,
                r,
            });
        }
    }

    let r = distance(&x, x0)?;
    rbar = rbar.max(r);
    rbars.push(rbar);

    let (output, tau) = match averaging {
        Averaging::Uniform => (mean_of(&uniform_sum, horizon), None),
        Averaging::Last => (x.clone(), None),
        Averaging::PoemWeighted => {
            tracker.consider(horizon, rbar);
            let (out, tau) = tracker.selected_output(x0);
            (out, Some(tau))
        }
    };

    Ok(RunOutput {
        output,
        tau,
        x_final: x,
        szo_calls,
        trace,
        rbars,
        history,
    })
}

fn mean_of(sum: &KahanVec, count: u64) -> Vector {
    Vector::new(sum.values().iter().map(|s| s / count as f64).collect())
        .expect("finite mean of finite iterates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_synthetic_known_optimum;

    #[test]
    fn tpbco_values() {
        // D=1, L=1, d=4, T=100 -> eta = 1/20, mu = 0.2
        let s = tpbco_schedule(1.0, 1.0, 100, 4);
        assert_eq!(s.eta.at(0), 0.05);
        assert_eq!(s.mu.at(0), 0.2);
        // doubling L halves eta, leaves mu unchanged
        let s2 = tpbco_schedule(1.0, 2.0, 100, 4);
        assert_eq!(s2.eta.at(0), 0.025);
        assert_eq!(s2.mu.at(0), 0.2);
        // quadrupling T halves both
        let s4 = tpbco_schedule(1.0, 1.0, 400, 4);
        assert_eq!(s4.eta.at(0), 0.025);
        assert_eq!(s4.mu.at(0), 0.1);
    }

    #[test]
    fn tpge_values() {
        // D=1, L=1, d=2, t=1 -> eta_1 = 1/sqrt(2 ln 4)
        let s = tpge_schedule(1.0, 1.0, 2);
        assert!((s.eta.at(0) - 0.6005612043932249).abs() < 1e-15);
        // mu_t = 1/t
        assert!((s.mu.at(9) - 0.1).abs() < 1e-15);
        // eta decreasing in t
        for t in 0..50 {
            assert!(s.eta.at(t + 1) < s.eta.at(t));
        }
        // fine variant: mu_t = D/(d^2 t^2)
        let fine = tpge_schedule_fine_mu(1.0, 1.0, 2);
        assert!((fine.mu.at(0) - 0.25).abs() < 1e-15);
        assert!((fine.mu.at(1) - 0.0625).abs() < 1e-15);
        assert_eq!(fine.eta, s.eta);
    }

    #[test]
    fn rsnso_values() {
        // s0=1, d=4, L=1, T=100 -> eta = 1/40, mu = 0.2
        let s = rsnso_schedule(1.0, 1.0, 100, 4);
        assert_eq!(s.eta.at(0), 0.025);
        assert_eq!(s.mu.at(0), 0.2);
        // eta ~ 1/d, mu ~ sqrt(d)
        let s2 = rsnso_schedule(1.0, 1.0, 100, 16);
        assert_eq!(s2.eta.at(0), 0.025 / 4.0);
        assert_eq!(s2.mu.at(0), 0.4);
        // doubling s0 doubles both
        let s3 = rsnso_schedule(2.0, 1.0, 100, 4);
        assert_eq!(s3.eta.at(0), 0.05);
        assert_eq!(s3.mu.at(0), 0.4);
    }

    #[test]
    fn zero_step_size_freezes_iterates() {
        let p = make_synthetic_known_optimum(4, 0.5, 31);
        let x0 = Vector::zeros(4);
        let sched = FixedSchedule::constant(0.0, 0.1);
        let mut rng = RngStream::new(3);
        let out = projected_sgd_fixed(
            &p,
            &x0,
            &sched,
            25,
            &mut rng,
            Averaging::Uniform,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(out.x_final, x0);
        assert_eq!(out.output, x0);
        assert_eq!(out.szo_calls, 50);
    }

    #[test]
    fn single_step_uniform_average_is_start() {
        let p = make_synthetic_known_optimum(3, 0.2, 32);
        let x0 = Vector::zeros(3);
        let sched = tpbco_schedule(2.0, p.lipschitz_bound(), 1, 3);
        let mut rng = RngStream::new(4);
        let out = projected_sgd_fixed(
            &p,
            &x0,
            &sched,
            1,
            &mut rng,
            Averaging::Uniform,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(out.output, x0);
    }

    #[test]
    fn replay_is_bit_identical() {
        let p = make_synthetic_known_optimum(5, 0.3, 33);
        let x0 = Vector::zeros(5);
        let sched = tpbco_schedule(2.0, p.lipschitz_bound(), 100, 5);
        let run = || {
            let mut rng = RngStream::new(9);
            projected_sgd_fixed(
                &p,
                &x0,
                &sched,
                100,
                &mut rng,
                Averaging::Uniform,
                &RunOptions::default(),
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.output, b.output);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn non_positive_mu_is_rejected() {
        let p = make_synthetic_known_optimum(3, 0.0, 34);
        let x0 = Vector::zeros(3);
        let sched = FixedSchedule::constant(0.1, 0.0);
        let mut rng = RngStream::new(5);
        assert!(matches!(
            projected_sgd_fixed(
                &p,
                &x0,
                &sched,
                5,
                &mut rng,
                Averaging::Last,
                &RunOptions::default()
            ),
            Err(OptimizerError::NonPositiveMu { t: 0, .. })
        ));
    }

    #[test]
    fn last_iterate_mode_returns_final_point() {
        let p = make_synthetic_known_optimum(4, 0.1, 35);
        let x0 = Vector::zeros(4);
        let sched = tpbco_schedule(2.0, p.lipschitz_bound(), 50, 4);
        let mut rng = RngStream::new(6);
        let out = projected_sgd_fixed(
            &p,
            &x0,
            &sched,
            50,
            &mut rng,
            Averaging::Last,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(out.output, out.x_final);
    }
}
