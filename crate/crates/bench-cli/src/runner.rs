//! Command execution: seeded runs over parameter grids, a work pool across
//! (grid x seed), and deterministic file emission.

use std::fs::File;
use std::io::{BufWriter, Write};

use rayon::prelude::*;

use poem_core::optimizers::{
    poem_run, poem_unbounded_run, projected_sgd_fixed, rsnso_schedule, tpbco_schedule,
    tpge_schedule, tpge_schedule_fine_mu, Averaging, FixedSchedule, RunOptions, RunOutput,
};
use poem_core::problems::StochasticProblem;
use poem_core::sampling::RngStream;
use poem_core::vectorspace::Vector;

use crate::csv_io::{
    fmt_float, write_stepsize_csv, write_sweep_csv, write_trace_csv, StepsizeRow, SweepRow,
};
use crate::spec::{build_problem, Algorithm, AveragingMode, ExperimentSpec, TpgeMu};
use crate::BenchError;

/// Library version recorded in manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn averaging_of(spec: &ExperimentSpec) -> Averaging {
    match spec.averaging {
        AveragingMode::Uniform => Averaging::Uniform,
        AveragingMode::Last => Averaging::Last,
    }
}

fn baseline_schedule(
    spec: &ExperimentSpec,
    problem: &dyn StochasticProblem,
    eta_multiplier: Option<f64>,
) -> Result<FixedSchedule, BenchError> {
    let d = problem.dim();
    let diameter = problem.domain().diameter();
    // With a multiplier, the 1/L factor of the published schedule is
    // replaced by the grid value; otherwise the problem's own constant is
    // used.
    let lipschitz = if eta_multiplier.is_some() {
        1.0
    } else {
        problem.lipschitz_bound()
    };
    let base = match spec.algorithm {
        Algorithm::Tpbco => {
            require_bounded(diameter, "tpbco")?;
            tpbco_schedule(diameter, lipschitz, spec.iters, d)
        }
        Algorithm::Tpge => {
            require_bounded(diameter, "tpge")?;
            match spec.tpge_mu {
                TpgeMu::Coarse => tpge_schedule(diameter, lipschitz, d),
                TpgeMu::Fine => tpge_schedule_fine_mu(diameter, lipschitz, d),
            }
        }
        Algorithm::Rsnso => rsnso_schedule(spec.s0, lipschitz, spec.iters, d),
        Algorithm::Poem | Algorithm::PoemUnbounded => {
            unreachable!("adaptive methods have no fixed schedule")
        }
    };
    Ok(match eta_multiplier {
        Some(m) => base.scale_eta(m),
        None => base,
    })
}

fn require_bounded(diameter: f64, algo: &str) -> Result<(), BenchError> {
    if diameter.is_finite() {
        Ok(())
    } else {
        Err(BenchError::spec(format!(
            "{algo} needs a bounded domain (its schedule uses the diameter)"
        )))
    }
}

/// Executes one seeded run. For the adaptive methods `grid_value`
/// overrides the initial movement; for the baselines it replaces the 1/L
/// factor of the step size.
pub fn run_once(
    spec: &ExperimentSpec,
    problem: &dyn StochasticProblem,
    grid_value: Option<f64>,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunOutput, BenchError> {
    let x0 = Vector::zeros(problem.dim());
    let mut rng = RngStream::new(seed);
    let out = match spec.algorithm {
        Algorithm::Poem => poem_run(
            problem,
            &x0,
            grid_value.unwrap_or(spec.r_eps),
            spec.iters,
            &mut rng,
            opts,
        ),
        Algorithm::PoemUnbounded => poem_unbounded_run(
            problem,
            &x0,
            grid_value.unwrap_or(spec.r_eps),
            spec.iters,
            spec.delta,
            spec.lbar.unwrap_or_else(|| problem.lipschitz_bound()),
            &mut rng,
            opts,
        ),
        Algorithm::Tpbco | Algorithm::Tpge | Algorithm::Rsnso => {
            let schedule = baseline_schedule(spec, problem, grid_value)?;
            projected_sgd_fixed(
                problem,
                &x0,
                &schedule,
                spec.iters,
                &mut rng,
                averaging_of(spec),
                opts,
            )
        }
    }
    .map_err(|e| BenchError::spec(e.to_string()))?;
    Ok(out)
}

fn create_out_dir(spec: &ExperimentSpec) -> Result<(), BenchError> {
    std::fs::create_dir_all(&spec.out)
        .map_err(|e| BenchError::io(format!("cannot create {}: {e}", spec.out.display())))
}

fn write_manifest(
    spec: &ExperimentSpec,
    command: &str,
    grid: &[f64],
) -> Result<(), BenchError> {
    let path = spec.out.join("manifest.txt");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "# poem-bench manifest v1")?;
    writeln!(w, "version = {VERSION}")?;
    writeln!(w, "command = {command}")?;
    writeln!(w, "algo = {}", spec.algorithm.name())?;
    writeln!(w, "dataset = {}", spec.source)?;
    writeln!(w, "radius = {}", fmt_float(spec.radius))?;
    writeln!(w, "iters = {}", spec.iters)?;
    writeln!(
        w,
        "seeds = {}",
        spec.seeds
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    )?;
    writeln!(w, "r_eps = {}", fmt_float(spec.r_eps))?;
    writeln!(w, "delta = {}", fmt_float(spec.delta))?;
    writeln!(w, "s0 = {}", fmt_float(spec.s0))?;
    if let Some(lbar) = spec.lbar {
        writeln!(w, "lbar = {}", fmt_float(lbar))?;
    }
    writeln!(w, "stride = {}", spec.stride)?;
    writeln!(
        w,
        "grid = {}",
        grid.iter().map(|g| fmt_float(*g)).collect::<Vec<_>>().join(",")
    )?;
    writeln!(w, "reporting = median over seeds")?;
    Ok(())
}

/// A worker outcome tagged with its (grid value, seed) pair.
type TaggedResult<T> = ((f64, u64), Result<T, BenchError>);
type Tagged<T> = ((f64, u64), T);

/// Collects worker results, reporting every failed (grid, seed) pair on
/// stderr before surfacing the first error.
fn join_results<T: Send>(results: Vec<TaggedResult<T>>) -> Result<Vec<Tagged<T>>, BenchError> {
    let mut ok = Vec::with_capacity(results.len());
    let mut first_err: Option<BenchError> = None;
    for ((grid, seed), res) in results {
        match res {
            Ok(v) => ok.push(((grid, seed), v)),
            Err(e) => {
                eprintln!("run failed (grid={grid}, seed={seed}): {e}");
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    match first_err {
        None => Ok(ok),
        Some(e) => Err(e),
    }
}

fn final_objective(
    problem: &dyn StochasticProblem,
    out: &RunOutput,
) -> Result<f64, BenchError> {
    problem
        .exact_objective(&out.output)
        .ok_or_else(|| BenchError::spec("problem does not expose an exact objective"))
}

/// `run`: full value traces, one CSV per (grid point, seed).
pub fn cmd_run(spec: &ExperimentSpec) -> Result<(), BenchError> {
    let problem = build_problem(spec)?;
    let problem = problem.as_dyn();
    create_out_dir(spec)?;
    let grid: Vec<Option<f64>> = match &spec.grid {
        Some(g) => g.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let opts = RunOptions {
        record_stride: spec.stride,
        keep_history: false,
        eval_objective: true,
    };

    let mut jobs = Vec::new();
    for (gi, g) in grid.iter().enumerate() {
        for &seed in &spec.seeds {
            jobs.push((gi, *g, seed));
        }
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(gi, g, seed)| {
            let tag = (g.unwrap_or(spec.r_eps), seed);
            let res = run_once(spec, problem, g, seed, &opts).and_then(|out| {
                let name = trace_file_name(spec, gi, seed, grid.len());
                let path = spec.out.join(name);
                let mut w = BufWriter::new(File::create(&path)?);
                write_trace_csv(&mut w, &out.trace)?;
                Ok(())
            });
            (tag, res)
        })
        .collect();
    join_results(results)?;
    let grid_values: Vec<f64> = grid.iter().map(|g| g.unwrap_or(spec.r_eps)).collect();
    write_manifest(spec, "run", &grid_values)?;
    Ok(())
}

fn trace_file_name(spec: &ExperimentSpec, gi: usize, seed: u64, grid_len: usize) -> String {
    if grid_len == 1 {
        format!("trace-{}-s{}.csv", spec.algorithm.name(), seed)
    } else {
        format!("trace-{}-g{}-s{}.csv", spec.algorithm.name(), gi, seed)
    }
}

/// `sweep`: final objective value per (grid value, seed), one summary CSV.
pub fn cmd_sweep(spec: &ExperimentSpec) -> Result<(), BenchError> {
    let problem = build_problem(spec)?;
    let problem = problem.as_dyn();
    create_out_dir(spec)?;
    let grid: Vec<f64> = spec
        .grid
        .clone()
        .unwrap_or_else(|| crate::spec::DEFAULT_GRID.to_vec());
    let opts = RunOptions {
        record_stride: spec.iters, // only endpoints matter here
        keep_history: false,
        eval_objective: false,
    };

    let mut jobs = Vec::new();
    for &g in &grid {
        for &seed in &spec.seeds {
            jobs.push((g, seed));
        }
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(g, seed)| {
            let res = run_once(spec, problem, Some(g), seed, &opts)
                .and_then(|out| final_objective(problem, &out));
            ((g, seed), res)
        })
        .collect();
    let mut rows: Vec<SweepRow> = join_results(results)?
        .into_iter()
        .map(|((g, seed), f)| SweepRow {
            algo: spec.algorithm.name(),
            grid_value: g,
            seed,
            final_objective: f,
        })
        .collect();
    // jobs were pushed grid-major, and join preserves order; sort anyway so
    // the file layout never depends on scheduling
    rows.sort_by(|a, b| {
        a.grid_value
            .total_cmp(&b.grid_value)
            .then(a.seed.cmp(&b.seed))
    });
    let mut w = BufWriter::new(File::create(spec.out.join("summary.csv"))?);
    write_sweep_csv(&mut w, &rows)?;
    write_manifest(spec, "sweep", &grid)?;
    Ok(())
}

/// `stepsize-trace`: long-format (r_eps, t, eta) rows for overlaying
/// adaptive step-size curves across initial movements; one CSV per seed.
pub fn cmd_stepsize_trace(spec: &ExperimentSpec) -> Result<(), BenchError> {
    if spec.algorithm != Algorithm::Poem {
        return Err(BenchError::spec(
            "stepsize-trace compares initial movements and only applies to `poem`",
        ));
    }
    let problem = build_problem(spec)?;
    let problem = problem.as_dyn();
    create_out_dir(spec)?;
    let grid: Vec<f64> = spec.grid.clone().unwrap_or_else(|| vec![1e-4, 1e-2]);
    let opts = RunOptions {
        record_stride: spec.stride,
        keep_history: false,
        eval_objective: false,
    };

    let results: Vec<_> = spec
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut rows = Vec::new();
            for &r_eps in &grid {
                match run_once(spec, problem, Some(r_eps), seed, &opts) {
                    Ok(out) => {
                        rows.extend(out.trace.iter().map(|rec| StepsizeRow {
                            r_eps,
                            t: rec.t,
                            eta: rec.eta,
                        }));
                    }
                    Err(e) => return ((r_eps, seed), Err(e)),
                }
            }
            ((f64::NAN, seed), Ok(rows))
        })
        .collect();
    let per_seed = join_results(results)?;
    for ((_, seed), rows) in &per_seed {
        let path = spec.out.join(format!("stepsize-s{seed}.csv"));
        let mut w = BufWriter::new(File::create(path)?);
        write_stepsize_csv(&mut w, rows)?;
    }
    write_manifest(spec, "stepsize-trace", &grid)?;
    Ok(())
}
