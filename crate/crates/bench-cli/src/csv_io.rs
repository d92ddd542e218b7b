//! Versioned CSV formats. Every float is printed with 17 significant
//! digits so that replaying a seeded experiment reproduces files byte for
//! byte.

use std::io::{BufRead, Write};

use poem_core::optimizers::TraceRecord;

use crate::BenchError;

pub const TRACE_SCHEMA: &str = "# poem-trace v1";
pub const TRACE_HEADER: &str = "t,szo_calls,f_xbar,f_xt,eta,mu,rbar,G,r";
pub const SWEEP_SCHEMA: &str = "# poem-sweep v1";
pub const SWEEP_HEADER: &str = "algo,grid_value,seed,final_objective";
pub const STEPSIZE_SCHEMA: &str = "# poem-stepsize v1";
pub const STEPSIZE_HEADER: &str = "r_eps,t,eta";

/// 17 significant digits, locale-independent.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn write_trace_csv<W: Write>(mut w: W, trace: &[TraceRecord]) -> Result<(), BenchError> {
    writeln!(w, "{TRACE_SCHEMA}")?;
    writeln!(w, "{TRACE_HEADER}")?;
    for rec in trace {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            rec.t,
            rec.szo_calls,
            fmt_opt(rec.f_at_xbar),
            fmt_opt(rec.f_at_xt),
            fmt_float(rec.eta),
            fmt_float(rec.mu),
            fmt_float(rec.rbar),
            fmt_float(rec.g_cum),
            fmt_float(rec.r),
        )?;
    }
    Ok(())
}

/// Reads a trace CSV back, rejecting any schema line other than the one
/// this version writes.
pub fn read_trace_csv<R: BufRead>(r: R) -> Result<Vec<TraceRecord>, BenchError> {
    let mut lines = r.lines();
    let schema = lines
        .next()
        .transpose()?
        .ok_or_else(|| BenchError::io("empty trace file"))?;
    if schema.trim() != TRACE_SCHEMA {
        return Err(BenchError::io(format!(
            "trace schema mismatch: expected `{TRACE_SCHEMA}`, found `{schema}`"
        )));
    }
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| BenchError::io("trace file missing column header"))?;
    if header.trim() != TRACE_HEADER {
        return Err(BenchError::io(format!(
            "trace header mismatch: `{header}`"
        )));
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(BenchError::io(format!(
                "trace row {} has {} columns, expected 9",
                lineno + 3,
                cols.len()
            )));
        }
        let num = |s: &str| -> Result<f64, BenchError> {
            s.parse()
                .map_err(|_| BenchError::io(format!("bad float `{s}` at row {}", lineno + 3)))
        };
        let opt = |s: &str| -> Result<Option<f64>, BenchError> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        out.push(TraceRecord {
            t: cols[0]
                .parse()
                .map_err(|_| BenchError::io(format!("bad t `{}`", cols[0])))?,
            szo_calls: cols[1]
                .parse()
                .map_err(|_| BenchError::io(format!("bad szo `{}`", cols[1])))?,
            f_at_xbar: opt(cols[2])?,
            f_at_xt: opt(cols[3])?,
            eta: num(cols[4])?,
            mu: num(cols[5])?,
            rbar: num(cols[6])?,
            g_cum: num(cols[7])?,
            r: num(cols[8])?,
        });
    }
    Ok(out)
}

/// One sweep summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub algo: &'static str,
    pub grid_value: f64,
    pub seed: u64,
    pub final_objective: f64,
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> Result<(), BenchError> {
    writeln!(w, "{SWEEP_SCHEMA}")?;
    writeln!(w, "{SWEEP_HEADER}")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{}",
            row.algo,
            fmt_float(row.grid_value),
            row.seed,
            fmt_float(row.final_objective)
        )?;
    }
    Ok(())
}

/// One long-format step-size row.
#[derive(Debug, Clone, PartialEq)]
pub struct StepsizeRow {
    pub r_eps: f64,
    pub t: u64,
    pub eta: f64,
}

pub fn write_stepsize_csv<W: Write>(mut w: W, rows: &[StepsizeRow]) -> Result<(), BenchError> {
    writeln!(w, "{STEPSIZE_SCHEMA}")?;
    writeln!(w, "{STEPSIZE_HEADER}")?;
    for row in rows {
        writeln!(w, "{},{},{}", fmt_float(row.r_eps), row.t, fmt_float(row.eta))?;
    }
    Ok(())
}
