//! CSV tables. Floats are written as shortest round-trip decimals.

use std::io::Write;

use num::{BigRational, ToPrimitive};
use serde::Serialize;
use twistor_core::flow::Sample;
use twistor_core::round::NormRow;
use twistor_core::FlowTrajectory;

pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "mu", "rho", "rho_mu", "invariant_C"];

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    mu: f64,
    rho: f64,
    rho_mu: f64,
    #[serde(rename = "invariant_C")]
    invariant_c: f64,
}

impl From<&Sample> for TrajectoryRow {
    fn from(s: &Sample) -> Self {
        TrajectoryRow {
            t: s.t,
            mu: s.mu,
            rho: s.rho,
            rho_mu: s.rho * s.mu,
            invariant_c: s.invariant,
        }
    }
}

#[derive(Serialize)]
struct PortraitRow {
    seed: usize,
    mu0: f64,
    rho0: f64,
    t: f64,
    mu: f64,
    rho: f64,
    rho_mu: f64,
    #[serde(rename = "invariant_C")]
    invariant_c: f64,
}

#[derive(Serialize)]
struct NormCsvRow {
    lambda: String,
    rm_norm_sq: String,
    rm_norm_sq_decimal: f64,
    nabla_rm_norm_sq: String,
    nabla_rm_norm_sq_decimal: f64,
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(true).from_writer(out)
}

/// One row per sample in increasing `t`; the last row is the state at the
/// terminal event (or at the end of the span).
pub fn write_trajectory<W: Write>(out: W, traj: &FlowTrajectory) -> csv::Result<()> {
    let mut w = writer(out);
    if traj.samples.is_empty() {
        w.write_record(TRAJECTORY_HEADER)?;
    }
    for s in &traj.samples {
        w.serialize(TrajectoryRow::from(s))?;
    }
    w.flush()?;
    Ok(())
}

/// Trajectories keyed by `seed`, the index of the initial condition in the
/// grid.
pub fn write_portrait<W: Write>(out: W, runs: &[(usize, f64, f64, FlowTrajectory)]) -> csv::Result<()> {
    let mut w = writer(out);
    if runs.is_empty() {
        let mut header = vec!["seed", "mu0", "rho0"];
        header.extend(TRAJECTORY_HEADER);
        w.write_record(header)?;
    }
    for (seed, mu0, rho0, traj) in runs {
        for s in &traj.samples {
            let row = TrajectoryRow::from(s);
            w.serialize(PortraitRow {
                seed: *seed,
                mu0: *mu0,
                rho0: *rho0,
                t: row.t,
                mu: row.mu,
                rho: row.rho,
                rho_mu: row.rho_mu,
                invariant_c: row.invariant_c,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

fn decimal(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact values as `numerator/denominator` next to their decimal rendering.
pub fn write_norm_table<W: Write>(out: W, rows: &[NormRow]) -> csv::Result<()> {
    let mut w = writer(out);
    if rows.is_empty() {
        w.write_record([
            "lambda",
            "rm_norm_sq",
            "rm_norm_sq_decimal",
            "nabla_rm_norm_sq",
            "nabla_rm_norm_sq_decimal",
        ])?;
    }
    for r in rows {
        w.serialize(NormCsvRow {
            lambda: r.lambda.to_string(),
            rm_norm_sq: r.rm_norm_sq.to_string(),
            rm_norm_sq_decimal: decimal(&r.rm_norm_sq),
            nabla_rm_norm_sq: r.nabla_rm_norm_sq.to_string(),
            nabla_rm_norm_sq_decimal: decimal(&r.nabla_rm_norm_sq),
        })?;
    }
    w.flush()?;
    Ok(())
}
