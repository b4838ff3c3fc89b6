//! Timing runs over generated problem families.

use std::io::Write;
use std::time::Instant;

use quantrange_core::vector::{inner_vector, VectorOptions};
use quantrange_core::Range;
use serde::Serialize;
use thiserror::Error;

use crate::generate::{generate, Family, GenError};
use crate::problem_file::LoadError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub family: Family,
    pub k: usize,
    pub variables: usize,
    pub alternations: usize,
    /// Wall time for the inner and outer intervals together.
    pub seconds: f64,
    pub inner_lo: Option<f64>,
    pub inner_hi: Option<f64>,
    pub outer_lo: Option<f64>,
    pub outer_hi: Option<f64>,
    /// Inner and outer intervals coincide (both possibly empty).
    pub exact: bool,
    /// Inner width over outer width; absent when the outer interval is
    /// empty or degenerate.
    pub inner_over_outer: Option<f64>,
}

impl BenchRow {
    pub fn inner(&self) -> Range {
        bounds(self.inner_lo, self.inner_hi)
    }

    pub fn outer(&self) -> Range {
        bounds(self.outer_lo, self.outer_hi)
    }
}

fn bounds(lo: Option<f64>, hi: Option<f64>) -> Range {
    match (lo, hi) {
        (Some(lo), Some(hi)) => Range::from_bounds(lo, hi),
        _ => Range::Empty,
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Solve(#[from] quantrange_core::scalar::SolveError),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Generates and solves one instance. Generation and validation are not
/// timed.
pub fn run_one(family: Family, k: usize, seed: u64) -> Result<BenchRow, BenchError> {
    let loaded = generate(family, k, seed)?.build(None)?;
    let problem = &loaded.problem;
    let start = Instant::now();
    let result = inner_vector(problem, None, &VectorOptions::default())?;
    let seconds = start.elapsed().as_secs_f64();
    let c = &result.components[0].outer;
    let (inner, outer) = (c.inner, c.outer);
    let lo = |r: Range| r.interval().map(|i| i.lo());
    let hi = |r: Range| r.interval().map(|i| i.hi());
    let inner_over_outer = match (inner.interval(), outer.interval()) {
        (_, Some(o)) if o.hi() > o.lo() => Some(inner.width() / (o.hi() - o.lo())),
        _ => None,
    };
    Ok(BenchRow {
        family,
        k,
        variables: problem.num_vars(),
        alternations: problem.prefix().pairs(),
        seconds,
        inner_lo: lo(inner),
        inner_hi: hi(inner),
        outer_lo: lo(outer),
        outer_hi: hi(outer),
        exact: inner == outer,
        inner_over_outer,
    })
}

/// Runs the instances in order so that timings do not compete.
pub fn run(family: Family, ks: &[usize], seed: u64) -> Result<Vec<BenchRow>, BenchError> {
    ks.iter().map(|&k| run_one(family, k, seed)).collect()
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let rows = run(Family::Linear, &[2, 3], 1).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("family,k,variables,alternations,seconds,"));
        assert!(lines[1].starts_with("linear,2,4,2,"));
    }
}
