//! Solving a loaded problem and the resulting report.
//!
//! Reports serialize to JSON with every bound written as the shortest
//! decimal that parses back to the same `f64`, so a reloaded report is
//! bit-identical.

use std::fmt::Write as _;
use std::time::Instant;

use quantrange_core::estimate::{
    sampling_cost, sampling_estimate_output, tightness_ratios, EstimateError, SamplingConfig, Tightness,
};
use quantrange_core::scalar::{EmptyCause, SolveError, SolveMethod, SolveOptions};
use quantrange_core::vector::{inner_vector, PiSearch, VectorOptions};
use quantrange_core::{IntervalBox, Range};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem_file::LoadedProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub outputs: Vec<OutputReport>,
    pub joint: JointReport,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputReport {
    pub name: String,
    pub method: SolveMethod,
    pub outer: Range,
    pub inner: Range,
    pub conditions: Conditions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Tightness>,
}

/// Grid-sampling estimate; `estimate` is `null` when the sampled set is
/// empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub points: usize,
    pub estimate: Range,
}

/// Why an interval came out empty, if it did.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    pub inner_empty: Option<EmptyCause>,
    pub outer_empty: Option<EmptyCause>,
    /// For the component of the joint inner box.
    pub joint_inner_empty: Option<EmptyCause>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointReport {
    pub outer: Option<IntervalBox>,
    pub inner: Option<IntervalBox>,
    /// Per-component inner intervals under the assignment.
    pub components: Vec<Range>,
    pub pi: Vec<PiEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiEntry {
    pub variable: String,
    pub output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub solve_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_seconds: Option<f64>,
}

/// Overrides from the command line; `None` defers to the problem file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub search: Option<PiSearch>,
    pub sample_points: Option<usize>,
    /// Largest number of point evaluations a sampling run may take.
    pub sample_budget: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings { search: None, sample_points: None, sample_budget: 1e8 }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error("sampling would take {cost:.3e} evaluations, above the budget of {budget:.3e}")]
    SampleBudget { cost: f64, budget: f64 },
}

pub fn solve(loaded: &LoadedProblem, settings: &SolveSettings) -> Result<Report, RunError> {
    let problem = &loaded.problem;
    let options = VectorOptions {
        solve: SolveOptions { derivative_box: loaded.derivative_box },
        exhaustive_limit: loaded.exhaustive_limit,
        search: settings.search.unwrap_or_default(),
    };
    let pi = if settings.search.is_some() { None } else { loaded.assignment.as_ref() };

    let start = Instant::now();
    let result = inner_vector(problem, pi, &options)?;
    let solve_seconds = start.elapsed().as_secs_f64();

    let points = settings
        .sample_points
        .or_else(|| loaded.sampling.filter(|s| s.enabled).map(|s| s.points));
    let mut sampling_seconds = None;
    let mut samples: Vec<Option<Sample>> = vec![None; problem.outputs().len()];
    if let Some(points) = points {
        let cost = sampling_cost(problem.num_vars(), points);
        if cost > settings.sample_budget {
            return Err(RunError::SampleBudget { cost, budget: settings.sample_budget });
        }
        let cfg = SamplingConfig { points, ..SamplingConfig::default() };
        let start = Instant::now();
        for (i, out) in problem.outputs().iter().enumerate() {
            if out.expr.is_some() {
                samples[i] = Some(Sample { points, estimate: sampling_estimate_output(problem, i, &cfg)? });
            }
        }
        sampling_seconds = Some(start.elapsed().as_secs_f64());
    }

    let outputs = result
        .components
        .iter()
        .zip(samples)
        .map(|(c, sampling)| OutputReport {
            name: c.name.clone(),
            method: c.outer.method,
            outer: c.outer.outer,
            inner: c.outer.inner,
            conditions: Conditions {
                inner_empty: c.outer.inner_empty,
                outer_empty: c.outer.outer_empty,
                joint_inner_empty: c.inner.inner_empty,
            },
            ratios: sampling
                .filter(|s| !s.estimate.is_empty())
                .map(|s| tightness_ratios(c.outer.inner, c.outer.outer, s.estimate).expect("estimate is non-empty")),
            sampling,
        })
        .collect();

    let names = problem.names();
    let pi = result
        .assignment
        .iter()
        .map(|(v, j)| PiEntry { variable: names[v].clone(), output: problem.outputs()[j].name.clone() })
        .collect();
    Ok(Report {
        outputs,
        joint: JointReport {
            outer: result.joint_outer(),
            inner: result.joint_inner(),
            components: result.components.iter().map(|c| c.inner.inner).collect(),
            pi,
        },
        timings: Timings { solve_seconds, sampling_seconds },
    })
}

fn range_text(r: &Range) -> String {
    match r {
        Range::Empty => "empty".to_string(),
        Range::Bounded(iv) => format!("[{:.16e}, {:.16e}]", iv.lo(), iv.hi()),
    }
}

fn cause_text(c: &Option<EmptyCause>) -> String {
    match c {
        None => String::new(),
        Some(EmptyCause::Condition { pair }) => format!("  (condition of quantifier pair {} fails)", pair + 1),
        Some(EmptyCause::Crossed) => "  (bounds cross after rounding)".to_string(),
    }
}

impl Report {
    /// Plain-text rendering for the terminal.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for o in &self.outputs {
            let _ = writeln!(s, "{} ({})", o.name, serde_json::to_value(o.method).unwrap().as_str().unwrap_or(""));
            let _ = writeln!(s, "  outer  {}{}", range_text(&o.outer), cause_text(&o.conditions.outer_empty));
            let _ = writeln!(s, "  inner  {}{}", range_text(&o.inner), cause_text(&o.conditions.inner_empty));
            if let Some(est) = &o.sampling {
                let _ = writeln!(s, "  sample {}  ({} points per variable)", range_text(&est.estimate), est.points);
            }
            if let Some(t) = &o.ratios {
                let _ = writeln!(s, "  inner/sample {:.4}  outer/sample {:.4}", t.inner, t.outer);
            }
        }
        if self.outputs.len() > 1 {
            let boxed = |b: &Option<IntervalBox>| b.as_ref().map_or("empty".to_string(), |b| b.to_string());
            let _ = writeln!(s, "joint outer  {}", boxed(&self.joint.outer));
            let _ = writeln!(s, "joint inner  {}", boxed(&self.joint.inner));
            for (o, r) in self.outputs.iter().zip(&self.joint.components) {
                let _ = writeln!(s, "  {}: {}{}", o.name, range_text(r), cause_text(&o.conditions.joint_inner_empty));
            }
            let assigned: Vec<String> = self.joint.pi.iter().map(|e| format!("{}->{}", e.variable, e.output)).collect();
            let _ = writeln!(s, "assignment   {}", assigned.join(", "));
        }
        let _ = write!(s, "solve time   {:.3} s", self.timings.solve_seconds);
        if let Some(t) = self.timings.sampling_seconds {
            let _ = write!(s, ", sampling {t:.3} s");
        }
        s.push('\n');
        s
    }
}
