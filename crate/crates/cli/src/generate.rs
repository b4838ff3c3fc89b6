//! Benchmark problem families.
//!
//! `linear(k, seed)` is a random affine function of `2k` variables on
//! `[-1, 1]` under `k` alternations `∀x_{2i-1} ∃x_{2i}`. `motion(k)` is the
//! abscissa of a perturbed unicycle after `k` control periods of length
//! one half, with per-period turn rates `a_i` (existential) and speed
//! disturbances `b_i` (universal):
//!
//! `x = x0 + Σ_i 0.5·msin(θ0 + 0.5·(a_1 + … + a_{i-1}), 0.5·a_i) + 0.5·Σ_i b_i + δ`
//!
//! under `∃x0 ∃θ0 ∃a_1 ∀b_1 … ∃a_k ∀b_k ∃δ`, where `δ` is a spatial
//! tolerance.

use quantrange_core::problem::Quantifier;
use quantrange_core::Interval;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem_file::{BlockEntry, OutputEntry, ProblemFile, VariableEntry, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Motion,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Linear => "linear",
            Family::Motion => "motion",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("the size parameter k must be at least 1")]
    ZeroSize,
}

/// Half-width of each turn-rate, disturbance and initial-angle domain.
pub const MOTION_CONTROL_RADIUS: f64 = 0.01;
/// Half-width of the initial abscissa domain.
pub const MOTION_START_RADIUS: f64 = 0.1;

/// Radius of the tolerance `δ` for `k` periods. Each disturbance removes
/// `0.01` from the slack of the prefix conditions while the turn rates add
/// next to nothing, so the tolerance grows with `k` to keep the inner
/// interval non-empty.
pub fn motion_tolerance(k: usize) -> f64 {
    0.01 * k as f64
}

pub fn generate(family: Family, k: usize, seed: u64) -> Result<ProblemFile, GenError> {
    match family {
        Family::Linear => linear(k, seed),
        Family::Motion => motion(k),
    }
}

fn variable(name: String, radius: f64, block: usize) -> VariableEntry {
    VariableEntry { name, domain: Interval::new(-radius, radius).expect("radius is non-negative"), center: None, block }
}

fn block(q: Quantifier) -> BlockEntry {
    BlockEntry { quantifier: q }
}

fn file(variables: Vec<VariableEntry>, blocks: Vec<BlockEntry>, expr: String) -> ProblemFile {
    ProblemFile {
        schema: SCHEMA_VERSION,
        variables,
        blocks,
        outputs: vec![OutputEntry { name: "z".to_string(), expr: Some(expr) }],
        contributions: Default::default(),
        options: Default::default(),
    }
}

pub fn linear(k: usize, seed: u64) -> Result<ProblemFile, GenError> {
    if k == 0 {
        return Err(GenError::ZeroSize);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut variables = Vec::with_capacity(2 * k);
    let mut blocks = Vec::with_capacity(2 * k);
    let mut expr = String::new();
    for i in 1..=2 * k {
        let q = if i % 2 == 1 { Quantifier::ForAll } else { Quantifier::Exists };
        blocks.push(block(q));
        variables.push(variable(format!("x{i}"), 1.0, i - 1));
        let c: f64 = rng.gen_range(-1.0..=1.0);
        if expr.is_empty() {
            expr = format!("{c:?}*x{i}");
        } else if c < 0.0 {
            expr.push_str(&format!(" - {:?}*x{i}", -c));
        } else {
            expr.push_str(&format!(" + {c:?}*x{i}"));
        }
    }
    Ok(file(variables, blocks, expr))
}

pub fn motion(k: usize) -> Result<ProblemFile, GenError> {
    if k == 0 {
        return Err(GenError::ZeroSize);
    }
    let mut variables = vec![
        variable("x0".to_string(), MOTION_START_RADIUS, 0),
        variable("theta0".to_string(), MOTION_CONTROL_RADIUS, 0),
    ];
    let mut blocks = vec![block(Quantifier::Exists)];
    for i in 1..=k {
        let exists_block = if i == 1 { 0 } else { blocks.len() - 1 };
        variables.push(variable(format!("a{i}"), MOTION_CONTROL_RADIUS, exists_block));
        blocks.push(block(Quantifier::ForAll));
        variables.push(variable(format!("b{i}"), MOTION_CONTROL_RADIUS, blocks.len() - 1));
        blocks.push(block(Quantifier::Exists));
    }
    variables.push(variable("delta".to_string(), motion_tolerance(k), blocks.len() - 1));

    let mut terms = vec!["x0".to_string()];
    for i in 1..=k {
        let heading = if i == 1 {
            "theta0".to_string()
        } else {
            let turned: Vec<String> = (1..i).map(|l| format!("a{l}")).collect();
            format!("theta0 + 0.5*({})", turned.join(" + "))
        };
        terms.push(format!("0.5*msin({heading}, 0.5*a{i})"));
    }
    let drift: Vec<String> = (1..=k).map(|i| format!("b{i}")).collect();
    terms.push(format!("0.5*({})", drift.join(" + ")));
    terms.push("delta".to_string());
    Ok(file(variables, blocks, terms.join(" + ")))
}
