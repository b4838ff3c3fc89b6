//! Grid-sampling estimate of a quantified range.
//!
//! Variables are sampled on finite grids and the prefix is resolved
//! directly: an existential variable takes the hull of its children and a
//! universal variable the intersection. The result is neither an inner nor
//! an outer approximation in general, but converges to the true range for
//! continuous outputs as the grids are refined and is exact on the
//! endpoint grid for affine outputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::BoundExpr;
use crate::interval::{Interval, Range};
use crate::problem::{QuantifiedProblem, Quantifier, QuantifierPrefix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Grid points per variable, at least 2.
    pub points: usize,
    /// Uniform grid through both endpoints when set; otherwise one random
    /// point per equal-width stratum, drawn from `seed`.
    pub include_endpoints: bool,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { points: 11, include_endpoints: true, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EstimateError {
    #[error("sampling needs at least 2 points per variable, got {0}")]
    TooFewPoints(usize),
    #[error("output `{0}` has no expression to sample")]
    NoExpression(String),
    #[error("output index {index} out of range ({count} outputs)")]
    NoSuchOutput { index: usize, count: usize },
    #[error("the sampling estimate is empty")]
    EmptyEstimate,
}

/// Number of output evaluations a sampling run performs.
pub fn sampling_cost(num_vars: usize, points: usize) -> f64 {
    (points as f64).powi(num_vars as i32)
}

fn grids(problem: &QuantifiedProblem, cfg: &SamplingConfig) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    problem
        .domains()
        .iter()
        .map(|d| {
            let (lo, hi) = (d.lo(), d.hi());
            let n = cfg.points;
            let step = (hi - lo) / (n - 1) as f64;
            if cfg.include_endpoints {
                (0..n).map(|k| if k == n - 1 { hi } else { lo + step * k as f64 }).collect()
            } else {
                let stratum = (hi - lo) / n as f64;
                (0..n).map(|k| (lo + stratum * (k as f64 + rng.gen::<f64>())).clamp(lo, hi)).collect()
            }
        })
        .collect()
}

fn resolve(
    prefix: &QuantifierPrefix,
    grids: &[Vec<f64>],
    x: &mut Vec<f64>,
    leaf: &(dyn Fn(&[f64]) -> Range + Sync),
) -> Range {
    let j = x.len();
    if j == grids.len() {
        return leaf(x);
    }
    let forall = prefix.quantifier_of(j) == Quantifier::ForAll;
    let mut acc: Option<Range> = None;
    for &g in &grids[j] {
        x.push(g);
        let r = resolve(prefix, grids, x, leaf);
        x.pop();
        acc = Some(match acc {
            None => r,
            Some(a) if forall => a.intersect(&r),
            Some(a) => a.hull(&r),
        });
        if forall && acc.is_some_and(|a| a.is_empty()) {
            return Range::Empty;
        }
    }
    acc.unwrap_or(Range::Empty)
}

/// Runs the recursion with the first variable's grid split across threads.
fn resolve_parallel(
    prefix: &QuantifierPrefix,
    grids: &[Vec<f64>],
    leaf: &(dyn Fn(&[f64]) -> Range + Sync),
) -> Range {
    if grids.is_empty() {
        return leaf(&[]);
    }
    let parts: Vec<Range> = grids[0]
        .par_iter()
        .map(|&g| {
            let mut x = Vec::with_capacity(grids.len());
            x.push(g);
            resolve(prefix, grids, &mut x, leaf)
        })
        .collect();
    let forall = prefix.quantifier_of(0) == Quantifier::ForAll;
    let mut it = parts.into_iter();
    let first = it.next().unwrap_or(Range::Empty);
    it.fold(first, |a, r| if forall { a.intersect(&r) } else { a.hull(&r) })
}

fn point_leaf(expr: &BoundExpr) -> impl Fn(&[f64]) -> Range + Sync + '_ {
    move |x| {
        let v = expr.eval_point(x);
        if v.is_nan() {
            Range::Empty
        } else {
            Range::Bounded(Interval::point(v))
        }
    }
}

/// Sampling estimate for output `index`.
pub fn sampling_estimate_output(
    problem: &QuantifiedProblem,
    index: usize,
    cfg: &SamplingConfig,
) -> Result<Range, EstimateError> {
    if cfg.points < 2 {
        return Err(EstimateError::TooFewPoints(cfg.points));
    }
    let out = problem
        .outputs()
        .get(index)
        .ok_or(EstimateError::NoSuchOutput { index, count: problem.outputs().len() })?;
    let expr = out.expr.as_ref().ok_or_else(|| EstimateError::NoExpression(out.name.clone()))?;
    let grids = grids(problem, cfg);
    Ok(resolve_parallel(problem.prefix(), &grids, &point_leaf(expr)))
}

/// Sampling estimate for every output, each resolved independently.
pub fn sampling_estimate(problem: &QuantifiedProblem, cfg: &SamplingConfig) -> Result<Vec<Range>, EstimateError> {
    (0..problem.outputs().len()).map(|i| sampling_estimate_output(problem, i, cfg)).collect()
}

/// Exact quantified range of `constant + Σ coeffs[j]·x_j` by resolving the
/// prefix over the domain endpoints only (affine extrema sit at vertices).
/// Arithmetic is plain `f64`, so the result is exact for dyadic data.
pub fn vertex_oracle_affine(constant: f64, coeffs: &[f64], prefix: &QuantifierPrefix, domains: &[Interval]) -> Range {
    let grids: Vec<Vec<f64>> = domains.iter().map(|d| vec![d.lo(), d.hi()]).collect();
    let leaf = |x: &[f64]| {
        let v = coeffs.iter().zip(x).fold(constant, |acc, (c, v)| acc + c * v);
        Range::Bounded(Interval::point(v))
    };
    let mut x = Vec::with_capacity(domains.len());
    resolve(prefix, &grids, &mut x, &leaf)
}

/// Width ratios of inner and outer intervals to the sampling estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tightness {
    pub inner: f64,
    pub outer: f64,
}

/// An empty inner interval has ratio 0. A degenerate estimate gives ratio
/// 1 against a degenerate interval and infinity otherwise.
pub fn tightness_ratios(inner: Range, outer: Range, estimate: Range) -> Result<Tightness, EstimateError> {
    let est = estimate.interval().ok_or(EstimateError::EmptyEstimate)?;
    let w = est.hi() - est.lo();
    let ratio = |r: Range| match r.interval() {
        None => 0.0,
        Some(iv) => {
            let v = iv.hi() - iv.lo();
            if w > 0.0 {
                v / w
            } else if v == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        }
    };
    Ok(Tightness { inner: ratio(inner), outer: ratio(outer) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::problem::{OutputSpec, Quantifier::Exists as E, Quantifier::ForAll as A, Variable};

    fn problem(text: &str, quants: &[Quantifier]) -> QuantifiedProblem {
        let vars = (0..quants.len()).map(|i| Variable::new(format!("x{}", i + 1), Interval::UNIT)).collect();
        QuantifiedProblem::new(
            vars,
            QuantifierPrefix::from_quantifiers(quants),
            vec![OutputSpec::expr("z", parse(text).unwrap())],
        )
        .unwrap()
    }

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn quadratic_dense_grid() {
        let p = problem("x1^2/4 + (x2+1)*(x3+2) + (x3+3)^2", &[E, A, E]);
        let cfg = SamplingConfig { points: 41, ..SamplingConfig::default() };
        let r = sampling_estimate_output(&p, 0, &cfg).unwrap().interval().unwrap();
        // for fixed x1 the x3-range is [x2 + 5, 3·x2 + 19] shifted by x1²/4;
        // intersecting over x2 leaves [6, 16] + x1²/4, and the hull over x1
        // is [6, 16.25], both ends on the grid
        assert_eq!((r.lo(), r.hi()), (6.0, 16.25));
    }

    #[test]
    fn constant_output() {
        let p = problem("3", &[A, E, A]);
        let r = sampling_estimate_output(&p, 0, &SamplingConfig::default()).unwrap();
        assert_eq!(r, Range::Bounded(Interval::point(3.0)));
    }

    #[test]
    fn vertex_recursion() {
        let unit = [Interval::UNIT; 4];
        let prefix = QuantifierPrefix::from_quantifiers(&[A, A, A, E]);
        let r = vertex_oracle_affine(-1.0, &[-1.0, -1.0, 1.0, 5.0], &prefix, &unit);
        assert_eq!(r, Range::Bounded(iv(-3.0, 1.0)));

        let prefix = QuantifierPrefix::from_quantifiers(&[A, E]);
        assert_eq!(vertex_oracle_affine(0.0, &[2.0, 1.0], &prefix, &unit[..2]), Range::Empty);
        assert_eq!(vertex_oracle_affine(0.0, &[0.0, 0.0], &prefix, &unit[..2]), Range::Bounded(Interval::ZERO));
    }

    #[test]
    fn endpoint_grid_on_affine_component() {
        let p = QuantifiedProblem::new(
            ["x1", "x2", "x4", "x3"].iter().map(|n| Variable::new(*n, Interval::UNIT)).collect(),
            QuantifierPrefix::from_quantifiers(&[E, A, A, E]),
            vec![OutputSpec::expr("z", parse("2 + 2*x1 + x2 + 3*x3 + x4").unwrap())],
        )
        .unwrap();
        let cfg = SamplingConfig { points: 2, ..SamplingConfig::default() };
        assert_eq!(sampling_estimate_output(&p, 0, &cfg).unwrap(), Range::Bounded(iv(-1.0, 5.0)));
    }

    #[test]
    fn ratios() {
        let est = Range::Bounded(iv(6.25, 16.25));
        let t = tightness_ratios(iv(10.0, 12.0).into(), iv(1.5, 20.5).into(), est).unwrap();
        assert!((t.inner - 0.2).abs() < 1e-15 && (t.outer - 1.9).abs() < 1e-15);
        let t = tightness_ratios(Range::Empty, est, est).unwrap();
        assert_eq!((t.inner, t.outer), (0.0, 1.0));
        assert_eq!(tightness_ratios(est, est, Range::Empty).unwrap_err(), EstimateError::EmptyEstimate);
    }

    #[test]
    fn random_grid_is_seeded() {
        let p = problem("x1*x2 + x3^2", &[E, A, E]);
        let cfg = SamplingConfig { points: 7, include_endpoints: false, seed: 42 };
        let a = sampling_estimate_output(&p, 0, &cfg).unwrap();
        assert_eq!(a, sampling_estimate_output(&p, 0, &cfg).unwrap());
        assert!(sampling_estimate_output(&p, 0, &SamplingConfig { points: 1, ..cfg }).is_err());
    }
}
