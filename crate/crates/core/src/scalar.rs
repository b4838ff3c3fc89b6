//! Inner and outer intervals for a single quantified output.
//!
//! Affine outputs are solved exactly from block-wise ℓ1 norms. Other outputs
//! are linearized around the center point: each variable gets an outer
//! offset interval `O_j` that contains every change it can cause and an
//! inner offset `I_j` that it can always realize, and the alternating
//! prefix is resolved on those offsets.
//!
//! Inner bounds are rounded inward and outer bounds outward. Emptiness of
//! the inner interval is decided on pessimistic (rounded) quantities, so a
//! reported non-empty inner interval is sound in floating point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{AffineForm, EvalError};
use crate::interval::{round, Interval, Range};
use crate::problem::{ContributionRow, QuantifiedProblem, QuantifierPrefix, Variable};

/// Where partial derivatives are enclosed when building contributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeBox {
    /// Every variable ranges over its whole domain.
    #[default]
    FullDomain,
    /// For variable `j`, variables after `j` are fixed at their centers.
    PinTrailing,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveOptions {
    pub derivative_box: DerivativeBox,
}

/// Why an interval was reported empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyCause {
    /// The solvability condition of the given `∀∃` pair (0-based) failed.
    Condition { pair: usize },
    /// All conditions held but rounding made the bounds cross.
    Crossed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Affine,
    MeanValue,
    Supplied,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarResult {
    pub inner: Range,
    pub outer: Range,
    pub inner_empty: Option<EmptyCause>,
    pub outer_empty: Option<EmptyCause>,
    pub method: SolveMethod,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("output `{output}`: {source}")]
    Eval { output: String, source: EvalError },
    #[error("output index {index} out of range ({count} outputs)")]
    NoSuchOutput { index: usize, count: usize },
    #[error("output `{0}` has no expression to differentiate")]
    NoExpression(String),
}

/// Sums of offset end points over one block.
fn block_sum(vals: &[Interval], vars: std::ops::Range<usize>, pick: impl Fn(&Interval) -> f64) -> Interval {
    vals[vars].iter().map(|iv| Interval::point(pick(iv))).sum()
}

fn block_width(vals: &[Interval], vars: std::ops::Range<usize>) -> Interval {
    vals[vars].iter().map(Interval::width_enclosure).sum()
}

/// First pair `l` whose suffix sum `Σ_{k≥l} slack[k]` fails `ok`.
fn failing_pair(slack: &[Interval], ok: impl Fn(&Interval) -> bool) -> Option<usize> {
    let mut suffix = Interval::ZERO;
    let mut failed = None;
    for l in (0..slack.len()).rev() {
        suffix = suffix + slack[l];
        if !ok(&suffix) {
            failed = Some(l);
        }
    }
    failed
}

/// Builds the result from enclosures of the lower and upper bound
/// expressions plus the inner and outer condition slacks per pair.
fn assemble(
    inner_lo: Interval,
    inner_hi: Interval,
    inner_slack: &[Interval],
    outer_lo: Interval,
    outer_hi: Interval,
    outer_slack: &[Interval],
    method: SolveMethod,
) -> ScalarResult {
    let (inner, inner_empty) = match failing_pair(inner_slack, |d| d.lo() >= 0.0) {
        Some(pair) => (Range::Empty, Some(EmptyCause::Condition { pair })),
        None => match Range::from_bounds(inner_lo.hi(), inner_hi.lo()) {
            Range::Empty => (Range::Empty, Some(EmptyCause::Crossed)),
            r => (r, None),
        },
    };
    let (outer, outer_empty) = match failing_pair(outer_slack, |d| d.hi() >= 0.0) {
        Some(pair) => (Range::Empty, Some(EmptyCause::Condition { pair })),
        None => {
            // if rounding alone crosses the bounds the true set may be a
            // point between them, so keep both ends
            let (a, b) = (outer_lo.lo(), outer_hi.hi());
            (Range::from_bounds(a.min(b), a.max(b)), None)
        }
    };
    ScalarResult { inner, outer, inner_empty, outer_empty, method }
}

/// Exact quantified range of `constant + Σ coeffs[j]·x_j`.
///
/// With `x_j = m_j + r_j·u_j` (midpoint and radius) and `N_i` the sum of
/// `|coeff_j|·r_j` over block `i`, the range is
/// `f(m) + [Σ_k (N_∀k − N_∃k), Σ_k (N_∃k − N_∀k)]`, non-empty iff every
/// suffix sum `Σ_{k≥l} (N_∃k − N_∀k)` is non-negative.
pub fn affine_exact(form: &AffineForm, prefix: &QuantifierPrefix, domains: &[Interval]) -> ScalarResult {
    let half = |x: Interval| x.scale(0.5);
    let mut center = form.constant;
    let mut norms = Vec::with_capacity(domains.len());
    for (c, d) in form.coeffs.iter().zip(domains) {
        let (lo, hi) = (Interval::point(d.lo()), Interval::point(d.hi()));
        center = center + *c * half(lo + hi);
        norms.push(c.abs_bounds() * half(hi - lo));
    }
    let n = prefix.pairs();
    let sum = |vars: std::ops::Range<usize>| norms[vars].iter().copied().sum::<Interval>();
    let mut spread = Interval::ZERO;
    let mut slack = Vec::with_capacity(n);
    for k in 0..n {
        let d = sum(prefix.existential(k)) - sum(prefix.universal(k));
        spread = spread + d;
        slack.push(d);
    }
    let lo = center - spread;
    let hi = center + spread;
    assemble(lo, hi, &slack, lo, hi, &slack, SolveMethod::Affine)
}

/// Inner and outer offsets of one variable given the signed enclosure `g`
/// of its partial derivative.
///
/// The outer offset is `g·[−r⁻, r⁺]`. When `g` has constant sign every
/// offset between `mig·(−r⁻)` and `mig·r⁺` (mirrored for negative `g`) is
/// reachable by moving only this variable, which gives the inner offset.
pub fn offsets_from_derivative(g: Interval, var: &Variable) -> (Interval, Interval) {
    let below = var.reach_below();
    let above = var.reach_above();
    let outer = g * Interval::new(-below.hi(), above.hi()).expect("reaches are non-negative");
    let inner = if g.lo() > 0.0 || g.hi() < 0.0 {
        let m = g.mig();
        let (left, right) = if g.lo() > 0.0 { (below.lo(), above.lo()) } else { (above.lo(), below.lo()) };
        let lo = -round::mul_down(m, left.max(0.0));
        let hi = round::mul_down(m, right.max(0.0));
        Interval::new(lo, hi).expect("inner offset straddles zero")
    } else {
        Interval::ZERO
    };
    (inner, outer)
}

/// Offsets for output `index`, linearized around the variable centers.
pub fn contribution_bounds(
    problem: &QuantifiedProblem,
    index: usize,
    options: &SolveOptions,
) -> Result<ContributionRow, SolveError> {
    let output = output(problem, index)?;
    let expr = output.expr.as_ref().ok_or_else(|| SolveError::NoExpression(output.name.clone()))?;
    let err = |source| SolveError::Eval { output: output.name.clone(), source };
    let centers: Vec<Interval> = problem.centers().into_iter().map(Interval::point).collect();
    let domains = problem.domains();
    let center_value = expr.eval(&centers).map_err(err)?;
    let partials = match options.derivative_box {
        DerivativeBox::FullDomain => expr.grad(&domains).map_err(err)?.partials,
        DerivativeBox::PinTrailing => (0..domains.len())
            .map(|j| {
                if !expr.depends_on(j) {
                    return Ok(Interval::ZERO);
                }
                let pinned: Vec<Interval> =
                    domains[..=j].iter().chain(&centers[j + 1..]).copied().collect();
                expr.partial(&pinned, j)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?,
    };
    let (inner, outer) = partials
        .iter()
        .zip(problem.variables())
        .map(|(g, v)| offsets_from_derivative(*g, v))
        .unzip();
    Ok(ContributionRow { center_value, inner, outer })
}

/// Resolves the prefix on a row of offsets.
///
/// Inner: `f(c) + [Σ_∀ Ō + Σ_∃ I̲, Σ_∀ O̲ + Σ_∃ Ī]`, non-empty when for every
/// pair `l` the suffix sum of `width(I_∃k) − width(O_∀k)` over `k ≥ l` is
/// non-negative. Outer: the same with the roles of `I` and `O` exchanged.
pub fn quantified_bounds(row: &ContributionRow, prefix: &QuantifierPrefix) -> ScalarResult {
    quantified_bounds_with(row, prefix, SolveMethod::MeanValue)
}

fn quantified_bounds_with(row: &ContributionRow, prefix: &QuantifierPrefix, method: SolveMethod) -> ScalarResult {
    let f = row.center_value;
    let (i, o) = (&row.inner[..], &row.outer[..]);
    let lo = Interval::lo;
    let hi = Interval::hi;
    let mut inner_lo = Interval::point(f.hi());
    let mut inner_hi = Interval::point(f.lo());
    let mut outer_lo = Interval::point(f.lo());
    let mut outer_hi = Interval::point(f.hi());
    let mut inner_slack = Vec::with_capacity(prefix.pairs());
    let mut outer_slack = Vec::with_capacity(prefix.pairs());
    for k in 0..prefix.pairs() {
        let (u, e) = (prefix.universal(k), prefix.existential(k));
        inner_lo = inner_lo + block_sum(o, u.clone(), hi) + block_sum(i, e.clone(), lo);
        inner_hi = inner_hi + block_sum(o, u.clone(), lo) + block_sum(i, e.clone(), hi);
        outer_lo = outer_lo + block_sum(i, u.clone(), hi) + block_sum(o, e.clone(), lo);
        outer_hi = outer_hi + block_sum(i, u.clone(), lo) + block_sum(o, e.clone(), hi);
        inner_slack.push(block_width(i, e.clone()) - block_width(o, u.clone()));
        outer_slack.push(block_width(o, e) - block_width(i, u));
    }
    assemble(inner_lo, inner_hi, &inner_slack, outer_lo, outer_hi, &outer_slack, method)
}

fn output(problem: &QuantifiedProblem, index: usize) -> Result<&crate::problem::Output, SolveError> {
    problem
        .outputs()
        .get(index)
        .ok_or(SolveError::NoSuchOutput { index, count: problem.outputs().len() })
}

/// How one output will be solved, computed once and reusable under any
/// reordering of the variables that keeps the offsets valid.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Linearization {
    Affine(AffineForm),
    Row(ContributionRow, SolveMethod),
}

impl Linearization {
    pub(crate) fn solve(&self, order: &[usize], prefix: &QuantifierPrefix, domains: &[Interval]) -> ScalarResult {
        match self {
            Linearization::Affine(form) => {
                let form = AffineForm {
                    constant: form.constant,
                    coeffs: order.iter().map(|&j| form.coeffs[j]).collect(),
                };
                let domains: Vec<Interval> = order.iter().map(|&j| domains[j]).collect();
                affine_exact(&form, prefix, &domains)
            }
            Linearization::Row(row, method) => quantified_bounds_with(&row.permuted(order), prefix, *method),
        }
    }

    /// Widths of the inner and outer offsets of variable `j`.
    pub(crate) fn widths(&self, j: usize, domains: &[Interval]) -> (f64, f64) {
        match self {
            Linearization::Affine(form) => {
                let w = domains[j].width();
                let c = form.coeffs[j];
                (round::mul_down(c.mig(), w), round::mul_up(c.mag(), w))
            }
            Linearization::Row(row, _) => (row.inner[j].width(), row.outer[j].width()),
        }
    }
}

pub(crate) fn linearize(
    problem: &QuantifiedProblem,
    index: usize,
    options: &SolveOptions,
) -> Result<Linearization, SolveError> {
    let out = output(problem, index)?;
    if let Some(row) = &out.supplied {
        return Ok(Linearization::Row(row.clone(), SolveMethod::Supplied));
    }
    let expr = out.expr.as_ref().ok_or_else(|| SolveError::NoExpression(out.name.clone()))?;
    if let Some(form) = expr.affine_form() {
        return Ok(Linearization::Affine(form));
    }
    Ok(Linearization::Row(contribution_bounds(problem, index, options)?, SolveMethod::MeanValue))
}

/// Whether [`linearize`] gives the same offsets regardless of variable
/// order, so one linearization can serve every reordered sub-problem.
pub(crate) fn order_independent(lin: &Linearization, options: &SolveOptions) -> bool {
    match lin {
        Linearization::Affine(_) | Linearization::Row(_, SolveMethod::Supplied) => true,
        Linearization::Row(..) => options.derivative_box == DerivativeBox::FullDomain,
    }
}

/// Inner and outer intervals for output `index`: supplied offsets are used
/// as given, affine outputs are solved exactly, everything else through
/// derivative-based offsets.
pub fn solve_scalar(
    problem: &QuantifiedProblem,
    index: usize,
    options: &SolveOptions,
) -> Result<ScalarResult, SolveError> {
    let lin = linearize(problem, index, options)?;
    let identity: Vec<usize> = (0..problem.num_vars()).collect();
    Ok(lin.solve(&identity, problem.prefix(), &problem.domains()))
}
