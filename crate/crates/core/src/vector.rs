//! Vector-valued outputs.
//!
//! The outer box is the product of the per-component outer intervals. For
//! the inner box each existential variable is kept existential in exactly
//! one component (chosen by a [`PiAssignment`]) and treated as universal in
//! all others; if every component's inner interval is then non-empty, their
//! product is an inner approximation of the joint set.

use std::cmp::Ordering;

use rayon::prelude::*;
use thiserror::Error;

use crate::interval::{Interval, IntervalBox, Range};
use crate::problem::{QuantifiedProblem, Quantifier};
use crate::scalar::{linearize, order_independent, solve_scalar, Linearization, ScalarResult, SolveError, SolveOptions};

/// Exhaustive assignment search is used while `components^existentials`
/// stays at or below this count.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PiSearch {
    /// Exhaustive when under the limit, greedy otherwise.
    #[default]
    Auto,
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorOptions {
    pub solve: SolveOptions,
    pub exhaustive_limit: usize,
    pub search: PiSearch,
}

impl Default for VectorOptions {
    fn default() -> Self {
        VectorOptions { solve: SolveOptions::default(), exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT, search: PiSearch::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VectorError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("variable {0} is not existential and cannot be assigned")]
    NotExistential(usize),
    #[error("existential variable {0} has no assigned component")]
    Unassigned(usize),
    #[error("variable {var} assigned to component {component}, but there are only {count} outputs")]
    NoSuchComponent { var: usize, component: usize, count: usize },
}

/// Which output component keeps each existential variable existential.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PiAssignment {
    /// Existential variable indices in increasing order.
    vars: Vec<usize>,
    /// `components[i]` is the component of `vars[i]`.
    components: Vec<usize>,
}

impl PiAssignment {
    pub fn new(
        problem: &QuantifiedProblem,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, VectorError> {
        let vars = problem.prefix().existential_vars();
        let mut components = vec![None; vars.len()];
        let count = problem.outputs().len();
        for (var, component) in pairs {
            let slot = vars.iter().position(|&v| v == var).ok_or(VectorError::NotExistential(var))?;
            if component >= count {
                return Err(VectorError::NoSuchComponent { var, component, count });
            }
            components[slot] = Some(component);
        }
        let components = components
            .iter()
            .zip(&vars)
            .map(|(c, &v)| c.ok_or(VectorError::Unassigned(v)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PiAssignment { vars, components })
    }

    pub fn component_of(&self, var: usize) -> Option<usize> {
        self.vars.iter().position(|&v| v == var).map(|i| self.components[i])
    }

    /// `(variable, component)` pairs in variable order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vars.iter().copied().zip(self.components.iter().copied())
    }
}

/// Variable order and raw prefix of the component-`j` problem: within each
/// `∀∃` pair the universals come first, then existentials assigned to other
/// components (now universal), then existentials kept for `j`.
fn component_layout(problem: &QuantifiedProblem, j: usize, pi: &PiAssignment) -> (Vec<usize>, Vec<(Quantifier, usize)>) {
    let prefix = problem.prefix();
    let mut order = Vec::with_capacity(problem.num_vars());
    let mut raw = Vec::with_capacity(2 * prefix.pairs());
    for k in 0..prefix.pairs() {
        let (mine, others): (Vec<usize>, Vec<usize>) =
            prefix.existential(k).partition(|&v| pi.component_of(v) == Some(j));
        order.extend(prefix.universal(k));
        order.extend(&others);
        raw.push((Quantifier::ForAll, prefix.universal(k).len() + others.len()));
        order.extend(&mine);
        raw.push((Quantifier::Exists, mine.len()));
    }
    (order, raw)
}

/// The scalar problem whose inner interval is component `j` of the joint
/// inner box under assignment `pi`.
pub fn derive_component_problem(problem: &QuantifiedProblem, j: usize, pi: &PiAssignment) -> QuantifiedProblem {
    let (order, raw) = component_layout(problem, j, pi);
    problem.reordered(j, &order, &raw)
}

/// Product of the component outer intervals; `None` when one is empty.
pub fn outer_vector(problem: &QuantifiedProblem, options: &SolveOptions) -> Result<Option<IntervalBox>, SolveError> {
    let results = (0..problem.outputs().len())
        .into_par_iter()
        .map(|i| solve_scalar(problem, i, options))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(product(results.iter().map(|r| r.outer)))
}

fn product(ranges: impl Iterator<Item = Range>) -> Option<IntervalBox> {
    ranges.map(|r| r.interval()).collect::<Option<Vec<Interval>>>().map(IntervalBox::new)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentResult {
    pub name: String,
    /// The component solved with its original quantifiers.
    pub outer: ScalarResult,
    /// The component solved under the assignment.
    pub inner: ScalarResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorResult {
    pub components: Vec<ComponentResult>,
    pub assignment: PiAssignment,
}

impl VectorResult {
    pub fn joint_outer(&self) -> Option<IntervalBox> {
        product(self.components.iter().map(|c| c.outer.outer))
    }

    pub fn joint_inner(&self) -> Option<IntervalBox> {
        product(self.components.iter().map(|c| c.inner.inner))
    }

    /// First component whose inner interval is empty.
    pub fn failed_component(&self) -> Option<usize> {
        self.components.iter().position(|c| c.inner.inner.is_empty())
    }
}

/// Per-output linearizations shared by every candidate assignment, when
/// they do not depend on variable order.
struct Candidates<'a> {
    problem: &'a QuantifiedProblem,
    options: &'a SolveOptions,
    shared: Option<Vec<Linearization>>,
    domains: Vec<Interval>,
}

impl<'a> Candidates<'a> {
    fn new(problem: &'a QuantifiedProblem, options: &'a SolveOptions) -> Result<Self, SolveError> {
        let lins = (0..problem.outputs().len())
            .into_par_iter()
            .map(|i| linearize(problem, i, options))
            .collect::<Result<Vec<_>, _>>()?;
        let shared = lins.iter().all(|l| order_independent(l, options)).then_some(lins);
        Ok(Candidates { problem, options, shared, domains: problem.domains() })
    }

    fn component(&self, j: usize, pi: &PiAssignment) -> Result<ScalarResult, SolveError> {
        match &self.shared {
            Some(lins) => {
                let (order, raw) = component_layout(self.problem, j, pi);
                let prefix = crate::problem::QuantifierPrefix::normalize(&raw);
                Ok(lins[j].solve(&order, &prefix, &self.domains))
            }
            None => solve_scalar(&derive_component_problem(self.problem, j, pi), 0, self.options),
        }
    }

    fn inners(&self, pi: &PiAssignment) -> Result<Vec<ScalarResult>, SolveError> {
        (0..self.problem.outputs().len()).map(|j| self.component(j, pi)).collect()
    }

    /// Inner-offset and outer-offset widths per (component, variable),
    /// taken in the original variable order.
    fn widths(&self) -> Result<Vec<Vec<(f64, f64)>>, SolveError> {
        let n = self.problem.num_vars();
        (0..self.problem.outputs().len())
            .map(|j| {
                let lin = match &self.shared {
                    Some(lins) => lins[j].clone(),
                    None => linearize(self.problem, j, self.options)?,
                };
                Ok((0..n).map(|v| lin.widths(v, &self.domains)).collect())
            })
            .collect()
    }
}

/// Number of non-empty components, then total inner width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub non_empty: usize,
    pub width: f64,
}

impl Score {
    pub fn of(inners: &[ScalarResult]) -> Self {
        Score {
            non_empty: inners.iter().filter(|r| !r.inner.is_empty()).count(),
            width: inners.iter().map(|r| r.inner.width()).sum(),
        }
    }

    fn cmp(&self, other: &Score) -> Ordering {
        self.non_empty.cmp(&other.non_empty).then(self.width.total_cmp(&other.width))
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Score) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Score of the joint inner box under `pi`.
pub fn score(problem: &QuantifiedProblem, pi: &PiAssignment, options: &SolveOptions) -> Result<Score, SolveError> {
    Ok(Score::of(&Candidates::new(problem, options)?.inners(pi)?))
}

fn count_assignments(components: usize, existentials: usize) -> Option<usize> {
    let mut total: usize = 1;
    for _ in 0..existentials {
        total = total.checked_mul(components)?;
    }
    Some(total)
}

/// Picks an assignment: exhaustive search when the number of assignments
/// is within `options.exhaustive_limit` (or forced), greedy otherwise.
pub fn choose_pi(problem: &QuantifiedProblem, options: &VectorOptions) -> Result<PiAssignment, SolveError> {
    let cands = Candidates::new(problem, &options.solve)?;
    let m = problem.outputs().len();
    let e = problem.prefix().existential_vars().len();
    let small = count_assignments(m, e).is_some_and(|n| n <= options.exhaustive_limit);
    match options.search {
        PiSearch::Exhaustive => exhaustive(&cands),
        PiSearch::Auto if small => exhaustive(&cands),
        _ => greedy(&cands),
    }
}

/// Decodes the `index`-th assignment in lexicographic order.
fn nth_assignment(vars: &[usize], m: usize, mut index: usize) -> PiAssignment {
    let mut components = vec![0; vars.len()];
    for slot in components.iter_mut().rev() {
        *slot = index % m;
        index /= m;
    }
    PiAssignment { vars: vars.to_vec(), components }
}

/// Best assignment by [`Score`]; ties go to the lexicographically smallest.
fn exhaustive(cands: &Candidates) -> Result<PiAssignment, SolveError> {
    let vars = cands.problem.prefix().existential_vars();
    let m = cands.problem.outputs().len().max(1);
    let total = count_assignments(m, vars.len()).unwrap_or(usize::MAX);
    let scores = (0..total)
        .into_par_iter()
        .map(|i| cands.inners(&nth_assignment(&vars, m, i)).map(|r| Score::of(&r)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.cmp(&scores[best]) == Ordering::Greater {
            best = i;
        }
    }
    Ok(nth_assignment(&vars, m, best))
}

/// Sensitivity heuristic: keep a variable existential in the component
/// where it is most needed to cover that component's universal spread.
///
/// Variables are visited by decreasing best inner width. Each component
/// tracks an outstanding amount: the outer widths of everything currently
/// universal in it minus the inner widths of what it keeps existential
/// (initially every existential counts as universal everywhere). A variable
/// goes to the component with positive outstanding amount that it covers
/// best relative to that amount, or to the component where its inner width
/// is largest when no component is outstanding.
fn greedy(cands: &Candidates) -> Result<PiAssignment, SolveError> {
    let problem = cands.problem;
    let prefix = problem.prefix();
    let vars = prefix.existential_vars();
    let m = problem.outputs().len();
    let widths = cands.widths()?;

    let mut outstanding: Vec<f64> = (0..m)
        .map(|j| {
            (0..problem.num_vars())
                .filter(|&v| prefix.quantifier_of(v) == Quantifier::ForAll || vars.contains(&v))
                .map(|v| widths[j][v].1)
                .sum()
        })
        .collect();

    let best_inner = |v: usize| (0..m).map(|j| widths[j][v].0).fold(0.0, f64::max);
    let mut visit: Vec<usize> = (0..vars.len()).collect();
    visit.sort_by(|&a, &b| best_inner(vars[b]).total_cmp(&best_inner(vars[a])).then(a.cmp(&b)));

    let mut components = vec![0; vars.len()];
    for slot in visit {
        let v = vars[slot];
        let gain = |j: usize| widths[j][v].0 + widths[j][v].1;
        let pick_max = |key: &dyn Fn(usize) -> f64, cands: &mut dyn Iterator<Item = usize>| {
            cands.fold(None, |best: Option<(usize, f64)>, j| match best {
                Some((_, k)) if key(j) <= k => best,
                _ => Some((j, key(j))),
            })
        };
        let relative = |j: usize| gain(j) / outstanding[j];
        let chosen = pick_max(&relative, &mut (0..m).filter(|&j| outstanding[j] > 0.0))
            .or_else(|| pick_max(&|j| widths[j][v].0, &mut (0..m)))
            .map_or(0, |(j, _)| j);
        outstanding[chosen] -= gain(chosen);
        components[slot] = chosen;
    }
    Ok(PiAssignment { vars, components })
}

/// Joint inner and outer boxes. Uses `pi` when given, otherwise
/// [`choose_pi`].
pub fn inner_vector(
    problem: &QuantifiedProblem,
    pi: Option<&PiAssignment>,
    options: &VectorOptions,
) -> Result<VectorResult, SolveError> {
    let assignment = match pi {
        Some(p) => p.clone(),
        None => choose_pi(problem, options)?,
    };
    let cands = Candidates::new(problem, &options.solve)?;
    let inners = cands.inners(&assignment)?;
    let outers = (0..problem.outputs().len())
        .into_par_iter()
        .map(|i| solve_scalar(problem, i, &options.solve))
        .collect::<Result<Vec<_>, _>>()?;
    let components = problem
        .outputs()
        .iter()
        .zip(outers.into_iter().zip(inners))
        .map(|(o, (outer, inner))| ComponentResult { name: o.name.clone(), outer, inner })
        .collect();
    Ok(VectorResult { components, assignment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::problem::{OutputSpec, Quantifier::Exists as E, Quantifier::ForAll as A, QuantifierPrefix, Variable};

    fn joint_problem() -> QuantifiedProblem {
        let vars = ["x1", "x2", "x3", "x4"].iter().map(|n| Variable::new(*n, Interval::UNIT)).collect();
        QuantifiedProblem::new(
            vars,
            QuantifierPrefix::from_quantifiers(&[E, A, E, E]),
            vec![
                OutputSpec::expr("z1", parse("2 + 2*x1 + x2 + 3*x3 + x4").unwrap()),
                OutputSpec::expr("z2", parse("-1 - x1 - x2 + x3 + 5*x4").unwrap()),
            ],
        )
        .unwrap()
    }

    fn raw(p: &QuantifiedProblem) -> Vec<(Quantifier, usize)> {
        p.prefix().to_raw()
    }

    #[test]
    fn component_prefixes() {
        let p = joint_problem();
        let pi = PiAssignment::new(&p, [(0, 0), (2, 0), (3, 1)]).unwrap();
        let c1 = derive_component_problem(&p, 0, &pi);
        assert_eq!(c1.names(), ["x1", "x2", "x4", "x3"]);
        assert_eq!(raw(&c1), vec![(A, 0), (E, 1), (A, 2), (E, 1)]);
        let c2 = derive_component_problem(&p, 1, &pi);
        assert_eq!(c2.names(), ["x1", "x2", "x3", "x4"]);
        assert_eq!(raw(&c2), vec![(A, 3), (E, 1)]);
    }

    #[test]
    fn unassigned_component_is_all_universal() {
        let p = joint_problem();
        let pi = PiAssignment::new(&p, [(0, 0), (2, 0), (3, 0)]).unwrap();
        let c2 = derive_component_problem(&p, 1, &pi);
        assert_eq!(raw(&c2), vec![(A, 4), (E, 0)]);
    }

    #[test]
    fn assignment_validation() {
        let p = joint_problem();
        assert_eq!(PiAssignment::new(&p, [(1, 0)]).unwrap_err(), VectorError::NotExistential(1));
        assert_eq!(PiAssignment::new(&p, [(0, 0), (2, 0)]).unwrap_err(), VectorError::Unassigned(3));
        assert!(matches!(
            PiAssignment::new(&p, [(0, 0), (2, 0), (3, 2)]),
            Err(VectorError::NoSuchComponent { component: 2, .. })
        ));
    }

    #[test]
    fn joint_boxes() {
        let p = joint_problem();
        let r = inner_vector(&p, None, &VectorOptions::default()).unwrap();
        assert_eq!(r.assignment, PiAssignment::new(&p, [(0, 0), (2, 0), (3, 1)]).unwrap());
        let inner = r.joint_inner().unwrap();
        assert_eq!(inner.as_slice(), [Interval::new(-1.0, 5.0).unwrap(), Interval::new(-3.0, 1.0).unwrap()]);
        let outer = outer_vector(&p, &SolveOptions::default()).unwrap().unwrap();
        assert_eq!(outer.as_slice(), [Interval::new(-3.0, 7.0).unwrap(), Interval::new(-7.0, 5.0).unwrap()]);
        assert_eq!(r.joint_outer().unwrap(), outer);
    }

    #[test]
    fn single_existential_single_output() {
        let vars = vec![Variable::new("a", Interval::UNIT), Variable::new("b", Interval::UNIT)];
        let p = QuantifiedProblem::new(
            vars,
            QuantifierPrefix::from_quantifiers(&[A, E]),
            vec![OutputSpec::expr("z", parse("a + 2*b").unwrap())],
        )
        .unwrap();
        let pi = choose_pi(&p, &VectorOptions::default()).unwrap();
        assert_eq!(pi.iter().collect::<Vec<_>>(), vec![(1, 0)]);
        let r = inner_vector(&p, None, &VectorOptions::default()).unwrap();
        assert_eq!(r.components[0].inner, solve_scalar(&p, 0, &SolveOptions::default()).unwrap());
    }

    #[test]
    fn greedy_finds_the_joint_assignment() {
        let p = joint_problem();
        let opts = VectorOptions { search: PiSearch::Greedy, ..VectorOptions::default() };
        let pi = choose_pi(&p, &opts).unwrap();
        let r = inner_vector(&p, Some(&pi), &opts).unwrap();
        assert!(r.joint_inner().is_some(), "{pi:?}");
    }
}
