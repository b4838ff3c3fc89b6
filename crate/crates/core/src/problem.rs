//! Quantifier prefixes and quantified problems.

use std::ops::Range as IndexRange;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{BoundExpr, EvalError, Expr};
use crate::interval::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    ForAll,
    Exists,
}

/// A run of consecutive variables sharing one quantifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub quantifier: Quantifier,
    pub start: usize,
    pub len: usize,
}

impl Block {
    pub fn vars(&self) -> IndexRange<usize> {
        self.start..self.start + self.len
    }
}

/// An alternating prefix `∀ ∃ ∀ ∃ ...` made of `pairs()` universal and
/// existential block pairs. The first universal and the last existential
/// block may be empty; every other block is non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantifierPrefix {
    blocks: Vec<Block>,
}

impl QuantifierPrefix {
    /// Merges adjacent blocks with the same quantifier, drops empty blocks and
    /// pads with an empty leading `∀` and/or trailing `∃` so the prefix
    /// consists of whole `∀∃` pairs. Variable order is unchanged.
    pub fn normalize(raw: &[(Quantifier, usize)]) -> Self {
        let mut merged: Vec<(Quantifier, usize)> = Vec::new();
        for &(q, len) in raw.iter().filter(|(_, len)| *len > 0) {
            match merged.last_mut() {
                Some((last, n)) if *last == q => *n += len,
                _ => merged.push((q, len)),
            }
        }
        if merged.first().is_none_or(|(q, _)| *q != Quantifier::ForAll) {
            merged.insert(0, (Quantifier::ForAll, 0));
        }
        if merged.len() % 2 == 1 {
            merged.push((Quantifier::Exists, 0));
        }
        let mut start = 0;
        let blocks = merged
            .into_iter()
            .map(|(quantifier, len)| {
                let b = Block { quantifier, start, len };
                start += len;
                b
            })
            .collect();
        QuantifierPrefix { blocks }
    }

    /// Builds a prefix from one quantifier per variable.
    pub fn from_quantifiers(per_var: &[Quantifier]) -> Self {
        let raw: Vec<(Quantifier, usize)> = per_var.iter().map(|&q| (q, 1)).collect();
        Self::normalize(&raw)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Number of `∀∃` pairs, i.e. the number of alternations.
    pub fn pairs(&self) -> usize {
        self.blocks.len() / 2
    }

    pub fn num_vars(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.start + b.len)
    }

    pub fn universal(&self, pair: usize) -> IndexRange<usize> {
        self.blocks[2 * pair].vars()
    }

    pub fn existential(&self, pair: usize) -> IndexRange<usize> {
        self.blocks[2 * pair + 1].vars()
    }

    pub fn quantifier_of(&self, var: usize) -> Quantifier {
        self.blocks
            .iter()
            .find(|b| b.vars().contains(&var))
            .map_or(Quantifier::Exists, |b| b.quantifier)
    }

    /// Index of the `∀∃` pair containing `var`.
    pub fn pair_of(&self, var: usize) -> usize {
        self.blocks.iter().position(|b| b.vars().contains(&var)).map_or(0, |i| i / 2)
    }

    pub fn existential_vars(&self) -> Vec<usize> {
        (0..self.pairs()).flat_map(|k| self.existential(k)).collect()
    }

    pub fn to_raw(&self) -> Vec<(Quantifier, usize)> {
        self.blocks.iter().map(|b| (b.quantifier, b.len)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("variable `{name}`: center {center} lies outside its domain {domain}")]
    CenterOutsideDomain { name: String, center: f64, domain: Interval },
    #[error("variable `{0}` is declared twice")]
    DuplicateVariable(String),
    #[error("the quantifier prefix covers {prefix} variables but {declared} are declared")]
    PrefixSize { prefix: usize, declared: usize },
    #[error("output `{output}`: {source}")]
    Binding { output: String, source: EvalError },
    #[error("output `{0}` has neither an expression nor supplied contributions")]
    NoDefinition(String),
    #[error("output `{output}`: supplied contributions have {got} entries, expected {expected}")]
    RowLength { output: String, expected: usize, got: usize },
    #[error("output `{output}`, variable `{variable}`: {reason}")]
    RowInvariant { output: String, variable: String, reason: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub domain: Interval,
    /// Expansion point; defaults to the domain midpoint.
    pub center: f64,
}

impl Variable {
    pub fn new(name: impl Into<String>, domain: Interval) -> Self {
        Variable { name: name.into(), domain, center: domain.mid() }
    }

    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    /// Enclosure of `center - lo`.
    pub fn reach_below(&self) -> Interval {
        Interval::point(self.center) - Interval::point(self.domain.lo())
    }

    /// Enclosure of `hi - center`.
    pub fn reach_above(&self) -> Interval {
        Interval::point(self.domain.hi()) - Interval::point(self.center)
    }
}

/// Per-variable inner and outer offset intervals for one output, plus the
/// output value at the center point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionRow {
    pub center_value: Interval,
    pub inner: Vec<Interval>,
    pub outer: Vec<Interval>,
}

impl ContributionRow {
    /// Row for variables listed in `order` (new position `i` holds old
    /// variable `order[i]`).
    pub fn permuted(&self, order: &[usize]) -> Self {
        ContributionRow {
            center_value: self.center_value,
            inner: order.iter().map(|&j| self.inner[j]).collect(),
            outer: order.iter().map(|&j| self.outer[j]).collect(),
        }
    }
}

/// Output definition handed to [`QuantifiedProblem::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub name: String,
    pub expr: Option<Expr>,
    /// Precomputed contributions; when present they are used instead of
    /// differentiating `expr`.
    pub supplied: Option<ContributionRow>,
}

impl OutputSpec {
    pub fn expr(name: impl Into<String>, expr: Expr) -> Self {
        OutputSpec { name: name.into(), expr: Some(expr), supplied: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub expr: Option<BoundExpr>,
    pub supplied: Option<ContributionRow>,
}

/// Ordered variables with box domains, an alternating quantifier prefix over
/// them, and one or more outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantifiedProblem {
    variables: Vec<Variable>,
    prefix: QuantifierPrefix,
    outputs: Vec<Output>,
}

impl QuantifiedProblem {
    pub fn new(
        variables: Vec<Variable>,
        prefix: QuantifierPrefix,
        outputs: Vec<OutputSpec>,
    ) -> Result<Self, ProblemError> {
        for (i, v) in variables.iter().enumerate() {
            if !v.domain.contains(v.center) {
                return Err(ProblemError::CenterOutsideDomain {
                    name: v.name.clone(),
                    center: v.center,
                    domain: v.domain,
                });
            }
            if variables[..i].iter().any(|w| w.name == v.name) {
                return Err(ProblemError::DuplicateVariable(v.name.clone()));
            }
        }
        if prefix.num_vars() != variables.len() {
            return Err(ProblemError::PrefixSize { prefix: prefix.num_vars(), declared: variables.len() });
        }
        let names: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
        let outputs = outputs
            .into_iter()
            .map(|spec| {
                if spec.expr.is_none() && spec.supplied.is_none() {
                    return Err(ProblemError::NoDefinition(spec.name));
                }
                if let Some(row) = &spec.supplied {
                    check_row(&spec.name, row, &names)?;
                }
                let expr = spec
                    .expr
                    .map(|e| e.bind(&names))
                    .transpose()
                    .map_err(|source| ProblemError::Binding { output: spec.name.clone(), source })?;
                Ok(Output { name: spec.name, expr, supplied: spec.supplied })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QuantifiedProblem { variables, prefix, outputs })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn prefix(&self) -> &QuantifierPrefix {
        &self.prefix
    }

    pub fn outputs(&self) -> &[Output] {
        &self.outputs
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn domains(&self) -> Vec<Interval> {
        self.variables.iter().map(|v| v.domain).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.variables.iter().map(|v| v.center).collect()
    }

    /// The problem for a single output with variables reordered so new
    /// position `i` holds old variable `order[i]`, under a new raw prefix.
    pub(crate) fn reordered(&self, output: usize, order: &[usize], raw: &[(Quantifier, usize)]) -> Self {
        let variables: Vec<Variable> = order.iter().map(|&j| self.variables[j].clone()).collect();
        let names: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
        let out = &self.outputs[output];
        let expr = out.expr.as_ref().map(|e| {
            e.expr().bind(&names).expect("reordering keeps every variable")
        });
        QuantifiedProblem {
            variables,
            prefix: QuantifierPrefix::normalize(raw),
            outputs: vec![Output {
                name: out.name.clone(),
                expr,
                supplied: out.supplied.as_ref().map(|r| r.permuted(order)),
            }],
        }
    }
}

fn check_row(output: &str, row: &ContributionRow, names: &[String]) -> Result<(), ProblemError> {
    for got in [row.inner.len(), row.outer.len()] {
        if got != names.len() {
            return Err(ProblemError::RowLength { output: output.to_string(), expected: names.len(), got });
        }
    }
    for ((inner, outer), name) in row.inner.iter().zip(&row.outer).zip(names) {
        let fail = |reason| ProblemError::RowInvariant { output: output.to_string(), variable: name.clone(), reason };
        if !inner.is_subset_of(outer) {
            return Err(fail("inner offset is not contained in the outer offset"));
        }
        if !outer.contains_zero() {
            return Err(fail("outer offset does not contain zero"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use Quantifier::{Exists as E, ForAll as A};

    fn lens(p: &QuantifierPrefix) -> Vec<(Quantifier, usize)> {
        p.to_raw()
    }

    #[test]
    fn leading_exists_gets_empty_forall() {
        let p = QuantifierPrefix::normalize(&[(E, 4), (A, 1), (E, 1)]);
        assert_eq!(lens(&p), vec![(A, 0), (E, 4), (A, 1), (E, 1)]);
        assert_eq!(p.pairs(), 2);
        assert_eq!(p.existential(0), 0..4);
        assert_eq!(p.universal(1), 4..5);
    }

    #[test]
    fn merge_and_pad() {
        let p = QuantifierPrefix::normalize(&[(A, 2), (A, 1)]);
        assert_eq!(lens(&p), vec![(A, 3), (E, 0)]);
        assert_eq!(p.pairs(), 1);
        assert!(p.existential_vars().is_empty());
    }

    #[test]
    fn alternating_prefix_unchanged() {
        let raw = vec![(A, 1), (E, 1), (A, 1), (E, 1)];
        assert_eq!(lens(&QuantifierPrefix::normalize(&raw)), raw);
    }

    #[test]
    fn per_variable_construction() {
        let p = QuantifierPrefix::from_quantifiers(&[E, A, E, E]);
        assert_eq!(lens(&p), vec![(A, 0), (E, 1), (A, 1), (E, 2)]);
        assert_eq!(p.quantifier_of(1), A);
        assert_eq!(p.pair_of(3), 1);
        assert_eq!(p.existential_vars(), vec![0, 2, 3]);
    }

    #[test]
    fn validation_errors() {
        let unit = Interval::UNIT;
        let prefix = QuantifierPrefix::from_quantifiers(&[A, E]);
        let vars = vec![Variable::new("x", unit), Variable::new("y", unit)];

        let bad_center = vec![Variable::new("x", unit).with_center(2.0), Variable::new("y", unit)];
        assert!(matches!(
            QuantifiedProblem::new(bad_center, prefix.clone(), vec![]),
            Err(ProblemError::CenterOutsideDomain { .. })
        ));

        let dup = vec![Variable::new("x", unit), Variable::new("x", unit)];
        assert!(matches!(QuantifiedProblem::new(dup, prefix.clone(), vec![]), Err(ProblemError::DuplicateVariable(_))));

        let undeclared = vec![OutputSpec::expr("z", parse("x + w").unwrap())];
        assert!(matches!(
            QuantifiedProblem::new(vars.clone(), prefix.clone(), undeclared),
            Err(ProblemError::Binding { .. })
        ));

        let short = QuantifierPrefix::from_quantifiers(&[A]);
        assert!(matches!(QuantifiedProblem::new(vars.clone(), short, vec![]), Err(ProblemError::PrefixSize { .. })));

        let row = ContributionRow {
            center_value: Interval::ZERO,
            inner: vec![Interval::UNIT, Interval::ZERO],
            outer: vec![Interval::ZERO, Interval::ZERO],
        };
        let spec = OutputSpec { name: "z".into(), expr: None, supplied: Some(row) };
        assert!(matches!(
            QuantifiedProblem::new(vars.clone(), prefix.clone(), vec![spec]),
            Err(ProblemError::RowInvariant { .. })
        ));

        let none = OutputSpec { name: "z".into(), expr: None, supplied: None };
        assert!(matches!(QuantifiedProblem::new(vars, prefix, vec![none]), Err(ProblemError::NoDefinition(_))));
    }
}
