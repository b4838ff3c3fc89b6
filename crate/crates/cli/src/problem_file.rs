//! JSON problem files.
//!
//! A file lists variables (each tagged with the index of its quantifier
//! block), the blocks in prefix order, the outputs, and optionally
//! precomputed contribution rows and solver options:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "variables": [
//!     {"name": "x", "domain": [-1, 1], "block": 0},
//!     {"name": "t", "domain": [0, 0.5], "center": 0, "block": 1}
//!   ],
//!   "blocks": [{"quantifier": "forall"}, {"quantifier": "exists"}],
//!   "outputs": [{"name": "z", "expr": "x + t^2"}],
//!   "options": {"sampling": {"points": 21}}
//! }
//! ```
//!
//! Structural problems are reported with the line and column from the JSON
//! parser; semantic problems (unknown blocks, bad expressions, centers
//! outside domains, incomplete contribution rows) with the line where the
//! offending name or expression appears.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use quantrange_core::expr::{parse, ParseError};
use quantrange_core::problem::{
    ContributionRow, OutputSpec, ProblemError, QuantifiedProblem, Quantifier, QuantifierPrefix, Variable,
};
use quantrange_core::scalar::DerivativeBox;
use quantrange_core::vector::{PiAssignment, VectorError, DEFAULT_EXHAUSTIVE_LIMIT};
use quantrange_core::Interval;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: u32,
    pub variables: Vec<VariableEntry>,
    pub blocks: Vec<BlockEntry>,
    pub outputs: Vec<OutputEntry>,
    /// Supplied contribution rows keyed by output name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub contributions: BTreeMap<String, SuppliedRow>,
    #[serde(default, skip_serializing_if = "FileOptions::is_empty")]
    pub options: FileOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableEntry {
    pub name: String,
    pub domain: Interval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    pub block: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockEntry {
    pub quantifier: Quantifier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
}

/// Output value at the centers plus inner (`I`) and outer (`O`) offsets for
/// every variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuppliedRow {
    pub center: Interval,
    pub variables: BTreeMap<String, SuppliedOffsets>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuppliedOffsets {
    #[serde(rename = "I")]
    pub inner: Interval,
    #[serde(rename = "O")]
    pub outer: Interval,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOptions {
    /// Output that keeps each existential variable existential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhaustive_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_box: Option<DerivativeBox>,
}

impl FileOptions {
    fn is_empty(&self) -> bool {
        *self == FileOptions::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingEntry {
    pub points: usize,
    #[serde(default = "enabled_by_default")]
    pub enabled: bool,
}

fn enabled_by_default() -> bool {
    true
}

fn at(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}: "),
        None => String::new(),
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported schema version {found}, expected {SCHEMA_VERSION}")]
    Schema { found: u32 },
    #[error("{}variable `{variable}` refers to block {block}, but only {count} blocks are declared", at(line))]
    UnknownBlock { line: Option<usize>, variable: String, block: usize, count: usize },
    #[error("{}variable `{variable}` of block {block} follows a variable of block {previous}; blocks must be contiguous and in order", at(line))]
    BlockOrder { line: Option<usize>, variable: String, block: usize, previous: usize },
    #[error("{}output `{output}`: {source}", at(line))]
    Expr { line: Option<usize>, output: String, source: ParseError },
    #[error("{}{source}", at(line))]
    Problem { line: Option<usize>, source: ProblemError },
    #[error("{}contributions given for unknown output `{output}`", at(line))]
    UnknownOutput { line: Option<usize>, output: String },
    #[error("{}contributions for `{output}` do not cover variable `{variable}`", at(line))]
    MissingContribution { line: Option<usize>, output: String, variable: String },
    #[error("{}contributions for `{output}` name unknown variable `{variable}`", at(line))]
    UnknownContribution { line: Option<usize>, output: String, variable: String },
    #[error("{}assignment names unknown {kind} `{name}`", at(line))]
    UnknownName { line: Option<usize>, kind: &'static str, name: String },
    #[error("invalid assignment: {0}")]
    Assignment(#[source] VectorError),
}

/// A validated problem together with the options read from its file.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub problem: QuantifiedProblem,
    pub assignment: Option<PiAssignment>,
    pub exhaustive_limit: usize,
    pub sampling: Option<SamplingEntry>,
    pub derivative_box: DerivativeBox,
}

/// Line (1-based) of the first occurrence of `needle` after `anchor`, or of
/// `needle` anywhere when `anchor` is absent.
fn line_of(text: Option<&str>, anchor: &str, needle: &str) -> Option<usize> {
    let text = text?;
    let start = text.find(anchor).unwrap_or(0);
    let pos = text[start..].find(needle).map(|p| p + start).or_else(|| text.find(needle))?;
    Some(text[..pos].matches('\n').count() + 1)
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, LoadError> {
        serde_json::from_str(text).map_err(|e| LoadError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    /// Validates the file and builds the problem. `text` is the source the
    /// file was read from and only serves to locate errors.
    pub fn build(&self, text: Option<&str>) -> Result<LoadedProblem, LoadError> {
        if self.schema != SCHEMA_VERSION {
            return Err(LoadError::Schema { found: self.schema });
        }
        let var_line = |name: &str| line_of(text, "\"variables\"", &quoted(name));

        let mut counts = vec![0usize; self.blocks.len()];
        let mut previous = 0;
        let mut variables = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            if v.block >= self.blocks.len() {
                return Err(LoadError::UnknownBlock {
                    line: var_line(&v.name),
                    variable: v.name.clone(),
                    block: v.block,
                    count: self.blocks.len(),
                });
            }
            if v.block < previous {
                return Err(LoadError::BlockOrder { line: var_line(&v.name), variable: v.name.clone(), block: v.block, previous });
            }
            previous = v.block;
            counts[v.block] += 1;
            let var = Variable::new(v.name.clone(), v.domain);
            variables.push(match v.center {
                Some(c) => var.with_center(c),
                None => var,
            });
        }
        let raw: Vec<(Quantifier, usize)> = self.blocks.iter().zip(&counts).map(|(b, &n)| (b.quantifier, n)).collect();
        let prefix = QuantifierPrefix::normalize(&raw);

        for name in self.contributions.keys() {
            if !self.outputs.iter().any(|o| &o.name == name) {
                return Err(LoadError::UnknownOutput {
                    line: line_of(text, "\"contributions\"", &quoted(name)),
                    output: name.clone(),
                });
            }
        }

        let mut specs = Vec::with_capacity(self.outputs.len());
        for out in &self.outputs {
            let expr = match &out.expr {
                Some(src) => Some(parse(src).map_err(|source| LoadError::Expr {
                    line: line_of(text, "\"outputs\"", &quoted(src)),
                    output: out.name.clone(),
                    source,
                })?),
                None => None,
            };
            let supplied = match self.contributions.get(&out.name) {
                Some(row) => Some(self.supplied_row(&out.name, row, text)?),
                None => None,
            };
            specs.push(OutputSpec { name: out.name.clone(), expr, supplied });
        }

        let problem = QuantifiedProblem::new(variables, prefix, specs).map_err(|source| {
            let line = match &source {
                ProblemError::CenterOutsideDomain { name, .. } | ProblemError::DuplicateVariable(name) => var_line(name),
                ProblemError::Binding { output, .. } | ProblemError::NoDefinition(output) => {
                    line_of(text, "\"outputs\"", &quoted(output))
                }
                ProblemError::RowInvariant { output, .. } | ProblemError::RowLength { output, .. } => {
                    line_of(text, "\"contributions\"", &quoted(output))
                }
                _ => None,
            };
            LoadError::Problem { line, source }
        })?;

        let assignment = match &self.options.pi {
            Some(map) => Some(self.assignment(&problem, map, text)?),
            None => None,
        };
        Ok(LoadedProblem {
            problem,
            assignment,
            exhaustive_limit: self.options.exhaustive_limit.unwrap_or(DEFAULT_EXHAUSTIVE_LIMIT),
            sampling: self.options.sampling,
            derivative_box: self.options.derivative_box.unwrap_or_default(),
        })
    }

    fn supplied_row(&self, output: &str, row: &SuppliedRow, text: Option<&str>) -> Result<ContributionRow, LoadError> {
        let line = line_of(text, "\"contributions\"", &quoted(output));
        for name in row.variables.keys() {
            if !self.variables.iter().any(|v| &v.name == name) {
                return Err(LoadError::UnknownContribution { line, output: output.to_string(), variable: name.clone() });
            }
        }
        let mut inner = Vec::with_capacity(self.variables.len());
        let mut outer = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            let offsets = row.variables.get(&v.name).ok_or_else(|| LoadError::MissingContribution {
                line,
                output: output.to_string(),
                variable: v.name.clone(),
            })?;
            inner.push(offsets.inner);
            outer.push(offsets.outer);
        }
        Ok(ContributionRow { center_value: row.center, inner, outer })
    }

    fn assignment(
        &self,
        problem: &QuantifiedProblem,
        map: &BTreeMap<String, String>,
        text: Option<&str>,
    ) -> Result<PiAssignment, LoadError> {
        let mut pairs = Vec::with_capacity(map.len());
        for (var, out) in map {
            let unknown = |kind, name: &str| LoadError::UnknownName {
                line: line_of(text, "\"pi\"", &quoted(name)),
                kind,
                name: name.to_string(),
            };
            let v = self.variables.iter().position(|x| &x.name == var).ok_or_else(|| unknown("variable", var))?;
            let o = self.outputs.iter().position(|x| &x.name == out).ok_or_else(|| unknown("output", out))?;
            pairs.push((v, o));
        }
        PiAssignment::new(problem, pairs).map_err(LoadError::Assignment)
    }
}

/// Reads, parses and validates a problem file.
pub fn load_problem(path: &Path) -> Result<LoadedProblem, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
    ProblemFile::from_json(&text)?.build(Some(&text))
}
