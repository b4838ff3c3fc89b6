//! Expressions over named variables.
//!
//! An [`Expr`] is stored as a flat arena in postorder: children always come
//! before their parent and the root is the last node. Evaluation is a single
//! forward sweep over the arena, so very long sums (thousands of terms) never
//! touch the call stack.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' INTEGER)?
//! primary := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions are `sin(x)`, `cos(x)` and `msin(u, v)`, the continuous extension
//! of `(sin(u + v) - sin(u)) / v`.

mod eval;
mod parse;

use std::fmt;

use thiserror::Error;

use crate::interval::{Interval, IntervalError};

pub use eval::{msin_enclosures, msin_point, GradEnclosure, MsinEnclosure};
pub use parse::{parse, ParseError, MAX_NESTING};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Const(f64),
    /// Index into [`Expr::vars`].
    Var(usize),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Div(NodeId, NodeId),
    Neg(NodeId),
    Pow(NodeId, u32),
    Sin(NodeId),
    Cos(NodeId),
    Msin(NodeId, NodeId),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error("no value supplied for variable `{0}`")]
    MissingVariable(String),
    #[error("expected {expected} variable values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
}

/// A parsed expression. Variables are numbered in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    nodes: Vec<Node>,
    vars: Vec<String>,
}

impl Expr {
    pub(crate) fn from_parts(nodes: Vec<Node>, vars: Vec<String>) -> Self {
        debug_assert!(!nodes.is_empty());
        Expr { nodes, vars }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> NodeId {
        self.nodes.len() - 1
    }

    /// Variable names in order of first appearance.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Resolves variables against a declared name list.
    pub fn bind(&self, names: &[String]) -> Result<BoundExpr, EvalError> {
        let map = self
            .vars
            .iter()
            .map(|v| {
                names
                    .iter()
                    .position(|n| n == v)
                    .ok_or_else(|| EvalError::MissingVariable(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BoundExpr { expr: self.clone(), map, arity: names.len() })
    }

    /// Interval evaluation with values looked up by name.
    pub fn eval_interval<'a>(
        &self,
        env: impl Fn(&str) -> Option<&'a Interval>,
    ) -> Result<Interval, EvalError> {
        let values = self
            .vars
            .iter()
            .map(|v| env(v).copied().ok_or_else(|| EvalError::MissingVariable(v.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let identity: Vec<usize> = (0..self.vars.len()).collect();
        Ok(eval::values(&self.nodes, &identity, &values)?[self.root()])
    }
}

/// Binding precedence used by the printer.
fn precedence(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Pow(..) => 4,
        Node::Const(_) | Node::Var(_) | Node::Sin(_) | Node::Cos(_) | Node::Msin(..) => 5,
    }
}

enum Emit {
    Node(NodeId),
    Text(&'static str),
    Open,
    Close,
}

/// Prints with the minimum parentheses needed for the parser to rebuild the
/// identical arena. Constants are printed in shortest round-trip form.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut stack = vec![Emit::Node(self.root())];
        let wrapped = |stack: &mut Vec<Emit>, id: NodeId, paren: bool| {
            if paren {
                stack.push(Emit::Close);
                stack.push(Emit::Node(id));
                stack.push(Emit::Open);
            } else {
                stack.push(Emit::Node(id));
            }
        };
        while let Some(item) = stack.pop() {
            let id = match item {
                Emit::Text(t) => {
                    f.write_str(t)?;
                    continue;
                }
                Emit::Open => {
                    f.write_str("(")?;
                    continue;
                }
                Emit::Close => {
                    f.write_str(")")?;
                    continue;
                }
                Emit::Node(id) => id,
            };
            let node = &self.nodes[id];
            let p = precedence(node);
            match *node {
                Node::Const(c) => write!(f, "{c:?}")?,
                Node::Var(k) => f.write_str(&self.vars[k])?,
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    let op = match node {
                        Node::Add(..) => " + ",
                        Node::Sub(..) => " - ",
                        Node::Mul(..) => " * ",
                        _ => " / ",
                    };
                    wrapped(&mut stack, b, precedence(&self.nodes[b]) <= p);
                    stack.push(Emit::Text(op));
                    wrapped(&mut stack, a, precedence(&self.nodes[a]) < p);
                }
                Node::Neg(a) => {
                    wrapped(&mut stack, a, precedence(&self.nodes[a]) < p);
                    stack.push(Emit::Text("-"));
                }
                Node::Pow(a, n) => {
                    write_later(&mut stack, n);
                    wrapped(&mut stack, a, precedence(&self.nodes[a]) < 5);
                }
                Node::Sin(a) | Node::Cos(a) => {
                    stack.push(Emit::Close);
                    stack.push(Emit::Node(a));
                    stack.push(Emit::Text(if matches!(node, Node::Sin(_)) { "sin(" } else { "cos(" }));
                }
                Node::Msin(u, v) => {
                    stack.push(Emit::Close);
                    stack.push(Emit::Node(v));
                    stack.push(Emit::Text(", "));
                    stack.push(Emit::Node(u));
                    stack.push(Emit::Text("msin("));
                }
            }
        }
        Ok(())
    }
}

/// Pushes `^n` onto the emit stack using static text only.
fn write_later(stack: &mut Vec<Emit>, n: u32) {
    const SMALL: [&str; 10] = ["^0", "^1", "^2", "^3", "^4", "^5", "^6", "^7", "^8", "^9"];
    if (n as usize) < SMALL.len() {
        stack.push(Emit::Text(SMALL[n as usize]));
    } else {
        // digits are pushed in reverse since the stack pops last-in first
        const DIGITS: [&str; 10] = ["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"];
        let mut m = n;
        while m > 0 {
            stack.push(Emit::Text(DIGITS[(m % 10) as usize]));
            m /= 10;
        }
        stack.push(Emit::Text("^"));
    }
}

/// An expression whose variables are resolved to positions in a declared
/// variable list of length [`BoundExpr::arity`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundExpr {
    expr: Expr,
    /// `map[k]` is the declared position of the expression's k-th variable.
    map: Vec<usize>,
    arity: usize,
}

/// `constant + Σ coeffs[j] * x_j` with interval-valued coefficients that
/// enclose the exact constant-folded values.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub constant: Interval,
    pub coeffs: Vec<Interval>,
}

impl BoundExpr {
    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Whether declared variable `j` appears in the expression.
    pub fn depends_on(&self, j: usize) -> bool {
        self.map.contains(&j)
    }

    fn check_arity(&self, got: usize) -> Result<(), EvalError> {
        if got != self.arity {
            return Err(EvalError::ArityMismatch { expected: self.arity, got });
        }
        Ok(())
    }

    pub fn eval(&self, values: &[Interval]) -> Result<Interval, EvalError> {
        self.check_arity(values.len())?;
        Ok(eval::values(&self.expr.nodes, &self.map, values)?[self.expr.root()])
    }

    /// Round-to-nearest evaluation at a point.
    pub fn eval_point(&self, x: &[f64]) -> f64 {
        eval::point(&self.expr.nodes, &self.map, x)
    }

    /// Value and every partial derivative, enclosed over the box `values`.
    pub fn grad(&self, values: &[Interval]) -> Result<GradEnclosure, EvalError> {
        self.check_arity(values.len())?;
        let vals = eval::values(&self.expr.nodes, &self.map, values)?;
        let mut partials = vec![Interval::ZERO; self.arity];
        for (k, &j) in self.map.iter().enumerate() {
            partials[j] = eval::tangent(&self.expr.nodes, &vals, k)?;
        }
        Ok(GradEnclosure { value: vals[self.expr.root()], partials })
    }

    /// Enclosure of the partial derivative with respect to declared
    /// variable `j` over the box `values`.
    pub fn partial(&self, values: &[Interval], j: usize) -> Result<Interval, EvalError> {
        self.check_arity(values.len())?;
        let Some(k) = self.map.iter().position(|&m| m == j) else {
            return Ok(Interval::ZERO);
        };
        let vals = eval::values(&self.expr.nodes, &self.map, values)?;
        eval::tangent(&self.expr.nodes, &vals, k)
    }

    /// Structural affine check. Returns the affine form when the expression
    /// is a sum of constant multiples of variables after constant folding.
    pub fn affine_form(&self) -> Option<AffineForm> {
        let nodes = &self.expr.nodes;
        // constant-folded enclosure per node, None when the node depends on a variable
        let mut folded: Vec<Option<Interval>> = Vec::with_capacity(nodes.len());
        for node in nodes {
            let c = |id: NodeId| folded[id];
            let v = match *node {
                Node::Const(x) => Some(Interval::point(x)),
                Node::Var(_) => None,
                Node::Add(a, b) => c(a).zip(c(b)).map(|(x, y)| x + y),
                Node::Sub(a, b) => c(a).zip(c(b)).map(|(x, y)| x - y),
                Node::Mul(a, b) => c(a).zip(c(b)).map(|(x, y)| x * y),
                Node::Div(a, b) => c(a).zip(c(b)).and_then(|(x, y)| x.checked_div(y).ok()),
                Node::Neg(a) => c(a).map(|x| -x),
                Node::Pow(_, 0) => Some(Interval::ONE),
                Node::Pow(a, n) => c(a).map(|x| x.powi(n)),
                Node::Sin(a) => c(a).map(Interval::sin),
                Node::Cos(a) => c(a).map(Interval::cos),
                Node::Msin(u, v) => c(u).zip(c(v)).map(|(x, y)| msin_enclosures(x, y).value),
            };
            folded.push(v);
        }

        let mut form = AffineForm { constant: Interval::ZERO, coeffs: vec![Interval::ZERO; self.arity] };
        let mut stack = vec![(self.expr.root(), Interval::ONE)];
        while let Some((id, m)) = stack.pop() {
            if let Some(c) = folded[id] {
                form.constant = form.constant + m * c;
                continue;
            }
            match nodes[id] {
                Node::Var(k) => {
                    let j = self.map[k];
                    form.coeffs[j] = form.coeffs[j] + m;
                }
                Node::Add(a, b) => {
                    stack.push((a, m));
                    stack.push((b, m));
                }
                Node::Sub(a, b) => {
                    stack.push((a, m));
                    stack.push((b, -m));
                }
                Node::Neg(a) => stack.push((a, -m)),
                Node::Mul(a, b) => match (folded[a], folded[b]) {
                    (Some(c), _) => stack.push((b, m * c)),
                    (_, Some(c)) => stack.push((a, m * c)),
                    _ => return None,
                },
                Node::Div(a, b) => {
                    let c = folded[b]?;
                    stack.push((a, m.checked_div(c).ok()?));
                }
                Node::Pow(a, 1) => stack.push((a, m)),
                _ => return None,
            }
        }
        Some(form)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn printer_round_trip() {
        for text in [
            "2 + 2*x1 + x2 + 3*x3 + x4",
            "x1^2/4 + (x2+1)*(x3+2) + (x3+3)^2",
            "-(a - b) - -c",
            "a - (b - c)",
            "a / (b * c)",
            "(-a)^2 + -a^2",
            "(a^2)^3",
            "msin(th + 0.5*(a1 + a2), 0.5*a3) * 1e-7",
            "sin(cos(x)) / (y / z)",
            "x^12",
        ] {
            let e = parse(text).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{text} -> {printed}");
        }
    }

    #[test]
    fn long_sum_prints_and_reparses() {
        let text: Vec<String> = (0..3000).map(|i| format!("0.5*x{i}")).collect();
        let e = parse(&text.join(" + ")).unwrap();
        assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn bind_reports_missing_variable() {
        let e = parse("x + y").unwrap();
        assert_eq!(e.bind(&names(&["x"])).unwrap_err(), EvalError::MissingVariable("y".into()));
    }

    #[test]
    fn affine_detection() {
        let decl = names(&["x1", "x2", "x3", "x4"]);
        let e = parse("2 + 2*x1 + x2 + 3*x3 + x4").unwrap().bind(&decl).unwrap();
        let form = e.affine_form().unwrap();
        assert_eq!(form.constant, Interval::point(2.0));
        let c: Vec<f64> = form.coeffs.iter().map(|c| c.lo()).collect();
        assert_eq!(c, vec![2.0, 1.0, 3.0, 1.0]);

        let e = parse("-(x1 - x2)/4 + x3*(2 - 3) + 0*x4^2 + x4^1").unwrap().bind(&decl).unwrap();
        // x4^2 times zero is still rejected: the check is structural
        assert!(e.affine_form().is_none());

        let e = parse("-(x1 - x2)/4 + x3*(2 - 3) + x4^1 + cos(0)").unwrap().bind(&decl).unwrap();
        let form = e.affine_form().unwrap();
        let c: Vec<f64> = form.coeffs.iter().map(|c| c.lo()).collect();
        assert_eq!(c, vec![-0.25, 0.25, -1.0, 1.0]);
        assert!(form.constant.contains(1.0));

        for text in ["x1*x2", "sin(x1)", "1/x1", "x1^2", "msin(x1, 0)"] {
            let e = parse(text).unwrap().bind(&decl).unwrap();
            assert!(e.affine_form().is_none(), "{text}");
        }
    }

    #[test]
    fn eval_by_name() {
        let e = parse("x^2").unwrap();
        let unit = Interval::UNIT;
        let v = e.eval_interval(|n| (n == "x").then_some(&unit)).unwrap();
        assert_eq!(v, Interval::new(0.0, 1.0).unwrap());
        assert!(e.eval_interval(|_| None).is_err());
    }
}
