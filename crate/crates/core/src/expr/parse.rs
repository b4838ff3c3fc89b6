//! Recursive-descent parser producing the postorder arena.

use thiserror::Error;

use super::{Expr, Node, NodeId};

/// Parenthesis/unary nesting beyond this depth is rejected instead of
/// risking the call stack.
pub const MAX_NESTING: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Unexpected { offset: usize, expected: Vec<&'static str>, found: String },
    #[error("at byte {offset}: invalid number `{text}`")]
    InvalidNumber { offset: usize, text: String },
    #[error("at byte {offset}: unknown function `{name}`")]
    UnknownFunction { offset: usize, name: String },
    #[error("at byte {offset}: `{name}` takes {expected} argument(s), got {got}")]
    WrongArity { offset: usize, name: String, expected: usize, got: usize },
    #[error("at byte {offset}: nesting deeper than {MAX_NESTING} levels")]
    TooDeep { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Unexpected { offset, .. }
            | ParseError::InvalidNumber { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::WrongArity { offset, .. }
            | ParseError::TooDeep { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Num(&'a str),
    Ident(&'a str),
    Sym(char),
    End,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }
}

const EXPR_START: [&str; 4] = ["number", "identifier", "`(`", "`-`"];

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok<'a>,
    tok_start: usize,
    depth: usize,
    nodes: Vec<Node>,
    vars: Vec<String>,
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text, pos: 0, tok: Tok::End, tok_start: 0, depth: 0, nodes: Vec::new(), vars: Vec::new() };
    p.advance()?;
    p.expr()?;
    if p.tok != Tok::End {
        return Err(p.unexpected(&["operator", "end of input"]));
    }
    Ok(Expr::from_parts(p.nodes, p.vars))
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        let Some(c) = self.src[self.pos..].chars().next() else {
            self.tok = Tok::End;
            return Ok(());
        };
        let start = self.pos;
        if c.is_ascii_digit() || c == '.' {
            self.scan_number();
            self.tok = Tok::Num(&self.src[start..self.pos]);
        } else if c.is_ascii_alphabetic() || c == '_' {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            self.tok = Tok::Ident(&self.src[start..self.pos]);
        } else if "+-*/^(),".contains(c) {
            self.pos += 1;
            self.tok = Tok::Sym(c);
        } else {
            return Err(ParseError::Unexpected {
                offset: start,
                expected: vec!["number", "identifier", "operator", "parenthesis"],
                found: format!("`{c}`"),
            });
        }
        Ok(())
    }

    fn scan_number(&mut self) {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let mut look = self.pos + 1;
            if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                look += 1;
            }
            if look < bytes.len() && bytes[look].is_ascii_digit() {
                self.pos = look;
                digits(&mut self.pos);
            }
        }
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Unexpected { offset: self.tok_start, expected: expected.to_vec(), found: self.tok.describe() }
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ParseError::TooDeep { offset: self.tok_start });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<NodeId, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        while let Tok::Sym(op @ ('+' | '-')) = self.tok {
            self.advance()?;
            let rhs = self.term()?;
            lhs = self.push(if op == '+' { Node::Add(lhs, rhs) } else { Node::Sub(lhs, rhs) });
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<NodeId, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Sym(op @ ('*' | '/')) = self.tok {
            self.advance()?;
            let rhs = self.unary()?;
            lhs = self.push(if op == '*' { Node::Mul(lhs, rhs) } else { Node::Div(lhs, rhs) });
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<NodeId, ParseError> {
        if self.tok == Tok::Sym('-') {
            self.enter()?;
            self.advance()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(self.push(Node::Neg(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<NodeId, ParseError> {
        let base = self.primary()?;
        if self.tok != Tok::Sym('^') {
            return Ok(base);
        }
        self.advance()?;
        let Tok::Num(text) = self.tok else {
            return Err(self.unexpected(&["non-negative integer exponent"]));
        };
        let n = if text.bytes().all(|b| b.is_ascii_digit()) { text.parse::<u32>().ok() } else { None };
        let Some(n) = n else {
            return Err(self.unexpected(&["non-negative integer exponent"]));
        };
        self.advance()?;
        Ok(self.push(Node::Pow(base, n)))
    }

    fn primary(&mut self) -> Result<NodeId, ParseError> {
        match self.tok {
            Tok::Num(text) => {
                let offset = self.tok_start;
                let value = text
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| ParseError::InvalidNumber { offset, text: text.to_string() })?;
                self.advance()?;
                Ok(self.push(Node::Const(value)))
            }
            Tok::Ident(name) => {
                let offset = self.tok_start;
                self.advance()?;
                if self.tok == Tok::Sym('(') {
                    return self.call(name, offset);
                }
                let k = match self.vars.iter().position(|v| v == name) {
                    Some(k) => k,
                    None => {
                        self.vars.push(name.to_string());
                        self.vars.len() - 1
                    }
                };
                Ok(self.push(Node::Var(k)))
            }
            Tok::Sym('(') => {
                self.advance()?;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            _ => Err(self.unexpected(&EXPR_START)),
        }
    }

    fn call(&mut self, name: &'a str, offset: usize) -> Result<NodeId, ParseError> {
        let arity = match name {
            "sin" | "cos" => 1,
            "msin" => 2,
            _ => return Err(ParseError::UnknownFunction { offset, name: name.to_string() }),
        };
        self.advance()?;
        let mut args = vec![self.expr()?];
        while self.tok == Tok::Sym(',') {
            self.advance()?;
            args.push(self.expr()?);
        }
        self.expect(')')?;
        if args.len() != arity {
            return Err(ParseError::WrongArity { offset, name: name.to_string(), expected: arity, got: args.len() });
        }
        let node = match name {
            "sin" => Node::Sin(args[0]),
            "cos" => Node::Cos(args[0]),
            _ => Node::Msin(args[0], args[1]),
        };
        Ok(self.push(node))
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.tok != Tok::Sym(c) {
            return Err(match c {
                ')' => self.unexpected(&["`)`", "`,`", "operator"]),
                _ => self.unexpected(&["`(`"]),
            });
        }
        self.advance()
    }
}
