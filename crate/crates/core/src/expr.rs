//! Recursive-descent parser for metric component expressions.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' unary)?            (right associative)
//! atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Names are `t`, `x1` … `x{dim}`, the constants `pi` and `e`, and the functions
//! `sin cos exp sqrt abs` (one argument) and `min max` (two or more).

use crate::error::{Error, Result};
use crate::form::Point;
use crate::scalar::Real;

pub const FUNCTIONS: [&str; 7] = ["sin", "cos", "exp", "sqrt", "abs", "min", "max"];
pub const CONSTANTS: [&str; 2] = ["pi", "e"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn variadic(self) -> bool {
        matches!(self, Func::Min | Func::Max)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Time,
    Coord(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed scalar field `(t, x) ↦ value`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpression {
    source: String,
    spatial_dim: usize,
    root: Node,
}

impl FieldExpression {
    pub fn parse(source: &str, spatial_dim: usize) -> Result<Self> {
        let mut p = Parser { src: source.as_bytes(), pos: 0, spatial_dim };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
        }
        Ok(Self { source: source.to_string(), spatial_dim, root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    /// Evaluates at `(t, x)`; division by zero and non-finite results are errors.
    pub fn eval<T: Real>(&self, t: T, x: &Point<T>) -> Result<T> {
        let v = eval_node(&self.root, t, x)?;
        if !v.is_finite() {
            return Err(eval_error(t, x, "non-finite value"));
        }
        Ok(v)
    }

    /// True when the expression never mentions `t`.
    pub fn is_time_independent(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Time => false,
                Node::Num(_) | Node::Coord(_) => true,
                Node::Neg(a) => walk(a),
                Node::Bin(_, a, b) => walk(a) && walk(b),
                Node::Call(_, args) => args.iter().all(walk),
            }
        }
        walk(&self.root)
    }
}

fn eval_error<T: Real>(t: T, x: &Point<T>, message: &str) -> Error {
    Error::Evaluation { t: t.to_f(), x: [x[0].to_f(), x[1].to_f()], message: message.to_string() }
}

fn eval_node<T: Real>(n: &Node, t: T, x: &Point<T>) -> Result<T> {
    Ok(match n {
        Node::Num(v) => T::lit(*v),
        Node::Time => t,
        Node::Coord(i) => x[*i],
        Node::Neg(a) => -eval_node(a, t, x)?,
        Node::Bin(op, a, b) => {
            let l = eval_node(a, t, x)?;
            let r = eval_node(b, t, x)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r == T::zero() {
                        return Err(eval_error(t, x, "division by zero"));
                    }
                    l / r
                }
                BinOp::Pow => l.powf(r),
            }
        }
        Node::Call(f, args) => {
            let first = eval_node(&args[0], t, x)?;
            match f {
                Func::Sin => first.sin(),
                Func::Cos => first.cos(),
                Func::Exp => first.exp(),
                Func::Sqrt => first.sqrt(),
                Func::Abs => first.abs(),
                Func::Min | Func::Max => {
                    let mut acc = first;
                    for a in &args[1..] {
                        let v = eval_node(a, t, x)?;
                        acc = if *f == Func::Min { acc.min(v) } else { acc.max(v) };
                    }
                    acc
                }
            }
        }
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    spatial_dim: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: String) -> Error {
        Error::Syntax { offset: self.pos, message }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input".into())),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`".into()));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        text.parse::<f64>().map(Node::Num).map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }

    fn name(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        if self.peek() == Some(b'(') {
            let func = Func::lookup(name)
                .ok_or_else(|| Error::UnknownIdentifier { name: name.to_string(), offset: start })?;
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            if !self.eat(b')') {
                return Err(self.syntax("expected `)` or `,`".into()));
            }
            let ok = if func.variadic() { args.len() >= 2 } else { args.len() == 1 };
            if !ok {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("`{name}` called with {} argument(s)", args.len()),
                });
            }
            return Ok(Node::Call(func, args));
        }
        match name {
            "t" => Ok(Node::Time),
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "e" => Ok(Node::Num(std::f64::consts::E)),
            _ => {
                if let Some(k) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
                    if (1..=self.spatial_dim).contains(&k) {
                        return Ok(Node::Coord(k - 1));
                    }
                }
                Err(Error::UnknownIdentifier { name: name.to_string(), offset: start })
            }
        }
    }
}
