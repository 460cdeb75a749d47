use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::jet::Jet;
use crate::error::{DomainError, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree. Variables are indices into the owning [`Expr`]'s
/// variable list.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    /// Negation; folds numeric literals so `Neg(Num(_))` never occurs.
    pub fn neg(a: Node) -> Node {
        match a {
            Node::Num(c) => Node::Num(-c),
            other => Node::Neg(Box::new(other)),
        }
    }

    fn is_num(&self, c: f64) -> bool {
        matches!(self, Node::Num(x) if *x == c)
    }

    fn depends_on(&self, var: usize) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) | Node::Call(_, a) => a.depends_on(var),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
        }
    }
}

// Simplifying constructors used by differentiation. The parser only uses
// `Node::neg`, so parsed trees keep their written structure.
fn add(a: Node, b: Node) -> Node {
    match (&a, &b) {
        (Node::Num(x), Node::Num(y)) => Node::Num(x + y),
        _ if a.is_num(0.0) => b,
        _ if b.is_num(0.0) => a,
        _ => Node::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Node, b: Node) -> Node {
    match (&a, &b) {
        (Node::Num(x), Node::Num(y)) => Node::Num(x - y),
        _ if b.is_num(0.0) => a,
        _ if a.is_num(0.0) => Node::neg(b),
        _ => Node::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Node, b: Node) -> Node {
    match (&a, &b) {
        (Node::Num(x), Node::Num(y)) => Node::Num(x * y),
        _ if a.is_num(0.0) || b.is_num(0.0) => Node::Num(0.0),
        _ if a.is_num(1.0) => b,
        _ if b.is_num(1.0) => a,
        _ if a.is_num(-1.0) => Node::neg(b),
        _ if b.is_num(-1.0) => Node::neg(a),
        _ => Node::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Node, b: Node) -> Node {
    if a.is_num(0.0) {
        Node::Num(0.0)
    } else if b.is_num(1.0) {
        a
    } else {
        Node::Div(Box::new(a), Box::new(b))
    }
}

fn pow(a: Node, b: Node) -> Node {
    if b.is_num(1.0) {
        a
    } else if b.is_num(0.0) {
        Node::Num(1.0)
    } else {
        Node::Pow(Box::new(a), Box::new(b))
    }
}

fn neg(a: Node) -> Node {
    match a {
        Node::Neg(inner) => *inner,
        other => Node::neg(other),
    }
}

fn call(f: Func, a: Node) -> Node {
    Node::Call(f, Box::new(a))
}

/// A parsed expression together with the variable names it may refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    vars: Arc<Vec<String>>,
    node: Node,
}

/// A value bound to a variable for jet evaluation.
#[derive(Clone, Copy, Debug)]
pub enum Arg<'a> {
    Jet(&'a Jet),
    Real(f64),
}

impl Expr {
    pub fn from_node(vars: &[&str], node: Node) -> Self {
        Expr {
            vars: Arc::new(vars.iter().map(|v| v.to_string()).collect()),
            node,
        }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn depends_on(&self, name: &str) -> bool {
        self.var_index(name).is_some_and(|i| self.node.depends_on(i))
    }

    /// Exact symbolic partial derivative. Differentiating with respect to
    /// a name outside the variable list gives zero.
    pub fn diff(&self, name: &str) -> Expr {
        let node = match self.var_index(name) {
            Some(i) => diff_node(&self.node, i),
            None => Node::Num(0.0),
        };
        Expr {
            vars: self.vars.clone(),
            node,
        }
    }

    /// Truncated Taylor expansion with positional arguments matching
    /// [`Expr::vars`]. Real arguments are promoted to constant jets.
    pub fn eval_jet(&self, args: &[Arg]) -> Result<Jet, DomainError> {
        if args.len() != self.vars.len() {
            return Err(DomainError::new(format!(
                "expected {} arguments, got {}",
                self.vars.len(),
                args.len()
            )));
        }
        let (base, order) = args
            .iter()
            .find_map(|a| match a {
                Arg::Jet(j) => Some((j.base(), j.order())),
                Arg::Real(_) => None,
            })
            .unwrap_or((0.0, 0));
        let jets: Vec<Jet> = args
            .iter()
            .map(|a| match a {
                Arg::Jet(j) => (*j).clone(),
                Arg::Real(x) => Jet::constant(base, *x, order),
            })
            .collect();
        eval_node_jet(&self.node, &jets, base, order)
    }

    /// Named-argument form of [`Expr::eval_jet`].
    pub fn eval_jet_named(&self, assignments: &HashMap<&str, Arg>) -> Result<Jet, DomainError> {
        let args = self
            .vars
            .iter()
            .map(|v| {
                assignments
                    .get(v.as_str())
                    .copied()
                    .ok_or_else(|| DomainError::new(format!("variable `{v}` is not assigned")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.eval_jet(&args)
    }

    pub fn eval(&self, args: &[f64]) -> Result<f64, DomainError> {
        eval_node_f64(&self.node, args)
    }
}

fn diff_node(n: &Node, v: usize) -> Node {
    if !n.depends_on(v) {
        return Node::Num(0.0);
    }
    match n {
        Node::Num(_) => Node::Num(0.0),
        Node::Var(i) => Node::Num(if *i == v { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(diff_node(a, v)),
        Node::Add(a, b) => add(diff_node(a, v), diff_node(b, v)),
        Node::Sub(a, b) => sub(diff_node(a, v), diff_node(b, v)),
        Node::Mul(a, b) => add(
            mul(diff_node(a, v), (**b).clone()),
            mul((**a).clone(), diff_node(b, v)),
        ),
        Node::Div(a, b) => {
            let num = sub(
                mul(diff_node(a, v), (**b).clone()),
                mul((**a).clone(), diff_node(b, v)),
            );
            div(num, pow((**b).clone(), Node::Num(2.0)))
        }
        Node::Pow(a, b) => {
            if !b.depends_on(v) {
                // b · a^(b-1) · a'
                let lowered = match **b {
                    Node::Num(c) => Node::Num(c - 1.0),
                    _ => sub((**b).clone(), Node::Num(1.0)),
                };
                mul(
                    mul((**b).clone(), pow((**a).clone(), lowered)),
                    diff_node(a, v),
                )
            } else {
                // a^b · (b' log a + b a'/a)
                let term = add(
                    mul(diff_node(b, v), call(Func::Log, (**a).clone())),
                    div(mul((**b).clone(), diff_node(a, v)), (**a).clone()),
                );
                mul(n.clone(), term)
            }
        }
        Node::Call(f, a) => {
            let inner = diff_node(a, v);
            let a = (**a).clone();
            let outer = match f {
                Func::Sin => call(Func::Cos, a),
                Func::Cos => neg(call(Func::Sin, a)),
                Func::Tan => add(Node::Num(1.0), pow(call(Func::Tan, a), Node::Num(2.0))),
                Func::Sinh => call(Func::Cosh, a),
                Func::Cosh => call(Func::Sinh, a),
                Func::Tanh => sub(Node::Num(1.0), pow(call(Func::Tanh, a), Node::Num(2.0))),
                Func::Exp => call(Func::Exp, a),
                Func::Log => div(Node::Num(1.0), a),
                Func::Sqrt => div(Node::Num(1.0), mul(Node::Num(2.0), call(Func::Sqrt, a))),
                Func::Atan => div(Node::Num(1.0), add(Node::Num(1.0), pow(a, Node::Num(2.0)))),
            };
            mul(outer, inner)
        }
    }
}

const MAX_INTEGER_POWER: f64 = 64.0;

fn integral_exponent(j: &Jet) -> Option<i32> {
    let c = j.value();
    let constant = j.coeffs()[1..].iter().all(|x| *x == 0.0);
    (constant && c.fract() == 0.0 && c.abs() <= MAX_INTEGER_POWER).then_some(c as i32)
}

fn eval_node_jet(n: &Node, args: &[Jet], base: f64, order: usize) -> Result<Jet, DomainError> {
    let rec = |m: &Node| eval_node_jet(m, args, base, order);
    Ok(match n {
        Node::Num(c) => Jet::constant(base, *c, order),
        Node::Var(i) => args[*i].clone(),
        Node::Neg(a) => -rec(a)?,
        Node::Add(a, b) => rec(a)? + rec(b)?,
        Node::Sub(a, b) => rec(a)? - rec(b)?,
        Node::Mul(a, b) => rec(a)? * rec(b)?,
        Node::Div(a, b) => rec(a)?.checked_div(&rec(b)?)?,
        Node::Pow(a, b) => {
            let x = rec(a)?;
            let e = rec(b)?;
            match integral_exponent(&e) {
                Some(k) => x.powi(k)?,
                None => x.powf(&e)?,
            }
        }
        Node::Call(f, a) => {
            let x = rec(a)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan()?,
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Exp => x.exp(),
                Func::Log => x.ln()?,
                Func::Sqrt => x.sqrt()?,
                Func::Atan => x.atan(),
            }
        }
    })
}

fn eval_node_f64(n: &Node, args: &[f64]) -> Result<f64, DomainError> {
    let rec = |m: &Node| eval_node_f64(m, args);
    Ok(match n {
        Node::Num(c) => *c,
        Node::Var(i) => args[*i],
        Node::Neg(a) => -rec(a)?,
        Node::Add(a, b) => rec(a)? + rec(b)?,
        Node::Sub(a, b) => rec(a)? - rec(b)?,
        Node::Mul(a, b) => rec(a)? * rec(b)?,
        Node::Div(a, b) => {
            let d = rec(b)?;
            if d == 0.0 {
                return Err(DomainError::new("division by zero"));
            }
            rec(a)? / d
        }
        Node::Pow(a, b) => {
            let x = rec(a)?;
            let e = rec(b)?;
            if e.fract() == 0.0 && e.abs() <= MAX_INTEGER_POWER {
                if e < 0.0 && x == 0.0 {
                    return Err(DomainError::new("negative power of zero"));
                }
                x.powi(e as i32)
            } else if x > 0.0 {
                x.powf(e)
            } else {
                return Err(DomainError::new("real power of a nonpositive base"));
            }
        }
        Node::Call(f, a) => {
            let x = rec(a)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Exp => x.exp(),
                Func::Log if x > 0.0 => x.ln(),
                Func::Log => return Err(DomainError::new("log of a nonpositive value")),
                Func::Sqrt if x >= 0.0 => x.sqrt(),
                Func::Sqrt => return Err(DomainError::new("sqrt of a negative value")),
                Func::Atan => x.atan(),
            }
        }
    })
}

impl fmt::Display for Expr {
    /// Fully parenthesized; re-parses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.node, &self.vars)
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, n: &Node, vars: &[String]) -> fmt::Result {
    let bin = |f: &mut fmt::Formatter<'_>, a: &Node, op: &str, b: &Node| -> fmt::Result {
        write!(f, "(")?;
        write_node(f, a, vars)?;
        write!(f, " {op} ")?;
        write_node(f, b, vars)?;
        write!(f, ")")
    };
    match n {
        Node::Num(c) if *c < 0.0 => write!(f, "(-{})", -c),
        Node::Num(c) => write!(f, "{c}"),
        Node::Var(i) => write!(f, "{}", vars[*i]),
        Node::Neg(a) => {
            write!(f, "(-")?;
            write_node(f, a, vars)?;
            write!(f, ")")
        }
        Node::Add(a, b) => bin(f, a, "+", b),
        Node::Sub(a, b) => bin(f, a, "-", b),
        Node::Mul(a, b) => bin(f, a, "*", b),
        Node::Div(a, b) => bin(f, a, "/", b),
        Node::Pow(a, b) => bin(f, a, "^", b),
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a, vars)?;
            write!(f, ")")
        }
    }
}

// ---------------------------------------------------------------------------
// Parser

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value = text.parse::<f64>().map_err(|_| ParseError::Syntax {
                offset: start,
                expected: vec!["number".into()],
            })?;
            out.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            // Offsets are byte offsets; non-ASCII input lands here.
            return Err(ParseError::Syntax {
                offset: i,
                expected: operand_expected(),
            });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

fn operand_expected() -> Vec<String> {
    ["number", "identifier", "(", "-"].iter().map(|s| s.to_string()).collect()
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn eat(&mut self, op: char) -> bool {
        if *self.peek() == Tok::Op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    // term := unary (('*' | '/') unary)*
    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat('-') {
            Ok(Node::neg(self.unary()?))
        } else {
            self.power()
        }
    }

    // power := atom ('^' unary)?   (right-associative through unary)
    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.pos += 1;
                Ok(Node::Num(x))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.fail(&[")", "+", "-", "*", "/", "^"]);
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                if let Some(func) = Func::from_name(&name) {
                    if !self.eat('(') {
                        return self.fail(&["("]);
                    }
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return self.fail(&[")", "+", "-", "*", "/", "^"]);
                    }
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                if name == "pi" {
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                Err(ParseError::UnknownIdentifier { name, offset })
            }
            _ => self.fail(&["number", "identifier", "(", "-"]),
        }
    }
}

/// Parses `src` over the given variable names. Grammar, loosest first:
/// `+ -` (left), `* /` (left), unary `-`, `^` (right), atoms. Atoms are
/// numbers, variables, `pi`, parenthesized expressions and calls of
/// `sin cos tan sinh cosh tanh exp log sqrt atan`.
pub fn parse_expr(src: &str, vars: &[&str]) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, vars };
    let node = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(&["+", "-", "*", "/", "^", "end of input"]);
    }
    Ok(Expr::from_node(vars, node))
}
