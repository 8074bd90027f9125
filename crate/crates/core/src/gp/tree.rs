//! Expression trees, the function set, evaluation and s-expressions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Denominators smaller than this make division return 1.
pub const DIVISION_GUARD: f64 = 1e-12;
/// Upper clamp on the argument of `exp`.
pub const EXP_CLAMP: f64 = 80.0;

type UserFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

pub struct UserFunction {
    name: String,
    arity: usize,
    f: Box<UserFn>,
}

#[derive(Clone)]
pub enum Func {
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Exp,
    Pow,
    User(Arc<UserFunction>),
}

impl Func {
    pub fn name(&self) -> &str {
        match self {
            Func::Add => "+",
            Func::Sub => "-",
            Func::Mul => "*",
            Func::Div => "/",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Pow => "pow",
            Func::User(u) => &u.name,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Func::Sin | Func::Cos | Func::Exp => 1,
            Func::User(u) => u.arity,
            _ => 2,
        }
    }

    /// Applies the function with the protection rules; never returns NaN or
    /// an infinity.
    pub fn apply(&self, args: &[f64]) -> f64 {
        let v = match self {
            Func::Add => args[0] + args[1],
            Func::Sub => args[0] - args[1],
            Func::Mul => args[0] * args[1],
            Func::Div => {
                if args[1].abs() < DIVISION_GUARD {
                    1.0
                } else {
                    args[0] / args[1]
                }
            }
            Func::Sin => args[0].sin(),
            Func::Cos => args[0].cos(),
            Func::Exp => args[0].min(EXP_CLAMP).exp(),
            Func::Pow => {
                if args[0] < 0.0 && args[1].fract() != 0.0 {
                    1.0
                } else {
                    args[0].powf(args[1])
                }
            }
            Func::User(u) => (u.f)(args),
        };
        totalize(v)
    }
}

/// Saturates infinities to ±f64::MAX and maps NaN and -0 to 0, so the
/// sign of a zero can never leak into `pow`.
pub fn totalize(v: f64) -> f64 {
    if v.is_nan() || v == 0.0 {
        0.0
    } else {
        v.clamp(-f64::MAX, f64::MAX)
    }
}

impl PartialEq for Func {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name() && self.arity() == other.arity()
    }
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct FunctionSet {
    functions: Vec<Func>,
}

impl Default for FunctionSet {
    fn default() -> Self {
        Self::standard()
    }
}

impl FunctionSet {
    pub fn standard() -> Self {
        Self {
            functions: vec![
                Func::Add,
                Func::Sub,
                Func::Mul,
                Func::Div,
                Func::Sin,
                Func::Cos,
                Func::Exp,
                Func::Pow,
            ],
        }
    }

    /// A set restricted to the named built-ins, e.g. `["+", "-", "*", "/"]`.
    pub fn from_names(names: &[&str]) -> Result<Self> {
        let standard = Self::standard();
        let mut set = Self {
            functions: Vec::new(),
        };
        for name in names {
            let f = standard
                .get(name)
                .ok_or_else(|| Error::Config(format!("unknown function '{name}'")))?;
            set.push(f.clone())?;
        }
        Ok(set)
    }

    fn push(&mut self, f: Func) -> Result<()> {
        if self.get(f.name()).is_some() {
            return Err(Error::Config(format!("duplicate function '{}'", f.name())));
        }
        self.functions.push(f);
        Ok(())
    }

    pub fn with_user<F>(mut self, name: &str, arity: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let bad_name = name.is_empty()
            || name.starts_with('x')
            || name.contains(|c: char| c.is_whitespace() || c == '(' || c == ')')
            || name.parse::<f64>().is_ok()
            || name == "?";
        if bad_name || arity == 0 {
            return Err(Error::Config(format!(
                "invalid user function '{name}'/{arity}"
            )));
        }
        self.push(Func::User(Arc::new(UserFunction {
            name: name.to_string(),
            arity,
            f: Box::new(f),
        })))?;
        Ok(self)
    }

    pub fn functions(&self) -> &[Func] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Func> {
        self.functions.iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GpNode {
    Function(Func, Vec<GpNode>),
    Variable(usize),
    Constant(f64),
}

impl GpNode {
    pub fn call(f: Func, children: Vec<GpNode>) -> Self {
        debug_assert_eq!(f.arity(), children.len());
        GpNode::Function(f, children)
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            GpNode::Constant(c) => totalize(*c),
            GpNode::Variable(i) => totalize(vars[*i]),
            GpNode::Function(f, children) => match children.as_slice() {
                [a] => f.apply(&[a.eval(vars)]),
                [a, b] => f.apply(&[a.eval(vars), b.eval(vars)]),
                _ => {
                    let args: Vec<f64> = children.iter().map(|c| c.eval(vars)).collect();
                    f.apply(&args)
                }
            },
        }
    }

    pub fn is_function(&self) -> bool {
        matches!(self, GpNode::Function(..))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            GpNode::Function(_, children) => 1 + children.iter().map(GpNode::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Leaves have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            GpNode::Function(_, children) => {
                1 + children.iter().map(GpNode::depth).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    /// Largest variable index used, if any.
    pub fn max_variable(&self) -> Option<usize> {
        match self {
            GpNode::Variable(i) => Some(*i),
            GpNode::Constant(_) => None,
            GpNode::Function(_, children) => children.iter().filter_map(GpNode::max_variable).max(),
        }
    }

    /// Nodes in preorder.
    pub fn preorder(&self) -> Vec<&GpNode> {
        let mut out = Vec::with_capacity(self.size());
        fn walk<'a>(n: &'a GpNode, out: &mut Vec<&'a GpNode>) {
            out.push(n);
            if let GpNode::Function(_, children) = n {
                for c in children {
                    walk(c, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Node at preorder `index`.
    pub fn node_mut(&mut self, index: usize) -> Option<&mut GpNode> {
        if index == 0 {
            return Some(self);
        }
        let GpNode::Function(_, children) = self else {
            return None;
        };
        let mut offset = 1;
        for c in children.iter_mut() {
            let size = c.size();
            if index < offset + size {
                return c.node_mut(index - offset);
            }
            offset += size;
        }
        None
    }

    /// Replaces the subtree at preorder `index` and returns the old one.
    pub fn replace(&mut self, index: usize, subtree: GpNode) -> GpNode {
        let slot = self.node_mut(index).expect("index within tree");
        std::mem::replace(slot, subtree)
    }

    /// Constants in preorder.
    pub fn constants(&self) -> Vec<f64> {
        self.preorder()
            .into_iter()
            .filter_map(|n| match n {
                GpNode::Constant(c) => Some(*c),
                _ => None,
            })
            .collect()
    }

    /// Overwrites constants in preorder; `values` must match `constants()`.
    pub fn set_constants(&mut self, values: &[f64]) -> Result<()> {
        fn walk(n: &mut GpNode, values: &[f64], next: &mut usize) {
            match n {
                GpNode::Constant(c) => {
                    if let Some(v) = values.get(*next) {
                        *c = *v;
                    }
                    *next += 1;
                }
                GpNode::Variable(_) => {}
                GpNode::Function(_, children) => {
                    for c in children {
                        walk(c, values, next);
                    }
                }
            }
        }
        let expected = self.constants().len();
        if expected != values.len() {
            return Err(Error::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        walk(self, values, &mut 0);
        Ok(())
    }

    /// Parses an s-expression such as `(+ (* 2.0 x0) 1.0)`.
    pub fn parse(text: &str, functions: &FunctionSet) -> Result<Self> {
        let sexp = Sexp::parse(text)?;
        sexp.to_node(functions)
    }
}

impl fmt::Display for GpNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GpNode::Constant(c) => write!(f, "{c:?}"),
            GpNode::Variable(i) => write!(f, "x{i}"),
            GpNode::Function(func, children) => {
                write!(f, "({}", func.name())?;
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Untyped parse tree shared by trees and penalty patterns.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub(crate) fn parse(text: &str) -> Result<Self> {
        let spaced = text.replace('(', " ( ").replace(')', " ) ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        let mut pos = 0;
        let sexp = Self::read(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(syntax("trailing input"));
        }
        Ok(sexp)
    }

    fn read(tokens: &[&str], pos: &mut usize) -> Result<Self> {
        let tok = *tokens
            .get(*pos)
            .ok_or_else(|| syntax("unexpected end of input"))?;
        *pos += 1;
        match tok {
            "(" => {
                let mut items = Vec::new();
                loop {
                    match tokens.get(*pos) {
                        None => return Err(syntax("missing ')'")),
                        Some(&")") => {
                            *pos += 1;
                            break;
                        }
                        Some(_) => items.push(Self::read(tokens, pos)?),
                    }
                }
                Ok(Sexp::List(items))
            }
            ")" => Err(syntax("unexpected ')'")),
            atom => Ok(Sexp::Atom(atom.to_string())),
        }
    }

    pub(crate) fn head<'a>(items: &'a [Sexp], functions: &FunctionSet) -> Result<&'a str> {
        match items.first() {
            Some(Sexp::Atom(name)) => {
                let f = functions
                    .get(name)
                    .ok_or_else(|| syntax(&format!("unknown function '{name}'")))?;
                if f.arity() != items.len() - 1 {
                    return Err(syntax(&format!(
                        "'{name}' takes {} arguments, got {}",
                        f.arity(),
                        items.len() - 1
                    )));
                }
                Ok(name)
            }
            _ => Err(syntax("a list must start with a function name")),
        }
    }

    fn to_node(&self, functions: &FunctionSet) -> Result<GpNode> {
        match self {
            Sexp::Atom(a) => parse_terminal(a),
            Sexp::List(items) => {
                let name = Self::head(items, functions)?;
                let children = items[1..]
                    .iter()
                    .map(|s| s.to_node(functions))
                    .collect::<Result<Vec<_>>>()?;
                let f = functions.get(name).expect("checked by head").clone();
                Ok(GpNode::Function(f, children))
            }
        }
    }
}

pub(crate) fn parse_terminal(atom: &str) -> Result<GpNode> {
    if let Some(idx) = atom.strip_prefix('x') {
        return idx
            .parse::<usize>()
            .map(GpNode::Variable)
            .map_err(|_| syntax(&format!("bad variable '{atom}'")));
    }
    match atom.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(GpNode::Constant(v)),
        _ => Err(syntax(&format!("bad terminal '{atom}'"))),
    }
}

fn syntax(msg: &str) -> Error {
    Error::Schema(format!("s-expression: {msg}"))
}
