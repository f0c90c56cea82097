//! Runtime values and the primitive set.
//!
//! Every value flowing through a program is either a scalar or a vector whose
//! length is the feature count `n` of the dataset. Binary mathematical
//! primitives broadcast a scalar argument across the components of a vector
//! argument; vector-to-scalar primitives collapse a vector and pass scalars
//! through (L2 excepted, which takes the absolute value).

use std::fmt;
use std::str::FromStr;

/// Denominator magnitude below which protected division returns 1.
pub const DIV_PROTECTION_THRESHOLD: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Value {
    pub fn is_scalar(&self) -> bool {
        matches!(self, Value::Scalar(_))
    }

    /// Number of components: 1 for a scalar.
    pub fn len(&self) -> usize {
        match self {
            Value::Scalar(_) => 1,
            Value::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn components(&self) -> &[f64] {
        match self {
            Value::Scalar(x) => std::slice::from_ref(x),
            Value::Vector(v) => v,
        }
    }
}

/// The fifteen primitives: six binary, seven unary and two terminals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Primitive {
    Add,
    Sub,
    Mul,
    Div,
    Mxf,
    Mnf,
    Abs,
    Sln,
    Sum,
    Mea,
    Mxv,
    Miv,
    L2,
    /// Ephemeral random vector: a copied training sample used as a constant.
    E,
    /// The sample being classified.
    X,
}

impl Primitive {
    pub const ALL: [Primitive; 15] = [
        Primitive::Add,
        Primitive::Sub,
        Primitive::Mul,
        Primitive::Div,
        Primitive::Mxf,
        Primitive::Mnf,
        Primitive::Abs,
        Primitive::Sln,
        Primitive::Sum,
        Primitive::Mea,
        Primitive::Mxv,
        Primitive::Miv,
        Primitive::L2,
        Primitive::E,
        Primitive::X,
    ];
    pub const BINARY: [Primitive; 6] = [
        Primitive::Add,
        Primitive::Sub,
        Primitive::Mul,
        Primitive::Div,
        Primitive::Mxf,
        Primitive::Mnf,
    ];
    pub const UNARY: [Primitive; 7] = [
        Primitive::Abs,
        Primitive::Sln,
        Primitive::Sum,
        Primitive::Mea,
        Primitive::Mxv,
        Primitive::Miv,
        Primitive::L2,
    ];
    pub const TERMINALS: [Primitive; 2] = [Primitive::E, Primitive::X];
    pub const FUNCTIONS: [Primitive; 13] = [
        Primitive::Add,
        Primitive::Sub,
        Primitive::Mul,
        Primitive::Div,
        Primitive::Mxf,
        Primitive::Mnf,
        Primitive::Abs,
        Primitive::Sln,
        Primitive::Sum,
        Primitive::Mea,
        Primitive::Mxv,
        Primitive::Miv,
        Primitive::L2,
    ];

    pub fn arity(self) -> usize {
        match self {
            Primitive::Add
            | Primitive::Sub
            | Primitive::Mul
            | Primitive::Div
            | Primitive::Mxf
            | Primitive::Mnf => 2,
            Primitive::Abs
            | Primitive::Sln
            | Primitive::Sum
            | Primitive::Mea
            | Primitive::Mxv
            | Primitive::Miv
            | Primitive::L2 => 1,
            Primitive::E | Primitive::X => 0,
        }
    }

    pub fn is_terminal(self) -> bool {
        self.arity() == 0
    }

    /// True for SUM, MEA, MXV, MIV and L2.
    pub fn is_reduction(self) -> bool {
        matches!(
            self,
            Primitive::Sum | Primitive::Mea | Primitive::Mxv | Primitive::Miv | Primitive::L2
        )
    }

    /// All primitives sharing this primitive's arity.
    pub fn same_arity(self) -> &'static [Primitive] {
        match self.arity() {
            2 => &Self::BINARY,
            1 => &Self::UNARY,
            _ => &Self::TERMINALS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Primitive::Add => "ADD",
            Primitive::Sub => "SUB",
            Primitive::Mul => "MUL",
            Primitive::Div => "DIV",
            Primitive::Mxf => "MXF",
            Primitive::Mnf => "MNF",
            Primitive::Abs => "ABS",
            Primitive::Sln => "SLN",
            Primitive::Sum => "SUM",
            Primitive::Mea => "MEA",
            Primitive::Mxv => "MXV",
            Primitive::Miv => "MIV",
            Primitive::L2 => "L2",
            Primitive::E => "E",
            Primitive::X => "X",
        }
    }

    /// The scalar function behind a binary primitive.
    pub fn binary_fn(self) -> Option<fn(f64, f64) -> f64> {
        Some(match self {
            Primitive::Add => add,
            Primitive::Sub => sub,
            Primitive::Mul => mul,
            Primitive::Div => protected_div,
            Primitive::Mxf => f64::max,
            Primitive::Mnf => f64::min,
            _ => return None,
        })
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPrimitive(pub String);

impl fmt::Display for UnknownPrimitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown primitive `{}`", self.0)
    }
}

impl std::error::Error for UnknownPrimitive {}

impl FromStr for Primitive {
    type Err = UnknownPrimitive;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Primitive::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            // MIF appears as an alias of MNF in some listings of the primitive set.
            .or(if s == "MIF" {
                Some(Primitive::Mnf)
            } else {
                None
            })
            .ok_or_else(|| UnknownPrimitive(s.to_string()))
    }
}

#[inline]
fn add(a: f64, b: f64) -> f64 {
    a + b
}

#[inline]
fn sub(a: f64, b: f64) -> f64 {
    a - b
}

#[inline]
fn mul(a: f64, b: f64) -> f64 {
    a * b
}

/// Division returning 1 when `|b| < 0.001`.
#[inline]
pub fn protected_div(a: f64, b: f64) -> f64 {
    if b.abs() < DIV_PROTECTION_THRESHOLD {
        1.0
    } else {
        a / b
    }
}

/// Saturated symmetric linear function: clamps to [-1, 1]. NaN passes through.
#[inline]
pub fn saturate(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Applies a two-argument scalar function with scalar/vector broadcasting.
pub fn broadcast_binary(f: impl Fn(f64, f64) -> f64, a: &Value, b: &Value, n: usize) -> Value {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(f(*x, *y)),
        (Value::Scalar(x), Value::Vector(ys)) => {
            debug_assert_eq!(ys.len(), n);
            Value::Vector(ys.iter().map(|&y| f(*x, y)).collect())
        }
        (Value::Vector(xs), Value::Scalar(y)) => {
            debug_assert_eq!(xs.len(), n);
            Value::Vector(xs.iter().map(|&x| f(x, *y)).collect())
        }
        (Value::Vector(xs), Value::Vector(ys)) => {
            debug_assert!(xs.len() == n && ys.len() == n);
            Value::Vector(xs.iter().zip(ys).map(|(&x, &y)| f(x, y)).collect())
        }
    }
}

/// Collapses a value to the scalar used by the classification rule.
pub fn reduce_to_scalar(v: &Value) -> f64 {
    match v {
        Value::Scalar(x) => *x,
        Value::Vector(xs) => xs.iter().sum(),
    }
}

pub(crate) fn vector_sum(xs: &[f64]) -> f64 {
    xs.iter().sum()
}

pub(crate) fn vector_max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn vector_min(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn vector_l2(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Evaluates a non-terminal primitive on already evaluated arguments.
///
/// Panics if `kind` is a terminal or `args` does not match its arity.
pub fn apply_primitive(kind: Primitive, args: &[Value], n: usize) -> Value {
    assert_eq!(
        args.len(),
        kind.arity(),
        "{kind} expects {} arguments",
        kind.arity()
    );
    match kind {
        Primitive::E | Primitive::X => panic!("terminal {kind} cannot be applied"),
        Primitive::Abs => map_components(&args[0], f64::abs),
        Primitive::Sln => map_components(&args[0], saturate),
        Primitive::Sum | Primitive::Mea | Primitive::Mxv | Primitive::Miv | Primitive::L2 => {
            match &args[0] {
                Value::Scalar(x) if kind == Primitive::L2 => Value::Scalar(x.abs()),
                Value::Scalar(x) => Value::Scalar(*x),
                Value::Vector(xs) => Value::Scalar(match kind {
                    Primitive::Sum => vector_sum(xs),
                    Primitive::Mea => vector_sum(xs) / xs.len() as f64,
                    Primitive::Mxv => vector_max(xs),
                    Primitive::Miv => vector_min(xs),
                    _ => vector_l2(xs),
                }),
            }
        }
        _ => {
            let f = kind.binary_fn().expect("binary primitive");
            broadcast_binary(f, &args[0], &args[1], n)
        }
    }
}

fn map_components(v: &Value, f: fn(f64) -> f64) -> Value {
    match v {
        Value::Scalar(x) => Value::Scalar(f(*x)),
        Value::Vector(xs) => Value::Vector(xs.iter().map(|&x| f(x)).collect()),
    }
}
