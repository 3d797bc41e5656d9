//! Scalar expressions in `x`, `y` and `yp` (y′).
//!
//! Integrands `F(x, y, y′)`, constraint integrands `G(x, y, y′)` and extremals
//! `y(x)` are supplied as text, parsed once into an immutable [`Expr`] tree and
//! then evaluated many times along the extremal. Partial derivatives are
//! central finite differences, see [`partial`].

mod diff;
mod parse;

use std::fmt;

use thiserror::Error;

pub use diff::{
    directional_first, directional_mixed, directional_third_mixed, partial, partial_of,
};
pub(crate) use diff::{second_step, third_step};
pub use parse::{parse, Params, ParseError};

/// The three reserved variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    X,
    Y,
    Yp,
}

impl Variable {
    pub const ALL: [Variable; 3] = [Variable::X, Variable::Y, Variable::Yp];

    pub fn name(self) -> &'static str {
        match self {
            Variable::X => "x",
            Variable::Y => "y",
            Variable::Yp => "yp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "x" => Some(Variable::X),
            "y" => Some(Variable::Y),
            "yp" => Some(Variable::Yp),
            _ => None,
        }
    }
}

/// A binding of the three variables.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub yp: f64,
}

impl Point {
    pub fn new(x: f64, y: f64, yp: f64) -> Self {
        Self { x, y, yp }
    }

    pub fn get(&self, var: Variable) -> f64 {
        match var {
            Variable::X => self.x,
            Variable::Y => self.y,
            Variable::Yp => self.yp,
        }
    }

    pub fn with(mut self, var: Variable, value: f64) -> Self {
        match var {
            Variable::X => self.x = value,
            Variable::Y => self.y = value,
            Variable::Yp => self.yp = value,
        }
        self
    }

    /// `self + t·dir`, componentwise.
    pub fn shifted(&self, dir: Point, t: f64) -> Self {
        Self {
            x: self.x + t * dir.x,
            y: self.y + t * dir.y,
            yp: self.yp + t * dir.yp,
        }
    }

    /// Unit vector along `var`.
    pub fn unit(var: Variable) -> Self {
        Point::default().with(var, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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
    Abs,
}

impl Func {
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
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Parsed expression tree. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Named constant, resolved to its value at parse time.
    Param {
        name: String,
        value: f64,
    },
    Var(Variable),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Func,
        arg: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{subterm}`: {reason}")]
    Domain {
        subterm: String,
        reason: &'static str,
    },

    #[error("derivative order {0} not supported (expected 1 or 2 variables)")]
    DerivativeOrder(usize),
}

impl EvalError {
    fn domain(node: &Expr, reason: &'static str) -> Self {
        EvalError::Domain {
            subterm: node.to_string(),
            reason,
        }
    }
}

impl Expr {
    /// Evaluates the tree at a point.
    pub fn evaluate(&self, at: Point) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Num(v) => *v,
            Expr::Param { value, .. } => *value,
            Expr::Var(var) => at.get(*var),
            Expr::Neg(inner) => -inner.evaluate(at)?,
            Expr::Binary { op, lhs, rhs } => {
                let l = lhs.evaluate(at)?;
                let r = rhs.evaluate(at)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(EvalError::domain(self, "division by zero"));
                        }
                        l / r
                    }
                    BinOp::Pow => power(self, l, r)?,
                }
            }
            Expr::Call { func, arg } => {
                let v = arg.evaluate(at)?;
                match func {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => v.tan(),
                    Func::Sinh => v.sinh(),
                    Func::Cosh => v.cosh(),
                    Func::Tanh => v.tanh(),
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(EvalError::domain(
                                self,
                                "logarithm of a non-positive value",
                            ));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(EvalError::domain(self, "square root of a negative value"));
                        }
                        v.sqrt()
                    }
                    Func::Abs => v.abs(),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::domain(self, "non-finite result"))
        }
    }

    /// Convenience wrapper for [`Expr::evaluate`].
    pub fn eval(&self, x: f64, y: f64, yp: f64) -> Result<f64, EvalError> {
        self.evaluate(Point::new(x, y, yp))
    }

    /// True if the tree mentions `var`.
    pub fn depends_on(&self, var: Variable) -> bool {
        match self {
            Expr::Num(_) | Expr::Param { .. } => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(inner) => inner.depends_on(var),
            Expr::Binary { lhs, rhs, .. } => lhs.depends_on(var) || rhs.depends_on(var),
            Expr::Call { arg, .. } => arg.depends_on(var),
        }
    }
}

fn power(node: &Expr, base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::domain(node, "division by zero"));
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::domain(
            node,
            "negative base with non-integer exponent",
        ));
    }
    // powf(0, 0) == 1
    Ok(base.powf(exponent))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Param { name, .. } => f.write_str(name),
            Expr::Var(var) => f.write_str(var.name()),
            Expr::Neg(inner) => write!(f, "(-{inner})"),
            Expr::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            Expr::Call { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}
