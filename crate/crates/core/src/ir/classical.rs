//! Classical scalar values and expressions that survive into circuits when
//! control flow depends on measurement outcomes.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength, higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::FloorDiv | BinOp::Mod => 6,
            BinOp::Pow => 8,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Pos,
    Not,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Pos => "+",
            UnOp::Not => "not ",
        }
    }
}

/// A classical scalar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
}

impl Scalar {
    pub fn truthy(&self) -> bool {
        match self {
            Scalar::Int(v) => *v != 0,
            Scalar::Float(v) => *v != 0.0,
            Scalar::Bool(b) => *b,
            Scalar::Str(s) => !s.is_empty(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Int(v) => Some(*v as f64),
            Scalar::Float(v) => Some(*v),
            Scalar::Bool(b) => Some(f64::from(u8::from(*b))),
            Scalar::Str(_) => None,
        }
    }

    /// Integer view; bools count as 0/1 like in Python.
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Scalar::Int(v) => Some(*v),
            Scalar::Bool(b) => Some(i64::from(*b)),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Scalar::Int(_) => "int",
            Scalar::Float(_) => "float",
            Scalar::Bool(_) => "bool",
            Scalar::Str(_) => "str",
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Float(v) => write!(f, "{}", python_float(*v)),
            Scalar::Bool(true) => f.write_str("True"),
            Scalar::Bool(false) => f.write_str("False"),
            Scalar::Str(s) => f.write_str(s),
        }
    }
}

/// Formats a float the way Python's `str(float)` does for common values.
pub fn python_float(v: f64) -> String {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e16 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

pub fn apply_unary(op: UnOp, v: &Scalar) -> Result<Scalar, String> {
    match (op, v) {
        (UnOp::Not, v) => Ok(Scalar::Bool(!v.truthy())),
        (UnOp::Pos, Scalar::Str(_)) | (UnOp::Neg, Scalar::Str(_)) => {
            Err(format!("bad operand type for unary {}: str", op.symbol()))
        }
        (UnOp::Pos, Scalar::Float(x)) => Ok(Scalar::Float(*x)),
        (UnOp::Pos, v) => Ok(Scalar::Int(v.as_i64().unwrap())),
        (UnOp::Neg, Scalar::Float(x)) => Ok(Scalar::Float(-x)),
        (UnOp::Neg, v) => Ok(Scalar::Int(-v.as_i64().unwrap())),
    }
}

/// Python-flavoured binary arithmetic on scalars.
pub fn apply_binary(op: BinOp, a: &Scalar, b: &Scalar) -> Result<Scalar, String> {
    use Scalar::*;
    match op {
        BinOp::And => return Ok(if a.truthy() { b.clone() } else { a.clone() }),
        BinOp::Or => return Ok(if a.truthy() { a.clone() } else { b.clone() }),
        _ => {}
    }
    if let (Str(x), Str(y)) = (a, b) {
        return match op {
            BinOp::Add => Ok(Str(format!("{x}{y}"))),
            BinOp::Eq => Ok(Bool(x == y)),
            BinOp::Ne => Ok(Bool(x != y)),
            _ => Err(format!("unsupported operand types for {}: str and str", op.symbol())),
        };
    }
    let bad = || {
        format!(
            "unsupported operand types for {}: {} and {}",
            op.symbol(),
            a.type_name(),
            b.type_name()
        )
    };
    let (x, y) = (a.as_f64().ok_or_else(bad)?, b.as_f64().ok_or_else(bad)?);
    let ints = match (a.as_i64(), b.as_i64()) {
        (Some(i), Some(j)) => Some((i, j)),
        _ => None,
    };
    Ok(match op {
        BinOp::Eq => Bool(x == y),
        BinOp::Ne => Bool(x != y),
        BinOp::Lt => Bool(x < y),
        BinOp::Le => Bool(x <= y),
        BinOp::Gt => Bool(x > y),
        BinOp::Ge => Bool(x >= y),
        BinOp::Div => {
            if y == 0.0 {
                return Err("division by zero".into());
            }
            Float(x / y)
        }
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::FloorDiv | BinOp::Mod | BinOp::Pow => {
            if let Some((i, j)) = ints {
                match op {
                    BinOp::Add => Int(i.wrapping_add(j)),
                    BinOp::Sub => Int(i.wrapping_sub(j)),
                    BinOp::Mul => Int(i.wrapping_mul(j)),
                    BinOp::FloorDiv | BinOp::Mod if j == 0 => {
                        return Err("integer division or modulo by zero".into())
                    }
                    BinOp::FloorDiv => Int(i.div_euclid(j) - i64::from(j < 0 && i.rem_euclid(j) != 0)),
                    BinOp::Mod => Int(i - j * (i.div_euclid(j) - i64::from(j < 0 && i.rem_euclid(j) != 0))),
                    BinOp::Pow if j >= 0 => Int(i.wrapping_pow(j as u32)),
                    BinOp::Pow => Float(x.powf(y)),
                    _ => unreachable!(),
                }
            } else {
                match op {
                    BinOp::Add => Float(x + y),
                    BinOp::Sub => Float(x - y),
                    BinOp::Mul => Float(x * y),
                    BinOp::FloorDiv | BinOp::Mod if y == 0.0 => {
                        return Err("float division or modulo by zero".into())
                    }
                    BinOp::FloorDiv => Float((x / y).floor()),
                    BinOp::Mod => Float(x - y * (x / y).floor()),
                    BinOp::Pow => Float(x.powf(y)),
                    _ => unreachable!(),
                }
            }
        }
        BinOp::And | BinOp::Or => unreachable!(),
    })
}

/// A classical expression over named measurement/variable slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CExpr {
    Const(Scalar),
    Slot(String),
    Unary(UnOp, Box<CExpr>),
    Binary(BinOp, Box<CExpr>, Box<CExpr>),
}

impl CExpr {
    /// Evaluates against a slot lookup.
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<Scalar>) -> Result<Scalar, String> {
        match self {
            CExpr::Const(s) => Ok(s.clone()),
            CExpr::Slot(name) => lookup(name).ok_or_else(|| format!("unassigned slot `{name}`")),
            CExpr::Unary(op, e) => apply_unary(*op, &e.eval(lookup)?),
            CExpr::Binary(op, a, b) => apply_binary(*op, &a.eval(lookup)?, &b.eval(lookup)?),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            CExpr::Binary(op, ..) => op.precedence(),
            CExpr::Unary(UnOp::Not, _) => 3,
            CExpr::Unary(..) => 7,
            _ => 9,
        }
    }
}

impl fmt::Display for CExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CExpr::Const(Scalar::Str(s)) => write!(f, "{s:?}"),
            CExpr::Const(s) => write!(f, "{s}"),
            CExpr::Slot(n) => f.write_str(n),
            CExpr::Unary(op, e) => {
                if e.precedence() < self.precedence() {
                    write!(f, "{}({e})", op.symbol())
                } else {
                    write!(f, "{}{e}", op.symbol())
                }
            }
            CExpr::Binary(op, a, b) => {
                let p = op.precedence();
                if a.precedence() < p {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if b.precedence() <= p {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}
