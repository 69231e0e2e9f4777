//! Run-time values seen by the kernel interpreter.

use std::sync::Arc;

use crate::compiler::ArgValue;
use crate::ir::classical::{apply_binary, apply_unary};
use crate::ir::{BinOp, CExpr, RefValue, Scalar, UnOp};
use crate::linalg::{Matrix, C64};
use crate::operators::PauliOperator;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    /// A slot that has not been assigned yet.
    Unset,
    Scalar(Scalar),
    Complex(C64),
    Qubit(usize),
    /// Global qubit indices of a register or slice.
    Reg(Arc<Vec<usize>>),
    List(Vec<Value>),
    Pauli(Arc<PauliOperator>),
    Kernel(String),
    Matrix(Arc<Matrix>),
    /// `a:b` used as an index.
    Slice(Option<i64>, Option<i64>),
    /// A classical value that depends on a measurement not yet taken.
    Dynamic(CExpr),
}

pub(crate) type VResult = Result<Value, String>;

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Scalar(Scalar::Int(v))
    }

    pub fn float(v: f64) -> Value {
        Value::Scalar(Scalar::Float(v))
    }

    pub fn bool(v: bool) -> Value {
        Value::Scalar(Scalar::Bool(v))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Unset => "unset",
            Value::Scalar(s) => s.type_name(),
            Value::Complex(_) => "complex",
            Value::Qubit(_) => "qubit",
            Value::Reg(_) => "qreg",
            Value::List(_) => "list",
            Value::Pauli(_) => "PauliOperator",
            Value::Kernel(_) => "kernel",
            Value::Matrix(_) => "matrix",
            Value::Slice(..) => "slice",
            Value::Dynamic(_) => "measurement-dependent value",
        }
    }

    pub fn from_arg(arg: &ArgValue, regs: &mut impl Iterator<Item = Arc<Vec<usize>>>) -> Value {
        match arg {
            ArgValue::Qreg(_) => Value::Reg(regs.next().expect("one register per qreg argument")),
            ArgValue::Bool(b) => Value::bool(*b),
            ArgValue::Int(i) => Value::int(*i),
            ArgValue::Float(x) => Value::float(*x),
            ArgValue::Str(s) => Value::Scalar(Scalar::Str(s.clone())),
            ArgValue::List(xs) => Value::List(xs.iter().map(|x| Value::from_arg(x, regs)).collect()),
            ArgValue::Pauli(p) => Value::Pauli(p.clone()),
            ArgValue::Kernel(k) => Value::Kernel(k.clone()),
            ArgValue::Ref(RefValue::Bool(b)) => Value::bool(*b),
            ArgValue::Ref(RefValue::Int(i)) => Value::int(*i),
            ArgValue::Ref(RefValue::Float(x)) => Value::float(*x),
            ArgValue::Matrix(m) => Value::Matrix(m.clone()),
        }
    }

    /// Converts back for a by-reference write-back, following the declared kind.
    pub fn to_ref(&self, like: &RefValue) -> Option<RefValue> {
        let s = match self {
            Value::Scalar(s) => s,
            _ => return None,
        };
        Some(match like {
            RefValue::Bool(_) => RefValue::Bool(s.truthy()),
            RefValue::Int(_) => RefValue::Int(s.as_i64().or_else(|| s.as_f64().map(|x| x as i64))?),
            RefValue::Float(_) => RefValue::Float(s.as_f64()?),
        })
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Scalar(s) => s.as_f64(),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Scalar(s) => s.as_i64(),
            _ => None,
        }
    }

    pub fn as_complex(&self) -> Option<C64> {
        match self {
            Value::Complex(z) => Some(*z),
            v => v.as_f64().map(|x| C64::new(x, 0.0)),
        }
    }

    /// Classical expression view; `None` for non-scalar values.
    pub fn to_cexpr(&self) -> Option<CExpr> {
        match self {
            Value::Scalar(s) => Some(CExpr::Const(s.clone())),
            Value::Dynamic(e) => Some(e.clone()),
            _ => None,
        }
    }

    /// Qubits addressed by a qubit, register or list of qubits.
    pub fn qubits(&self) -> Option<Vec<usize>> {
        match self {
            Value::Qubit(q) => Some(vec![*q]),
            Value::Reg(r) => Some(r.to_vec()),
            Value::List(xs) => {
                let mut out = Vec::new();
                for x in xs {
                    out.extend(x.qubits()?);
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Python `str()` rendering used by `print`.
    pub fn display(&self) -> String {
        match self {
            Value::Scalar(s) => s.to_string(),
            Value::Complex(z) => format!("({}{:+}j)", z.re, z.im),
            Value::Qubit(q) => format!("qubit({q})"),
            Value::Reg(r) => format!("qreg({})", r.len()),
            Value::List(xs) => {
                let items: Vec<String> = xs.iter().map(Value::display).collect();
                format!("[{}]", items.join(", "))
            }
            Value::Pauli(p) => p.to_string(),
            Value::Kernel(k) => k.clone(),
            Value::Matrix(m) => format!("matrix({}x{})", m.nrows(), m.ncols()),
            Value::Slice(a, b) => format!("slice({a:?}, {b:?})"),
            Value::Dynamic(e) => e.to_string(),
            Value::Unset => "<unset>".into(),
        }
    }

    pub fn unary(op: UnOp, v: &Value) -> VResult {
        match v {
            Value::Scalar(s) => apply_unary(op, s).map(Value::Scalar),
            Value::Dynamic(e) => Ok(Value::Dynamic(CExpr::Unary(op, Box::new(e.clone())))),
            Value::Complex(z) => match op {
                UnOp::Neg => Ok(Value::Complex(-z)),
                UnOp::Pos => Ok(Value::Complex(*z)),
                UnOp::Not => Ok(Value::bool(z.norm_sqr() == 0.0)),
            },
            Value::Pauli(p) if op == UnOp::Neg => Ok(Value::Pauli(Arc::new(p.scale(C64::new(-1.0, 0.0))))),
            other => Err(format!("bad operand type for unary {}: {}", op.symbol(), other.type_name())),
        }
    }

    pub fn binary(op: BinOp, a: &Value, b: &Value) -> VResult {
        let bad = || {
            format!(
                "unsupported operand types for {}: {} and {}",
                op.symbol(),
                a.type_name(),
                b.type_name()
            )
        };
        match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => apply_binary(op, x, y).map(Value::Scalar),
            (Value::Dynamic(_), _) | (_, Value::Dynamic(_)) => {
                let (x, y) = (a.to_cexpr().ok_or_else(bad)?, b.to_cexpr().ok_or_else(bad)?);
                Ok(Value::Dynamic(CExpr::Binary(op, Box::new(x), Box::new(y))))
            }
            (Value::Complex(_), _) | (_, Value::Complex(_)) => {
                let (x, y) = (a.as_complex().ok_or_else(bad)?, b.as_complex().ok_or_else(bad)?);
                Ok(match op {
                    BinOp::Add => Value::Complex(x + y),
                    BinOp::Sub => Value::Complex(x - y),
                    BinOp::Mul => Value::Complex(x * y),
                    BinOp::Div if y.norm_sqr() == 0.0 => return Err("complex division by zero".into()),
                    BinOp::Div => Value::Complex(x / y),
                    BinOp::Eq => Value::bool(x == y),
                    BinOp::Ne => Value::bool(x != y),
                    _ => return Err(bad()),
                })
            }
            (Value::Pauli(x), Value::Pauli(y)) => match op {
                BinOp::Add => Ok(Value::Pauli(Arc::new((**x).clone() + (**y).clone()))),
                BinOp::Sub => Ok(Value::Pauli(Arc::new((**x).clone() + y.scale(C64::new(-1.0, 0.0))))),
                BinOp::Mul => Ok(Value::Pauli(Arc::new(&**x * &**y))),
                _ => Err(bad()),
            },
            (Value::Pauli(p), s) | (s, Value::Pauli(p)) if op == BinOp::Mul && s.as_f64().is_some() => {
                Ok(Value::Pauli(Arc::new(p.scale(C64::new(s.as_f64().unwrap(), 0.0)))))
            }
            (Value::List(x), Value::List(y)) if op == BinOp::Add => {
                Ok(Value::List(x.iter().chain(y).cloned().collect()))
            }
            _ => Err(bad()),
        }
    }
}

/// Python slice bounds clamped to `len`.
pub(crate) fn slice_range(a: Option<i64>, b: Option<i64>, len: usize) -> (usize, usize) {
    let norm = |v: i64| -> usize {
        let l = len as i64;
        let v = if v < 0 { v + l } else { v };
        v.clamp(0, l) as usize
    };
    let lo = a.map_or(0, norm);
    let hi = b.map_or(len, norm);
    (lo, hi.max(lo))
}

/// Python index with negative wrap-around.
pub(crate) fn index_of(i: i64, len: usize) -> Option<usize> {
    let j = if i < 0 { i + len as i64 } else { i };
    (0..len as i64).contains(&j).then_some(j as usize)
}
