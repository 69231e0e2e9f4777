//! Lowered kernel program: names resolved to slots, gates bound to the gate
//! table, loops and branches kept as nodes for the interpreter.

use serde::{Deserialize, Serialize};

use crate::ir::{BinOp, Gate, Scalar, UnOp};
use crate::parser::{Modifier, TypeAnnotation};
use crate::synthesis::SynthesisMethod;

/// Static type tracked during lowering. `Unknown` disables checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StaticTy {
    Qreg,
    Qubit,
    Int,
    Float,
    Bool,
    Str,
    List(Box<StaticTy>),
    Pauli,
    Kernel,
    Matrix,
    Unknown,
}

impl StaticTy {
    pub fn from_annotation(t: &TypeAnnotation) -> StaticTy {
        match t {
            TypeAnnotation::Qreg => StaticTy::Qreg,
            TypeAnnotation::Qubit => StaticTy::Qubit,
            TypeAnnotation::Int | TypeAnnotation::IntRef => StaticTy::Int,
            TypeAnnotation::Float | TypeAnnotation::FloatRef => StaticTy::Float,
            TypeAnnotation::Bool | TypeAnnotation::BoolRef => StaticTy::Bool,
            TypeAnnotation::ListFloat => StaticTy::List(Box::new(StaticTy::Float)),
            TypeAnnotation::ListInt => StaticTy::List(Box::new(StaticTy::Int)),
            TypeAnnotation::ListPauli => StaticTy::List(Box::new(StaticTy::Pauli)),
            TypeAnnotation::Pauli => StaticTy::Pauli,
            TypeAnnotation::KernelSignature(_) => StaticTy::Kernel,
            TypeAnnotation::Matrix => StaticTy::Matrix,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, StaticTy::Int | StaticTy::Float | StaticTy::Bool | StaticTy::Unknown)
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self, StaticTy::Qreg | StaticTy::Qubit | StaticTy::Unknown)
    }

    /// Whether a value of type `self` may be passed where `want` is declared.
    pub fn fits(&self, want: &StaticTy) -> bool {
        use StaticTy::*;
        match (self, want) {
            (Unknown, _) | (_, Unknown) => true,
            (Int | Bool, Float) | (Bool, Int) => true,
            (List(a), List(b)) => a.fits(b),
            (a, b) => a == b,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            StaticTy::Qreg => "qreg".into(),
            StaticTy::Qubit => "qubit".into(),
            StaticTy::Int => "int".into(),
            StaticTy::Float => "float".into(),
            StaticTy::Bool => "bool".into(),
            StaticTy::Str => "str".into(),
            StaticTy::List(t) => format!("List[{}]", t.describe()),
            StaticTy::Pauli => "PauliOperator".into(),
            StaticTy::Kernel => "kernel".into(),
            StaticTy::Matrix => "matrix".into(),
            StaticTy::Unknown => "unknown".into(),
        }
    }
}

/// Built-in functions usable in kernel expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    /// `np.eye(n)` / `np.identity(n)`
    Eye,
    /// `np.zeros(n)`: an `n x n` zero matrix.
    Zeros,
    /// The 8x8 CCNOT permutation matrix.
    CcnotMatrix,
    Abs,
    Int,
    Float,
    Min,
    Max,
    Sqrt,
    Sin,
    Cos,
    Exp,
}

impl Builtin {
    pub fn lookup(name: &str) -> Option<Builtin> {
        let bare = name
            .strip_prefix("np.")
            .or_else(|| name.strip_prefix("numpy."))
            .or_else(|| name.strip_prefix("math."))
            .unwrap_or(name);
        Some(match bare {
            "eye" | "identity" => Builtin::Eye,
            "zeros" => Builtin::Zeros,
            "ccnot_matrix" => Builtin::CcnotMatrix,
            "abs" => Builtin::Abs,
            "int" => Builtin::Int,
            "float" => Builtin::Float,
            "min" => Builtin::Min,
            "max" => Builtin::Max,
            "sqrt" => Builtin::Sqrt,
            "sin" => Builtin::Sin,
            "cos" => Builtin::Cos,
            "exp" => Builtin::Exp,
            _ => return None,
        })
    }

    pub fn result_ty(self) -> StaticTy {
        match self {
            Builtin::Eye | Builtin::Zeros | Builtin::CcnotMatrix => StaticTy::Matrix,
            Builtin::Int => StaticTy::Int,
            Builtin::Abs | Builtin::Min | Builtin::Max => StaticTy::Unknown,
            _ => StaticTy::Float,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LExpr {
    Const(Scalar),
    /// Imaginary literal, only meaningful in matrix entries.
    Imag(f64),
    Slot(usize),
    /// A registered kernel passed as a value.
    KernelRef(String),
    Unary(UnOp, Box<LExpr>),
    Binary(BinOp, Box<LExpr>, Box<LExpr>),
    Index(Box<LExpr>, Vec<LExpr>),
    Slice(Option<Box<LExpr>>, Option<Box<LExpr>>),
    /// `q.size()` or `len(x)`.
    Size(Box<LExpr>),
    List(Vec<LExpr>),
    Builtin(Builtin, Vec<LExpr>),
    Measure(Box<LExpr>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Iterable {
    Range { start: LExpr, stop: LExpr, step: LExpr },
    Each(LExpr),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Callee {
    Static(String),
    /// A `KernelSignature` parameter.
    Param(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CallArg {
    Value(LExpr),
    /// Caller variable bound to a by-reference parameter.
    Ref(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OpKind {
    Gate {
        gate: Gate,
        modifier: Modifier,
        ctrl: Option<LExpr>,
        qubits: Vec<LExpr>,
        params: Vec<LExpr>,
    },
    Call {
        callee: Callee,
        modifier: Modifier,
        ctrl: Option<LExpr>,
        args: Vec<CallArg>,
    },
    Assign {
        slot: usize,
        value: LExpr,
    },
    AssignIndex {
        slot: usize,
        index: Vec<LExpr>,
        value: LExpr,
    },
    For {
        slot: usize,
        iter: Iterable,
        body: Vec<Op>,
    },
    If {
        branches: Vec<(LExpr, Vec<Op>)>,
        orelse: Vec<Op>,
    },
    ComputeAction {
        compute: Vec<Op>,
        action: Vec<Op>,
    },
    /// `with decompose(q, method) as m:`; `body` builds the matrix in `slot`.
    Synthesize {
        qubits: LExpr,
        method: SynthesisMethod,
        slot: usize,
        body: Vec<Op>,
    },
    ExpITheta {
        qubits: LExpr,
        theta: LExpr,
        op: LExpr,
    },
    Print(Vec<LExpr>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Op {
    pub kind: OpKind,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotInfo {
    pub name: String,
    pub ty: StaticTy,
}

/// A lowered kernel body. Parameters occupy the first `num_params` slots.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub slots: Vec<SlotInfo>,
    pub num_params: usize,
    pub body: Vec<Op>,
}

impl Program {
    pub fn slot_name(&self, slot: usize) -> &str {
        &self.slots[slot].name
    }

    /// Number of ops, counting nested bodies.
    pub fn op_count(&self) -> usize {
        fn count(ops: &[Op]) -> usize {
            ops.iter()
                .map(|o| {
                    1 + match &o.kind {
                        OpKind::For { body, .. } | OpKind::Synthesize { body, .. } => count(body),
                        OpKind::If { branches, orelse } => {
                            branches.iter().map(|(_, b)| count(b)).sum::<usize>() + count(orelse)
                        }
                        OpKind::ComputeAction { compute, action } => count(compute) + count(action),
                        _ => 0,
                    }
                })
                .sum()
        }
        count(&self.body)
    }
}
