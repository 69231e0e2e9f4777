use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ir::{BinOp, UnOp};

/// Declared type of a kernel parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypeAnnotation {
    Qreg,
    Qubit,
    Int,
    Float,
    Bool,
    ListFloat,
    ListInt,
    ListPauli,
    Pauli,
    KernelSignature(Vec<TypeAnnotation>),
    IntRef,
    FloatRef,
    BoolRef,
    Matrix,
}

impl TypeAnnotation {
    pub fn is_ref(&self) -> bool {
        matches!(self, TypeAnnotation::IntRef | TypeAnnotation::FloatRef | TypeAnnotation::BoolRef)
    }
}

impl fmt::Display for TypeAnnotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeAnnotation::Qreg => f.write_str("qreg"),
            TypeAnnotation::Qubit => f.write_str("qubit"),
            TypeAnnotation::Int => f.write_str("int"),
            TypeAnnotation::Float => f.write_str("float"),
            TypeAnnotation::Bool => f.write_str("bool"),
            TypeAnnotation::ListFloat => f.write_str("List[float]"),
            TypeAnnotation::ListInt => f.write_str("List[int]"),
            TypeAnnotation::ListPauli => f.write_str("List[PauliOperator]"),
            TypeAnnotation::Pauli => f.write_str("PauliOperator"),
            TypeAnnotation::KernelSignature(ts) => {
                let inner: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                write!(f, "KernelSignature({})", inner.join(", "))
            }
            TypeAnnotation::IntRef => f.write_str("IntRef"),
            TypeAnnotation::FloatRef => f.write_str("FloatRef"),
            TypeAnnotation::BoolRef => f.write_str("BoolRef"),
            TypeAnnotation::Matrix => f.write_str("matrix"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub ty: TypeAnnotation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelAst {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
}

/// `.adjoint` / `.ctrl` suffix on a call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modifier {
    #[default]
    None,
    Adjoint,
    Ctrl,
}

impl Modifier {
    pub fn from_method(name: &str) -> Option<Modifier> {
        match name {
            "adjoint" => Some(Modifier::Adjoint),
            "ctrl" => Some(Modifier::Ctrl),
            _ => None,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Modifier::None => "",
            Modifier::Adjoint => ".adjoint",
            Modifier::Ctrl => ".ctrl",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Int(i64),
    Float(f64),
    /// Imaginary literal such as `2j`.
    Imag(f64),
    Str(String),
    Bool(bool),
    Name(String),
    Attr(Box<Expr>, String),
    Call(Box<Expr>, Vec<Expr>),
    Index(Box<Expr>, Vec<Expr>),
    /// `a:b` inside an index; either bound may be missing.
    Slice(Option<Box<Expr>>, Option<Box<Expr>>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    List(Vec<Expr>),
}

impl Expr {
    pub fn name(n: &str) -> Expr {
        Expr::Name(n.to_string())
    }

    /// Dotted path for names and attribute chains, e.g. `np.pi`.
    pub fn dotted(&self) -> Option<String> {
        match self {
            Expr::Name(n) => Some(n.clone()),
            Expr::Attr(base, a) => Some(format!("{}.{a}", base.dotted()?)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AssignTarget {
    Name(String),
    Index(String, Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StmtKind {
    /// Built-in gate. Qubit operands precede parameters in `args`.
    GateCall {
        name: String,
        modifier: Modifier,
        ctrl: Option<Expr>,
        args: Vec<Expr>,
        broadcast: bool,
    },
    KernelCall {
        name: String,
        modifier: Modifier,
        ctrl: Option<Expr>,
        args: Vec<Expr>,
    },
    Assign {
        target: AssignTarget,
        value: Expr,
    },
    For {
        var: String,
        iter: Expr,
        body: Vec<Stmt>,
    },
    If {
        branches: Vec<(Expr, Vec<Stmt>)>,
        orelse: Vec<Stmt>,
    },
    WithCompute(Vec<Stmt>),
    WithAction(Vec<Stmt>),
    WithDecompose {
        qreg: Expr,
        method: Option<String>,
        var: String,
        body: Vec<Stmt>,
    },
    Print(Vec<Expr>),
    ClassicalCall {
        name: String,
        args: Vec<Expr>,
    },
    Pass,
}

/// A statement with its source line. The line does not take part in
/// equality, so re-parsed pretty-printed source compares equal.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: usize,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Stmt {
    pub fn new(kind: StmtKind, line: usize) -> Self {
        Stmt { kind, line }
    }
}
