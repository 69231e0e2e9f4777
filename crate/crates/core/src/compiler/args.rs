//! Kernel arguments and their binding against a signature.
//!
//! The JSON shape mirrors the host's heterogeneous argument map: plain JSON
//! scalars and lists, `{"size": n}` for registers, `{"pauli": "..."}` for
//! operators, `{"kernel": "name"}` for kernel references, `{"ref": v}` for
//! by-reference cells and `{"matrix": [[[re, im], ...], ...]}` for matrices.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::registry::{CompiledKernel, KernelRegistry};
use crate::ir::RefValue;
use crate::linalg::{c, Matrix};
use crate::operators::PauliOperator;
use crate::parser::TypeAnnotation;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArgJson", into = "ArgJson")]
pub enum ArgValue {
    /// A fresh register of the given size.
    Qreg(usize),
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<ArgValue>),
    Pauli(Arc<PauliOperator>),
    Kernel(String),
    Ref(RefValue),
    Matrix(Arc<Matrix>),
}

impl ArgValue {
    pub fn kind(&self) -> &'static str {
        match self {
            ArgValue::Qreg(_) => "qreg",
            ArgValue::Bool(_) => "bool",
            ArgValue::Int(_) => "int",
            ArgValue::Float(_) => "float",
            ArgValue::Str(_) => "str",
            ArgValue::List(_) => "list",
            ArgValue::Pauli(_) => "PauliOperator",
            ArgValue::Kernel(_) => "kernel",
            ArgValue::Ref(_) => "ref",
            ArgValue::Matrix(_) => "matrix",
        }
    }

    pub fn pauli(op: PauliOperator) -> Self {
        ArgValue::Pauli(Arc::new(op))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ArgJson {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<ArgJson>),
    Qreg { size: usize },
    Pauli { pauli: String },
    Kernel { kernel: String },
    Ref {
        #[serde(rename = "ref")]
        value: RefValue,
    },
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

impl TryFrom<ArgJson> for ArgValue {
    type Error = String;
    fn try_from(j: ArgJson) -> Result<Self, String> {
        Ok(match j {
            ArgJson::Bool(b) => ArgValue::Bool(b),
            ArgJson::Int(i) => ArgValue::Int(i),
            ArgJson::Float(x) => ArgValue::Float(x),
            ArgJson::Str(s) => ArgValue::Str(s),
            ArgJson::List(xs) => ArgValue::List(xs.into_iter().map(ArgValue::try_from).collect::<Result<_, _>>()?),
            ArgJson::Qreg { size } => ArgValue::Qreg(size),
            ArgJson::Pauli { pauli } => ArgValue::pauli(PauliOperator::parse(&pauli).map_err(|e| e.to_string())?),
            ArgJson::Kernel { kernel } => ArgValue::Kernel(kernel),
            ArgJson::Ref { value } => ArgValue::Ref(value),
            ArgJson::Matrix { matrix } => {
                let rows = matrix.len();
                if matrix.iter().any(|r| r.len() != rows) {
                    return Err("matrix must be square".into());
                }
                ArgValue::Matrix(Arc::new(Matrix::from_fn(rows, rows, |i, j| {
                    let [re, im] = matrix[i][j];
                    c(re, im)
                })))
            }
        })
    }
}

impl From<ArgValue> for ArgJson {
    fn from(v: ArgValue) -> Self {
        match v {
            ArgValue::Qreg(size) => ArgJson::Qreg { size },
            ArgValue::Bool(b) => ArgJson::Bool(b),
            ArgValue::Int(i) => ArgJson::Int(i),
            ArgValue::Float(x) => ArgJson::Float(x),
            ArgValue::Str(s) => ArgJson::Str(s),
            ArgValue::List(xs) => ArgJson::List(xs.into_iter().map(ArgJson::from).collect()),
            ArgValue::Pauli(p) => ArgJson::Pauli { pauli: p.to_string() },
            ArgValue::Kernel(kernel) => ArgJson::Kernel { kernel },
            ArgValue::Ref(value) => ArgJson::Ref { value },
            ArgValue::Matrix(m) => ArgJson::Matrix {
                matrix: (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect(),
            },
        }
    }
}

/// Named kernel arguments in call order.
pub type ArgPack = IndexMap<String, ArgValue>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BindError {
    #[error("`{kernel}` takes {expected} argument(s), {found} given")]
    Arity {
        kernel: String,
        expected: usize,
        found: usize,
    },
    #[error("`{kernel}` has no parameter named `{name}`")]
    UnknownArgument { kernel: String, name: String },
    #[error("argument `{param}` of `{kernel}` expects {expected}, got {found}")]
    TypeMismatch {
        kernel: String,
        param: String,
        expected: String,
        found: String,
    },
    #[error("kernel reference `{0}` is not registered")]
    UnboundKernelReference(String),
}

/// Arguments checked against a kernel signature, in parameter order.
#[derive(Clone, Debug)]
pub struct BoundCall {
    pub kernel: Arc<CompiledKernel>,
    pub args: Vec<ArgValue>,
}

impl BoundCall {
    /// Register sizes for the qreg/qubit parameters, in order.
    pub fn registers(&self) -> Vec<(String, usize)> {
        self.kernel
            .signature
            .iter()
            .zip(&self.args)
            .filter_map(|(p, a)| match a {
                ArgValue::Qreg(n) => Some((p.name.clone(), *n)),
                _ => None,
            })
            .collect()
    }
}

/// Checks `pack` against the signature of `kernel`. Arguments are matched by
/// name; numeric values are widened where the annotation allows it.
pub fn bind_args(kernel: Arc<CompiledKernel>, pack: &ArgPack, registry: &KernelRegistry) -> Result<BoundCall, BindError> {
    let sig = &kernel.signature;
    if pack.len() != sig.len() {
        return Err(BindError::Arity {
            kernel: kernel.name.clone(),
            expected: sig.len(),
            found: pack.len(),
        });
    }
    if let Some(extra) = pack.keys().find(|k| !sig.iter().any(|p| &p.name == *k)) {
        return Err(BindError::UnknownArgument {
            kernel: kernel.name.clone(),
            name: extra.clone(),
        });
    }
    let mut args = Vec::with_capacity(sig.len());
    for p in sig {
        let v = &pack[&p.name];
        let mismatch = || BindError::TypeMismatch {
            kernel: kernel.name.clone(),
            param: p.name.clone(),
            expected: p.ty.to_string(),
            found: v.kind().to_string(),
        };
        let bound = coerce(&p.ty, v, registry).map_err(|e| match e {
            Coerce::Mismatch => mismatch(),
            Coerce::Unbound(name) => BindError::UnboundKernelReference(name),
        })?;
        args.push(bound);
    }
    Ok(BoundCall { kernel, args })
}

enum Coerce {
    Mismatch,
    Unbound(String),
}

fn coerce(ty: &TypeAnnotation, v: &ArgValue, registry: &KernelRegistry) -> Result<ArgValue, Coerce> {
    use ArgValue as V;
    use TypeAnnotation as T;
    let float = |v: &ArgValue| match v {
        V::Float(x) => Some(*x),
        V::Int(i) => Some(*i as f64),
        _ => None,
    };
    Ok(match (ty, v) {
        (T::Qreg, V::Qreg(n)) if *n > 0 => V::Qreg(*n),
        (T::Qubit, V::Qreg(1)) => V::Qreg(1),
        (T::Int, V::Int(i)) => V::Int(*i),
        (T::Float, v) if float(v).is_some() => V::Float(float(v).unwrap()),
        (T::Bool, V::Bool(b)) => V::Bool(*b),
        (T::ListFloat, V::List(xs)) => V::List(
            xs.iter()
                .map(|x| float(x).map(V::Float).ok_or(Coerce::Mismatch))
                .collect::<Result<_, _>>()?,
        ),
        (T::ListInt, V::List(xs)) if xs.iter().all(|x| matches!(x, V::Int(_))) => v.clone(),
        (T::ListPauli, V::List(xs)) if xs.iter().all(|x| matches!(x, V::Pauli(_))) => v.clone(),
        (T::Pauli, V::Pauli(_)) | (T::Matrix, V::Matrix(_)) => v.clone(),
        (T::KernelSignature(want), V::Kernel(name)) => {
            let k = registry.get(name).ok_or_else(|| Coerce::Unbound(name.clone()))?;
            let have: Vec<&TypeAnnotation> = k.signature.iter().map(|p| &p.ty).collect();
            if have.len() != want.len() || have.iter().zip(want).any(|(h, w)| *h != w) {
                return Err(Coerce::Mismatch);
            }
            v.clone()
        }
        (T::IntRef, V::Ref(RefValue::Int(i)) | V::Int(i)) => V::Ref(RefValue::Int(*i)),
        (T::FloatRef, V::Ref(RefValue::Float(x)) | V::Float(x)) => V::Ref(RefValue::Float(*x)),
        (T::FloatRef, V::Ref(RefValue::Int(i)) | V::Int(i)) => V::Ref(RefValue::Float(*i as f64)),
        (T::BoolRef, V::Ref(RefValue::Bool(b)) | V::Bool(b)) => V::Ref(RefValue::Bool(*b)),
        _ => return Err(Coerce::Mismatch),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> KernelRegistry {
        let r = KernelRegistry::new();
        r.compile_source(
            "def cz_oracle(q: qreg):\n    CZ(q[0], q[2])\n\
             def run_grover(q: qreg, oracle_var: KernelSignature(qreg), iterations: int):\n    oracle_var(q)\n\
             def ansatz(q: qreg, t0: float):\n    Ry(q[1], t0)\n\
             def setter(q: qreg, x: FloatRef, n: IntRef):\n    x = 0.5\n",
        )
        .unwrap();
        r
    }

    fn pack(items: &[(&str, ArgValue)]) -> ArgPack {
        items.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn grover_binds_kernel_reference() {
        let r = registry();
        let k = r.get("run_grover").unwrap();
        let p = pack(&[("q", ArgValue::Qreg(3)), ("oracle_var", ArgValue::Kernel("cz_oracle".into())), ("iterations", ArgValue::Int(1))]);
        let b = bind_args(k.clone(), &p, &r).unwrap();
        assert_eq!(b.registers(), vec![("q".into(), 3)]);
        let p = pack(&[("q", ArgValue::Qreg(3)), ("oracle_var", ArgValue::Kernel("nope".into())), ("iterations", ArgValue::Int(1))]);
        assert_eq!(bind_args(k.clone(), &p, &r).unwrap_err(), BindError::UnboundKernelReference("nope".into()));
        // A kernel with the wrong signature does not fit.
        let p = pack(&[("q", ArgValue::Qreg(3)), ("oracle_var", ArgValue::Kernel("ansatz".into())), ("iterations", ArgValue::Int(1))]);
        assert!(matches!(bind_args(k, &p, &r), Err(BindError::TypeMismatch { .. })));
    }

    #[test]
    fn string_for_float_is_a_mismatch() {
        let r = registry();
        let k = r.get("ansatz").unwrap();
        let p = pack(&[("q", ArgValue::Qreg(2)), ("t0", ArgValue::Str("x".into()))]);
        assert!(matches!(bind_args(k.clone(), &p, &r), Err(BindError::TypeMismatch { param, .. }) if param == "t0"));
        let p = pack(&[("q", ArgValue::Qreg(2)), ("t0", ArgValue::Int(1))]);
        assert_eq!(bind_args(k.clone(), &p, &r).unwrap().args[1], ArgValue::Float(1.0));
        let p = pack(&[("q", ArgValue::Qreg(2))]);
        assert!(matches!(bind_args(k.clone(), &p, &r), Err(BindError::Arity { expected: 2, found: 1, .. })));
        let p = pack(&[("q", ArgValue::Qreg(2)), ("theta", ArgValue::Float(1.0))]);
        assert!(matches!(bind_args(k, &p, &r), Err(BindError::UnknownArgument { .. })));
    }

    #[test]
    fn ref_cells_accept_bare_initial_values() {
        let r = registry();
        let k = r.get("setter").unwrap();
        let p = pack(&[("q", ArgValue::Qreg(1)), ("x", ArgValue::Float(0.0)), ("n", ArgValue::Ref(RefValue::Int(2)))]);
        let b = bind_args(k, &p, &r).unwrap();
        assert_eq!(b.args[1], ArgValue::Ref(RefValue::Float(0.0)));
        assert_eq!(b.args[2], ArgValue::Ref(RefValue::Int(2)));
    }

    #[test]
    fn json_shapes() {
        let text = r#"{"q": {"size": 2}, "t": 0.5, "n": 3, "ops": [{"pauli": "X(0) * Z(1)"}], "k": {"kernel": "cz_oracle"}, "r": {"ref": 1.5}, "m": {"matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]}}"#;
        let p: ArgPack = serde_json::from_str(text).unwrap();
        assert_eq!(p["q"], ArgValue::Qreg(2));
        assert_eq!(p["t"], ArgValue::Float(0.5));
        assert_eq!(p["n"], ArgValue::Int(3));
        assert!(matches!(&p["ops"], ArgValue::List(xs) if matches!(&xs[0], ArgValue::Pauli(op) if op.len() == 1)));
        assert_eq!(p["k"], ArgValue::Kernel("cz_oracle".into()));
        assert_eq!(p["r"], ArgValue::Ref(RefValue::Float(1.5)));
        assert!(matches!(&p["m"], ArgValue::Matrix(m) if m.nrows() == 2));
        let again: ArgPack = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(again, p);
        assert!(serde_json::from_str::<ArgPack>(r#"{"o": {"pauli": "W(0)"}}"#).is_err());
    }
}
