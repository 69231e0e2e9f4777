use std::collections::BTreeSet;

use super::ast::{Expr, Modifier};
use crate::ir::Gate;

/// Name of the Trotter-evolution intrinsic.
pub const EXP_I_THETA: &str = "exp_i_theta";

/// How a call site is treated by lowering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CallClass {
    /// Built-in gate or intrinsic, possibly with `.adjoint`/`.ctrl`.
    Intrinsic(Modifier),
    Kernel,
    KernelModifier(Modifier),
    Print,
    Classical,
}

pub fn is_intrinsic(name: &str) -> bool {
    name == EXP_I_THETA || Gate::from_name(name).is_some()
}

/// Canonical spelling of an intrinsic (`CNOT` becomes `CX`).
pub fn canonical_intrinsic(name: &str) -> String {
    Gate::from_name(name).map_or_else(|| name.to_string(), |g| g.name().to_string())
}

/// Classifies the callee expression of a call. Returns the callee name
/// (without any modifier suffix) and its class.
pub fn classify_call(func: &Expr, kernels: &BTreeSet<String>) -> (String, CallClass) {
    match func {
        Expr::Name(n) if n == "print" => (n.clone(), CallClass::Print),
        Expr::Name(n) if is_intrinsic(n) => (canonical_intrinsic(n), CallClass::Intrinsic(Modifier::None)),
        Expr::Name(n) if kernels.contains(n) => (n.clone(), CallClass::Kernel),
        Expr::Attr(base, method) => {
            if let (Expr::Name(n), Some(m)) = (base.as_ref(), Modifier::from_method(method)) {
                if is_intrinsic(n) && n != EXP_I_THETA {
                    return (canonical_intrinsic(n), CallClass::Intrinsic(m));
                }
                if kernels.contains(n) {
                    return (n.clone(), CallClass::KernelModifier(m));
                }
            }
            (func.dotted().unwrap_or_default(), CallClass::Classical)
        }
        other => (other.dotted().unwrap_or_default(), CallClass::Classical),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernels() -> BTreeSet<String> {
        ["ucc1", "oracle"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn gates_kernels_and_classical() {
        let k = kernels();
        assert_eq!(classify_call(&Expr::name("CNOT"), &k), ("CX".into(), CallClass::Intrinsic(Modifier::None)));
        assert_eq!(classify_call(&Expr::name("ucc1"), &k), ("ucc1".into(), CallClass::Kernel));
        assert_eq!(classify_call(&Expr::name("foo"), &k), ("foo".into(), CallClass::Classical));
        assert_eq!(classify_call(&Expr::name("print"), &k).1, CallClass::Print);
        assert_eq!(classify_call(&Expr::name("exp_i_theta"), &k).1, CallClass::Intrinsic(Modifier::None));
    }

    #[test]
    fn modifiers() {
        let k = kernels();
        let ctrl = Expr::Attr(Box::new(Expr::name("ucc1")), "ctrl".into());
        assert_eq!(classify_call(&ctrl, &k).1, CallClass::KernelModifier(Modifier::Ctrl));
        let zc = Expr::Attr(Box::new(Expr::name("Z")), "ctrl".into());
        assert_eq!(classify_call(&zc, &k), ("Z".into(), CallClass::Intrinsic(Modifier::Ctrl)));
        let size = Expr::Attr(Box::new(Expr::name("q")), "size".into());
        assert_eq!(classify_call(&size, &k), ("q.size".into(), CallClass::Classical));
    }
}
