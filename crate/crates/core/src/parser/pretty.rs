//! Canonical source printer. Its output is what the cache hashes, so it must
//! be deterministic and re-parse to an equal AST.

use super::ast::{AssignTarget, Expr, KernelAst, Stmt, StmtKind};
use crate::ir::{BinOp, UnOp};

pub fn pretty_print(k: &KernelAst) -> String {
    let params: Vec<String> = k.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
    let mut out = format!("def {}({}):\n", k.name, params.join(", "));
    print_block(&k.body, 1, &mut out);
    out
}

fn print_block(stmts: &[Stmt], depth: usize, out: &mut String) {
    for s in stmts {
        print_stmt(s, depth, out);
    }
}

fn line(depth: usize, text: &str, out: &mut String) {
    for _ in 0..depth {
        out.push_str("    ");
    }
    out.push_str(text);
    out.push('\n');
}

fn suite(header: String, body: &[Stmt], depth: usize, out: &mut String) {
    line(depth, &header, out);
    if body.is_empty() {
        line(depth + 1, "pass", out);
    } else {
        print_block(body, depth + 1, out);
    }
}

fn args(items: &[Expr]) -> String {
    items.iter().map(expr).collect::<Vec<_>>().join(", ")
}

fn call_args(ctrl: &Option<Expr>, rest: &[Expr]) -> String {
    let mut all: Vec<String> = ctrl.iter().map(expr).collect();
    all.extend(rest.iter().map(expr));
    all.join(", ")
}

fn print_stmt(s: &Stmt, depth: usize, out: &mut String) {
    match &s.kind {
        StmtKind::GateCall { name, modifier, ctrl, args: a, .. }
        | StmtKind::KernelCall { name, modifier, ctrl, args: a } => {
            line(depth, &format!("{name}{}({})", modifier.suffix(), call_args(ctrl, a)), out);
        }
        StmtKind::Assign { target, value } => {
            let t = match target {
                AssignTarget::Name(n) => n.clone(),
                AssignTarget::Index(n, idx) => format!("{n}[{}]", args(idx)),
            };
            line(depth, &format!("{t} = {}", expr(value)), out);
        }
        StmtKind::For { var, iter, body } => {
            suite(format!("for {var} in {}:", expr(iter)), body, depth, out);
        }
        StmtKind::If { branches, orelse } => {
            for (i, (cond, body)) in branches.iter().enumerate() {
                let kw = if i == 0 { "if" } else { "elif" };
                suite(format!("{kw} {}:", expr(cond)), body, depth, out);
            }
            if !orelse.is_empty() {
                suite("else:".into(), orelse, depth, out);
            }
        }
        StmtKind::WithCompute(body) => suite("with compute:".into(), body, depth, out),
        StmtKind::WithAction(body) => suite("with action:".into(), body, depth, out),
        StmtKind::WithDecompose { qreg, method, var, body } => {
            let m = method.as_ref().map(|m| format!(", {m}")).unwrap_or_default();
            suite(format!("with decompose({}{m}) as {var}:", expr(qreg)), body, depth, out);
        }
        StmtKind::Print(a) => line(depth, &format!("print({})", args(a)), out),
        StmtKind::ClassicalCall { name, args: a } => line(depth, &format!("{name}({})", args(a)), out),
        StmtKind::Pass => line(depth, "pass", out),
    }
}

const ATOM: u8 = 10;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Unary(UnOp::Not, _) => 3,
        Expr::Unary(..) => 7,
        Expr::Slice(..) => 0,
        // a negative literal prints with a leading sign
        Expr::Int(v) if *v < 0 => 7,
        Expr::Float(v) | Expr::Imag(v) if v.is_sign_negative() => 7,
        _ => ATOM,
    }
}

fn wrap(e: &Expr, parens: bool) -> String {
    if parens {
        format!("({})", expr(e))
    } else {
        expr(e)
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(v) => v.to_string(),
        Expr::Float(v) => format!("{v:?}"),
        Expr::Imag(v) => format!("{v:?}j"),
        Expr::Str(s) => format!("{s:?}"),
        Expr::Bool(true) => "True".into(),
        Expr::Bool(false) => "False".into(),
        Expr::Name(n) => n.clone(),
        Expr::Attr(base, a) => format!("{}.{a}", wrap(base, prec(base) < ATOM)),
        Expr::Call(f, a) => format!("{}({})", wrap(f, prec(f) < ATOM), args(a)),
        Expr::Index(base, idx) => format!("{}[{}]", wrap(base, prec(base) < ATOM), args(idx)),
        Expr::Slice(lo, hi) => {
            let lo = lo.as_ref().map(|e| expr(e)).unwrap_or_default();
            let hi = hi.as_ref().map(|e| expr(e)).unwrap_or_default();
            format!("{lo}:{hi}")
        }
        Expr::Unary(op, inner) => {
            let p = prec(e);
            format!("{}{}", op.symbol(), wrap(inner, prec(inner) < p))
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            let (lp, rp) = if *op == BinOp::Pow {
                (prec(a) <= p, prec(b) < 7)
            } else {
                (prec(a) < p, prec(b) <= p)
            };
            format!("{} {} {}", wrap(a, lp), op.symbol(), wrap(b, rp))
        }
        Expr::List(items) => format!("[{}]", args(items)),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::parser::parse::parse_kernel;

    fn round_trip(src: &str) -> String {
        let k = parse_kernel(src, &BTreeSet::new()).unwrap();
        let printed = pretty_print(&k);
        let again = parse_kernel(&printed, &BTreeSet::new()).unwrap();
        assert_eq!(k, again, "round trip changed the AST:\n{printed}");
        assert_eq!(printed, pretty_print(&again));
        printed
    }

    #[test]
    fn bell_is_canonical() {
        let printed = round_trip("@qjit\ndef bell(q : qreg):\n  H(q[0])   # hadamard\n  CNOT(q[0],q[1])\n  for i in range(q.size()):\n      Measure(q[i])\n");
        assert_eq!(
            printed,
            "def bell(q: qreg):\n    H(q[0])\n    CX(q[0], q[1])\n    for i in range(q.size()):\n        Measure(q[i])\n"
        );
    }

    #[test]
    fn parentheses_are_kept_where_needed() {
        let p = round_trip("def k(q: qreg, x: float):\n    y = (x + 1) * 2 - (3 - x) - -x\n    z = 2 ** -x\n    w = (-2) ** 2\n    v = not (a and b) or c\n");
        assert!(p.contains("y = (x + 1) * 2 - (3 - x) - -x"), "{p}");
        assert!(p.contains("v = not (a and b) or c"), "{p}");
    }

    #[test]
    fn compute_action_and_ctrl() {
        let src = "def ucc1(q : qreg, x : float):\n    with compute:\n        Rx(q[0], np.pi/2.)\n        for i in range(3):\n            H(q[i+1])\n    with action:\n        Rz(q[3], x)\ndef kernel(q: qreg, d : float):\n    ucc1.ctrl(q[4], q[0:4], d)\n";
        let ks = crate::parser::parse::parse_module(src, &BTreeSet::new()).unwrap();
        let printed = pretty_print(&ks[0]);
        assert!(printed.contains("Rx(q[0], np.pi / 2.0)"));
        assert_eq!(pretty_print(&ks[1]), "def kernel(q: qreg, d: float):\n    ucc1.ctrl(q[4], q[0:4], d)\n");
    }

    #[test]
    fn empty_kernel_prints_header_only() {
        assert_eq!(round_trip("def k(q: qreg):\n"), "def k(q: qreg):\n");
    }
}
