//! AST to [`Program`] lowering with static checks.
//!
//! Variables are declared on first assignment and visible for the rest of the
//! kernel body, including after the block that assigned them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::{E, PI};

use super::program::{Builtin, CallArg, Callee, Iterable, LExpr, Op, OpKind, Program, SlotInfo, StaticTy};
use super::CompileError;
use crate::ir::{BinOp, Gate, Scalar, UnOp};
use crate::parser::classify::EXP_I_THETA;
use crate::parser::{AssignTarget, Expr, KernelAst, Modifier, Param, Stmt, StmtKind, TypeAnnotation};
use crate::synthesis::SynthesisMethod;

/// Output of [`lower`].
#[derive(Clone, Debug, PartialEq)]
pub struct Lowered {
    pub program: Program,
    /// Kernels referenced by name, sorted.
    pub dependencies: BTreeSet<String>,
}

/// Lowers `ast`. `signatures` lists every callable kernel other than `ast`
/// itself; a call to `ast.name` is reported as a cycle.
pub fn lower(ast: &KernelAst, signatures: &BTreeMap<String, Vec<Param>>) -> Result<Lowered, CompileError> {
    match ast.params.first() {
        Some(p) if matches!(p.ty, TypeAnnotation::Qreg | TypeAnnotation::Qubit) => {}
        _ => {
            return Err(CompileError::FirstArgNotQreg {
                kernel: ast.name.clone(),
            })
        }
    }
    let mut lw = Lowerer {
        kernel: &ast.name,
        signatures,
        slots: Vec::new(),
        names: HashMap::new(),
        deps: BTreeSet::new(),
        matrix_vars: Vec::new(),
        params: &ast.params,
    };
    for p in &ast.params {
        if lw.names.contains_key(&p.name) {
            return Err(CompileError::DuplicateParam {
                kernel: ast.name.clone(),
                param: p.name.clone(),
            });
        }
        lw.check_shadow(&p.name, 0)?;
        lw.declare(&p.name, StaticTy::from_annotation(&p.ty));
    }
    let num_params = lw.slots.len();
    let body = lw.block(&ast.body)?;
    Ok(Lowered {
        program: Program {
            slots: lw.slots,
            num_params,
            body,
        },
        dependencies: lw.deps,
    })
}

/// Kernels that `ast` refers to, found by a syntax walk without lowering.
/// Agrees with [`Lowered::dependencies`] for every kernel that lowers.
pub fn referenced_kernels(ast: &KernelAst, kernels: &BTreeSet<String>) -> BTreeSet<String> {
    let mut local: BTreeSet<&str> = ast.params.iter().map(|p| p.name.as_str()).collect();
    local.insert(&ast.name);
    let mut out = BTreeSet::new();
    scan_block(&ast.body, kernels, &mut local, &mut out);
    out
}

fn scan_block<'a>(body: &'a [Stmt], kernels: &BTreeSet<String>, local: &mut BTreeSet<&'a str>, out: &mut BTreeSet<String>) {
    let visit = |e: &Expr, local: &BTreeSet<&str>, out: &mut BTreeSet<String>| scan_expr(e, kernels, local, out);
    for s in body {
        match &s.kind {
            StmtKind::GateCall { ctrl, args, .. } => {
                ctrl.iter().chain(args).for_each(|e| visit(e, local, out));
            }
            StmtKind::KernelCall { name, ctrl, args, .. } => {
                if kernels.contains(name) && !local.contains(name.as_str()) {
                    out.insert(name.clone());
                }
                ctrl.iter().chain(args).for_each(|e| visit(e, local, out));
            }
            StmtKind::Assign { target, value } => {
                if let AssignTarget::Index(_, idx) = target {
                    idx.iter().for_each(|e| visit(e, local, out));
                }
                visit(value, local, out);
            }
            StmtKind::For { iter, body, .. } => {
                visit(iter, local, out);
                scan_block(body, kernels, local, out);
            }
            StmtKind::If { branches, orelse } => {
                for (c, b) in branches {
                    visit(c, local, out);
                    scan_block(b, kernels, local, out);
                }
                scan_block(orelse, kernels, local, out);
            }
            StmtKind::WithCompute(b) | StmtKind::WithAction(b) => scan_block(b, kernels, local, out),
            StmtKind::WithDecompose { qreg, var, body, .. } => {
                visit(qreg, local, out);
                local.insert(var);
                scan_block(body, kernels, local, out);
            }
            StmtKind::Print(args) | StmtKind::ClassicalCall { args, .. } => {
                args.iter().for_each(|e| visit(e, local, out));
            }
            StmtKind::Pass => {}
        }
    }
}

fn scan_expr(e: &Expr, kernels: &BTreeSet<String>, local: &BTreeSet<&str>, out: &mut BTreeSet<String>) {
    let mut go = |e: &Expr| scan_expr(e, kernels, local, out);
    match e {
        Expr::Name(n) => {
            if kernels.contains(n) && !local.contains(n.as_str()) {
                out.insert(n.clone());
            }
        }
        Expr::Attr(b, _) | Expr::Unary(_, b) => go(b),
        Expr::Call(f, args) | Expr::Index(f, args) => {
            go(f);
            args.iter().for_each(go);
        }
        Expr::Slice(a, b) => a.iter().chain(b).for_each(|x| go(x)),
        Expr::Binary(_, a, b) => {
            go(a);
            go(b);
        }
        Expr::List(xs) => xs.iter().for_each(go),
        Expr::Int(_) | Expr::Float(_) | Expr::Imag(_) | Expr::Str(_) | Expr::Bool(_) => {}
    }
}

struct Lowerer<'a> {
    kernel: &'a str,
    signatures: &'a BTreeMap<String, Vec<Param>>,
    slots: Vec<SlotInfo>,
    names: HashMap<String, usize>,
    deps: BTreeSet<String>,
    /// Names bound by enclosing `decompose ... as m` blocks.
    matrix_vars: Vec<String>,
    params: &'a [Param],
}

type LResult<T> = Result<T, CompileError>;

fn mismatch<T>(line: usize, message: impl Into<String>) -> LResult<T> {
    Err(CompileError::TypeMismatch {
        line,
        message: message.into(),
    })
}

impl Lowerer<'_> {
    fn is_kernel_name(&self, name: &str) -> bool {
        name == self.kernel || self.signatures.contains_key(name)
    }

    fn check_shadow(&self, name: &str, line: usize) -> LResult<()> {
        if self.is_kernel_name(name) && !self.matrix_vars.iter().any(|m| m == name) {
            return Err(CompileError::ShadowedKernelName {
                name: name.to_string(),
                line,
            });
        }
        Ok(())
    }

    fn declare(&mut self, name: &str, ty: StaticTy) -> usize {
        let slot = self.slots.len();
        self.slots.push(SlotInfo {
            name: name.to_string(),
            ty,
        });
        self.names.insert(name.to_string(), slot);
        slot
    }

    /// Slot for an assignment target, declaring it on first use.
    fn assign_slot(&mut self, name: &str, ty: StaticTy, line: usize) -> LResult<usize> {
        if let Some(&slot) = self.names.get(name) {
            let old = &mut self.slots[slot].ty;
            if !ty.fits(old) {
                if *old == StaticTy::Qreg || *old == StaticTy::Qubit {
                    return mismatch(line, format!("cannot assign {} to quantum variable `{name}`", ty.describe()));
                }
                *old = StaticTy::Unknown;
            }
            return Ok(slot);
        }
        self.check_shadow(name, line)?;
        Ok(self.declare(name, ty))
    }

    fn block(&mut self, stmts: &[Stmt]) -> LResult<Vec<Op>> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < stmts.len() {
            let s = &stmts[i];
            match &s.kind {
                StmtKind::WithCompute(compute) => {
                    let Some(StmtKind::WithAction(action)) = stmts.get(i + 1).map(|n| &n.kind) else {
                        return Err(CompileError::ComputeWithoutAction { line: s.line });
                    };
                    let compute = self.block(compute)?;
                    let action = self.block(action)?;
                    out.push(Op {
                        kind: OpKind::ComputeAction { compute, action },
                        line: s.line,
                    });
                    i += 2;
                    continue;
                }
                StmtKind::WithAction(_) => return Err(CompileError::ActionWithoutCompute { line: s.line }),
                _ => {}
            }
            if let Some(op) = self.stmt(s)? {
                out.push(op);
            }
            i += 1;
        }
        Ok(out)
    }

    fn stmt(&mut self, s: &Stmt) -> LResult<Option<Op>> {
        let line = s.line;
        let kind = match &s.kind {
            StmtKind::Pass => return Ok(None),
            StmtKind::GateCall {
                name,
                modifier,
                ctrl,
                args,
                ..
            } => self.gate_call(name, *modifier, ctrl.as_ref(), args, line)?,
            StmtKind::KernelCall {
                name,
                modifier,
                ctrl,
                args,
            } => {
                if name == self.kernel {
                    return Err(CompileError::CyclicDependency(vec![name.clone()]));
                }
                if let Some(&slot) = self.names.get(name) {
                    let sig = self.param_signature(slot, name, line)?;
                    return Ok(Some(Op {
                        kind: self.call(Callee::Param(slot), name, &sig, *modifier, ctrl.as_ref(), args, line)?,
                        line,
                    }));
                }
                let Some(sig) = self.signatures.get(name) else {
                    return Err(CompileError::UnknownKernel {
                        name: name.clone(),
                        line,
                    });
                };
                let sig: Vec<TypeAnnotation> = sig.iter().map(|p| p.ty.clone()).collect();
                self.deps.insert(name.clone());
                self.call(Callee::Static(name.clone()), name, &sig, *modifier, ctrl.as_ref(), args, line)?
            }
            StmtKind::ClassicalCall { name, args } => self.classical_call(name, args, line)?,
            StmtKind::Assign { target, value } => match target {
                AssignTarget::Name(n) => {
                    let (value, ty) = self.expr(value, line)?;
                    let slot = self.assign_slot(n, ty, line)?;
                    OpKind::Assign { slot, value }
                }
                AssignTarget::Index(n, idx) => {
                    let Some(&slot) = self.names.get(n) else {
                        return Err(CompileError::UndeclaredVariable { name: n.clone(), line });
                    };
                    match &self.slots[slot].ty {
                        StaticTy::Matrix | StaticTy::List(_) | StaticTy::Unknown => {}
                        other => {
                            return mismatch(line, format!("cannot assign into `{n}` of type {}", other.describe()))
                        }
                    }
                    let index = idx.iter().map(|e| self.expr(e, line).map(|x| x.0)).collect::<LResult<_>>()?;
                    let (value, _) = self.expr(value, line)?;
                    OpKind::AssignIndex { slot, index, value }
                }
            },
            StmtKind::For { var, iter, body } => {
                let (iter, elem) = self.iterable(iter, line)?;
                let slot = self.assign_slot(var, elem, line)?;
                let body = self.block(body)?;
                OpKind::For { slot, iter, body }
            }
            StmtKind::If { branches, orelse } => {
                let mut lowered = Vec::with_capacity(branches.len());
                for (cond, body) in branches {
                    let (c, _) = self.expr(cond, line)?;
                    lowered.push((c, self.block(body)?));
                }
                let orelse = self.block(orelse)?;
                OpKind::If {
                    branches: lowered,
                    orelse,
                }
            }
            StmtKind::WithCompute(_) | StmtKind::WithAction(_) => unreachable!("handled in block"),
            StmtKind::WithDecompose { qreg, method, var, body } => {
                let method: SynthesisMethod = method.as_deref().unwrap_or("default").parse()?;
                let (qubits, qty) = self.expr(qreg, line)?;
                if !qty.is_quantum() {
                    return mismatch(line, format!("decompose target must be quantum, got {}", qty.describe()));
                }
                self.matrix_vars.push(var.clone());
                let result = (|| {
                    let slot = self.assign_slot(var, StaticTy::Matrix, line)?;
                    for st in body {
                        if !matches!(
                            st.kind,
                            StmtKind::Assign { .. } | StmtKind::For { .. } | StmtKind::If { .. } | StmtKind::Pass
                        ) {
                            return mismatch(st.line, "decompose blocks may only build the matrix");
                        }
                    }
                    Ok((slot, self.block(body)?))
                })();
                self.matrix_vars.pop();
                let (slot, body) = result?;
                OpKind::Synthesize {
                    qubits,
                    method,
                    slot,
                    body,
                }
            }
            StmtKind::Print(args) => {
                OpKind::Print(args.iter().map(|a| self.expr(a, line).map(|x| x.0)).collect::<LResult<_>>()?)
            }
        };
        Ok(Some(Op { kind, line }))
    }

    fn gate_call(
        &mut self,
        name: &str,
        modifier: Modifier,
        ctrl: Option<&Expr>,
        args: &[Expr],
        line: usize,
    ) -> LResult<OpKind> {
        if name == EXP_I_THETA {
            if args.len() != 3 {
                return Err(CompileError::Arity {
                    callee: name.into(),
                    expected: 3,
                    found: args.len(),
                    line,
                });
            }
            let (qubits, qt) = self.expr(&args[0], line)?;
            let (theta, tt) = self.expr(&args[1], line)?;
            let (op, ot) = self.expr(&args[2], line)?;
            if !qt.is_quantum() || !tt.is_numeric() || !matches!(ot, StaticTy::Pauli | StaticTy::Unknown) {
                return mismatch(line, "exp_i_theta expects (qreg, float, PauliOperator)");
            }
            return Ok(OpKind::ExpITheta { qubits, theta, op });
        }
        let gate = Gate::from_name(name).expect("classified as a gate");
        if !gate.is_unitary() && modifier != Modifier::None {
            return mismatch(line, format!("{name}{} is not defined", modifier.suffix()));
        }
        let (nt, np) = (gate.num_targets(), gate.num_params());
        if args.len() != nt + np {
            return Err(CompileError::Arity {
                callee: format!("{name}{}", modifier.suffix()),
                expected: nt + np,
                found: args.len(),
                line,
            });
        }
        let mut qubits = Vec::with_capacity(nt);
        for a in &args[..nt] {
            let (e, ty) = self.expr(a, line)?;
            let ok = if nt == 1 { ty.is_quantum() } else { matches!(ty, StaticTy::Qubit | StaticTy::Unknown) };
            if !ok {
                return mismatch(line, format!("{name} expects a qubit operand, got {}", ty.describe()));
            }
            qubits.push(e);
        }
        let mut params = Vec::with_capacity(np);
        for a in &args[nt..] {
            let (e, ty) = self.expr(a, line)?;
            if !ty.is_numeric() {
                return mismatch(line, format!("{name} angle must be numeric, got {}", ty.describe()));
            }
            params.push(e);
        }
        let ctrl = self.ctrl_operand(ctrl, line)?;
        Ok(OpKind::Gate {
            gate,
            modifier,
            ctrl,
            qubits,
            params,
        })
    }

    fn ctrl_operand(&mut self, ctrl: Option<&Expr>, line: usize) -> LResult<Option<LExpr>> {
        let Some(c) = ctrl else { return Ok(None) };
        let (e, ty) = self.expr(c, line)?;
        if !ty.is_quantum() {
            return mismatch(line, format!("control operand must be quantum, got {}", ty.describe()));
        }
        Ok(Some(e))
    }

    #[allow(clippy::too_many_arguments)]
    fn call(
        &mut self,
        callee: Callee,
        name: &str,
        sig: &[TypeAnnotation],
        modifier: Modifier,
        ctrl: Option<&Expr>,
        args: &[Expr],
        line: usize,
    ) -> LResult<OpKind> {
        if args.len() != sig.len() {
            return Err(CompileError::Arity {
                callee: format!("{name}{}", modifier.suffix()),
                expected: sig.len(),
                found: args.len(),
                line,
            });
        }
        let mut out = Vec::with_capacity(args.len());
        for (a, want) in args.iter().zip(sig) {
            if want.is_ref() {
                let Expr::Name(n) = a else {
                    return mismatch(line, format!("{want} argument to `{name}` must be a variable"));
                };
                let slot = self.assign_slot(n, StaticTy::from_annotation(want), line)?;
                out.push(CallArg::Ref(slot));
                continue;
            }
            let (e, ty) = self.expr(a, line)?;
            let want_ty = StaticTy::from_annotation(want);
            // A single qubit may stand in for a register.
            let fits = ty.fits(&want_ty) || (ty == StaticTy::Qubit && want_ty == StaticTy::Qreg);
            if !fits {
                return mismatch(
                    line,
                    format!("`{name}` expects {want}, got {}", ty.describe()),
                );
            }
            out.push(CallArg::Value(e));
        }
        let ctrl = self.ctrl_operand(ctrl, line)?;
        Ok(OpKind::Call {
            callee,
            modifier,
            ctrl,
            args: out,
        })
    }

    fn param_signature(&self, slot: usize, name: &str, line: usize) -> LResult<Vec<TypeAnnotation>> {
        match self.params.get(slot).map(|p| &p.ty) {
            Some(TypeAnnotation::KernelSignature(sig)) => Ok(sig.clone()),
            _ => mismatch(line, format!("`{name}` is not callable")),
        }
    }

    /// Calls the parser could not classify: kernel-typed parameters, or
    /// genuinely unknown names.
    fn classical_call(&mut self, name: &str, args: &[Expr], line: usize) -> LResult<OpKind> {
        let (base, modifier) = match name.rsplit_once('.') {
            Some((b, m)) => match Modifier::from_method(m) {
                Some(md) => (b, md),
                None => (name, Modifier::None),
            },
            None => (name, Modifier::None),
        };
        if let Some(&slot) = self.names.get(base) {
            let sig = self.param_signature(slot, base, line)?;
            let (ctrl, rest) = match (modifier, args.split_first()) {
                (Modifier::Ctrl, Some((c, r))) => (Some(c), r),
                (Modifier::Ctrl, None) => {
                    return Err(CompileError::Arity {
                        callee: name.into(),
                        expected: sig.len() + 1,
                        found: 0,
                        line,
                    })
                }
                _ => (None, args),
            };
            return self.call(Callee::Param(slot), base, &sig, modifier, ctrl, rest, line);
        }
        if name.contains('.') || Builtin::lookup(name).is_some() {
            Err(CompileError::UnknownFunction {
                name: name.into(),
                line,
            })
        } else {
            Err(CompileError::UnknownKernel {
                name: name.into(),
                line,
            })
        }
    }

    fn iterable(&mut self, iter: &Expr, line: usize) -> LResult<(Iterable, StaticTy)> {
        if let Expr::Call(f, args) = iter {
            if matches!(f.as_ref(), Expr::Name(n) if n == "range") {
                let mut lowered = Vec::with_capacity(3);
                for a in args {
                    let (e, ty) = self.expr(a, line)?;
                    if !matches!(ty, StaticTy::Int | StaticTy::Bool | StaticTy::Unknown) {
                        return mismatch(line, format!("range bound must be an int, got {}", ty.describe()));
                    }
                    lowered.push(e);
                }
                let int = |v| LExpr::Const(Scalar::Int(v));
                let (start, stop, step) = match lowered.len() {
                    1 => (int(0), lowered.remove(0), int(1)),
                    2 => {
                        let stop = lowered.pop().unwrap();
                        (lowered.pop().unwrap(), stop, int(1))
                    }
                    3 => {
                        let step = lowered.pop().unwrap();
                        let stop = lowered.pop().unwrap();
                        (lowered.pop().unwrap(), stop, step)
                    }
                    n => {
                        return Err(CompileError::Arity {
                            callee: "range".into(),
                            expected: 3,
                            found: n,
                            line,
                        })
                    }
                };
                return Ok((Iterable::Range { start, stop, step }, StaticTy::Int));
            }
        }
        let (e, ty) = self.expr(iter, line)?;
        let elem = match ty {
            StaticTy::List(t) => *t,
            StaticTy::Qreg => StaticTy::Qubit,
            StaticTy::Unknown => StaticTy::Unknown,
            other => return mismatch(line, format!("cannot iterate over {}", other.describe())),
        };
        Ok((Iterable::Each(e), elem))
    }

    fn expr(&mut self, e: &Expr, line: usize) -> LResult<(LExpr, StaticTy)> {
        Ok(match e {
            Expr::Int(v) => (LExpr::Const(Scalar::Int(*v)), StaticTy::Int),
            Expr::Float(v) => (LExpr::Const(Scalar::Float(*v)), StaticTy::Float),
            Expr::Bool(b) => (LExpr::Const(Scalar::Bool(*b)), StaticTy::Bool),
            Expr::Str(s) => (LExpr::Const(Scalar::Str(s.clone())), StaticTy::Str),
            Expr::Imag(v) => (LExpr::Imag(*v), StaticTy::Unknown),
            Expr::Name(n) => {
                if let Some(&slot) = self.names.get(n) {
                    (LExpr::Slot(slot), self.slots[slot].ty.clone())
                } else if n == self.kernel {
                    return Err(CompileError::CyclicDependency(vec![n.clone()]));
                } else if self.signatures.contains_key(n) {
                    self.deps.insert(n.clone());
                    (LExpr::KernelRef(n.clone()), StaticTy::Kernel)
                } else {
                    return Err(CompileError::UndeclaredVariable { name: n.clone(), line });
                }
            }
            Expr::Attr(..) => match e.dotted().as_deref() {
                Some("np.pi" | "numpy.pi" | "math.pi") => (LExpr::Const(Scalar::Float(PI)), StaticTy::Float),
                Some("np.e" | "numpy.e" | "math.e") => (LExpr::Const(Scalar::Float(E)), StaticTy::Float),
                other => {
                    return Err(CompileError::UndeclaredVariable {
                        name: other.unwrap_or("<attribute>").to_string(),
                        line,
                    })
                }
            },
            Expr::Call(func, args) => self.call_expr(func, args, line)?,
            Expr::Index(base, idx) => {
                let (b, bt) = self.expr(base, line)?;
                let mut lowered = Vec::with_capacity(idx.len());
                let mut sliced = false;
                for i in idx {
                    let (x, xt) = self.expr(i, line)?;
                    sliced |= matches!(x, LExpr::Slice(..));
                    if !matches!(x, LExpr::Slice(..)) && !matches!(xt, StaticTy::Int | StaticTy::Bool | StaticTy::Unknown) {
                        return mismatch(line, format!("index must be an int, got {}", xt.describe()));
                    }
                    lowered.push(x);
                }
                let ty = match (&bt, sliced) {
                    (StaticTy::Qreg, true) => StaticTy::Qreg,
                    (StaticTy::Qreg, false) => StaticTy::Qubit,
                    (StaticTy::List(_), true) => bt.clone(),
                    (StaticTy::List(t), false) => (**t).clone(),
                    (StaticTy::Matrix | StaticTy::Unknown, _) => StaticTy::Unknown,
                    (other, _) => return mismatch(line, format!("{} is not indexable", other.describe())),
                };
                (LExpr::Index(Box::new(b), lowered), ty)
            }
            Expr::Slice(a, b) => {
                let mut bound = |x: &Option<Box<Expr>>| -> LResult<Option<Box<LExpr>>> {
                    x.as_ref().map(|v| self.expr(v, line).map(|r| Box::new(r.0))).transpose()
                };
                let (a, b) = (bound(a)?, bound(b)?);
                (LExpr::Slice(a, b), StaticTy::Unknown)
            }
            Expr::Unary(op, x) => {
                let (x, t) = self.expr(x, line)?;
                let ty = match op {
                    UnOp::Not => StaticTy::Bool,
                    _ if t == StaticTy::Bool => StaticTy::Int,
                    _ => t,
                };
                (LExpr::Unary(*op, Box::new(x)), ty)
            }
            Expr::Binary(op, a, b) => {
                let (a, at) = self.expr(a, line)?;
                let (b, bt) = self.expr(b, line)?;
                (LExpr::Binary(*op, Box::new(a), Box::new(b)), binary_ty(*op, &at, &bt))
            }
            Expr::List(items) => {
                let mut out = Vec::with_capacity(items.len());
                let mut elem = None::<StaticTy>;
                for it in items {
                    let (x, t) = self.expr(it, line)?;
                    elem = Some(match elem {
                        None => t,
                        Some(prev) if prev == t => prev,
                        Some(prev) if prev.fits(&StaticTy::Float) && t.fits(&StaticTy::Float) => StaticTy::Float,
                        Some(_) => StaticTy::Unknown,
                    });
                    out.push(x);
                }
                (LExpr::List(out), StaticTy::List(Box::new(elem.unwrap_or(StaticTy::Unknown))))
            }
        })
    }

    fn call_expr(&mut self, func: &Expr, args: &[Expr], line: usize) -> LResult<(LExpr, StaticTy)> {
        if let Expr::Attr(base, m) = func {
            if m == "size" && args.is_empty() {
                let (b, _) = self.expr(base, line)?;
                return Ok((LExpr::Size(Box::new(b)), StaticTy::Int));
            }
        }
        let name = func.dotted().unwrap_or_default();
        let one_arg = |callee: &str| {
            if args.len() == 1 {
                Ok(())
            } else {
                Err(CompileError::Arity {
                    callee: callee.into(),
                    expected: 1,
                    found: args.len(),
                    line,
                })
            }
        };
        match name.as_str() {
            "len" => {
                one_arg("len")?;
                let (x, _) = self.expr(&args[0], line)?;
                return Ok((LExpr::Size(Box::new(x)), StaticTy::Int));
            }
            "Measure" | "Mz" => {
                one_arg("Measure")?;
                let (x, t) = self.expr(&args[0], line)?;
                if !matches!(t, StaticTy::Qubit | StaticTy::Unknown) {
                    return mismatch(line, format!("Measure in an expression needs one qubit, got {}", t.describe()));
                }
                return Ok((LExpr::Measure(Box::new(x)), StaticTy::Bool));
            }
            _ => {}
        }
        let Some(b) = Builtin::lookup(&name) else {
            return Err(CompileError::UnknownFunction {
                name: if name.is_empty() { "<expression>".into() } else { name },
                line,
            });
        };
        let lowered = args.iter().map(|a| self.expr(a, line).map(|x| x.0)).collect::<LResult<Vec<_>>>()?;
        Ok((LExpr::Builtin(b, lowered), b.result_ty()))
    }
}

fn binary_ty(op: BinOp, a: &StaticTy, b: &StaticTy) -> StaticTy {
    use StaticTy::*;
    if op.is_comparison() {
        return Bool;
    }
    let int_like = |t: &StaticTy| matches!(t, Int | Bool);
    match op {
        BinOp::And | BinOp::Or => {
            if a == b {
                a.clone()
            } else {
                Unknown
            }
        }
        BinOp::Div => Float,
        _ if int_like(a) && int_like(b) => Int,
        _ if matches!(a, Int | Bool | Float) && matches!(b, Int | Bool | Float) => Float,
        _ if matches!(a, Pauli) || matches!(b, Pauli) => Pauli,
        _ => Unknown,
    }
}
