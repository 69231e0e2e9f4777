//! Evaluates lowered kernel programs. Quantum effects go to a [`Sink`]: the
//! trace sink records a circuit (circuit mode), the concrete sink drives a
//! state vector shot by shot (FTQC mode).

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use super::statevector::StateVector;
use super::value::{index_of, slice_range, Value};
use super::RuntimeError;
use crate::compiler::{Builtin, CallArg, Callee, CompiledKernel, Iterable, KernelRegistry, LExpr, Op, OpKind, Program};
use crate::ir::{CExpr, ClassicalNode, CompositeInstruction, Gate, Instruction, IrError, Node, Scalar};
use crate::linalg::{Matrix, C64, ONE, ZERO};
use crate::operators::exp_i_theta;
use crate::parser::{Modifier, TypeAnnotation};
use crate::synthesis::{synthesize_checked, SynthesisError};
use crate::transforms::{adjoint, compute_action, controlled, invert, TransformError};

/// Nested kernel calls beyond this depth are treated as runaway recursion.
pub const MAX_CALL_DEPTH: usize = 64;

type R<T> = Result<T, RuntimeError>;

/// Receiver of the quantum side effects of a kernel.
pub(crate) trait Sink {
    fn gate(&mut self, inst: Instruction) -> R<()>;
    /// Measures (or resets) `q`. `slot` names the classical result.
    fn measure(&mut self, q: usize, slot: String, reset: bool) -> R<Value>;
    /// A sub-circuit produced by a transform.
    fn emit(&mut self, c: CompositeInstruction) -> R<()>;
    fn print(&mut self, line: String);
    fn enter(&mut self, _name: &str) {}
    fn exit(&mut self) {}
    /// Whether measurement-dependent branches can be recorded.
    fn records_branches(&self) -> bool {
        false
    }
    fn begin_block(&mut self) {}
    fn end_block(&mut self) -> Vec<Node> {
        Vec::new()
    }
    fn classical(&mut self, _node: ClassicalNode) {}
}

impl<T: Sink + ?Sized> Sink for &mut T {
    fn gate(&mut self, inst: Instruction) -> R<()> {
        (**self).gate(inst)
    }
    fn measure(&mut self, q: usize, slot: String, reset: bool) -> R<Value> {
        (**self).measure(q, slot, reset)
    }
    fn emit(&mut self, c: CompositeInstruction) -> R<()> {
        (**self).emit(c)
    }
    fn print(&mut self, line: String) {
        (**self).print(line)
    }
    fn enter(&mut self, name: &str) {
        (**self).enter(name)
    }
    fn exit(&mut self) {
        (**self).exit()
    }
    fn records_branches(&self) -> bool {
        (**self).records_branches()
    }
    fn begin_block(&mut self) {
        (**self).begin_block()
    }
    fn end_block(&mut self) -> Vec<Node> {
        (**self).end_block()
    }
    fn classical(&mut self, node: ClassicalNode) {
        (**self).classical(node)
    }
}

/// Records the kernel as a composite tree.
pub(crate) struct TraceSink {
    stack: Vec<(String, Vec<Node>)>,
    pub log: Vec<String>,
}

impl TraceSink {
    pub fn new(root: &str) -> Self {
        TraceSink {
            stack: vec![(root.to_string(), Vec::new())],
            log: Vec::new(),
        }
    }

    pub fn finish(mut self) -> (CompositeInstruction, Vec<String>) {
        let (name, children) = self.stack.pop().expect("root frame");
        let mut c = CompositeInstruction::new(name);
        c.children = children;
        (c, self.log)
    }

    fn top(&mut self) -> &mut Vec<Node> {
        &mut self.stack.last_mut().expect("root frame").1
    }
}

impl Sink for TraceSink {
    fn gate(&mut self, inst: Instruction) -> R<()> {
        self.top().push(Node::Gate(inst));
        Ok(())
    }

    fn measure(&mut self, q: usize, slot: String, reset: bool) -> R<Value> {
        if reset {
            self.top().push(Node::Gate(Instruction::one(Gate::Reset, q)));
            return Ok(Value::Unset);
        }
        let mut m = Instruction::measure(q);
        m.classical_target = Some(slot.clone());
        self.top().push(Node::Gate(m));
        Ok(Value::Dynamic(CExpr::Slot(slot)))
    }

    fn emit(&mut self, c: CompositeInstruction) -> R<()> {
        self.top().push(Node::Composite(c));
        Ok(())
    }

    fn print(&mut self, line: String) {
        self.log.push(line);
    }

    fn enter(&mut self, name: &str) {
        self.stack.push((name.to_string(), Vec::new()));
    }

    fn exit(&mut self) {
        let (name, children) = self.stack.pop().expect("balanced enter/exit");
        let mut c = CompositeInstruction::new(name);
        c.children = children;
        self.top().push(Node::Composite(c));
    }

    fn records_branches(&self) -> bool {
        true
    }

    fn begin_block(&mut self) {
        self.stack.push((String::new(), Vec::new()));
    }

    fn end_block(&mut self) -> Vec<Node> {
        self.stack.pop().expect("balanced blocks").1
    }

    fn classical(&mut self, node: ClassicalNode) {
        self.top().push(Node::Classical(node));
    }
}

/// One measurement taken during an exhaustive enumeration.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Branch {
    pub outcome: bool,
    pub prob: f64,
    pub other: f64,
}

/// Applies gates to a state vector as they are produced.
pub(crate) struct ConcreteSink<'r> {
    pub state: StateVector,
    rng: &'r mut ChaCha8Rng,
    /// Last measured value per qubit.
    pub bits: Vec<Option<bool>>,
    pub log: Vec<String>,
    /// When set, outcomes are chosen by enumeration instead of sampling.
    pub forced: Option<Vec<bool>>,
    pub path: Vec<Branch>,
    /// Gates, measurements and resets applied so far.
    pub applied: usize,
}

/// Outcomes below this probability are treated as impossible.
pub(crate) const BRANCH_EPS: f64 = 1e-14;

impl<'r> ConcreteSink<'r> {
    pub fn new(n: usize, rng: &'r mut ChaCha8Rng) -> R<Self> {
        Ok(ConcreteSink {
            state: StateVector::new(n)?,
            rng,
            bits: vec![None; n],
            log: Vec::new(),
            forced: None,
            path: Vec::new(),
            applied: 0,
        })
    }

    fn take(&mut self, q: usize) -> bool {
        match &self.forced {
            None => self.state.measure(q, self.rng),
            Some(prefix) => {
                let p1 = self.state.prob_one(q);
                let k = self.path.len();
                let outcome = match prefix.get(k) {
                    Some(&o) => o,
                    None => 1.0 - p1 <= BRANCH_EPS,
                };
                let prob = self.state.collapse(q, outcome);
                self.path.push(Branch {
                    outcome,
                    prob,
                    other: 1.0 - prob,
                });
                outcome
            }
        }
    }
}

impl Sink for ConcreteSink<'_> {
    fn gate(&mut self, inst: Instruction) -> R<()> {
        match inst.gate {
            Gate::Measure => self.measure(inst.targets[0], String::new(), false).map(|_| ()),
            Gate::Reset => self.measure(inst.targets[0], String::new(), true).map(|_| ()),
            _ => {
                self.applied += 1;
                self.state.apply(&inst)
            }
        }
    }

    fn measure(&mut self, q: usize, _slot: String, reset: bool) -> R<Value> {
        if q >= self.state.num_qubits() {
            return Err(IrError::QubitOutOfRange {
                qubit: q,
                size: self.state.num_qubits(),
            }
            .into());
        }
        self.applied += 1;
        let outcome = self.take(q);
        if reset {
            if outcome {
                self.state.flip(q);
            }
            return Ok(Value::Unset);
        }
        self.bits[q] = Some(outcome);
        Ok(Value::bool(outcome))
    }

    fn emit(&mut self, c: CompositeInstruction) -> R<()> {
        for inst in c.flatten()? {
            self.gate(inst)?;
        }
        Ok(())
    }

    fn print(&mut self, line: String) {
        self.log.push(line);
    }
}

struct Frame<'p> {
    prog: &'p Program,
    kernel: &'p str,
    values: Vec<Value>,
    /// Classical slot names given to variables that became measurement-dependent.
    dyn_names: HashMap<usize, String>,
}

pub(crate) struct Interpreter<'a, S: Sink> {
    registry: &'a KernelRegistry,
    pub sink: S,
    /// Sub-circuits being recorded for a transform; `true` marks a capture root.
    captures: Vec<(CompositeInstruction, bool)>,
    dynamic_depth: usize,
    used_names: HashMap<String, usize>,
    depth: usize,
}

impl<'a, S: Sink> Interpreter<'a, S> {
    pub fn new(registry: &'a KernelRegistry, sink: S) -> Self {
        Interpreter {
            registry,
            sink,
            captures: Vec::new(),
            dynamic_depth: 0,
            used_names: HashMap::new(),
            depth: 0,
        }
    }

    /// Runs `kernel` with positional arguments and returns its final slots.
    pub fn run(&mut self, kernel: &Arc<CompiledKernel>, args: Vec<Value>) -> R<Vec<Value>> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(RuntimeError::RecursionLimit(kernel.name.clone()));
        }
        self.depth += 1;
        let prog = &kernel.program;
        let mut values = args;
        values.resize(prog.slots.len(), Value::Unset);
        let mut frame = Frame {
            prog,
            kernel: &kernel.name,
            values,
            dyn_names: HashMap::new(),
        };
        let saved = std::mem::replace(&mut self.dynamic_depth, 0);
        let r = self.block(&mut frame, &prog.body);
        self.dynamic_depth = saved;
        self.depth -= 1;
        r.map(|_| frame.values)
    }

    fn fresh_name(&mut self, base: &str) -> String {
        let n = self.used_names.entry(base.to_string()).or_insert(0);
        let name = if *n == 0 { base.to_string() } else { format!("{base}_{n}") };
        *n += 1;
        name
    }

    fn dyn_name(&mut self, f: &mut Frame, slot: usize) -> String {
        if let Some(n) = f.dyn_names.get(&slot) {
            return n.clone();
        }
        let n = self.fresh_name(f.prog.slot_name(slot));
        f.dyn_names.insert(slot, n.clone());
        n
    }

    fn push_gate(&mut self, inst: Instruction) -> R<()> {
        match self.captures.last_mut() {
            Some((c, _)) => {
                c.push(inst);
                Ok(())
            }
            None => self.sink.gate(inst),
        }
    }

    fn push_composite(&mut self, c: CompositeInstruction) -> R<()> {
        match self.captures.last_mut() {
            Some((top, _)) => {
                top.push_node(Node::Composite(c));
                Ok(())
            }
            None => self.sink.emit(c),
        }
    }

    fn capture<T>(&mut self, name: &str, body: impl FnOnce(&mut Self) -> R<T>) -> R<(CompositeInstruction, T)> {
        self.captures.push((CompositeInstruction::new(name), true));
        let r = body(self);
        let (c, root) = self.captures.pop().expect("capture root");
        debug_assert!(root);
        r.map(|t| (c, t))
    }

    fn enter(&mut self, name: &str) {
        if self.captures.is_empty() {
            self.sink.enter(name);
        } else {
            self.captures.push((CompositeInstruction::new(name), false));
        }
    }

    fn exit(&mut self) {
        if self.captures.is_empty() {
            self.sink.exit();
        } else {
            let (c, root) = self.captures.pop().expect("nested composite");
            debug_assert!(!root);
            self.captures.last_mut().expect("capture root").0.push_node(Node::Composite(c));
        }
    }

    fn measure(&mut self, q: usize, hint: Option<&str>, reset: bool) -> R<Value> {
        let name = self.fresh_name(hint.unwrap_or("m"));
        match self.captures.last_mut() {
            Some((c, _)) => {
                if reset {
                    c.push(Instruction::one(Gate::Reset, q));
                    return Ok(Value::Unset);
                }
                let mut m = Instruction::measure(q);
                m.classical_target = Some(name.clone());
                c.push(m);
                Ok(Value::Dynamic(CExpr::Slot(name)))
            }
            None => self.sink.measure(q, name, reset),
        }
    }

    fn block(&mut self, f: &mut Frame, ops: &[Op]) -> R<()> {
        for op in ops {
            self.op(f, op)?;
        }
        Ok(())
    }

    fn op(&mut self, f: &mut Frame, op: &Op) -> R<()> {
        let line = op.line;
        match &op.kind {
            OpKind::Gate {
                gate,
                modifier,
                ctrl,
                qubits,
                params,
            } => self.gate(f, *gate, *modifier, ctrl.as_ref(), qubits, params, line),
            OpKind::Call {
                callee,
                modifier,
                ctrl,
                args,
            } => self.call(f, callee, *modifier, ctrl.as_ref(), args, line),
            OpKind::Assign { slot, value } => {
                let hint = matches!(value, LExpr::Measure(_)).then(|| f.prog.slot_name(*slot).to_string());
                let v = self.eval_hinted(f, value, line, hint.as_deref())?;
                self.assign(f, *slot, v, line)
            }
            OpKind::AssignIndex { slot, index, value } => self.assign_index(f, *slot, index, value, line),
            OpKind::For { slot, iter, body } => {
                let items = self.iterate(f, iter, line)?;
                for item in items {
                    f.values[*slot] = item;
                    self.block(f, body)?;
                }
                Ok(())
            }
            OpKind::If { branches, orelse } => self.if_chain(f, branches, orelse, line),
            OpKind::ComputeAction { compute, action } => {
                let (u, _) = self.capture("compute", |me| me.block(f, compute))?;
                let (v, _) = self.capture("action", |me| me.block(f, action))?;
                let triple = compute_action(f.kernel, u, v)?;
                for node in triple.children {
                    if let Node::Composite(c) = node {
                        self.push_composite(c)?;
                    }
                }
                Ok(())
            }
            OpKind::Synthesize {
                qubits,
                method,
                slot,
                body,
            } => {
                self.block(f, body)?;
                let m = to_matrix(&f.values[*slot]).ok_or_else(|| RuntimeError::Type {
                    line,
                    message: format!("`{}` is not a matrix", f.prog.slot_name(*slot)),
                })?;
                let qs = self.qubit_list(f, qubits, line)?;
                if m.nrows() != 1 << qs.len() || m.ncols() != m.nrows() {
                    return Err(SynthesisError::DimensionMismatch {
                        rows: m.nrows(),
                        cols: m.ncols(),
                        qubits: qs.len(),
                        expected: 1 << qs.len(),
                    }
                    .into());
                }
                // TODO: synthesis is exact only up to global phase, which turns
                // into a relative phase if this block is later controlled.
                let (insts, _) = synthesize_checked(&m, *method)?;
                let mapped = insts
                    .into_iter()
                    .map(|mut i| {
                        i.targets.iter_mut().for_each(|t| *t = qs[*t]);
                        i.controls.iter_mut().for_each(|t| *t = qs[*t]);
                        i
                    })
                    .collect();
                self.push_composite(CompositeInstruction::from_instructions("decompose", mapped))
            }
            OpKind::ExpITheta { qubits, theta, op } => {
                let qs = self.qubit_list(f, qubits, line)?;
                let theta = self.eval_f64(f, theta, line)?;
                let pauli = match self.eval(f, op, line)? {
                    Value::Pauli(p) => p,
                    other => {
                        return Err(RuntimeError::Type {
                            line,
                            message: format!("exp_i_theta expects a PauliOperator, got {}", other.type_name()),
                        })
                    }
                };
                let c = exp_i_theta(&qs, theta, &pauli)?;
                self.push_composite(c)
            }
            OpKind::Print(args) => {
                let vals = args.iter().map(|a| self.eval(f, a, line)).collect::<R<Vec<_>>>()?;
                if vals.iter().any(|v| matches!(v, Value::Dynamic(_))) {
                    self.require_branching(line)?;
                    let args = vals
                        .iter()
                        .map(|v| v.to_cexpr().unwrap_or_else(|| CExpr::Const(Scalar::Str(v.display()))))
                        .collect();
                    self.sink.classical(ClassicalNode::Print { args });
                } else {
                    let text: Vec<String> = vals.iter().map(Value::display).collect();
                    self.sink.print(text.join(" "));
                }
                Ok(())
            }
        }
    }

    fn require_branching(&self, line: usize) -> R<()> {
        if !self.captures.is_empty() {
            return Err(RuntimeError::ClassicalInModifiedBlock { line });
        }
        if !self.sink.records_branches() {
            return Err(IrError::DynamicControlFlowInCircuitMode.into());
        }
        Ok(())
    }

    fn assign(&mut self, f: &mut Frame, slot: usize, v: Value, line: usize) -> R<()> {
        if self.dynamic_depth == 0 {
            f.values[slot] = v;
            return Ok(());
        }
        let value = v.to_cexpr().ok_or_else(|| RuntimeError::Type {
            line,
            message: format!(
                "cannot assign a {} inside a measurement-dependent branch",
                v.type_name()
            ),
        })?;
        let name = self.dyn_name(f, slot);
        self.sink.classical(ClassicalNode::Assign {
            slot: name.clone(),
            value,
        });
        f.values[slot] = Value::Dynamic(CExpr::Slot(name));
        Ok(())
    }

    fn assign_index(&mut self, f: &mut Frame, slot: usize, index: &[LExpr], value: &LExpr, line: usize) -> R<()> {
        let idx = index
            .iter()
            .map(|e| self.eval_i64(f, e, line))
            .collect::<R<Vec<_>>>()?;
        let v = self.eval(f, value, line)?;
        if self.dynamic_depth > 0 {
            return Err(IrError::DynamicControlFlowInCircuitMode.into());
        }
        let name = f.prog.slot_name(slot).to_string();
        let type_err = |message: String| RuntimeError::Type { line, message };
        match (&mut f.values[slot], idx.as_slice()) {
            (Value::Matrix(m), [i, j]) => {
                let (r, c) = (m.nrows(), m.ncols());
                let i = index_of(*i, r).ok_or(RuntimeError::IndexOutOfRange { line, index: *i, len: r })?;
                let j = index_of(*j, c).ok_or(RuntimeError::IndexOutOfRange { line, index: *j, len: c })?;
                let z = v
                    .as_complex()
                    .ok_or_else(|| type_err(format!("matrix entries must be numbers, got {}", v.type_name())))?;
                Arc::make_mut(m)[(i, j)] = z;
            }
            (Value::List(xs), [i]) => {
                let len = xs.len();
                let k = index_of(*i, len).ok_or(RuntimeError::IndexOutOfRange { line, index: *i, len })?;
                xs[k] = v;
            }
            (other, _) => {
                return Err(type_err(format!(
                    "cannot assign to `{name}[...]` ({} with {} index(es))",
                    other.type_name(),
                    idx.len()
                )))
            }
        }
        Ok(())
    }

    fn iterate(&mut self, f: &mut Frame, iter: &Iterable, line: usize) -> R<Vec<Value>> {
        match iter {
            Iterable::Range { start, stop, step } => {
                let (a, b, s) = (
                    self.eval_i64(f, start, line)?,
                    self.eval_i64(f, stop, line)?,
                    self.eval_i64(f, step, line)?,
                );
                if s == 0 {
                    return Err(RuntimeError::Type {
                        line,
                        message: "range() step must not be zero".into(),
                    });
                }
                let mut out = Vec::new();
                let mut i = a;
                while (s > 0 && i < b) || (s < 0 && i > b) {
                    out.push(Value::int(i));
                    i += s;
                }
                Ok(out)
            }
            Iterable::Each(e) => match self.eval(f, e, line)? {
                Value::Reg(r) => Ok(r.iter().map(|&q| Value::Qubit(q)).collect()),
                Value::List(xs) => Ok(xs),
                Value::Dynamic(_) => Err(IrError::DynamicControlFlowInCircuitMode.into()),
                other => Err(RuntimeError::Type {
                    line,
                    message: format!("cannot iterate over {}", other.type_name()),
                }),
            },
        }
    }

    fn if_chain(&mut self, f: &mut Frame, branches: &[(LExpr, Vec<Op>)], orelse: &[Op], line: usize) -> R<()> {
        let Some(((cond, body), rest)) = branches.split_first() else {
            return self.block(f, orelse);
        };
        match self.eval(f, cond, line)? {
            Value::Dynamic(c) => self.dynamic_if(f, c, body, rest, orelse, line),
            Value::Scalar(s) => {
                if s.truthy() {
                    self.block(f, body)
                } else {
                    self.if_chain(f, rest, orelse, line)
                }
            }
            Value::List(xs) => {
                if xs.is_empty() {
                    self.if_chain(f, rest, orelse, line)
                } else {
                    self.block(f, body)
                }
            }
            other => Err(RuntimeError::Type {
                line,
                message: format!("{} has no truth value", other.type_name()),
            }),
        }
    }

    /// Records a branch on a measurement-dependent condition. Variables the
    /// branches assign become named classical slots first.
    fn dynamic_if(
        &mut self,
        f: &mut Frame,
        cond: CExpr,
        body: &[Op],
        rest: &[(LExpr, Vec<Op>)],
        orelse: &[Op],
        line: usize,
    ) -> R<()> {
        self.require_branching(line)?;
        let mut assigned = BTreeSet::new();
        collect_assigned(body, &mut assigned);
        for (_, b) in rest {
            collect_assigned(b, &mut assigned);
        }
        collect_assigned(orelse, &mut assigned);
        for slot in assigned {
            let current = f.values[slot].clone();
            if matches!(current, Value::Unset) {
                continue;
            }
            let name = self.dyn_name(f, slot);
            if current == Value::Dynamic(CExpr::Slot(name.clone())) {
                continue;
            }
            let value = current.to_cexpr().ok_or_else(|| RuntimeError::Type {
                line,
                message: format!(
                    "`{}` holds a {} and cannot change inside a measurement-dependent branch",
                    f.prog.slot_name(slot),
                    current.type_name()
                ),
            })?;
            self.sink.classical(ClassicalNode::Assign {
                slot: name.clone(),
                value,
            });
            f.values[slot] = Value::Dynamic(CExpr::Slot(name));
        }
        self.dynamic_depth += 1;
        self.sink.begin_block();
        let r = self.block(f, body);
        let then_branch = self.sink.end_block();
        r?;
        self.sink.begin_block();
        let r = self.if_chain(f, rest, orelse, line);
        let else_branch = self.sink.end_block();
        r?;
        self.dynamic_depth -= 1;
        self.sink.classical(ClassicalNode::If {
            cond,
            then_branch,
            else_branch,
        });
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn gate(
        &mut self,
        f: &mut Frame,
        gate: Gate,
        modifier: Modifier,
        ctrl: Option<&LExpr>,
        qubits: &[LExpr],
        params: &[LExpr],
        line: usize,
    ) -> R<()> {
        let params = params
            .iter()
            .map(|p| self.eval_f64(f, p, line))
            .collect::<R<Vec<_>>>()?;
        let controls = match ctrl {
            Some(e) => self.qubit_list(f, e, line)?,
            None => Vec::new(),
        };
        let operands = qubits
            .iter()
            .map(|q| self.qubit_list(f, q, line))
            .collect::<R<Vec<_>>>()?;
        if matches!(gate, Gate::Measure | Gate::Reset) {
            for &q in operands.iter().flatten() {
                self.measure(q, None, gate == Gate::Reset)?;
            }
            return Ok(());
        }
        let target_sets: Vec<Vec<usize>> = if gate.num_targets() == 1 {
            operands.into_iter().flatten().map(|q| vec![q]).collect()
        } else {
            let mut ts = Vec::new();
            for o in &operands {
                match o.as_slice() {
                    [q] => ts.push(*q),
                    _ => {
                        return Err(RuntimeError::Type {
                            line,
                            message: format!("{} expects single qubits, got a register of {}", gate.name(), o.len()),
                        })
                    }
                }
            }
            vec![ts]
        };
        for targets in target_sets {
            let mut inst = Instruction::new(gate, targets, params.clone())?;
            if modifier == Modifier::Adjoint {
                inst = invert(&inst)?;
            }
            if !controls.is_empty() {
                if let Some(&q) = controls.iter().find(|q| inst.targets.contains(q)) {
                    return Err(TransformError::ControlOverlap(q).into());
                }
                inst = inst.with_controls(controls.clone())?;
            }
            self.push_gate(inst)?;
        }
        Ok(())
    }

    fn call(
        &mut self,
        f: &mut Frame,
        callee: &Callee,
        modifier: Modifier,
        ctrl: Option<&LExpr>,
        args: &[CallArg],
        line: usize,
    ) -> R<()> {
        let name = match callee {
            Callee::Static(n) => n.clone(),
            Callee::Param(slot) => match &f.values[*slot] {
                Value::Kernel(n) => n.clone(),
                other => {
                    return Err(RuntimeError::Type {
                        line,
                        message: format!("`{}` is a {}, not a kernel", f.prog.slot_name(*slot), other.type_name()),
                    })
                }
            },
        };
        let kernel = self.registry.get(&name).ok_or_else(|| RuntimeError::UnknownKernel(name.clone()))?;
        let controls = match ctrl {
            Some(e) => Some(self.qubit_list(f, e, line)?),
            None => None,
        };
        let mut vals = Vec::with_capacity(args.len());
        for (a, p) in args.iter().zip(&kernel.signature) {
            let v = match a {
                CallArg::Value(e) => self.eval(f, e, line)?,
                CallArg::Ref(slot) => f.values[*slot].clone(),
            };
            vals.push(match (&p.ty, v) {
                (TypeAnnotation::Qreg, Value::Qubit(q)) => Value::Reg(Arc::new(vec![q])),
                (TypeAnnotation::Float | TypeAnnotation::FloatRef, Value::Scalar(s @ (Scalar::Int(_) | Scalar::Bool(_)))) => {
                    Value::float(s.as_f64().unwrap())
                }
                (_, v) => v,
            });
        }
        let out = match modifier {
            Modifier::None => {
                self.enter(&name);
                let r = self.run(&kernel, vals);
                self.exit();
                r?
            }
            Modifier::Adjoint => {
                let (c, out) = self.capture(&name, |me| me.run(&kernel, vals))?;
                self.push_composite(adjoint(&c)?)?;
                out
            }
            Modifier::Ctrl => {
                let (c, out) = self.capture(&name, |me| me.run(&kernel, vals))?;
                self.push_composite(controlled(&c, controls.as_deref().unwrap_or(&[]))?)?;
                out
            }
        };
        for (i, a) in args.iter().enumerate() {
            if let CallArg::Ref(slot) = a {
                self.assign(f, *slot, out[i].clone(), line)?;
            }
        }
        Ok(())
    }

    fn qubit_list(&mut self, f: &mut Frame, e: &LExpr, line: usize) -> R<Vec<usize>> {
        let v = self.eval(f, e, line)?;
        match v {
            Value::Dynamic(_) => Err(IrError::DynamicControlFlowInCircuitMode.into()),
            v => v.qubits().ok_or_else(|| RuntimeError::Type {
                line,
                message: format!("expected a qubit or register, got {}", v.type_name()),
            }),
        }
    }

    fn eval_f64(&mut self, f: &mut Frame, e: &LExpr, line: usize) -> R<f64> {
        match self.eval(f, e, line)? {
            Value::Dynamic(_) => Err(IrError::DynamicControlFlowInCircuitMode.into()),
            v => v.as_f64().ok_or_else(|| RuntimeError::Type {
                line,
                message: format!("expected a number, got {}", v.type_name()),
            }),
        }
    }

    fn eval_i64(&mut self, f: &mut Frame, e: &LExpr, line: usize) -> R<i64> {
        match self.eval(f, e, line)? {
            Value::Dynamic(_) => Err(IrError::DynamicControlFlowInCircuitMode.into()),
            v => v.as_i64().ok_or_else(|| RuntimeError::Type {
                line,
                message: format!("expected an integer, got {}", v.type_name()),
            }),
        }
    }

    fn eval(&mut self, f: &mut Frame, e: &LExpr, line: usize) -> R<Value> {
        self.eval_hinted(f, e, line, None)
    }

    fn eval_hinted(&mut self, f: &mut Frame, e: &LExpr, line: usize, hint: Option<&str>) -> R<Value> {
        let type_err = |message: String| RuntimeError::Type { line, message };
        Ok(match e {
            LExpr::Const(s) => Value::Scalar(s.clone()),
            LExpr::Imag(v) => Value::Complex(C64::new(0.0, *v)),
            LExpr::Slot(s) => match &f.values[*s] {
                Value::Unset => {
                    return Err(RuntimeError::Unassigned {
                        name: f.prog.slot_name(*s).to_string(),
                        line,
                    })
                }
                v => v.clone(),
            },
            LExpr::KernelRef(n) => Value::Kernel(n.clone()),
            LExpr::Unary(op, a) => {
                let a = self.eval(f, a, line)?;
                Value::unary(*op, &a).map_err(type_err)?
            }
            LExpr::Binary(op, a, b) => {
                let a = self.eval(f, a, line)?;
                let b = self.eval(f, b, line)?;
                Value::binary(*op, &a, &b).map_err(type_err)?
            }
            LExpr::Index(base, idx) => {
                let base = self.eval(f, base, line)?;
                let idx = idx.iter().map(|i| self.eval(f, i, line)).collect::<R<Vec<_>>>()?;
                index(&base, &idx, line)?
            }
            LExpr::Slice(a, b) => {
                let a = a.as_ref().map(|a| self.eval_i64(f, a, line)).transpose()?;
                let b = b.as_ref().map(|b| self.eval_i64(f, b, line)).transpose()?;
                Value::Slice(a, b)
            }
            LExpr::Size(x) => match self.eval(f, x, line)? {
                Value::Reg(r) => Value::int(r.len() as i64),
                Value::Qubit(_) => Value::int(1),
                Value::List(xs) => Value::int(xs.len() as i64),
                Value::Matrix(m) => Value::int(m.nrows() as i64),
                Value::Scalar(Scalar::Str(s)) => Value::int(s.chars().count() as i64),
                other => return Err(type_err(format!("{} has no size", other.type_name()))),
            },
            LExpr::List(xs) => Value::List(xs.iter().map(|x| self.eval(f, x, line)).collect::<R<_>>()?),
            LExpr::Builtin(b, args) => {
                let args = args.iter().map(|a| self.eval(f, a, line)).collect::<R<Vec<_>>>()?;
                builtin(*b, &args).map_err(type_err)?
            }
            LExpr::Measure(q) => {
                let qs = self.qubit_list(f, q, line)?;
                match qs.as_slice() {
                    [q] => self.measure(*q, hint, false)?,
                    _ => return Err(type_err("Measure in an expression needs a single qubit".into())),
                }
            }
        })
    }
}

fn collect_assigned(ops: &[Op], out: &mut BTreeSet<usize>) {
    for op in ops {
        match &op.kind {
            OpKind::Assign { slot, .. } | OpKind::AssignIndex { slot, .. } => {
                out.insert(*slot);
            }
            OpKind::Call { args, .. } => out.extend(args.iter().filter_map(|a| match a {
                CallArg::Ref(s) => Some(*s),
                CallArg::Value(_) => None,
            })),
            OpKind::For { body, .. } | OpKind::Synthesize { body, .. } => collect_assigned(body, out),
            OpKind::If { branches, orelse } => {
                for (_, b) in branches {
                    collect_assigned(b, out);
                }
                collect_assigned(orelse, out);
            }
            OpKind::ComputeAction { compute, action } => {
                collect_assigned(compute, out);
                collect_assigned(action, out);
            }
            _ => {}
        }
    }
}

fn index(base: &Value, idx: &[Value], line: usize) -> R<Value> {
    let oob = |index: i64, len: usize| RuntimeError::IndexOutOfRange { line, index, len };
    let int = |v: &Value| -> R<i64> {
        match v {
            Value::Dynamic(_) => Err(IrError::DynamicControlFlowInCircuitMode.into()),
            v => v.as_i64().ok_or_else(|| RuntimeError::Type {
                line,
                message: format!("indices must be integers, got {}", v.type_name()),
            }),
        }
    };
    match (base, idx) {
        (Value::Reg(r), [Value::Slice(a, b)]) => {
            let (lo, hi) = slice_range(*a, *b, r.len());
            Ok(Value::Reg(Arc::new(r[lo..hi].to_vec())))
        }
        (Value::Reg(r), [i]) => {
            let i = int(i)?;
            index_of(i, r.len()).map(|k| Value::Qubit(r[k])).ok_or(oob(i, r.len()))
        }
        (Value::List(xs), [Value::Slice(a, b)]) => {
            let (lo, hi) = slice_range(*a, *b, xs.len());
            Ok(Value::List(xs[lo..hi].to_vec()))
        }
        (Value::List(xs), [i]) => {
            let i = int(i)?;
            index_of(i, xs.len()).map(|k| xs[k].clone()).ok_or(oob(i, xs.len()))
        }
        (Value::Matrix(m), [i, j]) => {
            let (i, j) = (int(i)?, int(j)?);
            let r = index_of(i, m.nrows()).ok_or(oob(i, m.nrows()))?;
            let c = index_of(j, m.ncols()).ok_or(oob(j, m.ncols()))?;
            Ok(Value::Complex(m[(r, c)]))
        }
        (b, _) => Err(RuntimeError::Type {
            line,
            message: format!("{} cannot be indexed with {} index(es)", b.type_name(), idx.len()),
        }),
    }
}

fn builtin(b: Builtin, args: &[Value]) -> Result<Value, String> {
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("{b:?} takes {n} argument(s), {} given", args.len()).to_lowercase())
        }
    };
    let num = |v: &Value| v.as_f64().ok_or_else(|| format!("expected a number, got {}", v.type_name()));
    let dim = |v: &Value| match v.as_i64() {
        Some(n) if (1..=1 << 12).contains(&n) => Ok(n as usize),
        _ => Err(format!("matrix dimension must be a positive integer, got {}", v.display())),
    };
    Ok(match b {
        Builtin::Eye => {
            arity(1)?;
            let n = dim(&args[0])?;
            Value::Matrix(Arc::new(Matrix::identity(n, n)))
        }
        Builtin::Zeros => {
            arity(1)?;
            let n = dim(&args[0])?;
            Value::Matrix(Arc::new(Matrix::zeros(n, n)))
        }
        Builtin::CcnotMatrix => {
            arity(0)?;
            let mut m = Matrix::identity(8, 8);
            m[(6, 6)] = ZERO;
            m[(7, 7)] = ZERO;
            m[(6, 7)] = ONE;
            m[(7, 6)] = ONE;
            Value::Matrix(Arc::new(m))
        }
        Builtin::Abs => {
            arity(1)?;
            match &args[0] {
                Value::Complex(z) => Value::float(z.norm()),
                Value::Scalar(Scalar::Int(i)) => Value::int(i.abs()),
                v => Value::float(num(v)?.abs()),
            }
        }
        Builtin::Int => {
            arity(1)?;
            Value::int(num(&args[0])?.trunc() as i64)
        }
        Builtin::Float => {
            arity(1)?;
            Value::float(num(&args[0])?)
        }
        Builtin::Min | Builtin::Max => {
            let items: Vec<Value> = match args {
                [Value::List(xs)] => xs.clone(),
                xs => xs.to_vec(),
            };
            let mut best: Option<(f64, Value)> = None;
            for v in items {
                let x = num(&v)?;
                let better = match &best {
                    None => true,
                    Some((y, _)) => (b == Builtin::Min && x < *y) || (b == Builtin::Max && x > *y),
                };
                if better {
                    best = Some((x, v));
                }
            }
            best.map(|(_, v)| v).ok_or_else(|| format!("{b:?}() of an empty sequence").to_lowercase())?
        }
        Builtin::Sqrt => {
            arity(1)?;
            Value::float(num(&args[0])?.sqrt())
        }
        Builtin::Sin => {
            arity(1)?;
            Value::float(num(&args[0])?.sin())
        }
        Builtin::Cos => {
            arity(1)?;
            Value::float(num(&args[0])?.cos())
        }
        Builtin::Exp => {
            arity(1)?;
            match &args[0] {
                Value::Complex(z) => Value::Complex(z.exp()),
                v => Value::float(num(v)?.exp()),
            }
        }
    })
}

/// Matrix view of a matrix value or a nested list of numbers.
pub(crate) fn to_matrix(v: &Value) -> Option<Matrix> {
    match v {
        Value::Matrix(m) => Some((**m).clone()),
        Value::List(rows) => {
            let n = rows.len();
            let mut m = Matrix::zeros(n, n);
            for (i, r) in rows.iter().enumerate() {
                let Value::List(cols) = r else { return None };
                if cols.len() != n {
                    return None;
                }
                for (j, x) in cols.iter().enumerate() {
                    m[(i, j)] = x.as_complex()?;
                }
            }
            Some(m)
        }
        _ => None,
    }
}
