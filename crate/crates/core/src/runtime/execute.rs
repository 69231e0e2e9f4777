//! Circuit mode (trace, flatten, simulate) and FTQC mode (eager
//! interpretation with mid-circuit feedback), plus the tracing utilities.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backend::{Backend, Capability};
use super::interpreter::{ConcreteSink, Interpreter, Sink, TraceSink, BRANCH_EPS};
use super::statevector::{sample_indices, StateVector};
use super::value::Value;
use super::RuntimeError;
use crate::compiler::{ArgValue, BoundCall, KernelRegistry};
use crate::ir::{circuit_unitary, CompositeInstruction, Gate, Instruction, IrError, QReg, RefValue, RegisterLayout};
use crate::linalg::Matrix;
use crate::transforms::{peephole, peephole_flat};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Circuit,
    Ftqc,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Circuit => "circuit",
            Mode::Ftqc => "ftqc",
        })
    }
}

impl FromStr for Mode {
    type Err = RuntimeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "circuit" => Ok(Mode::Circuit),
            "ftqc" => Ok(Mode::Ftqc),
            other => Err(RuntimeError::Config(format!("unknown mode `{other}` (expected circuit or ftqc)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecOptions {
    pub mode: Mode,
    /// Zero requests exact probabilities instead of samples.
    pub shots: u64,
    pub seed: u64,
    /// Run the peephole pass before simulating in circuit mode.
    pub optimize: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            mode: Mode::Circuit,
            shots: 1024,
            seed: 0,
            optimize: true,
        }
    }
}

/// A kernel traced into a circuit.
#[derive(Clone, Debug)]
pub struct Trace {
    pub composite: CompositeInstruction,
    pub layout: RegisterLayout,
    pub log: Vec<String>,
    /// By-reference results known at trace time, in parameter order.
    pub byref: BTreeMap<String, RefValue>,
    /// By-reference parameters whose final value depends on a measurement.
    pub dynamic_byref: Vec<String>,
}

impl Trace {
    pub fn num_qubits(&self) -> usize {
        self.layout.total()
    }
}

#[derive(Clone, Debug)]
pub struct Execution {
    pub registers: Vec<QReg>,
    pub layout: RegisterLayout,
    /// Lines printed by the kernel. FTQC mode collects every shot.
    pub log: Vec<String>,
    /// State before terminal measurement (circuit mode) or after the last
    /// shot (FTQC mode).
    pub final_state: Option<StateVector>,
    /// Circuit size in circuit mode; instructions applied by the reported
    /// run (last shot, or most likely branch) in FTQC mode.
    pub instruction_count: usize,
}

impl Execution {
    /// Results of the first register, which also carries by-reference values.
    pub fn primary(&self) -> &QReg {
        &self.registers[0]
    }
}

fn layout_for(bound: &BoundCall) -> RegisterLayout {
    let mut layout = RegisterLayout::empty();
    for (name, size) in bound.registers() {
        layout.push(&name, size);
    }
    layout
}

fn initial_values(bound: &BoundCall, layout: &RegisterLayout) -> Vec<Value> {
    let mut regs = layout
        .registers()
        .map(|(_, off, size)| std::sync::Arc::new((off..off + size).collect::<Vec<_>>()))
        .collect::<Vec<_>>()
        .into_iter();
    bound.args.iter().map(|a| Value::from_arg(a, &mut regs)).collect()
}

fn collect_byref(bound: &BoundCall, finals: &[Value]) -> (BTreeMap<String, RefValue>, Vec<String>) {
    let mut known = BTreeMap::new();
    let mut dynamic = Vec::new();
    for ((p, a), v) in bound.kernel.signature.iter().zip(&bound.args).zip(finals) {
        if let ArgValue::Ref(like) = a {
            match v.to_ref(like) {
                Some(r) => {
                    known.insert(p.name.clone(), r);
                }
                None => dynamic.push(p.name.clone()),
            }
        }
    }
    (known, dynamic)
}

/// Traces a bound kernel in circuit mode without simulating it.
pub fn trace(registry: &KernelRegistry, bound: &BoundCall) -> Result<Trace, RuntimeError> {
    let layout = layout_for(bound);
    let values = initial_values(bound, &layout);
    let mut interp = Interpreter::new(registry, TraceSink::new(&bound.kernel.name));
    let finals = interp.run(&bound.kernel, values)?;
    let (composite, log) = interp.sink.finish();
    let (byref, dynamic_byref) = collect_byref(bound, &finals);
    Ok(Trace {
        composite,
        layout,
        log,
        byref,
        dynamic_byref,
    })
}

/// The resolved, transformed and optimized circuit that circuit mode runs.
pub fn extract_composite(
    registry: &KernelRegistry,
    bound: &BoundCall,
    optimize: bool,
) -> Result<CompositeInstruction, RuntimeError> {
    let t = trace(registry, bound)?;
    if !t.composite.is_static() {
        return Err(IrError::DynamicControlFlowInCircuitMode.into());
    }
    Ok(if optimize { peephole(&t.composite).0 } else { t.composite })
}

/// Unitary of the kernel on all of its qubits, q[0] most significant.
pub fn as_unitary_matrix(registry: &KernelRegistry, bound: &BoundCall) -> Result<Matrix, RuntimeError> {
    let t = trace(registry, bound)?;
    let insts = t.composite.flatten()?;
    if let Some(i) = insts.iter().find(|i| !i.gate.is_unitary()) {
        return Err(RuntimeError::NonUnitarySubcircuit(i.gate.name().into()));
    }
    Ok(circuit_unitary(&insts, t.num_qubits())?)
}

pub fn execute(
    registry: &KernelRegistry,
    bound: &BoundCall,
    backend: &dyn Backend,
    opts: &ExecOptions,
) -> Result<Execution, RuntimeError> {
    backend.require(if opts.shots == 0 {
        Capability::ExactExpectation
    } else {
        Capability::Shots
    })?;
    match opts.mode {
        Mode::Circuit => run_circuit(registry, bound, opts),
        Mode::Ftqc => {
            backend.require(Capability::MidCircuitMeasurement)?;
            run_ftqc(registry, bound, opts)
        }
    }
}

fn registers(layout: &RegisterLayout) -> Result<Vec<QReg>, RuntimeError> {
    let mut regs: Vec<QReg> = layout
        .registers()
        .map(|(name, _, size)| QReg::new(name, size))
        .collect::<Result<_, _>>()?;
    if regs.is_empty() {
        return Err(IrError::EmptyRegister.into());
    }
    regs.iter_mut().for_each(|r| r.results = Default::default());
    Ok(regs)
}

/// Per-register bitstring; unmeasured qubits read as '0'.
fn key(bits: &[Option<bool>], offset: usize, size: usize) -> String {
    bits[offset..offset + size]
        .iter()
        .map(|b| if b.unwrap_or(false) { '1' } else { '0' })
        .collect()
}

fn record_counts(regs: &mut [QReg], layout: &RegisterLayout, bits: &[Option<bool>]) {
    for (reg, (_, off, size)) in regs.iter_mut().zip(layout.registers()) {
        *reg.results.counts.entry(key(bits, off, size)).or_insert(0) += 1;
    }
}

fn record_probability(regs: &mut [QReg], layout: &RegisterLayout, bits: &[Option<bool>], p: f64) {
    for (reg, (_, off, size)) in regs.iter_mut().zip(layout.registers()) {
        *reg.results.probabilities.entry(key(bits, off, size)).or_insert(0.0) += p;
    }
}

/// True when no gate touches a qubit after it has been measured.
fn measurements_terminal(insts: &[Instruction]) -> bool {
    let mut measured = std::collections::BTreeSet::new();
    for i in insts {
        match i.gate {
            Gate::Measure => {
                measured.insert(i.targets[0]);
            }
            Gate::Reset => return false,
            _ => {
                if i.qubits().any(|q| measured.contains(&q)) {
                    return false;
                }
            }
        }
    }
    true
}

fn run_circuit(registry: &KernelRegistry, bound: &BoundCall, opts: &ExecOptions) -> Result<Execution, RuntimeError> {
    let t = trace(registry, bound)?;
    if !t.dynamic_byref.is_empty() {
        return Err(IrError::DynamicControlFlowInCircuitMode.into());
    }
    let mut insts = t.composite.flatten()?;
    if opts.optimize {
        insts = peephole_flat(insts).0;
    }
    let n = t.num_qubits();
    let mut regs = registers(&t.layout)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut final_state = None;

    if measurements_terminal(&insts) {
        let mut state = StateVector::new(n)?;
        let mut measured = vec![false; n];
        for i in &insts {
            if i.gate == Gate::Measure {
                measured[i.targets[0]] = true;
            } else {
                state.apply(i)?;
            }
        }
        let any_measured = measured.iter().any(|&m| m);
        let bits_of = |idx: usize, all: bool| -> Vec<Option<bool>> {
            (0..n)
                .map(|q| (all || measured[q]).then_some(idx >> (n - 1 - q) & 1 == 1))
                .collect()
        };
        if opts.shots == 0 {
            for (idx, p) in state.probabilities().into_iter().enumerate() {
                if p > 0.0 {
                    record_probability(&mut regs, &t.layout, &bits_of(idx, !any_measured), p);
                }
            }
        } else if any_measured {
            for idx in sample_indices(&state.probabilities(), opts.shots, &mut rng) {
                record_counts(&mut regs, &t.layout, &bits_of(idx, false));
            }
        }
        final_state = Some(state);
    } else if opts.shots == 0 {
        for leaf in enumerate(n, |sink| {
            for i in &insts {
                sink.gate(i.clone())?;
            }
            Ok(())
        })? {
            record_probability(&mut regs, &t.layout, &leaf.bits, leaf.prob);
        }
    } else {
        for _ in 0..opts.shots {
            let mut sink = ConcreteSink::new(n, &mut rng)?;
            for i in &insts {
                sink.gate(i.clone())?;
            }
            record_counts(&mut regs, &t.layout, &sink.bits);
        }
    }
    regs[0].results.byref = t.byref;
    Ok(Execution {
        registers: regs,
        layout: t.layout,
        log: t.log,
        final_state,
        instruction_count: insts.len(),
    })
}

struct Leaf<T> {
    prob: f64,
    applied: usize,
    bits: Vec<Option<bool>>,
    state: StateVector,
    log: Vec<String>,
    out: T,
}

/// Runs `body` once per measurement-outcome branch with non-zero probability.
fn enumerate<T>(
    n: usize,
    mut body: impl FnMut(&mut ConcreteSink) -> Result<T, RuntimeError>,
) -> Result<Vec<Leaf<T>>, RuntimeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut leaves = Vec::new();
    let mut stack: Vec<Vec<bool>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        let mut sink = ConcreteSink::new(n, &mut rng)?;
        let fixed = prefix.len();
        sink.forced = Some(prefix);
        let out = body(&mut sink)?;
        let outcomes: Vec<bool> = sink.path.iter().map(|b| b.outcome).collect();
        for (k, b) in sink.path.iter().enumerate().skip(fixed).rev() {
            if !b.outcome && b.other > BRANCH_EPS {
                let mut alt = outcomes[..k].to_vec();
                alt.push(true);
                stack.push(alt);
            }
        }
        leaves.push(Leaf {
            prob: sink.path.iter().map(|b| b.prob).product(),
            applied: sink.applied,
            bits: sink.bits,
            state: sink.state,
            log: sink.log,
            out,
        });
    }
    Ok(leaves)
}

fn run_ftqc(registry: &KernelRegistry, bound: &BoundCall, opts: &ExecOptions) -> Result<Execution, RuntimeError> {
    let layout = layout_for(bound);
    let n = layout.total();
    let mut regs = registers(&layout)?;
    let values = initial_values(bound, &layout);
    let mut log = Vec::new();
    let final_state;
    let byref;
    let applied;
    if opts.shots == 0 {
        let leaves = enumerate(n, |sink| Interpreter::new(registry, sink).run(&bound.kernel, values.clone()))?;
        for leaf in &leaves {
            record_probability(&mut regs, &layout, &leaf.bits, leaf.prob);
        }
        // The most likely branch stands in for the single-run results.
        let best = leaves
            .into_iter()
            .reduce(|a, b| if b.prob > a.prob + BRANCH_EPS { b } else { a })
            .expect("at least one branch");
        log = best.log;
        applied = best.applied;
        byref = collect_byref(bound, &best.out).0;
        final_state = Some(best.state);
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut last = None;
        for _ in 0..opts.shots {
            let sink = ConcreteSink::new(n, &mut rng)?;
            let mut interp = Interpreter::new(registry, sink);
            let finals = interp.run(&bound.kernel, values.clone())?;
            let sink = interp.sink;
            record_counts(&mut regs, &layout, &sink.bits);
            log.extend(sink.log);
            last = Some((finals, sink.state, sink.applied));
        }
        let (finals, state, n_applied) = last.expect("shots > 0");
        applied = n_applied;
        byref = collect_byref(bound, &finals).0;
        final_state = Some(state);
    }
    regs[0].results.byref = byref;
    Ok(Execution {
        registers: regs,
        layout,
        log,
        final_state,
        instruction_count: applied,
    })
}
