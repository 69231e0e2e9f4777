//! OpenQASM 2.0 export against the standard `qelib1.inc` gate set.

use std::fmt::Write as _;

use super::execute::trace;
use super::RuntimeError;
use crate::compiler::{BoundCall, KernelRegistry};
use crate::ir::{Gate, Instruction};
use crate::synthesis::{controlled_unitary, kak_circuit};

/// Traces the kernel and writes one statement per gate. All registers are
/// merged into a single `q`/`c` pair in layout order.
pub fn to_openqasm(registry: &KernelRegistry, bound: &BoundCall) -> Result<String, RuntimeError> {
    let t = trace(registry, bound)?;
    let insts = t.composite.flatten()?;
    let n = t.num_qubits();
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{n}];");
    let _ = writeln!(out, "creg c[{n}];");
    for i in &insts {
        emit(i, &mut out)?;
    }
    Ok(out)
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn emit(inst: &Instruction, out: &mut String) -> Result<(), RuntimeError> {
    let unsupported = || RuntimeError::UnsupportedGateForExport(inst.to_string());
    let (gate, params) = if inst.is_adjoint {
        inst.gate.inverse(&inst.params).ok_or_else(unsupported)?
    } else {
        (inst.gate, inst.params.clone())
    };
    // Two-target controlled gates become single-target gates with one more control.
    let mut controls = inst.controls.clone();
    let (gate, targets) = match gate {
        Gate::CX | Gate::CY | Gate::CZ | Gate::CRz | Gate::CPhase => {
            controls.push(inst.targets[0]);
            let base = match gate {
                Gate::CX => Gate::X,
                Gate::CY => Gate::Y,
                Gate::CZ => Gate::Z,
                Gate::CRz => Gate::Rz,
                _ => Gate::CPhase,
            };
            (base, vec![inst.targets[1]])
        }
        g => (g, inst.targets.clone()),
    };
    let q = |i: usize| format!("q[{i}]");
    let t = targets[0];
    let mut line = |s: String| {
        out.push_str(&s);
        out.push_str(";\n");
    };
    match (gate, controls.as_slice()) {
        (Gate::Measure, []) => line(format!("measure {} -> c[{t}]", q(t))),
        (Gate::Reset, []) => line(format!("reset {}", q(t))),
        (Gate::Swap, []) => {
            let (a, b) = (targets[0], targets[1]);
            for (x, y) in [(a, b), (b, a), (a, b)] {
                line(format!("cx {},{}", q(x), q(y)));
            }
        }
        (Gate::FSim, []) => {
            let m = Gate::FSim.matrix(&params).expect("fSim is unitary");
            for i in kak_circuit(&m, targets[0], targets[1]) {
                emit(&i, out)?;
            }
        }
        (Gate::Swap | Gate::FSim, _) => return Err(unsupported()),
        // `CPhase` here stands for the single-qubit phase diag(1, e^{iθ}).
        (Gate::CPhase, []) => line(format!("u1({}) {}", num(params[0]), q(t))),
        (Gate::CPhase, [c]) => line(format!("cu1({}) {},{}", num(params[0]), q(*c), q(t))),
        (g, []) => {
            let name = g.name().to_ascii_lowercase();
            match params.as_slice() {
                [] => line(format!("{name} {}", q(t))),
                [p] => line(format!("{name}({}) {}", num(*p), q(t))),
                _ => return Err(unsupported()),
            }
        }
        (Gate::X, [c]) => line(format!("cx {},{}", q(*c), q(t))),
        (Gate::Y, [c]) => line(format!("cy {},{}", q(*c), q(t))),
        (Gate::Z, [c]) => line(format!("cz {},{}", q(*c), q(t))),
        (Gate::H, [c]) => line(format!("ch {},{}", q(*c), q(t))),
        (Gate::Rz, [c]) => line(format!("crz({}) {},{}", num(params[0]), q(*c), q(t))),
        (Gate::Ry, [c]) => line(format!("cu3({},0,0) {},{}", num(params[0]), q(*c), q(t))),
        (Gate::X, [a, b]) => line(format!("ccx {},{},{}", q(*a), q(*b), q(t))),
        (Gate::Z, [a, b]) => {
            line(format!("h {}", q(t)));
            line(format!("ccx {},{},{}", q(*a), q(*b), q(t)));
            line(format!("h {}", q(t)));
        }
        (g, cs) => {
            let base = if g == Gate::CPhase {
                let mut m = crate::linalg::Matrix::identity(2, 2);
                m[(1, 1)] = crate::linalg::C64::from_polar(1.0, params[0]);
                m
            } else {
                g.matrix(&params).ok_or_else(unsupported)?
            };
            for i in controlled_unitary(&base, cs, t) {
                emit(&i, out)?;
            }
        }
    }
    Ok(())
}
