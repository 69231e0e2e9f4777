//! Local gate cancellation and rotation merging.
//!
//! Two gates are adjacent when no gate between them touches any of their
//! qubits. Measure and Reset never merge, so they act as barriers.

use std::f64::consts::PI;

use crate::ir::{CompositeInstruction, Gate, Instruction, Node};

/// Merged rotation angles within this of a multiple of 4π are dropped.
const ZERO_ANGLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PeepholeStats {
    pub cancelled: usize,
    pub merged: usize,
}

enum Fold {
    Cancel,
    Merge(Vec<f64>),
    Keep,
}

fn is_zero_angle(t: f64) -> bool {
    let r = t.rem_euclid(4.0 * PI);
    r < ZERO_ANGLE_TOL || 4.0 * PI - r < ZERO_ANGLE_TOL
}

fn inverse_pair(a: Gate, b: Gate) -> bool {
    matches!(
        (a, b),
        (Gate::S, Gate::Sdg) | (Gate::Sdg, Gate::S) | (Gate::T, Gate::Tdg) | (Gate::Tdg, Gate::T)
    )
}

fn fold(prev: &Instruction, next: &Instruction) -> Fold {
    if prev.targets != next.targets || prev.controls != next.controls || !prev.gate.is_unitary() {
        return Fold::Keep;
    }
    if prev.is_adjoint != next.is_adjoint {
        return if prev.gate == next.gate && prev.params == next.params {
            Fold::Cancel
        } else {
            Fold::Keep
        };
    }
    if prev.gate == next.gate && prev.gate.is_self_inverse() {
        return Fold::Cancel;
    }
    if inverse_pair(prev.gate, next.gate) {
        return Fold::Cancel;
    }
    if prev.gate == next.gate && prev.gate.is_rotation() {
        return Fold::Merge(prev.params.iter().zip(&next.params).map(|(a, b)| a + b).collect());
    }
    Fold::Keep
}

fn is_identity_rotation(i: &Instruction) -> bool {
    i.gate.is_rotation() && i.params.iter().all(|&t| is_zero_angle(t))
}

/// Optimises a flat gate list.
pub fn peephole_flat(insts: Vec<Instruction>) -> (Vec<Instruction>, PeepholeStats) {
    let mut stats = PeepholeStats::default();
    let mut out: Vec<Instruction> = Vec::with_capacity(insts.len());
    for inst in insts {
        if is_identity_rotation(&inst) {
            stats.merged += 1;
            continue;
        }
        let touches = |o: &Instruction| o.qubits().any(|q| inst.qubits().any(|p| p == q));
        let Some(k) = out.iter().rposition(touches) else {
            out.push(inst);
            continue;
        };
        match fold(&out[k], &inst) {
            Fold::Cancel => {
                out.remove(k);
                stats.cancelled += 2;
            }
            Fold::Merge(params) => {
                stats.merged += 1;
                if params.iter().all(|&t| is_zero_angle(t)) {
                    out.remove(k);
                } else {
                    out[k].params = params;
                }
            }
            Fold::Keep => out.push(inst),
        }
    }
    (out, stats)
}

/// Structure-preserving variant: optimises each gate run inside the tree.
/// Composite children are barriers. Trees with classical nodes are returned
/// unchanged since their gates may not execute.
pub fn peephole(c: &CompositeInstruction) -> (CompositeInstruction, PeepholeStats) {
    let mut stats = PeepholeStats::default();
    if c.has_classical() {
        return (c.clone(), stats);
    }
    let out = rewrite(c, &mut stats);
    (out, stats)
}

fn rewrite(c: &CompositeInstruction, stats: &mut PeepholeStats) -> CompositeInstruction {
    let mut out = CompositeInstruction::new(c.name.clone()).tagged(c.region);
    let mut run: Vec<Instruction> = Vec::new();
    let flush = |run: &mut Vec<Instruction>, out: &mut CompositeInstruction, stats: &mut PeepholeStats| {
        let (opt, s) = peephole_flat(std::mem::take(run));
        stats.cancelled += s.cancelled;
        stats.merged += s.merged;
        out.children.extend(opt.into_iter().map(Node::Gate));
    };
    for n in &c.children {
        match n {
            Node::Gate(i) => run.push(i.clone()),
            Node::Composite(sub) => {
                flush(&mut run, &mut out, stats);
                out.push_node(Node::Composite(rewrite(sub, stats)));
            }
            Node::Classical(_) => unreachable!("classical trees are skipped"),
        }
    }
    flush(&mut run, &mut out, stats);
    out
}
