use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::classical::CExpr;
use super::instruction::{apply_matrix, Instruction};
use super::layout::RegisterLayout;
use super::IrError;
use crate::linalg::{Matrix, C64, ONE, ZERO};

/// Marks the role a sub-circuit plays in a compute/action/uncompute pattern.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    #[default]
    Plain,
    Compute,
    Action,
    Uncompute,
}

impl RegionTag {
    pub fn label(self) -> Option<&'static str> {
        match self {
            RegionTag::Plain => None,
            RegionTag::Compute => Some("compute"),
            RegionTag::Action => Some("action"),
            RegionTag::Uncompute => Some("uncompute"),
        }
    }
}

/// Classical nodes that remain in a circuit when control flow depends on
/// measurement results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClassicalNode {
    If {
        cond: CExpr,
        then_branch: Vec<Node>,
        else_branch: Vec<Node>,
    },
    Repeat {
        count: u64,
        body: Vec<Node>,
    },
    Assign {
        slot: String,
        value: CExpr,
    },
    Print {
        args: Vec<CExpr>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Gate(Instruction),
    Composite(CompositeInstruction),
    Classical(ClassicalNode),
}

/// A named tree of instructions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompositeInstruction {
    pub name: String,
    pub region: RegionTag,
    pub children: Vec<Node>,
}

impl CompositeInstruction {
    pub fn new(name: impl Into<String>) -> Self {
        CompositeInstruction {
            name: name.into(),
            region: RegionTag::Plain,
            children: Vec::new(),
        }
    }

    pub fn from_instructions(name: impl Into<String>, insts: Vec<Instruction>) -> Self {
        let mut c = Self::new(name);
        c.children = insts.into_iter().map(Node::Gate).collect();
        c
    }

    pub fn tagged(mut self, region: RegionTag) -> Self {
        self.region = region;
        self
    }

    pub fn push(&mut self, inst: Instruction) {
        self.children.push(Node::Gate(inst));
    }

    pub fn push_node(&mut self, node: Node) {
        self.children.push(node);
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    /// Depth-first list of gates. Fails on classical branches, which can only
    /// be resolved at run time.
    pub fn flatten(&self) -> Result<Vec<Instruction>, IrError> {
        let mut out = Vec::new();
        flatten_nodes(&self.children, &mut out)?;
        Ok(out)
    }

    /// Number of gate leaves; repeated bodies are counted once per repetition
    /// and both arms of a branch are counted.
    pub fn instruction_count(&self) -> usize {
        count_nodes(&self.children)
    }

    /// True when no node depends on a run-time classical value.
    pub fn is_static(&self) -> bool {
        !any_node(&self.children, &|n| {
            matches!(n, Node::Classical(ClassicalNode::If { .. }))
        })
    }

    pub fn has_classical(&self) -> bool {
        any_node(&self.children, &|n| matches!(n, Node::Classical(_)))
    }

    pub fn has_non_unitary(&self) -> bool {
        any_node(&self.children, &|n| {
            matches!(n, Node::Gate(i) if !i.gate.is_unitary())
        })
    }

    pub fn qubits(&self) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        visit_instructions(&self.children, &mut |i| set.extend(i.qubits()));
        set
    }

    /// One more than the largest qubit index touched.
    pub fn num_qubits(&self) -> usize {
        self.qubits().last().map_or(0, |q| q + 1)
    }

    /// Calls `f` on every gate leaf, in order.
    pub fn for_each_instruction(&self, f: &mut dyn FnMut(&Instruction)) {
        visit_instructions(&self.children, f);
    }

    pub fn map_instructions(&mut self, f: &mut dyn FnMut(&mut Instruction)) {
        map_nodes(&mut self.children, f);
    }

    /// Unitary of the circuit on `n` qubits.
    pub fn to_unitary(&self, n: usize) -> Result<Matrix, IrError> {
        circuit_unitary(&self.flatten()?, n)
    }

    /// Indented text listing of the tree.
    pub fn dump(&self, layout: &RegisterLayout) -> String {
        let mut s = String::new();
        dump_nodes(&self.children, layout, 0, &mut s);
        s
    }
}

fn flatten_nodes(nodes: &[Node], out: &mut Vec<Instruction>) -> Result<(), IrError> {
    for n in nodes {
        match n {
            Node::Gate(i) => out.push(i.clone()),
            Node::Composite(c) => flatten_nodes(&c.children, out)?,
            Node::Classical(ClassicalNode::Repeat { count, body }) => {
                for _ in 0..*count {
                    flatten_nodes(body, out)?;
                }
            }
            Node::Classical(ClassicalNode::If { .. }) => {
                return Err(IrError::DynamicControlFlowInCircuitMode)
            }
            Node::Classical(_) => {}
        }
    }
    Ok(())
}

fn count_nodes(nodes: &[Node]) -> usize {
    nodes
        .iter()
        .map(|n| match n {
            Node::Gate(_) => 1,
            Node::Composite(c) => count_nodes(&c.children),
            Node::Classical(ClassicalNode::Repeat { count, body }) => *count as usize * count_nodes(body),
            Node::Classical(ClassicalNode::If {
                then_branch,
                else_branch,
                ..
            }) => count_nodes(then_branch) + count_nodes(else_branch),
            Node::Classical(_) => 0,
        })
        .sum()
}

fn any_node(nodes: &[Node], pred: &dyn Fn(&Node) -> bool) -> bool {
    nodes.iter().any(|n| {
        pred(n)
            || match n {
                Node::Composite(c) => any_node(&c.children, pred),
                Node::Classical(ClassicalNode::Repeat { body, .. }) => any_node(body, pred),
                Node::Classical(ClassicalNode::If {
                    then_branch,
                    else_branch,
                    ..
                }) => any_node(then_branch, pred) || any_node(else_branch, pred),
                _ => false,
            }
    })
}

fn visit_instructions(nodes: &[Node], f: &mut dyn FnMut(&Instruction)) {
    for n in nodes {
        match n {
            Node::Gate(i) => f(i),
            Node::Composite(c) => visit_instructions(&c.children, f),
            Node::Classical(ClassicalNode::Repeat { body, .. }) => visit_instructions(body, f),
            Node::Classical(ClassicalNode::If {
                then_branch,
                else_branch,
                ..
            }) => {
                visit_instructions(then_branch, f);
                visit_instructions(else_branch, f);
            }
            Node::Classical(_) => {}
        }
    }
}

fn map_nodes(nodes: &mut [Node], f: &mut dyn FnMut(&mut Instruction)) {
    for n in nodes {
        match n {
            Node::Gate(i) => f(i),
            Node::Composite(c) => map_nodes(&mut c.children, f),
            Node::Classical(ClassicalNode::Repeat { body, .. }) => map_nodes(body, f),
            Node::Classical(ClassicalNode::If {
                then_branch,
                else_branch,
                ..
            }) => {
                map_nodes(then_branch, f);
                map_nodes(else_branch, f);
            }
            Node::Classical(_) => {}
        }
    }
}

fn dump_nodes(nodes: &[Node], layout: &RegisterLayout, depth: usize, s: &mut String) {
    let pad = "  ".repeat(depth);
    for n in nodes {
        match n {
            Node::Gate(i) => {
                let _ = writeln!(s, "{pad}{}", i.fmt_with(layout));
            }
            Node::Composite(c) => {
                match c.region.label() {
                    Some(l) => {
                        let _ = writeln!(s, "{pad}{l} {} {{", c.name);
                    }
                    None => {
                        let _ = writeln!(s, "{pad}{} {{", c.name);
                    }
                }
                dump_nodes(&c.children, layout, depth + 1, s);
                let _ = writeln!(s, "{pad}}}");
            }
            Node::Classical(ClassicalNode::Repeat { count, body }) => {
                let _ = writeln!(s, "{pad}repeat {count} {{");
                dump_nodes(body, layout, depth + 1, s);
                let _ = writeln!(s, "{pad}}}");
            }
            Node::Classical(ClassicalNode::If {
                cond,
                then_branch,
                else_branch,
            }) => {
                let _ = writeln!(s, "{pad}if {cond} {{");
                dump_nodes(then_branch, layout, depth + 1, s);
                if !else_branch.is_empty() {
                    let _ = writeln!(s, "{pad}}} else {{");
                    dump_nodes(else_branch, layout, depth + 1, s);
                }
                let _ = writeln!(s, "{pad}}}");
            }
            Node::Classical(ClassicalNode::Assign { slot, value }) => {
                let _ = writeln!(s, "{pad}{slot} = {value}");
            }
            Node::Classical(ClassicalNode::Print { args }) => {
                let a: Vec<String> = args.iter().map(|e| e.to_string()).collect();
                let _ = writeln!(s, "{pad}print({})", a.join(", "));
            }
        }
    }
}

/// Unitary of a gate list on `n` qubits, built column by column.
pub fn circuit_unitary(insts: &[Instruction], n: usize) -> Result<Matrix, IrError> {
    let mats = insts
        .iter()
        .map(|i| {
            if let Some(q) = i.qubits().find(|&q| q >= n) {
                return Err(IrError::QubitOutOfRange { qubit: q, size: n });
            }
            i.matrix()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let dim = 1usize << n;
    let mut u = Matrix::zeros(dim, dim);
    let mut col = vec![ZERO; dim];
    for j in 0..dim {
        col.iter_mut().for_each(|a| *a = ZERO);
        col[j] = ONE;
        for (inst, m) in insts.iter().zip(&mats) {
            apply_matrix(&mut col, n, &inst.controls, &inst.targets, m);
        }
        for (r, a) in col.iter().enumerate() {
            u[(r, j)] = *a as C64;
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::classical::{CExpr, Scalar};
    use crate::ir::gate::Gate;
    use crate::linalg::{max_abs_diff, unitarity_error};

    fn bell() -> CompositeInstruction {
        CompositeInstruction::from_instructions(
            "bell",
            vec![Instruction::one(Gate::H, 0), Instruction::cx(0, 1)],
        )
    }

    #[test]
    fn flatten_walks_nested_trees() {
        let mut root = CompositeInstruction::new("root");
        root.push_node(Node::Composite(bell().tagged(RegionTag::Compute)));
        root.push_node(Node::Classical(ClassicalNode::Repeat {
            count: 3,
            body: vec![Node::Gate(Instruction::one(Gate::X, 2))],
        }));
        let flat = root.flatten().unwrap();
        assert_eq!(flat.len(), 5);
        assert_eq!(root.instruction_count(), 5);
        assert_eq!(root.num_qubits(), 3);
        assert!(root.is_static());
    }

    #[test]
    fn branches_block_flattening() {
        let mut root = bell();
        root.push_node(Node::Classical(ClassicalNode::If {
            cond: CExpr::Const(Scalar::Bool(true)),
            then_branch: vec![Node::Gate(Instruction::one(Gate::X, 0))],
            else_branch: vec![],
        }));
        assert!(!root.is_static());
        assert!(matches!(root.flatten(), Err(IrError::DynamicControlFlowInCircuitMode)));
        assert_eq!(root.instruction_count(), 3);
    }

    #[test]
    fn bell_unitary() {
        let u = bell().to_unitary(2).unwrap();
        assert!(unitarity_error(&u) < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // column |00> -> (|00> + |11>)/sqrt2
        assert!((u[(0, 0)].re - h).abs() < 1e-15);
        assert!((u[(3, 0)].re - h).abs() < 1e-15);
        let swap_order = CompositeInstruction::from_instructions(
            "x",
            vec![Instruction::two(Gate::Swap, 0, 1)],
        );
        let s = swap_order.to_unitary(2).unwrap();
        assert!(max_abs_diff(&s, &Gate::Swap.matrix(&[]).unwrap()) < 1e-15);
    }

    #[test]
    fn measurement_has_no_unitary() {
        let mut c = bell();
        c.push(Instruction::measure(0));
        assert!(c.has_non_unitary());
        assert!(c.to_unitary(2).is_err());
    }

    #[test]
    fn dump_shows_regions() {
        let mut root = CompositeInstruction::new("k");
        root.push_node(Node::Composite(bell().tagged(RegionTag::Action)));
        let text = root.dump(&RegisterLayout::default());
        assert_eq!(text, "action bell {\n  H q[0]\n  CX q[0], q[1]\n}\n");
    }
}
