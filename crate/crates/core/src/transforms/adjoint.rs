use super::TransformError;
use crate::ir::{CompositeInstruction, Instruction, Node, RegionTag};

/// Reverses the circuit and inverts every gate. Compute and uncompute regions
/// swap roles so the compute/action shape survives.
pub fn adjoint(c: &CompositeInstruction) -> Result<CompositeInstruction, TransformError> {
    let mut out = CompositeInstruction::new(c.name.clone()).tagged(flip_region(c.region));
    out.children = adjoint_nodes(&c.children)?;
    Ok(out)
}

fn flip_region(r: RegionTag) -> RegionTag {
    match r {
        RegionTag::Compute => RegionTag::Uncompute,
        RegionTag::Uncompute => RegionTag::Compute,
        other => other,
    }
}

fn adjoint_nodes(nodes: &[Node]) -> Result<Vec<Node>, TransformError> {
    nodes
        .iter()
        .rev()
        .map(|n| {
            Ok(match n {
                Node::Gate(i) => Node::Gate(invert(i)?),
                Node::Composite(c) => Node::Composite(adjoint(c)?),
                Node::Classical(k) => {
                    return Err(TransformError::NonUnitarySubcircuit {
                        modifier: "adjoint",
                        op: classical_name(k).into(),
                    })
                }
            })
        })
        .collect()
}

pub(crate) fn classical_name(k: &crate::ir::ClassicalNode) -> &'static str {
    use crate::ir::ClassicalNode::*;
    match k {
        If { .. } => "if",
        Repeat { .. } => "repeat",
        Assign { .. } => "assignment",
        Print { .. } => "print",
    }
}

/// Inverse of a single instruction, keeping its controls.
pub fn invert(i: &Instruction) -> Result<Instruction, TransformError> {
    let (gate, params) = i.gate.inverse(&i.params).ok_or_else(|| TransformError::NonUnitarySubcircuit {
        modifier: "adjoint",
        op: i.gate.name().into(),
    })?;
    Ok(Instruction {
        gate,
        params,
        ..i.clone()
    })
}
