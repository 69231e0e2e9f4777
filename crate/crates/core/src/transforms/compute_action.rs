use super::{adjoint, TransformError};
use crate::ir::{CompositeInstruction, Node, RegionTag};

/// Builds `U; V; U†` with the three regions tagged so that [`super::controlled`]
/// only needs to control `V`.
pub fn compute_action(
    name: &str,
    compute: CompositeInstruction,
    action: CompositeInstruction,
) -> Result<CompositeInstruction, TransformError> {
    if compute.has_non_unitary() {
        return Err(TransformError::MeasureInComputeBlock);
    }
    let uncompute = adjoint(&compute)?.tagged(RegionTag::Uncompute);
    let mut out = CompositeInstruction::new(name);
    out.push_node(Node::Composite(compute.tagged(RegionTag::Compute)));
    out.push_node(Node::Composite(action.tagged(RegionTag::Action)));
    out.push_node(Node::Composite(uncompute));
    Ok(out)
}

/// True when `nodes[i..i + 3]` is a compute/action/uncompute triple.
pub(crate) fn is_triple(nodes: &[Node], i: usize) -> bool {
    let tag = |k: usize| match nodes.get(k) {
        Some(Node::Composite(c)) => Some(c.region),
        _ => None,
    };
    tag(i) == Some(RegionTag::Compute) && tag(i + 1) == Some(RegionTag::Action) && tag(i + 2) == Some(RegionTag::Uncompute)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Gate, Instruction};
    use crate::linalg::{max_abs_diff, Matrix};

    #[test]
    fn builds_conjugation() {
        let u = CompositeInstruction::from_instructions("u", vec![Instruction::one(Gate::H, 0), Instruction::cx(0, 1)]);
        let v = CompositeInstruction::from_instructions("v", vec![Instruction::rot(Gate::Rz, 1, 0.4)]);
        let ca = compute_action("k", u.clone(), v.clone()).unwrap();
        assert!(is_triple(&ca.children, 0));
        assert_eq!(ca.instruction_count(), 5);
        let um = u.to_unitary(2).unwrap();
        let expected: Matrix = um.adjoint() * v.to_unitary(2).unwrap() * &um;
        assert!(max_abs_diff(&ca.to_unitary(2).unwrap(), &expected) < 1e-12);
    }

    #[test]
    fn measure_in_compute_rejected() {
        let u = CompositeInstruction::from_instructions("u", vec![Instruction::measure(0)]);
        let r = compute_action("k", u, CompositeInstruction::new("v"));
        assert_eq!(r, Err(TransformError::MeasureInComputeBlock));
    }
}
