use super::adjoint::classical_name;
use super::compute_action::is_triple;
use super::TransformError;
use crate::ir::{CompositeInstruction, Instruction, Node};

/// Adds `ctrl` as controls to every gate. For a compute/action/uncompute
/// triple only the action is controlled, since `U (C-V) U†` equals
/// `C-(U V U†)`.
pub fn controlled(c: &CompositeInstruction, ctrl: &[usize]) -> Result<CompositeInstruction, TransformError> {
    let mut out = CompositeInstruction::new(c.name.clone()).tagged(c.region);
    out.children = control_nodes(&c.children, ctrl)?;
    Ok(out)
}

fn control_nodes(nodes: &[Node], ctrl: &[usize]) -> Result<Vec<Node>, TransformError> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut i = 0;
    while i < nodes.len() {
        if is_triple(nodes, i) {
            let (Node::Composite(u), Node::Composite(v), Node::Composite(ud)) = (&nodes[i], &nodes[i + 1], &nodes[i + 2]) else {
                unreachable!("checked by is_triple");
            };
            check_disjoint(u, ctrl)?;
            check_disjoint(ud, ctrl)?;
            out.push(Node::Composite(u.clone()));
            out.push(Node::Composite(controlled(v, ctrl)?));
            out.push(Node::Composite(ud.clone()));
            i += 3;
            continue;
        }
        out.push(match &nodes[i] {
            Node::Gate(g) => Node::Gate(control_gate(g, ctrl)?),
            Node::Composite(c) => Node::Composite(controlled(c, ctrl)?),
            Node::Classical(k) => {
                return Err(TransformError::NonUnitarySubcircuit {
                    modifier: "ctrl",
                    op: classical_name(k).into(),
                })
            }
        });
        i += 1;
    }
    Ok(out)
}

/// The uncontrolled conjugation still must not touch a control qubit.
fn check_disjoint(c: &CompositeInstruction, ctrl: &[usize]) -> Result<(), TransformError> {
    let used = c.qubits();
    match ctrl.iter().find(|q| used.contains(q)) {
        Some(&q) => Err(TransformError::ControlOverlap(q)),
        None => Ok(()),
    }
}

fn control_gate(g: &Instruction, ctrl: &[usize]) -> Result<Instruction, TransformError> {
    if !g.gate.is_unitary() {
        return Err(TransformError::NonUnitarySubcircuit {
            modifier: "ctrl",
            op: g.gate.name().into(),
        });
    }
    if let Some(&q) = ctrl.iter().find(|q| g.qubits().any(|x| x == **q)) {
        return Err(TransformError::ControlOverlap(q));
    }
    let mut controls = ctrl.to_vec();
    controls.extend(&g.controls);
    Ok(g.clone().with_controls(controls)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{controlled_block, Gate};
    use crate::linalg::max_abs_diff;
    use crate::transforms::compute_action;

    #[test]
    fn naive_control_matches_block() {
        let c = CompositeInstruction::from_instructions(
            "k",
            vec![Instruction::one(Gate::H, 1), Instruction::cx(1, 2), Instruction::rot(Gate::Rz, 2, 0.7)],
        );
        let body = c.to_unitary(3).unwrap();
        // body acts on qubits 1,2 with qubit 0 idle; its lower-right 4x4 block
        let small = body.view((0, 0), (4, 4)).into_owned();
        let cc = controlled(&c, &[0]).unwrap();
        let got = cc.to_unitary(3).unwrap();
        assert!(max_abs_diff(&got, &controlled_block(&small)) < 1e-12);
    }

    #[test]
    fn compute_action_controls_only_action() {
        let u = CompositeInstruction::from_instructions("u", vec![Instruction::one(Gate::H, 1), Instruction::cx(1, 2)]);
        let v = CompositeInstruction::from_instructions("v", vec![Instruction::rot(Gate::Rz, 2, 0.4)]);
        let ca = compute_action("k", u, v).unwrap();
        let cc = controlled(&ca, &[0]).unwrap();
        let mut n_ctrl = 0;
        cc.for_each_instruction(&mut |i| n_ctrl += usize::from(!i.controls.is_empty()));
        assert_eq!(n_ctrl, 1);
        let small = ca.to_unitary(3).unwrap().view((0, 0), (4, 4)).into_owned();
        let got = cc.to_unitary(3).unwrap();
        assert!(max_abs_diff(&got, &controlled_block(&small)) < 1e-12);
    }

    #[test]
    fn overlap_and_measure_rejected() {
        let c = CompositeInstruction::from_instructions("k", vec![Instruction::one(Gate::H, 0)]);
        assert_eq!(controlled(&c, &[0]), Err(TransformError::ControlOverlap(0)));
        let c = CompositeInstruction::from_instructions("k", vec![Instruction::measure(1)]);
        assert!(matches!(controlled(&c, &[0]), Err(TransformError::NonUnitarySubcircuit { .. })));
    }
}
