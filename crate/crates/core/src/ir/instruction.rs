use std::fmt;

use serde::{Deserialize, Serialize};

use super::gate::Gate;
use super::layout::RegisterLayout;
use super::IrError;
use crate::linalg::Matrix;

/// One gate application.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub gate: Gate,
    pub targets: Vec<usize>,
    pub params: Vec<f64>,
    pub controls: Vec<usize>,
    pub is_adjoint: bool,
    /// Name of the classical slot a measurement writes to.
    pub classical_target: Option<String>,
}

impl Instruction {
    /// Checked constructor.
    pub fn new(gate: Gate, targets: Vec<usize>, params: Vec<f64>) -> Result<Self, IrError> {
        let inst = Instruction {
            gate,
            targets,
            params,
            controls: Vec::new(),
            is_adjoint: false,
            classical_target: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_controls(mut self, controls: Vec<usize>) -> Result<Self, IrError> {
        self.controls = controls;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), IrError> {
        if self.targets.len() != self.gate.num_targets() {
            return Err(IrError::Arity {
                gate: self.gate.name().into(),
                expected: self.gate.num_targets(),
                found: self.targets.len(),
            });
        }
        if self.params.len() != self.gate.num_params() {
            return Err(IrError::ParamCount {
                gate: self.gate.name().into(),
                expected: self.gate.num_params(),
                found: self.params.len(),
            });
        }
        if !self.gate.is_unitary() && !self.controls.is_empty() {
            return Err(IrError::NonUnitaryGate(self.gate.name().into()));
        }
        let mut seen: Vec<usize> = self.qubits().collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(IrError::DuplicateQubit(self.to_string()));
        }
        Ok(())
    }

    // Infallible helpers for code that builds known-good circuits.

    pub fn one(gate: Gate, q: usize) -> Self {
        Self::new(gate, vec![q], vec![]).expect("single-qubit gate")
    }
    pub fn rot(gate: Gate, q: usize, theta: f64) -> Self {
        Self::new(gate, vec![q], vec![theta]).expect("rotation gate")
    }
    pub fn two(gate: Gate, a: usize, b: usize) -> Self {
        Self::new(gate, vec![a, b], vec![]).expect("two-qubit gate")
    }
    pub fn cx(c: usize, t: usize) -> Self {
        Self::two(Gate::CX, c, t)
    }
    pub fn measure(q: usize) -> Self {
        Self::one(Gate::Measure, q)
    }

    /// Controls first, then targets.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().chain(self.targets.iter()).copied()
    }

    /// Matrix on `controls ++ targets`, controls as most significant bits.
    pub fn matrix(&self) -> Result<Matrix, IrError> {
        let base = self
            .gate
            .matrix(&self.params)
            .ok_or_else(|| IrError::NonUnitaryGate(self.gate.name().into()))?;
        let base = if self.is_adjoint { base.adjoint() } else { base };
        let k = base.nrows();
        let dim = k << self.controls.len();
        let mut m = Matrix::identity(dim, dim);
        m.view_mut((dim - k, dim - k), (k, k)).copy_from(&base);
        Ok(m)
    }

    pub fn fmt_with(&self, layout: &RegisterLayout) -> String {
        let mut s = String::from(self.gate.name());
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|p| format!("{p}")).collect();
            s.push_str(&format!("({})", ps.join(", ")));
        }
        if self.is_adjoint {
            s.push_str("^dg");
        }
        let ts: Vec<String> = self.targets.iter().map(|&q| layout.name(q)).collect();
        s.push(' ');
        s.push_str(&ts.join(", "));
        if !self.controls.is_empty() {
            let cs: Vec<String> = self.controls.iter().map(|&q| layout.name(q)).collect();
            s.push_str(&format!(" ctrl[{}]", cs.join(", ")));
        }
        if let Some(c) = &self.classical_target {
            s.push_str(&format!(" -> {c}"));
        }
        s
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(&RegisterLayout::default()))
    }
}

/// Applies `m` (on `controls ++ targets`, controls MSB) to a state vector of
/// `n` qubits where qubit 0 is the most significant bit.
pub fn apply_matrix(amps: &mut [crate::linalg::C64], n: usize, controls: &[usize], targets: &[usize], m: &Matrix) {
    debug_assert_eq!(amps.len(), 1 << n);
    let k = targets.len();
    let dim = 1usize << k;
    // The block acting when every control is 1 is the lower-right corner.
    let off = m.nrows() - dim;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let tmask: usize = targets.iter().map(|&q| bit(q)).sum();
    let cmask: usize = controls.iter().map(|&q| bit(q)).sum();
    let offsets: Vec<usize> = (0..dim)
        .map(|s| {
            (0..k)
                .filter(|j| s & (1 << (k - 1 - j)) != 0)
                .map(|j| bit(targets[j]))
                .sum()
        })
        .collect();
    let mut buf = vec![crate::linalg::ZERO; dim];
    for base in 0..amps.len() {
        if base & tmask != 0 || base & cmask != cmask {
            continue;
        }
        for (s, o) in offsets.iter().enumerate() {
            buf[s] = amps[base | o];
        }
        for (r, o) in offsets.iter().enumerate() {
            let mut acc = crate::linalg::ZERO;
            for (s, v) in buf.iter().enumerate() {
                acc += m[(off + r, off + s)] * v;
            }
            amps[base | o] = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff};

    #[test]
    fn arity_is_checked() {
        assert!(Instruction::new(Gate::CX, vec![0], vec![]).is_err());
        assert!(Instruction::new(Gate::Rz, vec![0], vec![]).is_err());
        assert!(Instruction::new(Gate::CX, vec![1, 1], vec![]).is_err());
        let m = Instruction::measure(0);
        assert!(m.with_controls(vec![1]).is_err());
    }

    #[test]
    fn single_control_x_matches_cx() {
        let cx = Instruction::cx(0, 1).matrix().unwrap();
        let cx2 = Instruction::one(Gate::X, 1).with_controls(vec![0]).unwrap().matrix().unwrap();
        assert_eq!(cx, cx2);
    }

    #[test]
    fn apply_matrix_respects_msb_order() {
        // X on qubit 1 of |00> gives |01>, index 1.
        let mut amps = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let x = Gate::X.matrix(&[]).unwrap();
        apply_matrix(&mut amps, 2, &[], &[1], &x);
        assert_eq!(amps[1], c(1.0, 0.0));
        // CX with control 1, target 0 then maps |01> to |11>.
        let cx = Instruction::cx(1, 0);
        apply_matrix(&mut amps, 2, &[], &cx.targets, &cx.matrix().unwrap());
        assert_eq!(amps[3], c(1.0, 0.0));
    }

    #[test]
    fn controlled_apply_matches_full_matrix() {
        let inst = Instruction::rot(Gate::Ry, 2, 0.7).with_controls(vec![0]).unwrap();
        let m = inst.matrix().unwrap();
        // Build the 3-qubit unitary by applying to basis vectors; ordering is
        // (q0, q1, q2) so q1 is an idle middle qubit.
        let mut full = Matrix::zeros(8, 8);
        for col in 0..8 {
            let mut amps = vec![c(0.0, 0.0); 8];
            amps[col] = c(1.0, 0.0);
            apply_matrix(&mut amps, 3, &[0], &[2], &m);
            for r in 0..8 {
                full[(r, col)] = amps[r];
            }
        }
        // q1 idle: reference acts as CRy on (q0, q2) and identity on q1.
        let mut reference = Matrix::zeros(8, 8);
        for i in 0..8usize {
            for j in 0..8usize {
                let (i0, i1, i2) = (i >> 2 & 1, i >> 1 & 1, i & 1);
                let (j0, j1, j2) = (j >> 2 & 1, j >> 1 & 1, j & 1);
                if i1 != j1 {
                    continue;
                }
                reference[(i, j)] = m[(i0 * 2 + i2, j0 * 2 + j2)];
            }
        }
        assert!(max_abs_diff(&full, &reference) < 1e-15);
    }
}
