use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::OperatorError;
use crate::linalg::{c, kron, Matrix, C64, I, ONE, ZERO};
use crate::parser::{parse_expression, Expr};

/// Coefficients below this magnitude are dropped.
pub const PRUNE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> Matrix {
        match self {
            Pauli::X => Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => Matrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            Pauli::Z => Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }

    /// `self * other = phase * result`; `None` result means identity.
    fn mul(self, other: Pauli) -> (C64, Option<Pauli>) {
        use Pauli::*;
        match (self, other) {
            (a, b) if a == b => (ONE, None),
            (X, Y) => (I, Some(Z)),
            (Y, X) => (-I, Some(Z)),
            (Y, Z) => (I, Some(X)),
            (Z, Y) => (-I, Some(X)),
            (Z, X) => (I, Some(Y)),
            (X, Z) => (-I, Some(Y)),
            _ => unreachable!(),
        }
    }
}

/// A tensor product of single-qubit Paulis, sorted by qubit. Empty is the
/// identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString(Vec<(usize, Pauli)>);

impl PauliString {
    pub fn identity() -> Self {
        PauliString(Vec::new())
    }

    /// Builds a word from unsorted factors; repeated qubits are multiplied out.
    pub fn new(factors: &[(usize, Pauli)]) -> (C64, Self) {
        let mut acc = (ONE, PauliString::identity());
        for &(q, p) in factors {
            let (ph, w) = acc.1.mul(&PauliString(vec![(q, p)]));
            acc = (acc.0 * ph, w);
        }
        acc
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.len()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.0.last().map(|(q, _)| *q)
    }

    pub fn mul(&self, other: &PauliString) -> (C64, PauliString) {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let mut phase = ONE;
        let mut out = Vec::with_capacity(a.len() + b.len());
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j]);
                j += 1;
            } else {
                let (ph, p) = a[i].1.mul(b[j].1);
                phase *= ph;
                if let Some(p) = p {
                    out.push((a[i].0, p));
                }
                i += 1;
                j += 1;
            }
        }
        (phase, PauliString(out))
    }

    /// Dense matrix on `n` qubits, qubit 0 most significant.
    pub fn to_matrix(&self, n: usize) -> Matrix {
        let mut m = Matrix::from_element(1, 1, ONE);
        let mut it = self.0.iter().peekable();
        for q in 0..n {
            let f = match it.peek() {
                Some((qq, p)) if *qq == q => {
                    it.next();
                    p.matrix()
                }
                _ => Matrix::identity(2, 2),
            };
            m = kron(&m, &f);
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("I");
        }
        let parts: Vec<String> = self.0.iter().map(|(q, p)| format!("{}{q}", p.symbol())).collect();
        f.write_str(&parts.join(" "))
    }
}

/// A sum of Pauli words with complex coefficients, kept in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PauliOperator {
    terms: IndexMap<PauliString, C64>,
}

impl PauliOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(coeff: impl Into<C64>) -> Self {
        Self::term(PauliString::identity(), coeff.into())
    }

    pub fn term(word: PauliString, coeff: C64) -> Self {
        let mut op = Self::zero();
        op.add_term(word, coeff);
        op
    }

    pub fn x(q: usize) -> Self {
        Self::term(PauliString(vec![(q, Pauli::X)]), ONE)
    }
    pub fn y(q: usize) -> Self {
        Self::term(PauliString(vec![(q, Pauli::Y)]), ONE)
    }
    pub fn z(q: usize) -> Self {
        Self::term(PauliString(vec![(q, Pauli::Z)]), ONE)
    }

    pub fn add_term(&mut self, word: PauliString, coeff: C64) {
        let entry = self.terms.entry(word).or_insert(ZERO);
        *entry += coeff;
        self.prune();
    }

    fn prune(&mut self) {
        let drop: Vec<PauliString> = self
            .terms
            .iter()
            .filter(|(_, v)| v.norm() < PRUNE_TOL)
            .map(|(k, _)| k.clone())
            .collect();
        for k in drop {
            self.terms.shift_remove(&k);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &PauliString) -> C64 {
        self.terms.get(word).copied().unwrap_or(ZERO)
    }

    /// One more than the largest qubit index, 0 for a pure identity.
    pub fn num_qubits(&self) -> usize {
        self.terms
            .keys()
            .filter_map(|w| w.max_qubit())
            .max()
            .map_or(0, |q| q + 1)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|v| v.im.abs() <= tol)
    }

    pub fn scale(&self, k: C64) -> Self {
        let mut out = Self::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v * k);
        }
        out
    }

    pub fn to_matrix(&self, n: usize) -> Matrix {
        let dim = 1usize << n;
        let mut m = Matrix::zeros(dim, dim);
        for (w, v) in &self.terms {
            m += w.to_matrix(n) * *v;
        }
        m
    }

    /// Splits into single-term operators, in insertion order.
    pub fn split(&self) -> Vec<PauliOperator> {
        self.terms.iter().map(|(w, v)| Self::term(w.clone(), *v)).collect()
    }

    /// Parses arithmetic over `X(i)`, `Y(i)`, `Z(i)`, `I` and numbers, e.g.
    /// `-2.1433 * X(0) * X(1) + 5.907`. Lines may be joined with a trailing
    /// backslash or simply continued.
    pub fn parse(text: &str) -> Result<Self, OperatorError> {
        let joined: String = text
            .lines()
            .map(|l| l.trim().trim_end_matches('\\'))
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join(" ");
        if joined.trim().is_empty() {
            return Ok(Self::zero());
        }
        let e = parse_expression(&joined).map_err(|err| OperatorError::Malformed(err.to_string()))?;
        match eval(&e)? {
            Value::Scalar(s) => Ok(Self::identity(s)),
            Value::Op(op) => Ok(op),
        }
    }
}

enum Value {
    Scalar(C64),
    Op(PauliOperator),
}

impl Value {
    fn into_op(self) -> PauliOperator {
        match self {
            Value::Scalar(s) => PauliOperator::identity(s),
            Value::Op(o) => o,
        }
    }
}

fn eval(e: &Expr) -> Result<Value, OperatorError> {
    use crate::ir::{BinOp, UnOp};
    let bad = |what: &str| OperatorError::Malformed(what.to_string());
    Ok(match e {
        Expr::Int(v) => Value::Scalar(c(*v as f64, 0.0)),
        Expr::Float(v) => Value::Scalar(c(*v, 0.0)),
        Expr::Imag(v) => Value::Scalar(c(0.0, *v)),
        Expr::Name(n) if n == "I" => Value::Op(PauliOperator::identity(ONE)),
        Expr::Call(f, args) => {
            let Expr::Name(n) = f.as_ref() else {
                return Err(bad("unsupported call in operator"));
            };
            if n == "I" && args.is_empty() {
                return Ok(Value::Op(PauliOperator::identity(ONE)));
            }
            let p = match n.as_str() {
                "X" => Pauli::X,
                "Y" => Pauli::Y,
                "Z" => Pauli::Z,
                other => return Err(bad(&format!("unknown operator `{other}`"))),
            };
            let [Expr::Int(q)] = args.as_slice() else {
                return Err(bad(&format!("{n}(...) takes one non-negative integer qubit index")));
            };
            if *q < 0 {
                return Err(bad("qubit index must be non-negative"));
            }
            Value::Op(PauliOperator::term(PauliString(vec![(*q as usize, p)]), ONE))
        }
        Expr::Unary(UnOp::Neg, x) => match eval(x)? {
            Value::Scalar(s) => Value::Scalar(-s),
            Value::Op(o) => Value::Op(-o),
        },
        Expr::Unary(UnOp::Pos, x) => eval(x)?,
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval(a)?, eval(b)?);
            match (op, a, b) {
                (BinOp::Add, Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x + y),
                (BinOp::Sub, Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x - y),
                (BinOp::Mul, Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
                (BinOp::Div, Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x / y),
                (BinOp::Add, a, b) => Value::Op(a.into_op() + b.into_op()),
                (BinOp::Sub, a, b) => Value::Op(a.into_op() - b.into_op()),
                (BinOp::Mul, Value::Scalar(s), Value::Op(o)) | (BinOp::Mul, Value::Op(o), Value::Scalar(s)) => {
                    Value::Op(o.scale(s))
                }
                (BinOp::Mul, Value::Op(x), Value::Op(y)) => Value::Op(&x * &y),
                (BinOp::Div, Value::Op(o), Value::Scalar(s)) => Value::Op(o.scale(ONE / s)),
                (op, ..) => return Err(bad(&format!("operator `{}` not supported here", op.symbol()))),
            }
        }
        _ => return Err(bad("unsupported expression in operator")),
    })
}

fn fmt_coeff(v: C64) -> String {
    if v.im == 0.0 {
        format!("{:?}", v.re)
    } else {
        format!("({:?}{}{:?}j)", v.re, if v.im < 0.0 { "-" } else { "+" }, v.im.abs())
    }
}

impl fmt::Display for PauliOperator {
    /// Writes the operator in the same syntax [`PauliOperator::parse`] reads.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0.0");
        }
        for (k, (w, v)) in self.terms.iter().enumerate() {
            let (sign, mag) = if v.im == 0.0 && v.re < 0.0 { ("-", -v) } else { ("+", *v) };
            if k == 0 {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            f.write_str(&fmt_coeff(mag))?;
            for (q, p) in w.factors() {
                write!(f, " * {}({q})", p.symbol())?;
            }
        }
        Ok(())
    }
}

impl Add for PauliOperator {
    type Output = PauliOperator;
    fn add(mut self, rhs: PauliOperator) -> PauliOperator {
        self += rhs;
        self
    }
}

impl AddAssign for PauliOperator {
    fn add_assign(&mut self, rhs: PauliOperator) {
        for (w, v) in rhs.terms {
            self.add_term(w, v);
        }
    }
}

impl Sub for PauliOperator {
    type Output = PauliOperator;
    fn sub(self, rhs: PauliOperator) -> PauliOperator {
        self + (-rhs)
    }
}

impl Neg for PauliOperator {
    type Output = PauliOperator;
    fn neg(self) -> PauliOperator {
        self.scale(-ONE)
    }
}

impl Mul for &PauliOperator {
    type Output = PauliOperator;
    fn mul(self, rhs: &PauliOperator) -> PauliOperator {
        let mut out = PauliOperator::zero();
        for (wa, va) in &self.terms {
            for (wb, vb) in &rhs.terms {
                let (ph, w) = wa.mul(wb);
                out.add_term(w, va * vb * ph);
            }
        }
        out
    }
}

impl Mul for PauliOperator {
    type Output = PauliOperator;
    fn mul(self, rhs: PauliOperator) -> PauliOperator {
        &self * &rhs
    }
}

impl Mul<f64> for PauliOperator {
    type Output = PauliOperator;
    fn mul(self, rhs: f64) -> PauliOperator {
        self.scale(c(rhs, 0.0))
    }
}

impl Mul<PauliOperator> for f64 {
    type Output = PauliOperator;
    fn mul(self, rhs: PauliOperator) -> PauliOperator {
        rhs.scale(c(self, 0.0))
    }
}

impl Mul<C64> for PauliOperator {
    type Output = PauliOperator;
    fn mul(self, rhs: C64) -> PauliOperator {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use proptest::prelude::*;

    fn deuteron() -> PauliOperator {
        -2.1433 * PauliOperator::x(0) * PauliOperator::x(1) - 2.1433 * PauliOperator::y(0) * PauliOperator::y(1)
            + 0.21829 * PauliOperator::z(0)
            - 6.125 * PauliOperator::z(1)
            + PauliOperator::identity(5.907)
    }

    #[test]
    fn single_qubit_products() {
        let xy = PauliOperator::x(0) * PauliOperator::y(0);
        assert_eq!(xy, PauliOperator::z(0).scale(I));
        let zz = PauliOperator::z(3) * PauliOperator::z(3);
        assert_eq!(zz, PauliOperator::identity(1.0));
    }

    #[test]
    fn parse_matches_builder() {
        let text = "-2.1433 * X(0) * X(1) \\\n    - 2.1433 * Y(0) * Y(1) \\\n    + .21829 * Z(0) - 6.125 * Z(1) + 5.907";
        let op = PauliOperator::parse(text).unwrap();
        assert_eq!(op, deuteron());
        assert_eq!(op.len(), 5);
        assert_eq!(op.num_qubits(), 2);
        let words: Vec<String> = op.terms().map(|(w, _)| w.to_string()).collect();
        assert_eq!(words, vec!["X0 X1", "Y0 Y1", "Z0", "Z1", "I"]);
    }

    #[test]
    fn display_round_trips() {
        let op = deuteron() + PauliOperator::z(2).scale(c(0.5, -0.25));
        let again = PauliOperator::parse(&op.to_string()).unwrap();
        assert_eq!(again, op);
    }

    #[test]
    fn parse_errors() {
        assert!(PauliOperator::parse("X(0) +").is_err());
        assert!(PauliOperator::parse("W(0)").is_err());
        assert!(PauliOperator::parse("X(-1)").is_err());
        assert!(PauliOperator::parse("X(0.5)").is_err());
    }

    #[test]
    fn cancellation_prunes() {
        let op = PauliOperator::x(0) - PauliOperator::x(0);
        assert!(op.is_empty());
    }

    #[test]
    fn matrix_of_product() {
        let op = PauliOperator::x(0) * PauliOperator::z(1);
        let m = op.to_matrix(2);
        let expected = kron(&Pauli::X.matrix(), &Pauli::Z.matrix());
        assert!(max_abs_diff(&m, &expected) < 1e-15);
    }

    fn arb_op() -> impl Strategy<Value = PauliOperator> {
        let term = (prop::collection::vec((0usize..3, 0u8..4), 0..3), -2.0f64..2.0, -1.0f64..1.0);
        prop::collection::vec(term, 1..4).prop_map(|ts| {
            let mut op = PauliOperator::zero();
            for (fs, re, im) in ts {
                let facs: Vec<(usize, Pauli)> = fs
                    .into_iter()
                    .filter(|(_, p)| *p < 3)
                    .map(|(q, p)| (q, [Pauli::X, Pauli::Y, Pauli::Z][p as usize]))
                    .collect();
                let (ph, w) = PauliString::new(&facs);
                op.add_term(w, ph * c(re, im));
            }
            op
        })
    }

    #[test]
    fn empty_text_is_zero() {
        assert!(PauliOperator::parse("").unwrap().is_empty());
        assert!(PauliOperator::parse("  \n").unwrap().is_empty());
        assert_eq!(PauliOperator::parse(&PauliOperator::zero().to_string()).unwrap(), PauliOperator::zero());
    }

    proptest! {
        #[test]
        fn product_matches_matrix_product(a in arb_op(), b in arb_op()) {
            let n = 3;
            let lhs = (&a * &b).to_matrix(n);
            let rhs = a.to_matrix(n) * b.to_matrix(n);
            prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        }

        #[test]
        fn sum_matches_matrix_sum(a in arb_op(), b in arb_op()) {
            let lhs = (a.clone() + b.clone()).to_matrix(3);
            let rhs = a.to_matrix(3) + b.to_matrix(3);
            prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        }

        #[test]
        fn product_is_associative(a in arb_op(), b in arb_op(), c3 in arb_op()) {
            let lhs = (&(&a * &b) * &c3).to_matrix(3);
            let rhs = (&a * &(&b * &c3)).to_matrix(3);
            prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
        }

        #[test]
        fn display_parse_round_trip(a in arb_op()) {
            let again = PauliOperator::parse(&a.to_string()).unwrap();
            prop_assert!(max_abs_diff(&again.to_matrix(3), &a.to_matrix(3)) < 1e-12);
        }
    }
}
