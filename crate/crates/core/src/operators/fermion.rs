use std::fmt;

use indexmap::IndexMap;

use super::pauli::{PauliOperator, PRUNE_TOL};
use super::OperatorError;
use crate::linalg::{c, C64, I, ONE, ZERO};
use crate::parser::{parse_expression, Expr};

/// One ladder operator: mode index and whether it is a creation operator.
pub type Ladder = (usize, bool);

/// A sum of products of fermionic ladder operators. Products are kept in the
/// order written; no normal ordering is applied.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FermionOperator {
    terms: IndexMap<Vec<Ladder>, C64>,
}

impl FermionOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(word: Vec<Ladder>, coeff: C64) -> Self {
        let mut op = Self::zero();
        op.add_term(word, coeff);
        op
    }

    pub fn add_term(&mut self, word: Vec<Ladder>, coeff: C64) {
        let e = self.terms.entry(word.clone()).or_insert(ZERO);
        *e += coeff;
        if e.norm() < PRUNE_TOL {
            self.terms.shift_remove(&word);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Ladder>, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Parses either the bracket form `0.5 [0^ 1] + -0.25 [] ...` or a sum of
    /// `FOp('0^ 1', 0.5)` calls.
    pub fn parse(text: &str) -> Result<Self, OperatorError> {
        let t = text.trim();
        if t.contains("FOp") || t.contains("FermionOperator") {
            parse_fop_sum(t)
        } else {
            parse_bracket_form(t)
        }
    }

    /// Jordan-Wigner map onto qubits; mode `p` becomes qubit `p`.
    pub fn jordan_wigner(&self) -> PauliOperator {
        let mut out = PauliOperator::zero();
        for (word, coeff) in &self.terms {
            let mut prod = PauliOperator::identity(*coeff);
            for &(p, dagger) in word {
                prod = &prod * &ladder_to_pauli(p, dagger);
            }
            out += prod;
        }
        out
    }
}

/// `a_p^† = Z_0 ... Z_{p-1} (X_p - iY_p)/2` and `a_p = Z_0 ... Z_{p-1} (X_p + iY_p)/2`.
fn ladder_to_pauli(p: usize, dagger: bool) -> PauliOperator {
    let mut string = PauliOperator::identity(ONE);
    for q in 0..p {
        string = &string * &PauliOperator::z(q);
    }
    let sign = if dagger { -1.0 } else { 1.0 };
    let local = PauliOperator::x(p).scale(c(0.5, 0.0)) + PauliOperator::y(p).scale(I * (0.5 * sign));
    &string * &local
}

fn parse_word(word: &str) -> Result<Vec<Ladder>, OperatorError> {
    word.split_whitespace()
        .map(|tok| {
            let (num, dagger) = match tok.strip_suffix('^') {
                Some(n) => (n, true),
                None => (tok, false),
            };
            num.parse::<usize>()
                .map(|p| (p, dagger))
                .map_err(|_| OperatorError::Malformed(format!("bad ladder operator `{tok}`")))
        })
        .collect()
}

fn parse_bracket_form(text: &str) -> Result<FermionOperator, OperatorError> {
    let mut op = FermionOperator::zero();
    let mut rest = text;
    let mut seen = false;
    while !rest.trim().is_empty() {
        let open = rest
            .find('[')
            .ok_or_else(|| OperatorError::Malformed(format!("expected `[word]` near `{}`", rest.trim())))?;
        let close = rest[open..]
            .find(']')
            .map(|k| k + open)
            .ok_or_else(|| OperatorError::Malformed("unclosed `[`".into()))?;
        let mut coeff_txt = rest[..open].trim();
        if seen {
            coeff_txt = coeff_txt
                .strip_prefix('+')
                .ok_or_else(|| OperatorError::Malformed(format!("expected `+` before `{coeff_txt}`")))?
                .trim();
        }
        let coeff = if coeff_txt.is_empty() {
            ONE
        } else {
            eval_scalar(&parse_expression(coeff_txt).map_err(|e| OperatorError::Malformed(e.to_string()))?)?
        };
        op.add_term(parse_word(&rest[open + 1..close])?, coeff);
        rest = &rest[close + 1..];
        seen = true;
    }
    Ok(op)
}

fn parse_fop_sum(text: &str) -> Result<FermionOperator, OperatorError> {
    let joined: String = text
        .lines()
        .map(|l| l.trim().trim_end_matches('\\'))
        .collect::<Vec<_>>()
        .join(" ");
    let e = parse_expression(&joined).map_err(|e| OperatorError::Malformed(e.to_string()))?;
    let mut op = FermionOperator::zero();
    collect_fops(&e, ONE, &mut op)?;
    Ok(op)
}

fn collect_fops(e: &Expr, sign: C64, op: &mut FermionOperator) -> Result<(), OperatorError> {
    use crate::ir::{BinOp, UnOp};
    match e {
        Expr::Binary(BinOp::Add, a, b) => {
            collect_fops(a, sign, op)?;
            collect_fops(b, sign, op)
        }
        Expr::Binary(BinOp::Sub, a, b) => {
            collect_fops(a, sign, op)?;
            collect_fops(b, -sign, op)
        }
        Expr::Unary(UnOp::Neg, a) => collect_fops(a, -sign, op),
        Expr::Binary(BinOp::Mul, a, b) => {
            // scalar * FOp(...) or FOp(...) * scalar
            if let Ok(s) = eval_scalar(a) {
                collect_fops(b, sign * s, op)
            } else {
                collect_fops(a, sign * eval_scalar(b)?, op)
            }
        }
        Expr::Call(f, args) if matches!(f.as_ref(), Expr::Name(n) if n == "FOp" || n == "FermionOperator") => {
            let (word, coeff) = match args.as_slice() {
                [Expr::Str(w)] => (w, ONE),
                [Expr::Str(w), k] => (w, eval_scalar(k)?),
                _ => return Err(OperatorError::Malformed("FOp takes ('word', coefficient)".into())),
            };
            op.add_term(parse_word(word)?, sign * coeff);
            Ok(())
        }
        _ => Err(OperatorError::Malformed("expected a sum of FOp(...) terms".into())),
    }
}

fn eval_scalar(e: &Expr) -> Result<C64, OperatorError> {
    use crate::ir::{BinOp, UnOp};
    Ok(match e {
        Expr::Int(v) => c(*v as f64, 0.0),
        Expr::Float(v) => c(*v, 0.0),
        Expr::Imag(v) => c(0.0, *v),
        Expr::Unary(UnOp::Neg, a) => -eval_scalar(a)?,
        Expr::Unary(UnOp::Pos, a) => eval_scalar(a)?,
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval_scalar(a)?, eval_scalar(b)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
                _ => return Err(OperatorError::Malformed("unsupported coefficient expression".into())),
            }
        }
        _ => return Err(OperatorError::Malformed("coefficient must be numeric".into())),
    })
}

impl fmt::Display for FermionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, v)| {
                let word: Vec<String> = w
                    .iter()
                    .map(|(p, d)| if *d { format!("{p}^") } else { p.to_string() })
                    .collect();
                let coeff = if v.im == 0.0 {
                    format!("{:?}", v.re)
                } else {
                    format!("({:?}{:+?}j)", v.re, v.im)
                };
                format!("{coeff} [{}]", word.join(" "))
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, Matrix};

    /// Direct fermionic ladder matrices on `n` modes built from occupation
    /// number states: a_p |..n_p..> = (-1)^{sum_{q<p} n_q} |..n_p - 1..>.
    fn ladder_matrix(n: usize, p: usize, dagger: bool) -> Matrix {
        let dim = 1 << n;
        let mut m = Matrix::zeros(dim, dim);
        for col in 0..dim {
            let bit = |q: usize, s: usize| (s >> (n - 1 - q)) & 1;
            let occupied = bit(p, col) == 1;
            if occupied == dagger {
                continue;
            }
            let row = col ^ (1 << (n - 1 - p));
            let parity: usize = (0..p).map(|q| bit(q, col)).sum();
            m[(row, col)] = if parity.is_multiple_of(2) { ONE } else { -ONE };
        }
        m
    }

    fn direct_matrix(op: &FermionOperator, n: usize) -> Matrix {
        let dim = 1 << n;
        let mut total = Matrix::zeros(dim, dim);
        for (w, v) in op.terms() {
            let mut m = Matrix::identity(dim, dim);
            for &(p, d) in w {
                m *= ladder_matrix(n, p, d);
            }
            total += m * *v;
        }
        total
    }

    fn fig14() -> FermionOperator {
        FermionOperator::parse(
            "FOp('', 0.0002899) + FOp('0^ 0', -.43658) + FOp('1 0^', 4.2866) \\\n    + FOp('1^ 0', -4.2866) + FOp('1^ 1', 12.25)",
        )
        .unwrap()
    }

    #[test]
    fn fop_form_parses() {
        let op = fig14();
        assert_eq!(op.len(), 5);
        let terms: Vec<String> = op.to_string().split(" + ").map(str::to_string).collect();
        assert_eq!(terms[2], "4.2866 [1 0^]");
    }

    #[test]
    fn bracket_form_parses() {
        let op = FermionOperator::parse("0.0002899 [] +\n-0.43658 [0^ 0] +\n4.2866 [1 0^]").unwrap();
        assert_eq!(op.len(), 3);
        let again = FermionOperator::parse(&op.to_string()).unwrap();
        assert_eq!(again, op);
        assert!(FermionOperator::parse("1.0 [0^").is_err());
        assert!(FermionOperator::parse("1.0 [a]").is_err());
    }

    #[test]
    fn jordan_wigner_matches_direct_construction() {
        let n = 2;
        let op = fig14();
        let jw = op.jordan_wigner().to_matrix(n);
        assert!(max_abs_diff(&jw, &direct_matrix(&op, n)) < 1e-12);
    }

    #[test]
    fn jordan_wigner_on_three_modes() {
        let op = FermionOperator::parse("0.7 [2^ 0] + 0.7 [0^ 2] + -1.1 [1^ 2^ 2 1] + (0.2+0.1j) [2 1^]").unwrap();
        let n = 3;
        assert!(max_abs_diff(&op.jordan_wigner().to_matrix(n), &direct_matrix(&op, n)) < 1e-12);
    }

    #[test]
    fn empty_text_is_zero() {
        assert!(FermionOperator::parse("").unwrap().is_empty());
        assert!(FermionOperator::parse("").unwrap().jordan_wigner().is_empty());
    }

    /// {JW(a_p), JW(a_q^dagger)} = delta_pq I and {JW(a_p), JW(a_q)} = 0 on up to four modes.
    #[test]
    fn jordan_wigner_anticommutation() {
        let n = 4;
        let dim = 1 << n;
        let m = |p: usize, dagger: bool| FermionOperator::term(vec![(p, dagger)], ONE).jordan_wigner().to_matrix(n);
        let id = crate::linalg::Matrix::identity(dim, dim);
        for p in 0..n {
            for q in 0..n {
                let (a, ad) = (m(p, false), m(q, true));
                let anti = &a * &ad + &ad * &a;
                let expected = if p == q { id.clone() } else { id.clone() * ZERO };
                assert!(max_abs_diff(&anti, &expected) < 1e-12, "{{a_{p}, a_{q}^}}");
                let b = m(q, false);
                assert!(max_abs_diff(&(&a * &b + &b * &a), &(id.clone() * ZERO)) < 1e-12);
            }
        }
    }

    #[test]
    fn number_operator_is_projector() {
        let op = FermionOperator::term(vec![(0, true), (0, false)], ONE);
        let p = op.jordan_wigner();
        // n_0 = (I - Z_0)/2
        let expected = PauliOperator::identity(0.5) - PauliOperator::z(0).scale(c(0.5, 0.0));
        assert_eq!(p, expected);
    }
}
