//! Small dense complex linear-algebra helpers shared by the IR, synthesis and
//! runtime layers.

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type Matrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

pub fn from_rows(rows: &[&[C64]]) -> Matrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Matrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn dagger(a: &Matrix) -> Matrix {
    a.adjoint()
}

/// `max_ij |(M M†) - I|_ij`.
pub fn unitarity_error(m: &Matrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let prod = m * m.adjoint();
    max_abs_diff(&prod, &identity(m.nrows()))
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Distance between two matrices up to a global phase.
///
/// The phase is aligned on the largest-magnitude entry of `reference`, then the
/// max-norm of the difference is returned.
pub fn phase_aligned_distance(candidate: &Matrix, reference: &Matrix) -> f64 {
    if candidate.shape() != reference.shape() {
        return f64::INFINITY;
    }
    let (mut best, mut idx) = (0.0, 0);
    for (k, v) in reference.iter().enumerate() {
        if v.norm() > best {
            best = v.norm();
            idx = k;
        }
    }
    if best == 0.0 {
        return candidate.iter().map(|x| x.norm()).fold(0.0, f64::max);
    }
    let ratio = reference.as_slice()[idx] / candidate.as_slice()[idx];
    let phase = if ratio.norm() == 0.0 {
        ONE
    } else {
        ratio / ratio.norm()
    };
    candidate
        .iter()
        .zip(reference.iter())
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}

/// Number of qubits for a matrix dimension, if it is a power of two.
pub fn qubits_for_dim(dim: usize) -> Option<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        None
    } else {
        Some(dim.trailing_zeros() as usize)
    }
}

/// Determinant of a small complex matrix via LU.
pub fn det(m: &Matrix) -> C64 {
    m.clone().lu().determinant()
}

/// Writes a matrix in the plain-text exchange format: first line `n`, then
/// `2^n` rows of whitespace separated `re+imj` entries.
pub fn write_matrix_text(m: &Matrix) -> Option<String> {
    let n = qubits_for_dim(m.nrows())?;
    if m.nrows() != m.ncols() {
        return None;
    }
    let mut out = format!("{n}\n");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    Some(out)
}

pub fn format_complex(z: C64) -> String {
    format!("{}{:+}j", z.re, z.im)
}

/// Parses a single `re+imj` token. Also accepts a bare real or bare imaginary.
pub fn parse_complex(tok: &str) -> Option<C64> {
    let t = tok.trim();
    if t.is_empty() {
        return None;
    }
    if let Some(body) = t.strip_suffix('j').or_else(|| t.strip_suffix('i')) {
        // find the split between the real and imaginary parts: the last sign
        // that is not at position 0 and not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        return match split {
            Some(k) => {
                let re: f64 = body[..k].parse().ok()?;
                let im_txt = &body[k..];
                let im: f64 = match im_txt {
                    "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                Some(c(re, im))
            }
            None => {
                let im: f64 = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                Some(c(0.0, im))
            }
        };
    }
    t.parse::<f64>().ok().map(|re| c(re, 0.0))
}

/// Parses the plain-text matrix format written by [`write_matrix_text`].
pub fn parse_matrix_text(text: &str) -> Result<Matrix, String> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let n: usize = lines
        .next()
        .ok_or("empty matrix file")?
        .parse()
        .map_err(|_| "first line must be the qubit count".to_string())?;
    if n > 16 {
        return Err(format!("qubit count {n} too large"));
    }
    let dim = 1usize << n;
    let mut m = Matrix::zeros(dim, dim);
    for i in 0..dim {
        let line = lines
            .next()
            .ok_or_else(|| format!("expected {dim} rows, found {i}"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != dim {
            return Err(format!("row {i}: expected {dim} entries, found {}", toks.len()));
        }
        for (j, tok) in toks.iter().enumerate() {
            m[(i, j)] = parse_complex(tok).ok_or_else(|| format!("row {i}: bad entry `{tok}`"))?;
        }
    }
    if lines.next().is_some() {
        return Err("trailing rows after matrix".into());
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_tokens() {
        assert_eq!(parse_complex("1+0j"), Some(c(1.0, 0.0)));
        assert_eq!(parse_complex("-0.5-0.25j"), Some(c(-0.5, -0.25)));
        assert_eq!(parse_complex("1e-3+2E+2j"), Some(c(1e-3, 200.0)));
        assert_eq!(parse_complex("2j"), Some(c(0.0, 2.0)));
        assert_eq!(parse_complex("-j"), Some(c(0.0, -1.0)));
        assert_eq!(parse_complex("3.5"), Some(c(3.5, 0.0)));
        assert_eq!(parse_complex("abc"), None);
    }

    #[test]
    fn matrix_text_round_trip() {
        let m = from_rows(&[&[c(0.5, -0.5), c(0.0, 1.0)], &[c(1e-17, 0.0), c(-2.0, 3.25)]]);
        let text = write_matrix_text(&m).unwrap();
        assert!(text.starts_with("1\n"));
        let back = parse_matrix_text(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn matrix_text_rejects_bad_shapes() {
        assert!(parse_matrix_text("1\n1 0\n").is_err());
        assert!(parse_matrix_text("1\n1 0 0\n0 1\n").is_err());
        assert!(parse_matrix_text("").is_err());
    }

    #[test]
    fn phase_alignment_ignores_global_phase() {
        let m = from_rows(&[&[c(0.6, 0.0), c(0.0, 0.8)], &[c(0.0, 0.8), c(0.6, 0.0)]]);
        let ph = C64::from_polar(1.0, 1.234);
        let shifted = m.map(|z| z * ph);
        assert!(phase_aligned_distance(&shifted, &m) < 1e-15);
        assert!(unitarity_error(&m) < 1e-15);
    }
}
