//! Richardson extrapolation of sequences with known error terms.

use crate::error::{Error, Result};

/// One term of the error model `A(h) = A_0 + Σ c_i t_i(h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorTerm {
    /// `h^e`
    Power(f64),
    /// `h^e ln h`
    PowerLog(f64),
}

impl ErrorTerm {
    fn eval(self, h: f64) -> f64 {
        match self {
            ErrorTerm::Power(e) => h.powf(e),
            ErrorTerm::PowerLog(e) => h.powf(e) * h.ln(),
        }
    }
}

/// Extrapolates `(h_i, A(h_i))` to `h = 0` assuming
/// `A(h) = A_0 + c_1 h^{e_1} + c_2 h^{e_2} + ...` with the given exponents,
/// one per sample beyond the first.
pub fn richardson(samples: &[(f64, f64)], exponents: &[f64]) -> Result<f64> {
    let terms: Vec<ErrorTerm> = exponents.iter().map(|&e| ErrorTerm::Power(e)).collect();
    richardson_terms(samples, &terms)
}

/// Like [`richardson`] with an arbitrary error model. Solves the resulting
/// linear system exactly, using the first `samples.len() - 1` terms.
pub fn richardson_terms(samples: &[(f64, f64)], terms: &[ErrorTerm]) -> Result<f64> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::Empty { field: "samples" });
    }
    if terms.len() < n - 1 {
        return Err(Error::BadParameter(format!("need {} error terms, got {}", n - 1, terms.len())));
    }
    if samples.iter().any(|&(h, a)| !(h > 0.0 && h.is_finite() && a.is_finite())) {
        return Err(Error::BadParameter("extrapolation samples must be finite with h > 0".into()));
    }
    // Rows [1, t_1(h), ..., t_{n-1}(h) | A].
    let mut m: Vec<Vec<f64>> = samples
        .iter()
        .map(|&(h, a)| {
            let mut row = vec![1.0];
            row.extend(terms[..n - 1].iter().map(|t| t.eval(h)));
            row.push(a);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("non-empty range");
        if m[pivot][col].abs() < 1e-300 {
            return Err(Error::BadParameter("degenerate extrapolation nodes".into()));
        }
        m.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Ok(m[0][n] / m[0][0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_model() {
        let f = |h: f64| 3.0 + 2.0 * h + 0.7 * h * h;
        let s: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&h| (h, f(h))).collect();
        assert!((richardson(&s, &[1.0, 2.0]).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(richardson(&[(0.3, 1.5)], &[]).unwrap(), 1.5);
    }

    #[test]
    fn exact_on_log_model() {
        let f = |h: f64| -1.0 + 2.0 * h * h.ln() - 0.3 * h;
        let s: Vec<(f64, f64)> = [0.01, 0.001, 0.0001].iter().map(|&h| (h, f(h))).collect();
        let terms = [ErrorTerm::PowerLog(1.0), ErrorTerm::Power(1.0)];
        assert!((richardson_terms(&s, &terms).unwrap() + 1.0).abs() < 1e-12);
        assert!(richardson(&[(0.0, 1.0), (0.1, 2.0)], &[1.0]).is_err());
    }
}
