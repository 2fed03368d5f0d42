//! Independent reference values used by the acceptance suite.

use crate::error::{Error, Result};

/// `log λ_max` of a positive square matrix by power iteration.
pub fn log_spectral_radius(m: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<f64> {
    let n = m.len();
    if n == 0
        || m.iter()
            .any(|r| r.len() != n || r.iter().any(|&v| !(v > 0.0 && v.is_finite())))
    {
        return Err(Error::Usage(
            "power iteration needs a positive square matrix".into(),
        ));
    }
    let mut v = vec![1.0 / n as f64; n];
    let mut log_lambda = f64::NAN;
    for _ in 0..max_iter {
        let w: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| m[i][j] * v[j]).sum())
            .collect();
        let norm: f64 = w.iter().sum();
        let next = norm.ln();
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - log_lambda).abs() < tol {
            return Ok(next);
        }
        log_lambda = next;
    }
    Err(Error::Numeric(format!(
        "power iteration did not converge in {max_iter} steps"
    )))
}

/// Pressure of the nearest-neighbour chain on `{0,1}^Z` with
/// `φ(x) = β (h s_0 + J s_0 s_1)`, `s = 2a - 1`, via the transfer matrix
/// `T(a, b) = exp(β (h s_a + J s_a s_b))`.
pub fn ising_chain_pressure(beta: f64, j: f64, h: f64) -> Result<f64> {
    let s = |a: usize| 2.0 * a as f64 - 1.0;
    let t: Vec<Vec<f64>> = (0..2)
        .map(|a| {
            (0..2)
                .map(|b| (beta * (h * s(a) + j * s(a) * s(b))).exp())
                .collect()
        })
        .collect();
    log_spectral_radius(&t, 1e-14, 100_000)
}
