//! Polynomial roots as eigenvalues of the normalized companion matrix.

use num_complex::Complex64;
use serde::Serialize;

use crate::eigensolver::{estimate_eigenvalue, SolverParams, SolverTrace};
use crate::error::{Error, Result};
use crate::linalg::c64_pair;
use crate::matgen::{companion_matrix, GeneratedMatrix};

#[derive(Debug, Clone, Serialize)]
pub struct RootResult {
    /// Root of the polynomial, `scale * eigenvalue`.
    #[serde(with = "c64_pair")]
    pub root: Complex64,
    /// Eigenvalue estimate for the normalized companion matrix.
    #[serde(with = "c64_pair")]
    pub eigenvalue: Complex64,
    pub scale: f64,
    /// Error bound on `root`: `scale * epsilon`.
    pub tolerance: f64,
    pub trace: SolverTrace,
}

/// Coefficients in descending order, leading first. A leading coefficient
/// other than one is divided out.
pub fn polynomial_root(coeffs_desc: &[Complex64], params: &SolverParams) -> Result<RootResult> {
    let (&lead, rest) = coeffs_desc
        .split_first()
        .ok_or_else(|| Error::Input("polynomial needs coefficients".into()))?;
    if lead.norm() == 0.0 {
        return Err(Error::Input("leading coefficient must be nonzero".into()));
    }
    if rest.is_empty() {
        return Err(Error::Input("a constant polynomial has no roots".into()));
    }
    let low_first: Vec<Complex64> = rest.iter().rev().map(|c| c / lead).collect();
    let GeneratedMatrix { matrix, scale, .. } = companion_matrix(&low_first)?;
    let (eigenvalue, trace) = estimate_eigenvalue(&matrix, params)?;
    Ok(RootResult {
        root: eigenvalue * scale,
        eigenvalue,
        scale,
        tolerance: scale * params.epsilon,
        trace,
    })
}
