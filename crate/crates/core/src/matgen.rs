//! Test matrices with known Jordan structure and conditioning.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64_vec, operator_norm, singular_values, ComplexMatrix};

/// Recipe for `A = P J P^-1`: one eigenvalue per Jordan block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JordanSpec {
    #[serde(with = "c64_vec")]
    pub eigenvalues: Vec<Complex64>,
    pub block_sizes: Vec<usize>,
    /// Condition number of the similarity `P`.
    pub kappa_target: f64,
    pub seed: u64,
    /// Expected dimension; checked against the block sizes when given.
    #[serde(default)]
    pub n: Option<usize>,
}

impl JordanSpec {
    pub fn new(eigenvalues: Vec<Complex64>, block_sizes: Vec<usize>, kappa_target: f64, seed: u64) -> Self {
        JordanSpec {
            eigenvalues,
            block_sizes,
            kappa_target,
            seed,
            n: None,
        }
    }

    /// All blocks of size one.
    pub fn diagonalizable(eigenvalues: Vec<Complex64>, kappa_target: f64, seed: u64) -> Self {
        let blocks = vec![1; eigenvalues.len()];
        Self::new(eigenvalues, blocks, kappa_target, seed)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratedMatrix {
    pub matrix: ComplexMatrix,
    /// One entry per Jordan block, already divided by `scale`. Empty when
    /// the spectrum is unknown (companion matrices).
    #[serde(with = "c64_vec")]
    pub true_eigenvalues: Vec<Complex64>,
    pub block_sizes: Vec<usize>,
    /// Achieved `cond(P)` for the similarity used.
    pub kappa_used: Option<f64>,
    /// Condition number of a similarity bringing the *normalized* matrix to
    /// Jordan form with unit superdiagonal: `cond(P) * scale^(m_max - 1)`.
    /// Dividing by `scale` shrinks the superdiagonal, which costs exactly
    /// this factor to undo. Equals `kappa_used` when diagonalizable.
    pub kappa_jordan: Option<f64>,
    pub m_max: Option<usize>,
    pub scale: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl GeneratedMatrix {
    /// Each eigenvalue repeated by its block size.
    pub fn eigenvalues_with_multiplicity(&self) -> Vec<Complex64> {
        self.true_eigenvalues
            .iter()
            .zip(&self.block_sizes)
            .flat_map(|(&l, &m)| std::iter::repeat_n(l, m))
            .collect()
    }
}

/// Haar-distributed random unitary: QR of a complex Gaussian matrix with the
/// phases of `diag(R)` pushed back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let n = n.max(1);
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / std::f64::consts::SQRT_2
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_dmatrix(&q).expect("unitary factor is finite")
}

/// Upper-triangular Jordan matrix with the given blocks.
fn jordan_form(eigenvalues: &[Complex64], block_sizes: &[usize]) -> DMatrix<Complex64> {
    let n: usize = block_sizes.iter().sum();
    let mut j = DMatrix::zeros(n, n);
    let mut offset = 0;
    for (&lambda, &m) in eigenvalues.iter().zip(block_sizes) {
        for k in 0..m {
            j[(offset + k, offset + k)] = lambda;
            if k + 1 < m {
                j[(offset + k, offset + k + 1)] = Complex64::new(1.0, 0.0);
            }
        }
        offset += m;
    }
    j
}

/// A single un-normalized Jordan block `J_m(lambda)`.
pub fn jordan_block_matrix(lambda: Complex64, m: usize) -> Result<ComplexMatrix> {
    if m == 0 {
        return Err(Error::Structural("block size must be at least 1".into()));
    }
    ComplexMatrix::from_dmatrix(&jordan_form(&[lambda], &[m]))
}

pub fn jordan_matrix(spec: &JordanSpec) -> Result<GeneratedMatrix> {
    if spec.eigenvalues.is_empty() {
        return Err(Error::Structural("at least one Jordan block is required".into()));
    }
    if spec.eigenvalues.len() != spec.block_sizes.len() {
        return Err(Error::Structural(format!(
            "{} eigenvalues but {} block sizes",
            spec.eigenvalues.len(),
            spec.block_sizes.len()
        )));
    }
    if spec.block_sizes.contains(&0) {
        return Err(Error::Structural("block sizes must be positive".into()));
    }
    let n: usize = spec.block_sizes.iter().sum();
    if let Some(want) = spec.n {
        if want != n {
            return Err(Error::Structural(format!(
                "block sizes sum to {n}, expected {want}"
            )));
        }
    }
    if !(spec.kappa_target >= 1.0) || !spec.kappa_target.is_finite() {
        return Err(Error::Input(format!(
            "kappa_target must be a finite number >= 1, got {}",
            spec.kappa_target
        )));
    }
    if spec.eigenvalues.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("eigenvalues must be finite".into()));
    }
    let mut warnings = Vec::new();
    if spec.eigenvalues.iter().any(|z| z.norm() > 1.0) {
        warnings.push("eigenvalue outside the unit disk; normalization will rescale it".to_string());
    }
    if n == 1 && spec.kappa_target > 1.0 {
        warnings.push("a 1x1 similarity is a scalar; kappa_target is unattainable and cond(P) = 1".to_string());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let u = haar_unitary(n, &mut rng).to_dmatrix();
    let v = haar_unitary(n, &mut rng).to_dmatrix();
    // geometric ramp sqrt(kappa) .. 1/sqrt(kappa): cond(D) = kappa exactly
    let ramp: Vec<f64> = (0..n)
        .map(|i| {
            let t = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
            spec.kappa_target.powf(0.5 - t)
        })
        .collect();
    let p = DMatrix::from_fn(n, n, |i, j| u[(i, j)] * ramp[j]) * &v;
    let p_inv = v.adjoint() * DMatrix::from_fn(n, n, |i, j| u.adjoint()[(i, j)] / ramp[i]);

    let j = jordan_form(&spec.eigenvalues, &spec.block_sizes);
    let raw = ComplexMatrix::from_dmatrix(&(&p * j * p_inv))?;
    let raw_norm = operator_norm(&raw);
    let scale = raw_norm.max(1.0);
    let mut matrix = raw.scale(Complex64::new(1.0 / scale, 0.0))?;
    // rounding in the division can leave the norm a hair above 1
    let norm = operator_norm(&matrix);
    if norm > 1.0 {
        matrix = matrix.scale(Complex64::new(1.0 / norm, 0.0))?;
    }
    let scale = scale * norm.max(1.0);

    let sv = singular_values(&ComplexMatrix::from_dmatrix(&p)?);
    let kappa_used = sv[0] / sv[sv.len() - 1];
    let m_max = *spec.block_sizes.iter().max().expect("non-empty");
    let kappa_jordan = kappa_used * scale.powi(m_max as i32 - 1);

    Ok(GeneratedMatrix {
        matrix,
        true_eigenvalues: spec.eigenvalues.iter().map(|z| z / scale).collect(),
        block_sizes: spec.block_sizes.clone(),
        kappa_used: Some(kappa_used),
        kappa_jordan: Some(kappa_jordan),
        m_max: Some(m_max),
        scale,
        warnings,
    })
}

/// Companion matrix of the monic polynomial
/// `x^d + c_{d-1} x^{d-1} + ... + c_0`, given `coeffs = [c_0, ..., c_{d-1}]`.
/// The roots are `scale` times the eigenvalues of the returned matrix.
pub fn companion_matrix(coeffs: &[Complex64]) -> Result<GeneratedMatrix> {
    let d = coeffs.len();
    if d == 0 {
        return Err(Error::Input("companion matrix needs degree at least 1".into()));
    }
    if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("coefficients must be finite".into()));
    }
    let c = ComplexMatrix::from_fn(d, |i, j| {
        if j == d - 1 {
            -coeffs[i]
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })?;
    let norm = operator_norm(&c);
    let scale = norm.max(1.0);
    let matrix = if scale > 1.0 {
        c.scale(Complex64::new(1.0 / scale, 0.0))?
    } else {
        c
    };
    Ok(GeneratedMatrix {
        matrix,
        true_eigenvalues: Vec::new(),
        block_sizes: Vec::new(),
        kappa_used: None,
        kappa_jordan: None,
        m_max: None,
        scale,
        warnings: Vec::new(),
    })
}
