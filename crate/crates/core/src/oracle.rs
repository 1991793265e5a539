//! The `sigma_0(mu)` query: smallest singular value of `A - mu I`, answered
//! exactly or through a noise model with a per-call failure probability.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64_pair, operator_norm, shifted, sigma_min_2x2, svd, ComplexMatrix, ComplexVector};

/// Gap between the two smallest singular values below which the smallest
/// right singular vector is not well defined.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Shifts are restricted to this disk.
pub const MAX_SHIFT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    #[default]
    Exact,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaOracleConfig {
    pub mode: OracleMode,
    /// Additive precision of a successful noisy call.
    pub precision: f64,
    /// Probability that a noisy call returns garbage.
    pub fail_prob: f64,
    pub seed: u64,
}

impl Default for SigmaOracleConfig {
    fn default() -> Self {
        Self::exact()
    }
}

impl SigmaOracleConfig {
    pub fn exact() -> Self {
        SigmaOracleConfig {
            mode: OracleMode::Exact,
            precision: 0.0,
            fail_prob: 0.0,
            seed: 0,
        }
    }

    pub fn noisy(precision: f64, fail_prob: f64, seed: u64) -> Self {
        SigmaOracleConfig {
            mode: OracleMode::Noisy,
            precision,
            fail_prob,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == OracleMode::Noisy {
            if !(self.precision > 0.0) || !self.precision.is_finite() {
                return Err(Error::Input("noisy oracle requires precision > 0".into()));
            }
            if !(0.0..1.0).contains(&self.fail_prob) {
                return Err(Error::Input("failure probability must lie in [0, 1)".into()));
            }
        }
        Ok(())
    }
}

/// Coordinates of a query; noisy-mode randomness is a function of these and
/// the seed only, never of call order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryKey {
    pub level: u64,
    pub i: i64,
    pub j: i64,
}

impl QueryKey {
    pub fn new(level: u64, i: i64, j: i64) -> Self {
        QueryKey { level, i, j }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    pub value: f64,
    #[serde(with = "c64_pair")]
    pub mu: Complex64,
    /// True value behind a noisy answer, kept for audits.
    pub exact_backend_value: Option<f64>,
    #[serde(default)]
    pub corrupted: bool,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn key_rng(seed: u64, key: QueryKey) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ key.level);
    h = splitmix64(h ^ key.i as u64);
    h = splitmix64(h ^ key.j as u64);
    ChaCha8Rng::seed_from_u64(h)
}

/// Query interface over a fixed matrix. Caches the operator norm and a dense
/// copy so repeated queries only pay for one SVD each.
#[derive(Debug, Clone)]
pub struct SigmaOracle {
    a: ComplexMatrix,
    dense: DMatrix<Complex64>,
    norm: f64,
    config: SigmaOracleConfig,
}

impl SigmaOracle {
    pub fn new(a: &ComplexMatrix, config: SigmaOracleConfig) -> Result<Self> {
        config.validate()?;
        Ok(SigmaOracle {
            a: a.clone(),
            dense: a.to_dmatrix(),
            norm: operator_norm(a),
            config,
        })
    }

    pub fn config(&self) -> &SigmaOracleConfig {
        &self.config
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_exact(&self) -> bool {
        self.config.mode == OracleMode::Exact
    }

    /// Exact smallest singular value of `A - mu I`.
    pub fn exact(&self, mu: Complex64) -> f64 {
        let n = self.a.n();
        match n {
            1 => (self.a.get(0, 0) - mu).norm(),
            2 => {
                let e = self.a.entries();
                sigma_min_2x2(e[0] - mu, e[1], e[2], e[3] - mu)
            }
            _ => {
                let mut m = self.dense.clone();
                for i in 0..n {
                    m[(i, i)] -= mu;
                }
                let s = SVD::new(m, false, false).singular_values;
                s.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Query with the configured precision and failure probability.
    pub fn query(&self, mu: Complex64, key: QueryKey) -> Result<SigmaEstimate> {
        self.query_with(mu, key, self.config.precision, self.config.fail_prob)
    }

    /// Query with a per-call precision and failure probability, used by
    /// searches that re-tune the noisy oracle at every level. Ignored in
    /// exact mode.
    pub fn query_with(&self, mu: Complex64, key: QueryKey, precision: f64, fail_prob: f64) -> Result<SigmaEstimate> {
        check_shift(mu)?;
        let sigma = self.exact(mu);
        if self.is_exact() {
            return Ok(SigmaEstimate {
                value: sigma,
                mu,
                exact_backend_value: None,
                corrupted: false,
            });
        }
        let mut rng = key_rng(self.config.seed, key);
        let u: f64 = rng.random();
        let (value, corrupted) = if u < fail_prob {
            (rng.random_range(0.0..=self.norm + mu.norm()), true)
        } else if precision > 0.0 {
            (sigma + rng.random_range(-precision..=precision), false)
        } else {
            (sigma, false)
        };
        Ok(SigmaEstimate {
            value: value.max(0.0),
            mu,
            exact_backend_value: Some(sigma),
            corrupted,
        })
    }
}

fn check_shift(mu: Complex64) -> Result<()> {
    if !mu.re.is_finite() || !mu.im.is_finite() {
        return Err(Error::Input(format!("shift must be finite, got {mu}")));
    }
    if mu.norm() > MAX_SHIFT {
        return Err(Error::Input(format!("shift {mu} lies outside |mu| <= {MAX_SHIFT}")));
    }
    Ok(())
}

/// One-shot query. Noisy mode draws from the key `(0, 0, 0)`.
pub fn sigma0(a: &ComplexMatrix, mu: Complex64, cfg: &SigmaOracleConfig) -> Result<SigmaEstimate> {
    SigmaOracle::new(a, *cfg)?.query(mu, QueryKey::new(0, 0, 0))
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundVector {
    pub vector: ComplexVector,
    pub sigma: f64,
    /// The two smallest singular values are within [`DEGENERACY_TOL`], so the
    /// vector is one arbitrary member of a larger subspace.
    pub degenerate: bool,
}

/// Unit right singular vector of `A - mu I` for its smallest singular value.
/// The first entry of largest magnitude is made real and non-negative.
pub fn ground_vector(a: &ComplexMatrix, mu: Complex64) -> Result<GroundVector> {
    if !mu.re.is_finite() || !mu.im.is_finite() {
        return Err(Error::Input(format!("shift must be finite, got {mu}")));
    }
    let n = a.n();
    let res = svd(&shifted(a, mu), true);
    let sigma = res.smallest();
    let degenerate = n > 1 && res.singular_values[n - 2] - sigma < DEGENERACY_TOL;
    let v = res.right_vector(n - 1).expect("vectors requested");
    let mut data = v.entries().to_vec();
    let peak = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(z) = data.iter().find(|z| z.norm() >= peak * (1.0 - 1e-12)) {
        let phase = z.conj() / z.norm();
        for x in &mut data {
            *x *= phase;
        }
    }
    let vector = ComplexVector::new(data);
    let norm = vector.norm();
    let vector = ComplexVector::new(vector.entries().iter().map(|z| z / norm).collect());
    Ok(GroundVector {
        vector,
        sigma,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exact_examples() {
        let cfg = SigmaOracleConfig::exact();
        let v = sigma0(&ComplexMatrix::identity(2), c(0.5, 0.0), &cfg).unwrap();
        assert_eq!(v.value, 0.5);
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let v = sigma0(&j, c(1.0, 0.0), &cfg).unwrap();
        assert!((v.value - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let d = ComplexMatrix::real_diagonal(&[0.3, 0.7]);
        assert!((sigma0(&d, c(0.4, 0.0), &cfg).unwrap().value - 0.1).abs() < 1e-15);
        let d3 = ComplexMatrix::real_diagonal(&[0.3, 0.7, -0.2]);
        assert!((sigma0(&d3, c(0.4, 0.0), &cfg).unwrap().value - 0.1).abs() < 1e-15);
    }

    #[test]
    fn bad_shifts() {
        let cfg = SigmaOracleConfig::exact();
        let a = ComplexMatrix::identity(2);
        assert!(matches!(sigma0(&a, c(f64::NAN, 0.0), &cfg), Err(Error::Input(_))));
        assert!(matches!(sigma0(&a, c(3.0, 0.0), &cfg), Err(Error::Input(_))));
        let bad = SigmaOracleConfig::noisy(0.0, 0.1, 1);
        assert!(matches!(sigma0(&a, c(0.0, 0.0), &bad), Err(Error::Input(_))));
    }

    #[test]
    fn noisy_without_failures_stays_within_precision() {
        let a = ComplexMatrix::from_real_rows(&[&[0.1, 0.5, 0.0], &[0.0, -0.3, 0.2], &[0.1, 0.0, 0.4]]).unwrap();
        let o = SigmaOracle::new(&a, SigmaOracleConfig::noisy(1e-3, 0.0, 42)).unwrap();
        for i in 0..200i64 {
            let mu = c(0.01 * i as f64 - 1.0, 0.3);
            let e = o.query(mu, QueryKey::new(1, i, 0)).unwrap();
            let exact = e.exact_backend_value.unwrap();
            assert!((e.value - exact).abs() <= 1e-3 + 1e-15);
            assert!(e.value >= 0.0);
            let again = o.query(mu, QueryKey::new(1, i, 0)).unwrap();
            assert_eq!(e.value.to_bits(), again.value.to_bits());
        }
    }

    #[test]
    fn failures_land_in_valid_range() {
        let a = ComplexMatrix::real_diagonal(&[0.5, -0.5]);
        let o = SigmaOracle::new(&a, SigmaOracleConfig::noisy(1e-3, 0.5, 9)).unwrap();
        let mut corrupted = 0;
        for i in 0..400i64 {
            let e = o.query(c(0.2, 0.1), QueryKey::new(2, i, -i)).unwrap();
            if e.corrupted {
                corrupted += 1;
                assert!(e.value <= 0.5 + c(0.2, 0.1).norm() + 1e-15);
            }
        }
        assert!((150..250).contains(&corrupted), "{corrupted}");
    }

    #[test]
    fn ground_vector_examples() {
        let d = ComplexMatrix::real_diagonal(&[0.5, -0.25]);
        let g = ground_vector(&d, c(0.5, 0.0)).unwrap();
        assert!(!g.degenerate);
        assert!((g.vector.entries()[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(g.vector.entries()[1].norm() < 1e-12);

        let g = ground_vector(&ComplexMatrix::identity(3), c(1.0, 0.0)).unwrap();
        assert!(g.degenerate);
        assert!((g.vector.norm() - 1.0).abs() < 1e-12);

        let j = crate::matgen::jordan_block_matrix(c(0.5, 0.0), 2).unwrap();
        let g = ground_vector(&j, c(0.5, 0.0)).unwrap();
        assert!((g.vector.entries()[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(g.sigma.abs() < 1e-15);
    }

    #[test]
    fn ground_vector_phase_convention() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(0.2, 0.1), c(0.0, 0.4), c(0.1, 0.0)],
            vec![c(-0.3, 0.0), c(0.1, -0.2), c(0.0, 0.3)],
            vec![c(0.05, 0.05), c(0.2, 0.0), c(-0.1, 0.1)],
        ])
        .unwrap();
        let g = ground_vector(&a, c(0.1, 0.1)).unwrap();
        let e = g.vector.entries();
        let peak = e.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let first = e.iter().find(|z| z.norm() >= peak * (1.0 - 1e-12)).unwrap();
        assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        let r = a.apply(&g.vector).unwrap();
        let r = ComplexVector::new(
            r.entries().iter().zip(e).map(|(x, v)| x - c(0.1, 0.1) * v).collect(),
        );
        assert!((r.norm() - g.sigma).abs() < 1e-10);
    }
}
