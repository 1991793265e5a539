//! Chebyshev polynomial approximations of `sqrt(x)` and of a shifted step,
//! their bounded product, and a dense check of the Hermitian operator
//! `H_mu = sqrt((( A - mu I)^H (A - mu I) / alpha^2 + nu I) / (1 + nu))`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::linalg::{c64_pair, hermitian_eigen, shifted, singular_values, ComplexMatrix};

/// Largest degree tried by the adaptive fits.
pub const DEGREE_CAP: usize = 4096;

/// Points per interval in the error sweeps.
pub const SWEEP_POINTS: usize = 4096;

/// Fits aim this far inside the requested tolerance.
const FIT_MARGIN: f64 = 0.9;

/// Default shift for [`verify_hmu`].
pub const DEFAULT_NU: f64 = 0.01;

/// Real polynomial `sum c_j T_j(t)` with `t` the affine image of `x` in
/// `domain` onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChebPoly {
    pub coeffs: Vec<f64>,
    pub domain: (f64, f64),
    /// Verified to stay within `[-1, 1]` on `[-1, 1]`.
    pub bounded: bool,
}

impl ChebPoly {
    pub fn new(coeffs: Vec<f64>, domain: (f64, f64)) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Input("a polynomial needs at least one coefficient".into()));
        }
        if !(domain.0 < domain.1) || !domain.0.is_finite() || !domain.1.is_finite() {
            return Err(Error::Input(format!("invalid domain [{}, {}]", domain.0, domain.1)));
        }
        Ok(ChebPoly {
            coeffs,
            domain,
            bounded: false,
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn to_unit(&self, x: f64) -> f64 {
        let (a, b) = self.domain;
        (2.0 * x - a - b) / (b - a)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let t = self.to_unit(x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = c + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + t * b1 - b2
    }

    /// Product via `T_j T_k = (T_{j+k} + T_{|j-k|}) / 2`.
    pub fn mul(&self, other: &ChebPoly) -> Result<ChebPoly> {
        if self.domain != other.domain {
            return Err(Error::Input("polynomials must share a domain to multiply".into()));
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (j, &a) in self.coeffs.iter().enumerate() {
            for (k, &b) in other.coeffs.iter().enumerate() {
                let half = 0.5 * a * b;
                out[j + k] += half;
                out[j.abs_diff(k)] += half;
            }
        }
        Ok(ChebPoly {
            coeffs: out,
            domain: self.domain,
            bounded: self.bounded && other.bounded,
        })
    }

    pub fn scaled(&self, factor: f64) -> ChebPoly {
        ChebPoly {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            domain: self.domain,
            bounded: self.bounded && factor.abs() <= 1.0,
        }
    }

    /// `p(G)` for a Hermitian matrix `G`, by Clenshaw's recurrence on matrices.
    pub fn eval_matrix(&self, g: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = g.nrows();
        let (a, b) = self.domain;
        let id = DMatrix::<Complex64>::identity(n, n);
        let t = (g * Complex64::new(2.0, 0.0) - &id * Complex64::new(a + b, 0.0)) / Complex64::new(b - a, 0.0);
        let mut b1 = DMatrix::<Complex64>::zeros(n, n);
        let mut b2 = DMatrix::<Complex64>::zeros(n, n);
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = &id * Complex64::new(c, 0.0) + (&t * &b1) * Complex64::new(2.0, 0.0) - &b2;
            b2 = b1;
            b1 = b0;
        }
        &id * Complex64::new(self.coeffs[0], 0.0) + &t * &b1 - b2
    }

    /// Largest `|p(x) - f(x)|` over a uniform sweep of each interval.
    pub fn max_error(&self, f: impl Fn(f64) -> f64, intervals: &[(f64, f64)], points: usize) -> f64 {
        sweep(intervals, points)
            .map(|x| (self.eval(x) - f(x)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self, intervals: &[(f64, f64)], points: usize) -> f64 {
        sweep(intervals, points).map(|x| self.eval(x).abs()).fold(0.0, f64::max)
    }
}

fn sweep(intervals: &[(f64, f64)], points: usize) -> impl Iterator<Item = f64> + '_ {
    let points = points.max(2);
    intervals.iter().flat_map(move |&(a, b)| {
        (0..points).map(move |i| a + (b - a) * i as f64 / (points - 1) as f64)
    })
}

/// Chebyshev extreme points `cos(pi k / d)`, `k = 0..=d`.
pub fn chebyshev_points(d: usize) -> Vec<f64> {
    if d == 0 {
        return vec![1.0];
    }
    (0..=d)
        .map(|k| (std::f64::consts::PI * k as f64 / d as f64).cos())
        .collect()
}

fn cos_table(d: usize) -> Vec<f64> {
    (0..2 * d)
        .map(|r| (std::f64::consts::PI * r as f64 / d as f64).cos())
        .collect()
}

/// Chebyshev coefficients of the degree-`d` interpolant through values at
/// [`chebyshev_points`]`(d)`, where `d = values.len() - 1`.
pub fn values_to_coeffs(values: &[f64]) -> Vec<f64> {
    let d = values.len().saturating_sub(1);
    if d == 0 {
        return values.to_vec();
    }
    let table = cos_table(d);
    let mut out = vec![0.0; d + 1];
    for (j, c) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (k, &v) in values.iter().enumerate() {
            let w = if k == 0 || k == d { 0.5 } else { 1.0 };
            s += w * v * table[(j * k) % (2 * d)];
        }
        *c = 2.0 * s / d as f64;
    }
    out[0] *= 0.5;
    out[d] *= 0.5;
    out
}

/// Inverse of [`values_to_coeffs`].
pub fn coeffs_to_values(coeffs: &[f64]) -> Vec<f64> {
    let d = coeffs.len().saturating_sub(1);
    if d == 0 {
        return coeffs.to_vec();
    }
    let table = cos_table(d);
    (0..=d)
        .map(|k| {
            coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| c * table[(j * k) % (2 * d)])
                .sum()
        })
        .collect()
}

/// Degree-`d` interpolant of `f` at Chebyshev points mapped into `domain`.
pub fn interpolate(f: impl Fn(f64) -> f64, domain: (f64, f64), d: usize) -> Result<ChebPoly> {
    let (a, b) = domain;
    let values: Vec<f64> = chebyshev_points(d)
        .iter()
        .map(|&t| f(0.5 * (a + b) + 0.5 * (b - a) * t))
        .collect();
    ChebPoly::new(values_to_coeffs(&values), domain)
}

/// Smallest interpolant (by doubling, then bisection) whose sweep error on
/// `check` is within `FIT_MARGIN * tol`.
fn fit(f: &dyn Fn(f64) -> f64, domain: (f64, f64), tol: f64, check: &[(f64, f64)], what: &str) -> Result<ChebPoly> {
    let passes = |d: usize| -> Result<Option<ChebPoly>> {
        let p = interpolate(f, domain, d)?;
        Ok((p.max_error(f, check, SWEEP_POINTS) <= FIT_MARGIN * tol).then_some(p))
    };
    let mut d = 8;
    let mut best = loop {
        if let Some(p) = passes(d)? {
            break p;
        }
        if d >= DEGREE_CAP {
            return Err(Error::Approximation(format!(
                "{what}: tolerance {tol:e} not reached below degree {DEGREE_CAP}"
            )));
        }
        d = (2 * d).min(DEGREE_CAP);
    };
    let (mut lo, mut hi) = (if d == 8 { 1 } else { d / 2 + 1 }, d);
    while lo < hi {
        let mid = (lo + hi) / 2;
        match passes(mid)? {
            Some(p) => {
                best = p;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    log::debug!("{what}: degree {} for tolerance {tol:e}", best.degree());
    Ok(best)
}

fn check_args(eta: f64, eps: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Input(format!("eta must lie in (0, 1), got {eta}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Input(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Interpolant of `sqrt(x)` on `[eta/2, 1]` accurate to `eps` there. It is
/// unbounded outside that interval.
pub fn cheb_sqrt(eta: f64, eps: f64) -> Result<ChebPoly> {
    check_args(eta, eps)?;
    let lo = eta / 2.0;
    fit(&f64::sqrt, (lo, 1.0), eps, &[(lo, 1.0)], "sqrt interpolant")
}

/// Smoothed step `(1 + erf(k (x - x0))) / 2`, written with `erfc` so both
/// tails keep full relative accuracy.
fn smooth_step(x: f64, x0: f64, k: f64) -> f64 {
    0.5 * erfc(-k * (x - x0))
}

/// Polynomial on `[-1, 1]` with `|p(x)| <= 1`, within `eps` of `sqrt(x)` on
/// `[eta/2, 1]`.
///
/// Interpolates `g(x) = sqrt(a + (x - a) s(x))` with `a = eta/4` and `s` a
/// smoothed step at `a`. Above `eta/2`, `g` agrees with `sqrt(x)` to `eps/3`;
/// below, the radicand stays positive and at most `a`, so `g` is analytic
/// and lies in `[0, 1]` on the whole interval.
pub fn cheb_sqrt_bounded(eta: f64, eps: f64) -> Result<ChebPoly> {
    check_args(eta, eps)?;
    let a = eta / 4.0;
    let k = 4.0 * erfc_inv(2.0 * eps / 3.0) / eta;
    let g = move |x: f64| (a + (x - a) * smooth_step(x, a, k)).max(0.0).sqrt();
    let p = fit(&g, (-1.0, 1.0), eps / 3.0, &[(-1.0, 1.0)], "bounded sqrt")?;
    let mut p = p.scaled(1.0 / (1.0 + eps / 3.0));
    p.bounded = p.max_abs(&[(-1.0, 1.0)], SWEEP_POINTS) <= 1.0 + 1e-9;
    if !p.bounded {
        return Err(Error::Approximation("bounded sqrt exceeds 1 on [-1, 1]".into()));
    }
    Ok(p)
}

/// Polynomial within `eps` of the step `H(x - 3 eta / 4)` on
/// `[-1, eta/2]` and `[eta, 1]`, with `|p| <= 1` on `[-1, 1]`.
///
/// Interpolates an erf step whose own error at the edges of the transition
/// window is `eps/4`, to tolerance `eps/4`, then shrinks by `1 + eps/4`.
pub fn heaviside_poly(eta: f64, eps: f64) -> Result<ChebPoly> {
    check_args(eta, eps)?;
    let x0 = 0.75 * eta;
    let k = 4.0 * erfc_inv(eps / 2.0) / eta;
    let s = move |x: f64| smooth_step(x, x0, k);
    let p = fit(&s, (-1.0, 1.0), eps / 4.0, &[(-1.0, 1.0)], "step polynomial")?;
    let mut p = p.scaled(1.0 / (1.0 + eps / 4.0));
    p.bounded = p.max_abs(&[(-1.0, 1.0)], SWEEP_POINTS) <= 1.0 + 1e-9;
    let step = |x: f64| if x >= x0 { 1.0 } else { 0.0 };
    let err = p.max_error(step, &[(-1.0, eta / 2.0), (eta, 1.0)], SWEEP_POINTS);
    if !p.bounded || err > eps {
        return Err(Error::Approximation(format!(
            "step polynomial misses its bounds (error {err:e}, bounded {})",
            p.bounded
        )));
    }
    Ok(p)
}

/// The two factors of [`sqrt_product`] and their product.
#[derive(Debug, Clone, Serialize)]
pub struct SqrtProduct {
    pub product: ChebPoly,
    pub sqrt_factor: ChebPoly,
    pub step_factor: ChebPoly,
    pub eps_sqrt: f64,
    pub eps_step: f64,
}

/// `p = p1 p2` with `|p| <= 1` on `[-1, 1]` and `|p - sqrt(x)| <= eps` on
/// `[eta, 1]`. The budget splits as `eps1 = eps/2` for `p1` and
/// `eps2 = eps / (2 (1 + eps1))` for the step `p2`.
pub fn sqrt_product_parts(eta: f64, eps: f64) -> Result<SqrtProduct> {
    check_args(eta, eps)?;
    let eps1 = eps / 2.0;
    let eps2 = eps / (2.0 * (1.0 + eps1));
    let p1 = cheb_sqrt_bounded(eta, eps1)?;
    let p2 = heaviside_poly(eta, eps2)?;
    let mut p = p1.mul(&p2)?;
    let peak = p.max_abs(&[(-1.0, 1.0)], SWEEP_POINTS);
    let err = p.max_error(f64::sqrt, &[(eta, 1.0)], SWEEP_POINTS);
    p.bounded = peak <= 1.0 + 1e-9;
    if !p.bounded || err > eps {
        return Err(Error::Approximation(format!(
            "product polynomial misses its bounds (error {err:e}, peak {peak})"
        )));
    }
    Ok(SqrtProduct {
        product: p,
        sqrt_factor: p1,
        step_factor: p2,
        eps_sqrt: eps1,
        eps_step: eps2,
    })
}

pub fn sqrt_product(eta: f64, eps: f64) -> Result<ChebPoly> {
    Ok(sqrt_product_parts(eta, eps)?.product)
}

#[derive(Debug, Clone, Serialize)]
pub struct HmuReport {
    #[serde(with = "c64_pair")]
    pub mu: Complex64,
    pub nu: f64,
    pub eta: f64,
    pub alpha_mu: f64,
    pub degree: usize,
    /// `max |eig(p(G)) - sqrt(eig(G))|`, both sorted.
    pub spectral_error: f64,
    /// `max |sqrt(eig(G)) - sqrt((s_i^2 / alpha^2 + nu) / (1 + nu))|`.
    pub exact_map_error: f64,
    /// Smallest singular value recovered from the smallest eigenvalue of `p(G)`.
    pub sigma0_estimate: f64,
    pub sigma0_exact: f64,
    /// Bound on `|estimate^2 - exact^2|` implied by `spectral_error <= eps`.
    pub sigma0_sq_error_bound: f64,
}

/// Builds `G = ((A - mu I)^H (A - mu I) / alpha^2 + nu I) / (1 + nu)`,
/// applies the product polynomial for `eta = nu / (1 + nu)` and compares
/// the spectrum of `p(G)` with that of `sqrt(G)`.
pub fn verify_hmu(a: &ComplexMatrix, mu: Complex64, nu: f64, eps: f64) -> Result<HmuReport> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::Input(format!("nu must be positive, got {nu}")));
    }
    if !mu.re.is_finite() || !mu.im.is_finite() {
        return Err(Error::Input("mu must be finite".into()));
    }
    let alpha = 1.0 + mu.norm();
    let eta = nu / (1.0 + nu);
    let n = a.n();
    let s = shifted(a, mu).to_dmatrix();
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut g = (s.adjoint() * &s / Complex64::new(alpha * alpha, 0.0) + &id * Complex64::new(nu, 0.0))
        / Complex64::new(1.0 + nu, 0.0);
    // symmetrize away rounding so the eigensolver sees an exactly Hermitian matrix
    g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);

    let (g_eigs, _) = hermitian_eigen(&g);
    let lo = g_eigs[0];
    let hi = g_eigs[n - 1];
    if lo < eta - 1e-12 || hi > 1.0 + 1e-12 {
        return Err(Error::Contract(format!(
            "spectrum [{lo}, {hi}] escapes [{eta}, 1]; is ||A|| > 1?"
        )));
    }
    let p = sqrt_product(eta, eps)?;
    let pg = p.eval_matrix(&g);
    let pg = (&pg + pg.adjoint()) * Complex64::new(0.5, 0.0);
    let (p_eigs, _) = hermitian_eigen(&pg);
    let exact: Vec<f64> = g_eigs.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let spectral_error = p_eigs
        .iter()
        .zip(&exact)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let mut sv = singular_values(&ComplexMatrix::from_dmatrix(&s)?);
    sv.reverse();
    let exact_map_error = sv
        .iter()
        .map(|&x| ((x * x / (alpha * alpha) + nu) / (1.0 + nu)).sqrt())
        .zip(&exact)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let e0 = p_eigs[0];
    let sigma0_estimate = alpha * ((1.0 + nu) * e0 * e0 - nu).max(0.0).sqrt();
    let true_e0 = exact[0];
    let sigma0_sq_error_bound = alpha * alpha * (1.0 + nu) * (2.0 * true_e0 * eps + eps * eps);

    Ok(HmuReport {
        mu,
        nu,
        eta,
        alpha_mu: alpha,
        degree: p.degree(),
        spectral_error,
        exact_map_error,
        sigma0_estimate,
        sigma0_exact: sv[0],
        sigma0_sq_error_bound,
    })
}
