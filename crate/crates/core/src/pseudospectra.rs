//! `sigma_0` on rectangular grids, epsilon-pseudospectrum membership, and
//! the inclusion checks `L + D_eps ⊆ L_eps ⊆ L + D_r` with
//! `r = kappa eps` (diagonalizable) or `3 (kappa eps)^(1/m)` (defective).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64_vec, ComplexMatrix};
use crate::oracle::{SigmaOracle, SigmaOracleConfig, MAX_SHIFT};

/// Default absolute tolerance for [`check_inclusions`].
pub const INCLUSION_TOL: f64 = 1e-9;

/// Values of `sigma_0` over a uniform grid, stored with the imaginary index
/// outer and the real index inner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PspecGrid {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub resolution: usize,
    pub values: Vec<f64>,
}

impl PspecGrid {
    pub fn node(&self, i_re: usize, i_im: usize) -> Complex64 {
        let step = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * i as f64 / (self.resolution - 1) as f64;
        Complex64::new(step(self.re_range, i_re), step(self.im_range, i_im))
    }

    pub fn value(&self, i_re: usize, i_im: usize) -> f64 {
        self.values[i_im * self.resolution + i_re]
    }

    /// `(node, sigma_0)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let r = self.resolution;
        (0..r * r).map(move |idx| (self.node(idx % r, idx / r), self.values[idx]))
    }

    /// Node-wise `sigma_0 <= eps`.
    pub fn membership(&self, eps: f64) -> Vec<bool> {
        self.values.iter().map(|&v| v <= eps).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,sigma0\n");
        for (z, v) in self.iter() {
            out.push_str(&format!("{},{},{}\n", z.re, z.im, v));
        }
        out
    }

    pub fn sidecar(&self, eps_list: &[f64]) -> PspecSidecar {
        PspecSidecar {
            re_range: self.re_range,
            im_range: self.im_range,
            resolution: self.resolution,
            eps_list: eps_list.to_vec(),
        }
    }
}

/// Metadata written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PspecSidecar {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub resolution: usize,
    pub eps_list: Vec<f64>,
}

/// Exact `sigma_0` at every node of a `resolution x resolution` grid. The
/// rectangle must lie inside `|z| <= 2`.
pub fn pspec_grid(a: &ComplexMatrix, re_range: (f64, f64), im_range: (f64, f64), resolution: usize) -> Result<PspecGrid> {
    if resolution < 2 {
        return Err(Error::Input("resolution must be at least 2".into()));
    }
    for (lo, hi) in [re_range, im_range] {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Input(format!("invalid range [{lo}, {hi}]")));
        }
    }
    for re in [re_range.0, re_range.1] {
        for im in [im_range.0, im_range.1] {
            if Complex64::new(re, im).norm() > MAX_SHIFT {
                return Err(Error::Input(format!(
                    "grid corner {re}+{im}i lies outside |z| <= {MAX_SHIFT}"
                )));
            }
        }
    }
    let oracle = SigmaOracle::new(a, SigmaOracleConfig::exact())?;
    let mut grid = PspecGrid {
        re_range,
        im_range,
        resolution,
        values: Vec::with_capacity(resolution * resolution),
    };
    for i_im in 0..resolution {
        for i_re in 0..resolution {
            let mu = grid.node(i_re, i_im);
            grid.values.push(oracle.exact(mu));
        }
    }
    Ok(grid)
}

/// Known spectrum and Jordan bounds for the inclusion checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTruth {
    #[serde(with = "c64_vec")]
    pub eigenvalues: Vec<Complex64>,
    pub kappa: f64,
    /// Largest Jordan block; 1 means diagonalizable.
    pub m: u32,
}

impl SpectrumTruth {
    pub fn distance(&self, z: Complex64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| (z - l).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Radius `r` with `L_eps ⊆ L + D_r`.
    pub fn outer_radius(&self, eps: f64) -> f64 {
        if self.m <= 1 {
            self.kappa * eps
        } else {
            3.0 * (self.kappa * eps).powf(1.0 / self.m as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeViolation {
    pub re: f64,
    pub im: f64,
    pub sigma0: f64,
    pub distance: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsCheck {
    pub eps: f64,
    pub members: usize,
    pub inner_violations: Vec<NodeViolation>,
    pub outer_violations: Vec<NodeViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub checks: Vec<EpsCheck>,
    /// Nodes in the smaller-eps set but not in the larger one.
    pub nesting_violations: Vec<NodeViolation>,
    pub passed: bool,
}

pub fn check_inclusions(grid: &PspecGrid, truth: &SpectrumTruth, eps_list: &[f64], tol: f64) -> Result<InclusionReport> {
    if truth.eigenvalues.is_empty() {
        return Err(Error::Input("inclusion checks need the true eigenvalues".into()));
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Input("every eps must be positive".into()));
    }
    let dist: Vec<f64> = grid.iter().map(|(z, _)| truth.distance(z)).collect();
    let violation = |idx: usize, eps: f64| {
        let r = grid.resolution;
        let z = grid.node(idx % r, idx / r);
        NodeViolation {
            re: z.re,
            im: z.im,
            sigma0: grid.values[idx],
            distance: dist[idx],
            eps,
        }
    };

    let mut checks = Vec::new();
    for &eps in eps_list {
        let outer = truth.outer_radius(eps);
        let mut check = EpsCheck {
            eps,
            members: 0,
            inner_violations: Vec::new(),
            outer_violations: Vec::new(),
        };
        for (idx, &s) in grid.values.iter().enumerate() {
            if s <= eps {
                check.members += 1;
                if dist[idx] > outer + tol {
                    check.outer_violations.push(violation(idx, eps));
                }
            }
            if dist[idx] <= eps && s > eps + tol {
                check.inner_violations.push(violation(idx, eps));
            }
        }
        checks.push(check);
    }

    let mut sorted: Vec<f64> = eps_list.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut nesting_violations = Vec::new();
    for pair in sorted.windows(2) {
        let (small, large) = (pair[0], pair[1]);
        for (idx, &s) in grid.values.iter().enumerate() {
            if s <= small && s > large {
                nesting_violations.push(violation(idx, small));
            }
        }
    }
    let passed = nesting_violations.is_empty()
        && checks
            .iter()
            .all(|c| c.inner_violations.is_empty() && c.outer_violations.is_empty());
    Ok(InclusionReport {
        checks,
        nesting_violations,
        passed,
    })
}
