//! Shrinking-disk grid search for one eigenvalue.
//!
//! Level `l` lays a square grid of spacing `delta_l = 1 / (kappa (3 2^l)^m)`
//! over the current disk and accepts the first point (row-major, real part
//! outer) whose smallest singular value is at most `delta_l`. The disk then
//! moves to the accepted point with radius `3 (kappa sigma)^(1/m)`, which is
//! at most `2^-l`, so after `ceil(log2(1/eps))` levels the accepted point is
//! within `eps` of an eigenvalue.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64_opt, c64_pair, operator_norm, ComplexMatrix, ComplexVector};
use crate::oracle::{ground_vector, OracleMode, QueryKey, SigmaOracle, SigmaOracleConfig};

/// Tolerance on the `||A|| <= 1` precondition.
pub const NORM_TOL: f64 = 1e-12;

/// Largest grid half-width accepted before reporting a range error.
const MAX_HALF_WIDTH: f64 = (1u64 << 31) as f64;

/// Level-1 restriction of the grid. Regions are closed and inflated by the
/// level-1 spacing, so eigenvalues on the boundary count as inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Disk,
    /// `Re z >= 0` within the unit disk.
    RightHalf,
    /// The real segment `[-1, 1]`.
    RealSegment,
    Rectangle {
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
    },
}

impl Region {
    pub fn contains(&self, mu: Complex64, margin: f64) -> bool {
        match *self {
            Region::Disk => mu.norm() <= 1.0 + margin,
            Region::RightHalf => mu.re >= 0.0 && mu.norm() <= 1.0 + margin,
            Region::RealSegment => mu.im.abs() <= margin && mu.re.abs() <= 1.0 + margin,
            Region::Rectangle {
                re_min,
                re_max,
                im_min,
                im_max,
            } => {
                mu.re >= re_min - margin
                    && mu.re <= re_max + margin
                    && mu.im >= im_min - margin
                    && mu.im <= im_max + margin
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub epsilon: f64,
    pub kappa: f64,
    pub m: u32,
    pub p_fail: f64,
    pub oracle: SigmaOracleConfig,
    /// `None` scans the full square around the unit disk.
    pub region: Option<Region>,
    pub max_levels_override: Option<usize>,
}

impl SolverParams {
    pub fn new(epsilon: f64, kappa: f64, m: u32) -> Self {
        SolverParams {
            epsilon,
            kappa,
            m,
            p_fail: 0.0,
            oracle: SigmaOracleConfig::exact(),
            region: None,
            max_levels_override: None,
        }
    }

    pub fn with_oracle(mut self, oracle: SigmaOracleConfig) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn with_p_fail(mut self, p_fail: f64) -> Self {
        self.p_fail = p_fail;
        self
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = Some(region);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Input(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.kappa >= 1.0) || !self.kappa.is_finite() {
            return Err(Error::Input(format!("kappa must be a finite number >= 1, got {}", self.kappa)));
        }
        if self.m == 0 {
            return Err(Error::Input("m must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.p_fail) {
            return Err(Error::Input(format!("p_fail must lie in [0, 1), got {}", self.p_fail)));
        }
        if self.oracle.mode == OracleMode::Noisy && self.oracle.precision < 0.0 {
            return Err(Error::Input("oracle precision must be non-negative".into()));
        }
        Ok(())
    }

    fn is_noisy(&self) -> bool {
        self.oracle.mode == OracleMode::Noisy
    }

    /// Levels to run. Under noise the accepted true `sigma` can reach
    /// `1.25 delta`, which widens the final disk by `1.25^(1/m)`.
    pub fn levels(&self) -> usize {
        if let Some(l) = self.max_levels_override {
            return l;
        }
        if self.is_noisy() {
            let slack = 1.25f64.powf(1.0 / self.m as f64);
            level_count(self.epsilon / slack)
        } else {
            level_count(self.epsilon)
        }
    }
}

/// `1 / (kappa (3 2^l)^m)`.
pub fn grid_spacing(l: usize, kappa: f64, m: u32) -> Result<f64> {
    if l == 0 || m == 0 || !(kappa >= 1.0) {
        return Err(Error::Input("grid spacing needs l >= 1, m >= 1, kappa >= 1".into()));
    }
    let base = 3.0 * 2f64.powi(l.min(i32::MAX as usize) as i32);
    let delta = 1.0 / (kappa * base.powi(m.min(i32::MAX as u32) as i32));
    if !delta.is_normal() {
        return Err(Error::Range(format!(
            "grid spacing underflows at level {l} with m = {m}, kappa = {kappa}"
        )));
    }
    Ok(delta)
}

/// `ceil(log2(1/eps))`: the smallest `L >= 1` with `2^-L <= eps`.
pub fn level_count(epsilon: f64) -> usize {
    let mut l = (1.0 / epsilon).log2().ceil().max(1.0) as usize;
    while l > 1 && 2f64.powi(1 - l as i32) <= epsilon {
        l -= 1;
    }
    while 2f64.powi(-(l as i32)) > epsilon {
        l += 1;
    }
    l
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingRegion {
    #[serde(with = "c64_pair")]
    pub center: Complex64,
    pub radius: f64,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub delta: f64,
    pub region: SamplingRegion,
    /// `s = ceil(R / delta)`; indices run over `[-s, s]`.
    pub half_width: u64,
    /// Points in the full grid, `(2s+1)^2` or `2s+1` on the real line.
    pub grid_points: u64,
    pub oracle_calls: u64,
    #[serde(with = "c64_opt")]
    pub accepted: Option<Complex64>,
    pub accepted_index: Option<(i64, i64)>,
    pub accepted_sigma: Option<f64>,
    /// Noisy mode only: the true value behind the accepted estimate.
    pub accepted_exact_sigma: Option<f64>,
    pub oracle_precision: Option<f64>,
    pub next_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    Found {
        #[serde(with = "c64_pair")]
        estimate: Complex64,
    },
    NoEigenvalueInRegion {
        margin: f64,
    },
    Failure {
        level: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub levels: Vec<LevelRecord>,
    pub planned_levels: usize,
    pub total_oracle_calls: u64,
    /// Upper bound on calls used to split the failure budget.
    pub planned_oracle_calls: f64,
    pub per_call_fail_prob: Option<f64>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum GridShape {
    Plane,
    RealLine,
}

/// Upper bound on the total number of grid points over all levels, using
/// `R_1 = 1` and `R_l <= 2^-(l-1)` afterwards.
fn planned_calls(params: &SolverParams, levels: usize, shape: GridShape) -> Result<f64> {
    let mut total = 0.0;
    let slack = if params.is_noisy() {
        1.25f64.powf(1.0 / params.m as f64)
    } else {
        1.0
    };
    for l in 1..=levels {
        let delta = grid_spacing(l, params.kappa, params.m)?;
        let radius = if l == 1 { 1.0 } else { slack * 2f64.powi(1 - l as i32) };
        let side = 2.0 * (radius / delta).ceil() + 1.0;
        total += match shape {
            GridShape::Plane => side * side,
            GridShape::RealLine => side,
        };
    }
    Ok(total)
}

fn check_norm(a: &ComplexMatrix) -> Result<()> {
    let norm = operator_norm(a);
    if norm > 1.0 + NORM_TOL {
        return Err(Error::Input(format!(
            "operator norm {norm} exceeds 1; rescale the matrix (or pass --normalize)"
        )));
    }
    Ok(())
}

struct SearchOutput {
    estimate: Option<Complex64>,
    trace: SolverTrace,
}

fn search(a: &ComplexMatrix, params: &SolverParams, shape: GridShape) -> Result<SearchOutput> {
    params.validate()?;
    check_norm(a)?;
    let levels = params.levels();

    if a.n() == 1 {
        let z = a.get(0, 0);
        let estimate = if shape == GridShape::RealLine { Complex64::new(z.re, 0.0) } else { z };
        let inside = params.region.is_none_or(|r| r.contains(estimate, 0.0));
        let outcome = if inside {
            Outcome::Found { estimate }
        } else {
            Outcome::NoEigenvalueInRegion { margin: 0.0 }
        };
        return Ok(SearchOutput {
            estimate: inside.then_some(estimate),
            trace: SolverTrace {
                levels: Vec::new(),
                planned_levels: 0,
                total_oracle_calls: 0,
                planned_oracle_calls: 0.0,
                per_call_fail_prob: None,
                outcome,
            },
        });
    }

    let oracle = SigmaOracle::new(a, params.oracle)?;
    let planned = planned_calls(params, levels, shape)?;
    let theta = params.is_noisy().then(|| if planned > 0.0 { params.p_fail / planned } else { 0.0 });

    let mut center = Complex64::new(0.0, 0.0);
    let mut radius = 1.0;
    let mut records = Vec::with_capacity(levels);
    let mut total_calls = 0u64;

    for l in 1..=levels {
        let delta = grid_spacing(l, params.kappa, params.m)?;
        let s_f = (radius / delta).ceil();
        if s_f > MAX_HALF_WIDTH {
            return Err(Error::Range(format!(
                "grid half-width {s_f} at level {l} is too large"
            )));
        }
        let s = s_f as i64;
        let precision = if params.is_noisy() {
            let cap = if params.oracle.precision > 0.0 { params.oracle.precision } else { f64::INFINITY };
            Some((delta / 4.0).min(cap))
        } else {
            None
        };
        let side = (2 * s + 1) as u64;
        let mut record = LevelRecord {
            level: l,
            delta,
            region: SamplingRegion { center, radius, level: l },
            half_width: s as u64,
            grid_points: match shape {
                GridShape::Plane => side * side,
                GridShape::RealLine => side,
            },
            oracle_calls: 0,
            accepted: None,
            accepted_index: None,
            accepted_sigma: None,
            accepted_exact_sigma: None,
            oracle_precision: precision,
            next_radius: None,
        };
        let region = if l == 1 { params.region } else { None };
        let k_range = match shape {
            GridShape::Plane => -s..=s,
            GridShape::RealLine => 0..=0,
        };
        let mut calls = 0u64;
        'outer: for j in -s..=s {
            for k in k_range.clone() {
                let mu = center + Complex64::new(j as f64 * delta, k as f64 * delta);
                if let Some(r) = region {
                    if !r.contains(mu, delta) {
                        continue;
                    }
                }
                calls += 1;
                let est = oracle.query_with(
                    mu,
                    QueryKey::new(l as u64, j, k),
                    precision.unwrap_or(0.0),
                    theta.unwrap_or(0.0),
                )?;
                if est.value <= delta {
                    record.accepted = Some(mu);
                    record.accepted_index = Some((j, k));
                    record.accepted_sigma = Some(est.value);
                    record.accepted_exact_sigma = est.exact_backend_value;
                    break 'outer;
                }
            }
        }
        record.oracle_calls = calls;
        total_calls += calls;
        log::debug!(
            "level {l}: delta {delta:.3e}, half-width {s}, {calls} calls, accepted {:?}",
            record.accepted
        );

        let Some(mu) = record.accepted else {
            records.push(record);
            let mut trace = SolverTrace {
                levels: records,
                planned_levels: levels,
                total_oracle_calls: total_calls,
                planned_oracle_calls: planned,
                per_call_fail_prob: theta,
                outcome: Outcome::Failure {
                    level: l,
                    reason: String::new(),
                },
            };
            if l == 1 && params.region.is_some() {
                trace.outcome = Outcome::NoEigenvalueInRegion { margin: delta };
                return Ok(SearchOutput { estimate: None, trace });
            }
            let reason = if params.is_noisy() {
                format!("no grid point passed at level {l}; a corrupted oracle call likely misled an earlier level")
            } else {
                format!("no grid point passed at level {l}; kappa or m is smaller than the matrix requires")
            };
            trace.outcome = Outcome::Failure { level: l, reason: reason.clone() };
            let trace = Box::new(trace.into());
            return Err(if params.is_noisy() {
                Error::ProbabilisticFailure { level: l, reason, trace }
            } else {
                Error::BoundViolation { level: l, reason, trace }
            });
        };
        // one-sided noise: the true value may exceed the estimate by the precision
        let sigma = record.accepted_sigma.unwrap_or(0.0) + precision.unwrap_or(0.0);
        let next = 3.0 * (params.kappa * sigma).powf(1.0 / params.m as f64);
        record.next_radius = Some(next);
        records.push(record);
        center = mu;
        radius = next;
    }

    Ok(SearchOutput {
        estimate: Some(center),
        trace: SolverTrace {
            levels: records,
            planned_levels: levels,
            total_oracle_calls: total_calls,
            planned_oracle_calls: planned,
            per_call_fail_prob: theta,
            outcome: Outcome::Found { estimate: center },
        },
    })
}

fn require_found(out: SearchOutput) -> Result<(Complex64, SolverTrace)> {
    match out.estimate {
        Some(mu) => Ok((mu, out.trace)),
        None => {
            let reason = "no eigenvalue detected in the region at level 1".to_string();
            Err(Error::BoundViolation {
                level: 1,
                reason,
                trace: Box::new(out.trace.into()),
            })
        }
    }
}

/// Estimate one eigenvalue of `a` (with `||a|| <= 1`) to within `epsilon`.
pub fn estimate_eigenvalue(a: &ComplexMatrix, params: &SolverParams) -> Result<(Complex64, SolverTrace)> {
    require_found(search(a, params, GridShape::Plane)?)
}

/// As [`estimate_eigenvalue`] but sampling only the real axis. The caller
/// asserts that every eigenvalue is real.
pub fn estimate_real_eigenvalue(a: &ComplexMatrix, params: &SolverParams) -> Result<(f64, SolverTrace)> {
    let (mu, trace) = require_found(search(a, params, GridShape::RealLine)?)?;
    Ok((mu.re, trace))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum RegionResult {
    Found {
        #[serde(with = "c64_pair")]
        eigenvalue: Complex64,
    },
    /// No level-1 grid point inside the region passed, so no eigenvalue lies
    /// deeper than `margin` inside it.
    None { margin: f64 },
}

/// Decide whether the region in `params` (default: right half of the unit
/// disk) holds an eigenvalue. Requires the exact oracle.
pub fn has_eigenvalue_in_region(a: &ComplexMatrix, params: &SolverParams) -> Result<(RegionResult, SolverTrace)> {
    if params.is_noisy() {
        return Err(Error::Unsupported(
            "region existence checks need the exact oracle".into(),
        ));
    }
    let mut p = *params;
    if p.region.is_none() {
        p.region = Some(Region::RightHalf);
    }
    let out = search(a, &p, GridShape::Plane)?;
    let result = match (out.estimate, &out.trace.outcome) {
        (Some(mu), _) => RegionResult::Found { eigenvalue: mu },
        (None, Outcome::NoEigenvalueInRegion { margin }) => RegionResult::None { margin: *margin },
        (None, _) => unreachable!("search without estimate reports a region miss"),
    };
    Ok((result, out.trace))
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenvectorResult {
    pub vector: ComplexVector,
    /// `||(A - lambda I) v||`.
    pub residual: f64,
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

/// Approximate eigenvector for an eigenvalue estimate `lambda`: the smallest
/// right singular vector of `A - lambda I`. When `reference` (the true
/// eigenvalue) is known, the estimate must lie within `gap / 2` of it.
pub fn eigenvector_for(
    a: &ComplexMatrix,
    lambda: Complex64,
    gap: f64,
    reference: Option<Complex64>,
) -> Result<EigenvectorResult> {
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(Error::Input(format!("gap bound must be positive, got {gap}")));
    }
    if let Some(truth) = reference {
        let err = (lambda - truth).norm();
        if err >= gap / 2.0 {
            return Err(Error::Contract(format!(
                "estimate error {err} is not below half the gap {gap}"
            )));
        }
    }
    let g = ground_vector(a, lambda)?;
    let mut warnings = Vec::new();
    if g.degenerate {
        warnings.push(
            "smallest singular value is degenerate; the vector is one of several candidates".to_string(),
        );
    }
    Ok(EigenvectorResult {
        residual: g.sigma,
        vector: g.vector,
        degenerate: g.degenerate,
        warnings,
    })
}
