//! Smallest-modulus eigenvalue by annulus search, and the spectral gap.
//!
//! The modulus of the smallest eigenvalue is bracketed in `[R1, R2]`. Each
//! sweep samples `M` points on the circle `|z| = R1`. If one passes the
//! threshold `delta`, some eigenvalue lies within `3 (kappa sigma)^(1/m)` of
//! it and `R2` drops to `R1` plus that distance (Case 1). If none passes, the
//! `delta`-disks around the samples contain no eigenvalue and cover the band
//! up to `R1 + c delta`, so `R1` advances by `c delta` (Case 2).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensolver::NORM_TOL;
use crate::error::{Error, Result};
use crate::linalg::{c64_opt, c64_pair, inverse, operator_norm, shifted, ComplexMatrix};
use crate::oracle::{OracleMode, QueryKey, SigmaOracle, SigmaOracleConfig};

/// Largest dimension accepted by [`largest_modulus_eigenvalue`].
pub const MAX_INVERSE_DIM: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremeParams {
    pub epsilon: f64,
    pub kappa: f64,
    pub m: u32,
    pub oracle: SigmaOracleConfig,
    /// Fraction of `delta` gained by a Case-2 sweep.
    pub c: f64,
    /// Safety cap on the number of Case-1 levels.
    pub max_levels: usize,
}

impl ExtremeParams {
    pub fn new(epsilon: f64, kappa: f64, m: u32) -> Self {
        ExtremeParams {
            epsilon,
            kappa,
            m,
            oracle: SigmaOracleConfig::exact(),
            c: 0.9,
            max_levels: 200,
        }
    }

    pub fn with_oracle(mut self, oracle: SigmaOracleConfig) -> Self {
        self.oracle = oracle;
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
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::Input(format!("c must lie in (0, 1), got {}", self.c)));
        }
        if self.max_levels == 0 {
            return Err(Error::Input("max_levels must be positive".into()));
        }
        self.oracle.validate()
    }

    /// `sigma_0(0)` at or below this is treated as a zero eigenvalue.
    pub fn singular_threshold(&self) -> f64 {
        (self.epsilon / 10.0).max(1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CircleCount {
    pub count: usize,
    /// The annulus is thinner than one sample disk.
    pub cover_complete: bool,
}

/// `ceil(pi / arcsin(sqrt(1 - c^2) delta / r1))`.
pub fn circle_count(r1: f64, delta: f64, c: f64) -> Result<CircleCount> {
    if !(r1 > 0.0) || !(delta > 0.0) || !(c > 0.0 && c < 1.0) {
        return Err(Error::Input(format!(
            "circle count needs r1 > 0, delta > 0, c in (0, 1); got {r1}, {delta}, {c}"
        )));
    }
    let x = (1.0 - c * c).sqrt() * delta / r1;
    if x > 1.0 {
        return Ok(CircleCount {
            count: 1,
            cover_complete: true,
        });
    }
    let count = (std::f64::consts::PI / x.asin()).ceil() as usize;
    Ok(CircleCount {
        count,
        cover_complete: false,
    })
}

/// Whether `m` disks of radius `delta` centred evenly on `|z| = r1` cover
/// the circle `|z| = r1 + c delta`. The farthest point of the outer circle
/// from every centre sits halfway between two neighbours.
pub fn covers(r1: f64, delta: f64, c: f64, m: usize) -> bool {
    let r = r1 + c * delta;
    let half = std::f64::consts::PI / m as f64;
    r1 * r1 + r * r - 2.0 * r1 * r * half.cos() <= delta * delta
}

/// Smallest count that actually covers the circle of radius `r1 + c delta`.
/// The closed-form count places neighbouring disks so that they meet at
/// radius `r1 cos(theta) + c delta`, a little short of the target circle, so
/// it is raised until the cover holds.
pub fn cover_count(r1: f64, delta: f64, c: f64) -> Result<usize> {
    let base = circle_count(r1, delta, c)?.count;
    let r = r1 + c * delta;
    let t = (r1 * r1 + r * r - delta * delta) / (2.0 * r1 * r);
    let mut m = if t <= -1.0 {
        1
    } else {
        (std::f64::consts::PI / t.min(1.0).acos()).ceil() as usize
    };
    m = m.max(base).max(1);
    while !covers(r1, delta, c, m) {
        m += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub r_inner: f64,
    pub delta: f64,
    pub points: usize,
    pub oracle_calls: u64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusLevel {
    pub level: usize,
    pub r_inner: f64,
    pub r_outer: f64,
    pub sweeps: Vec<Sweep>,
    #[serde(with = "c64_opt")]
    pub accepted: Option<Complex64>,
    pub accepted_sigma: Option<f64>,
    pub next_r_inner: f64,
    pub next_r_outer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum AnnulusOutcome {
    Found {
        #[serde(with = "c64_pair")]
        estimate: Complex64,
    },
    /// `sigma_0(0)` fell below the singularity threshold.
    Singular,
    /// `R1` passed `R2` with no acceptance outside the exclusion disk.
    Exhausted,
    Failure {
        level: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusTrace {
    pub initial_sigma0: Option<f64>,
    /// Radius around 0 ignored by the search (second gap pass).
    pub exclusion_radius: Option<f64>,
    pub kappa: f64,
    pub levels: Vec<AnnulusLevel>,
    pub total_oracle_calls: u64,
    pub outcome: AnnulusOutcome,
}

struct AnnulusRun {
    estimate: Option<Complex64>,
    /// Distance bound `3 (kappa sigma)^(1/m)` from the estimate to an eigenvalue.
    distance_bound: f64,
    trace: AnnulusTrace,
}

fn check_norm(a: &ComplexMatrix) -> Result<f64> {
    let norm = operator_norm(a);
    if norm > 1.0 + NORM_TOL {
        return Err(Error::Input(format!("operator norm {norm} exceeds 1")));
    }
    Ok(norm)
}

/// Runs the sweeps from `[r1, r2]`. With `exclusion = Some(r_x)`, eigenvalues
/// within `r_x` of the origin are ignored: `delta` is kept small enough that
/// an accepted point at radius `r1` cannot be explained by them.
fn annulus_search(
    oracle: &SigmaOracle,
    params: &ExtremeParams,
    kappa: f64,
    mut r1: f64,
    mut r2: f64,
    exclusion: Option<f64>,
    mut trace: AnnulusTrace,
) -> Result<AnnulusRun> {
    let m = params.m as f64;
    let noisy = params.oracle.mode == OracleMode::Noisy;
    let mut estimate = None;
    let mut distance_bound = f64::INFINITY;
    let mut sweep_index = 0i64;

    for level in 1..=params.max_levels {
        if let Some(found) = estimate.filter(|_| r2 - r1 < params.epsilon) {
            trace.outcome = AnnulusOutcome::Found { estimate: found };
            return Ok(AnnulusRun {
                estimate,
                distance_bound,
                trace,
            });
        }
        let width = r2 - r1;
        let mut record = AnnulusLevel {
            level,
            r_inner: r1,
            r_outer: r2,
            sweeps: Vec::new(),
            accepted: None,
            accepted_sigma: None,
            next_r_inner: r1,
            next_r_outer: r2,
        };
        let mut accepted = None;
        while accepted.is_none() {
            if r1 > r2 {
                break;
            }
            let mut reach = (width / 2.0).max(0.0);
            if let Some(rx) = exclusion {
                reach = reach.min(0.99 * (r1 - rx));
            }
            let delta = if reach > 0.0 {
                reach.powf(m) / (3f64.powf(m) * kappa)
            } else {
                // a zero-width bracket: any pass pins the eigenvalue exactly
                params.epsilon.powf(m) / (3f64.powf(m) * kappa)
            };
            if !delta.is_normal() {
                return Err(Error::Range(format!("annulus threshold underflows at level {level}")));
            }
            let precision = noisy.then(|| {
                let cap = if params.oracle.precision > 0.0 { params.oracle.precision } else { f64::INFINITY };
                (delta / 4.0).min(cap)
            });
            // a failing noisy sample only certifies a true value above delta - precision
            let cover_radius = delta - precision.unwrap_or(0.0);
            let count = cover_count(r1, cover_radius, params.c)?;
            let mut calls = 0u64;
            for j in 0..count {
                let angle = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
                let mu = Complex64::from_polar(r1, angle);
                calls += 1;
                let est = oracle.query_with(
                    mu,
                    QueryKey::new(level as u64, sweep_index, j as i64),
                    precision.unwrap_or(0.0),
                    params.oracle.fail_prob,
                )?;
                if est.value <= delta {
                    accepted = Some((mu, est.value + precision.unwrap_or(0.0), est.value));
                    break;
                }
            }
            sweep_index += 1;
            trace.total_oracle_calls += calls;
            record.sweeps.push(Sweep {
                r_inner: r1,
                delta,
                points: count,
                oracle_calls: calls,
                passed: accepted.is_some(),
            });
            if accepted.is_none() {
                r1 += params.c * cover_radius;
            }
        }

        let Some((mu, sigma_bound, sigma_est)) = accepted else {
            record.next_r_inner = r1;
            trace.levels.push(record);
            if exclusion.is_some() {
                trace.outcome = AnnulusOutcome::Exhausted;
                return Ok(AnnulusRun {
                    estimate: None,
                    distance_bound,
                    trace,
                });
            }
            let reason = format!(
                "inner radius {r1} passed outer radius {r2} without an accepted sample"
            );
            trace.outcome = AnnulusOutcome::Failure {
                level,
                reason: reason.clone(),
            };
            let trace = Box::new(trace.into());
            return Err(if noisy {
                Error::ProbabilisticFailure { level, reason, trace }
            } else {
                Error::BoundViolation { level, reason, trace }
            });
        };
        let reach = 3.0 * (kappa * sigma_bound).powf(1.0 / m);
        r2 = r2.min(r1 + reach);
        log::debug!(
            "annulus level {level}: {} sweeps, accepted at radius {r1:.6}, bracket now [{r1:.6}, {r2:.6}]",
            record.sweeps.len()
        );
        distance_bound = reach;
        estimate = Some(mu);
        record.accepted = Some(mu);
        record.accepted_sigma = Some(sigma_est);
        record.next_r_inner = r1;
        record.next_r_outer = r2;
        trace.levels.push(record);
    }
    let reason = format!("annulus did not narrow below {} within {} levels", params.epsilon, params.max_levels);
    trace.outcome = AnnulusOutcome::Failure {
        level: params.max_levels,
        reason: reason.clone(),
    };
    Err(Error::BoundViolation {
        level: params.max_levels,
        reason,
        trace: Box::new(trace.into()),
    })
}

fn new_trace(kappa: f64) -> AnnulusTrace {
    AnnulusTrace {
        initial_sigma0: None,
        exclusion_radius: None,
        kappa,
        levels: Vec::new(),
        total_oracle_calls: 0,
        outcome: AnnulusOutcome::Exhausted,
    }
}

fn smallest_modulus_run(a: &ComplexMatrix, params: &ExtremeParams) -> Result<AnnulusRun> {
    params.validate()?;
    check_norm(a)?;
    let oracle = SigmaOracle::new(a, params.oracle)?;
    let mut trace = new_trace(params.kappa);
    let zero = Complex64::new(0.0, 0.0);
    let est = oracle.query(zero, QueryKey::new(0, 0, 0))?;
    trace.total_oracle_calls += 1;
    trace.initial_sigma0 = Some(est.value);
    let precision = if oracle.is_exact() { 0.0 } else { params.oracle.precision };
    if est.value <= params.singular_threshold() {
        trace.outcome = AnnulusOutcome::Singular;
        return Ok(AnnulusRun {
            estimate: Some(zero),
            distance_bound: 3.0 * (params.kappa * (est.value + precision)).powf(1.0 / params.m as f64),
            trace,
        });
    }
    let r1 = (est.value - precision).max(params.singular_threshold());
    let r2 = (3.0 * (params.kappa * (est.value + precision)).powf(1.0 / params.m as f64)).min(1.0);
    annulus_search(&oracle, params, params.kappa, r1, r2, None, trace)
}

/// Eigenvalue of smallest modulus, to within `epsilon` in modulus.
pub fn smallest_modulus_eigenvalue(a: &ComplexMatrix, params: &ExtremeParams) -> Result<(Complex64, AnnulusTrace)> {
    let run = smallest_modulus_run(a, params)?;
    Ok((run.estimate.expect("successful run has an estimate"), run.trace))
}

/// Eigenvalue of largest modulus via the smallest-modulus eigenvalue of
/// `A^-1 / ||A^-1||`. Exact oracle only; inversion amplifies rounding by
/// the condition number of `A`.
pub fn largest_modulus_eigenvalue(a: &ComplexMatrix, params: &ExtremeParams) -> Result<(Complex64, AnnulusTrace)> {
    if params.oracle.mode != OracleMode::Exact {
        return Err(Error::Unsupported("largest-modulus search needs the exact oracle".into()));
    }
    if a.n() > MAX_INVERSE_DIM {
        return Err(Error::Unsupported(format!(
            "largest-modulus search is limited to n <= {MAX_INVERSE_DIM}"
        )));
    }
    check_norm(a)?;
    let inv = inverse(a)?;
    let s = operator_norm(&inv);
    let b = inv.scale(Complex64::new(1.0 / s, 0.0))?;
    let (mu, trace) = smallest_modulus_eigenvalue(&b, params)?;
    if mu.norm() == 0.0 {
        return Err(Error::Input("inverse is numerically singular".into()));
    }
    Ok((1.0 / (mu * s), trace))
}

#[derive(Debug, Clone, Serialize)]
pub struct GapResult {
    pub gap: f64,
    #[serde(with = "c64_pair")]
    pub lambda_min: Complex64,
    /// Estimate of the eigenvalue nearest `lambda_min`, when one was found.
    #[serde(with = "c64_opt")]
    pub neighbour: Option<Complex64>,
    pub warnings: Vec<String>,
    pub first_pass: AnnulusTrace,
    pub second_pass: AnnulusTrace,
}

/// Distance from the smallest-modulus eigenvalue to its nearest other
/// eigenvalue.
///
/// The second pass runs on `B = (A - l I) / (1 + |l|)`, whose own
/// smallest-modulus eigenvalue is the shifted `l` itself (within the
/// first-pass error). That eigenvalue is excluded by starting the annulus
/// outside its error disk and keeping every acceptance radius inside the
/// gap between. If nothing is found outside the disk the gap is reported as
/// zero with a multiplicity warning.
pub fn spectral_gap(a: &ComplexMatrix, params: &ExtremeParams) -> Result<GapResult> {
    let first = smallest_modulus_run(a, params)?;
    let lambda = first.estimate.expect("successful run has an estimate");
    let scale = 1.0 + lambda.norm();
    let b = shifted(a, lambda).scale(Complex64::new(1.0 / scale, 0.0))?;
    let norm_b = operator_norm(&b);
    let b = if norm_b > 1.0 {
        b.scale(Complex64::new(1.0 / norm_b, 0.0))?
    } else {
        b
    };
    let unscale = scale * norm_b.max(1.0);

    let mut second = *params;
    second.epsilon = params.epsilon / unscale;
    // dividing by `scale` shrinks the Jordan superdiagonal; undoing it costs
    // scale^(m-1) in the similarity
    let kappa_b = params.kappa * scale.powi(params.m as i32 - 1);
    second.kappa = kappa_b;
    let rx = first.distance_bound.max(params.epsilon / 4.0) / unscale;

    let mut warnings = Vec::new();
    let mut trace = new_trace(kappa_b);
    trace.exclusion_radius = Some(rx);
    let run = if 2.0 * rx >= 1.0 {
        AnnulusRun {
            estimate: None,
            distance_bound: f64::INFINITY,
            trace,
        }
    } else {
        let oracle = SigmaOracle::new(&b, second.oracle)?;
        annulus_search(&oracle, &second, kappa_b, 2.0 * rx, 1.0, Some(rx), trace)?
    };
    let (gap, neighbour) = match run.estimate {
        Some(mu) => (mu.norm() * unscale, Some(lambda + mu * unscale)),
        None => {
            warnings.push(format!(
                "no eigenvalue found beyond {:.3e} of the smallest one; it is likely repeated and the gap is reported as 0",
                rx * unscale
            ));
            (0.0, None)
        }
    };
    Ok(GapResult {
        gap,
        lambda_min: lambda,
        neighbour,
        warnings,
        first_pass: first.trace,
        second_pass: run.trace,
    })
}
