//! `pseudoeig`: command-line front end. Every command prints one JSON object
//! (`command`, `config`, the result fields and, for searches, `trace`).
//! Failures print `{"command", "error": {"category", "message"}}` and exit
//! with 2 (input), 3 (bound violation), 4 (probabilistic failure) or
//! 5 (approximation failure).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use pseudoeig::eigensolver::{
    eigenvector_for, estimate_eigenvalue, estimate_real_eigenvalue, has_eigenvalue_in_region, Region, RegionResult,
    SolverParams,
};
use pseudoeig::extreme::{largest_modulus_eigenvalue, smallest_modulus_eigenvalue, spectral_gap, ExtremeParams};
use pseudoeig::linalg::{operator_norm, read_matrix, write_matrix, MatrixFormat};
use pseudoeig::matgen::{jordan_matrix, GeneratedMatrix, JordanSpec};
use pseudoeig::oracle::SigmaOracleConfig;
use pseudoeig::polyapprox::{sqrt_product_parts, verify_hmu};
use pseudoeig::pseudospectra::{check_inclusions, pspec_grid, SpectrumTruth, INCLUSION_TOL};
use pseudoeig::roots::polynomial_root;
use pseudoeig::{ComplexMatrix, Error};

#[derive(Parser, Debug)]
#[command(
    name = "pseudoeig",
    version,
    about = "Eigenvalue estimation for non-normal matrices from smallest-singular-value queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Log verbosity on stderr: -v for info, -vv for per-level debug output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate one eigenvalue by grid refinement, or decide whether a region holds one.
    Eig {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Only look inside this region and report "found" or "none".
        #[arg(long, value_enum)]
        region: Option<RegionArg>,
    },
    /// Estimate one eigenvalue of a matrix whose spectrum is real, sampling the real axis only.
    EigReal {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Eigenvalue of smallest (or largest) modulus by annulus search.
    Extreme {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Search for the largest modulus instead (exact oracle only).
        #[arg(long)]
        largest: bool,
    },
    /// Distance from the smallest-modulus eigenvalue to its nearest neighbour.
    Gap {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Approximate eigenvector for an eigenvalue estimate.
    Eigvec {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Eigenvalue estimate, e.g. "0.5" or "-0.25+0.3i". Estimated with the grid search when omitted.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        /// Lower bound on the distance from the target eigenvalue to the rest of the spectrum.
        #[arg(long)]
        gap: f64,
    },
    /// Smallest singular value over a uniform grid, with optional inclusion checks.
    Pspec {
        #[command(flatten)]
        io: InputArgs,
        /// Grid resolution per axis.
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        /// Real range "lo,hi".
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        re: String,
        /// Imaginary range "lo,hi".
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        im: String,
        /// Comma-separated pseudospectrum levels.
        #[arg(long, default_value = "1e-3,1e-2,1e-1")]
        eps_list: String,
        /// Write the grid as CSV (re,im,sigma0) here, with a JSON sidecar at <path>.json.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Check the inclusions against the spectrum stored in a generator bundle.
        #[arg(long)]
        check: bool,
    },
    /// Generate a test matrix with prescribed Jordan structure.
    Gen {
        /// Comma-separated eigenvalues, one per Jordan block.
        #[arg(long, allow_hyphen_values = true)]
        eigs: String,
        /// Comma-separated block sizes (default: all 1).
        #[arg(long)]
        blocks: Option<String>,
        /// Condition number of the similarity.
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Result path; a .mtx extension writes the bare matrix in Matrix Market form.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One root of a polynomial via its normalized companion matrix.
    Roots {
        /// Coefficients, leading first, e.g. "1,0,-0.25" for x^2 - 0.25.
        #[arg(long, allow_hyphen_values = true)]
        monic: String,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounded polynomial approximation of sqrt(x) on [eta, 1]; with --in, also
    /// checks the Hermitian square root H_mu built from that matrix.
    ApproxSqrt {
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        /// Spectral floor of H_mu; sets eta = nu / (1 + nu).
        #[arg(long, conflicts_with = "eta")]
        nu: Option<f64>,
        /// Matrix for the H_mu check.
        #[arg(long = "in", requires = "mu")]
        input: Option<PathBuf>,
        /// Shift for the H_mu check, e.g. "0.5" or "0.1-0.2i".
        #[arg(long, allow_hyphen_values = true, requires = "input")]
        mu: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Rows in the CSV table over [-1, 1].
        #[arg(long, default_value_t = 2001)]
        resolution: usize,
        /// Write (x, p(x), sqrt(x), error) as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
struct InputArgs {
    /// Matrix file: JSON ({"n", "entries"} or a generator bundle) or Matrix Market (.mtx).
    #[arg(long = "in")]
    input: PathBuf,
    /// Result path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Divide the matrix by its operator norm when that exceeds 1; results are scaled back.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SolverArgs {
    /// Target accuracy.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Upper bound on the Jordan condition number.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Upper bound on the largest Jordan block size.
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Total failure probability budget (noisy oracle).
    #[arg(long, default_value_t = 0.1)]
    pfail: f64,
    #[arg(long, value_enum, default_value_t = OracleArg::Exact)]
    oracle: OracleArg,
    /// Cap on the noisy oracle precision; by default each level uses a quarter of its threshold.
    #[arg(long)]
    oracle_eps: Option<f64>,
    /// Seed of the noisy oracle.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Embed the full trace or a summary of it.
    #[arg(long, value_enum, default_value_t = TraceMode::Summary)]
    trace: TraceMode,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OracleArg {
    Exact,
    Noisy,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RegionArg {
    Disk,
    RightHalf,
    Real,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TraceMode {
    Summary,
    Full,
}

impl SolverArgs {
    fn oracle_config(&self) -> SigmaOracleConfig {
        match self.oracle {
            OracleArg::Exact => SigmaOracleConfig::exact(),
            // 1.0 exceeds every per-level precision, so it never binds
            OracleArg::Noisy => SigmaOracleConfig::noisy(self.oracle_eps.unwrap_or(1.0), self.pfail, self.seed),
        }
    }

    fn solver_params(&self, scale: f64) -> SolverParams {
        let mut p = SolverParams::new(self.eps / scale, self.kappa, self.m).with_oracle(self.oracle_config());
        if self.oracle == OracleArg::Noisy {
            p = p.with_p_fail(self.pfail);
        }
        p
    }

    fn extreme_params(&self, scale: f64) -> ExtremeParams {
        ExtremeParams::new(self.eps / scale, self.kappa, self.m).with_oracle(self.oracle_config())
    }

    fn validate(&self) -> Result<(), Error> {
        SolverParams::new(self.eps, self.kappa, self.m)
            .with_oracle(self.oracle_config())
            .with_p_fail(self.pfail)
            .validate()?;
        self.oracle_config().validate()?;
        if let Some(e) = self.oracle_eps {
            if !(e > 0.0) || !e.is_finite() {
                return Err(Error::Input(format!("--oracle-eps must be positive, got {e}")));
            }
        }
        Ok(())
    }
}

/// Matrix read from `--in`, normalized on request.
struct Loaded {
    matrix: ComplexMatrix,
    scale: f64,
    bundle: Option<GeneratedMatrix>,
}

fn load(io: &InputArgs) -> Result<Loaded, Error> {
    let format = MatrixFormat::from_path(&io.input);
    let matrix = read_matrix(&io.input, format)?;
    let bundle = match format {
        MatrixFormat::Json => {
            let text = std::fs::read_to_string(&io.input)?;
            serde_json::from_str::<GeneratedMatrix>(&text).ok()
        }
        MatrixFormat::MatrixMarket => None,
    };
    let norm = operator_norm(&matrix);
    if io.normalize && norm > 1.0 {
        let matrix = matrix.scale(Complex64::new(1.0 / norm, 0.0))?;
        return Ok(Loaded { matrix, scale: norm, bundle });
    }
    Ok(Loaded { matrix, scale: 1.0, bundle })
}

fn parse_complex(text: &str) -> Result<Complex64, Error> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Input(format!("cannot parse complex number {text:?}"));
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split before the last sign that does not belong to an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn parse_complex_list(text: &str) -> Result<Vec<Complex64>, Error> {
    text.split(',').map(parse_complex).collect()
}

fn parse_range(text: &str) -> Result<(f64, f64), Error> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Error::Input(format!("expected \"lo,hi\", got {text:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    Ok((parts[0].parse().map_err(|_| bad())?, parts[1].parse().map_err(|_| bad())?))
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Input(format!("bad number {s:?} in {text:?}"))))
        .collect()
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result types serialize")
}

/// Arrays of records become their length; everything else is kept.
fn summarize(trace: Value) -> Value {
    match trace {
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| {
                    let v = match v {
                        Value::Array(items) if items.iter().any(Value::is_object) => json!({ "count": items.len() }),
                        other => summarize(other),
                    };
                    (k, v)
                })
                .collect(),
        ),
        other => other,
    }
}

fn with_trace(mode: TraceMode, trace: Value) -> Value {
    match mode {
        TraceMode::Full => trace,
        TraceMode::Summary => summarize(trace),
    }
}

/// Result bundle under construction.
struct Report {
    fields: Map<String, Value>,
    out: Option<PathBuf>,
}

impl Report {
    fn new(command: &str, config: Value, out: Option<PathBuf>) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), json!(command));
        fields.insert("config".into(), config);
        Report { fields, out }
    }

    fn set(&mut self, key: &str, value: Value) {
        self.fields.insert(key.into(), value);
    }

    fn emit(self) -> Result<(), Error> {
        let text = serde_json::to_string_pretty(&Value::Object(self.fields)).expect("json");
        match &self.out {
            Some(path) => std::fs::write(path, text + "\n")?,
            None => print_stdout(&text),
        }
        Ok(())
    }
}

/// A closed pipe (e.g. `| head`) is not an error worth a panic.
fn print_stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}

fn config_of(args: &[(&str, Value)]) -> Value {
    Value::Object(args.iter().map(|(k, v)| (k.to_string(), v.clone())).collect())
}

fn run(command: &Command) -> Result<(), Error> {
    match command {
        Command::Eig { io, solver, region } => {
            solver.validate()?;
            let loaded = load(io)?;
            let mut params = solver.solver_params(loaded.scale);
            let config = config_of(&[("input", to_value(io)), ("solver", to_value(solver)), ("region", to_value(region))]);
            let mut report = Report::new("eig", config, io.out.clone());
            report.set("scale", json!(loaded.scale));
            match region {
                None => {
                    let (mu, trace) = estimate_eigenvalue(&loaded.matrix, &params)?;
                    report.set("eigenvalue", pair(mu * loaded.scale));
                    report.set("trace", with_trace(solver.trace, to_value(&trace)));
                }
                Some(r) => {
                    params.region = Some(match r {
                        RegionArg::Disk => Region::Disk,
                        RegionArg::RightHalf => Region::RightHalf,
                        RegionArg::Real => Region::RealSegment,
                    });
                    let (result, trace) = has_eigenvalue_in_region(&loaded.matrix, &params)?;
                    match result {
                        RegionResult::Found { eigenvalue } => {
                            report.set("found", json!(true));
                            report.set("eigenvalue", pair(eigenvalue * loaded.scale));
                        }
                        RegionResult::None { margin } => {
                            report.set("found", json!(false));
                            report.set("margin", json!(margin * loaded.scale));
                        }
                    }
                    report.set("trace", with_trace(solver.trace, to_value(&trace)));
                }
            }
            report.emit()
        }
        Command::EigReal { io, solver } => {
            solver.validate()?;
            let loaded = load(io)?;
            let (x, trace) = estimate_real_eigenvalue(&loaded.matrix, &solver.solver_params(loaded.scale))?;
            let config = config_of(&[("input", to_value(io)), ("solver", to_value(solver))]);
            let mut report = Report::new("eig-real", config, io.out.clone());
            report.set("scale", json!(loaded.scale));
            report.set("eigenvalue", json!(x * loaded.scale));
            report.set("trace", with_trace(solver.trace, to_value(&trace)));
            report.emit()
        }
        Command::Extreme { io, solver, largest } => {
            solver.validate()?;
            let loaded = load(io)?;
            let params = solver.extreme_params(loaded.scale);
            let (z, trace) = if *largest {
                largest_modulus_eigenvalue(&loaded.matrix, &params)?
            } else {
                smallest_modulus_eigenvalue(&loaded.matrix, &params)?
            };
            let config = config_of(&[("input", to_value(io)), ("solver", to_value(solver)), ("largest", json!(largest))]);
            let mut report = Report::new("extreme", config, io.out.clone());
            report.set("scale", json!(loaded.scale));
            report.set("eigenvalue", pair(z * loaded.scale));
            report.set("modulus", json!(z.norm() * loaded.scale));
            report.set("trace", with_trace(solver.trace, to_value(&trace)));
            report.emit()
        }
        Command::Gap { io, solver } => {
            solver.validate()?;
            let loaded = load(io)?;
            let r = spectral_gap(&loaded.matrix, &solver.extreme_params(loaded.scale))?;
            let config = config_of(&[("input", to_value(io)), ("solver", to_value(solver))]);
            let mut report = Report::new("gap", config, io.out.clone());
            report.set("scale", json!(loaded.scale));
            report.set("gap", json!(r.gap * loaded.scale));
            report.set("lambda_min", pair(r.lambda_min * loaded.scale));
            report.set("neighbour", r.neighbour.map_or(Value::Null, |z| pair(z * loaded.scale)));
            report.set("warnings", json!(r.warnings));
            report.set(
                "trace",
                json!({
                    "first_pass": with_trace(solver.trace, to_value(&r.first_pass)),
                    "second_pass": with_trace(solver.trace, to_value(&r.second_pass)),
                }),
            );
            report.emit()
        }
        Command::Eigvec { io, solver, lambda, gap } => {
            solver.validate()?;
            let lambda = lambda.as_deref().map(parse_complex).transpose()?;
            let loaded = load(io)?;
            let mut report_trace = Value::Null;
            let lambda = match lambda {
                Some(z) => z / loaded.scale,
                None => {
                    let (mu, trace) = estimate_eigenvalue(&loaded.matrix, &solver.solver_params(loaded.scale))?;
                    report_trace = with_trace(solver.trace, to_value(&trace));
                    mu
                }
            };
            let v = eigenvector_for(&loaded.matrix, lambda, gap / loaded.scale, None)?;
            let config = config_of(&[("input", to_value(io)), ("solver", to_value(solver)), ("gap", json!(gap))]);
            let mut report = Report::new("eigvec", config, io.out.clone());
            report.set("scale", json!(loaded.scale));
            report.set("eigenvalue", pair(lambda * loaded.scale));
            report.set("vector", to_value(&v.vector));
            report.set("residual", json!(v.residual * loaded.scale));
            report.set("degenerate", json!(v.degenerate));
            report.set("warnings", json!(v.warnings));
            report.set("trace", report_trace);
            report.emit()
        }
        Command::Pspec { io, resolution, re, im, eps_list, csv, check } => {
            let re_range = parse_range(re)?;
            let im_range = parse_range(im)?;
            let eps = parse_f64_list(eps_list)?;
            let loaded = load(io)?;
            if loaded.scale != 1.0 {
                return Err(Error::Input("pspec works on the matrix as given; drop --normalize".into()));
            }
            let grid = pspec_grid(&loaded.matrix, re_range, im_range, *resolution)?;
            let config = config_of(&[
                ("input", to_value(io)),
                ("resolution", json!(resolution)),
                ("re", json!(re_range)),
                ("im", json!(im_range)),
                ("eps_list", json!(eps)),
                ("csv", to_value(csv)),
                ("check", json!(check)),
            ]);
            let mut report = Report::new("pspec", config, io.out.clone());
            if let Some(path) = csv {
                std::fs::write(path, grid.to_csv())?;
                let mut side = path.clone().into_os_string();
                side.push(".json");
                std::fs::write(&side, serde_json::to_string_pretty(&grid.sidecar(&eps)).expect("json") + "\n")?;
            }
            let members: Vec<Value> = eps
                .iter()
                .map(|&e| json!({ "eps": e, "members": grid.membership(e).iter().filter(|&&b| b).count() }))
                .collect();
            report.set("members", json!(members));
            report.set("min_sigma0", json!(grid.values.iter().copied().fold(f64::INFINITY, f64::min)));
            if *check {
                let g = loaded
                    .bundle
                    .filter(|b| !b.true_eigenvalues.is_empty())
                    .ok_or_else(|| Error::Input("--check needs a generator bundle with true eigenvalues".into()))?;
                let truth = SpectrumTruth {
                    eigenvalues: g.true_eigenvalues.clone(),
                    kappa: g.kappa_jordan.unwrap_or(1.0),
                    m: g.m_max.unwrap_or(1) as u32,
                };
                report.set("inclusions", to_value(&check_inclusions(&grid, &truth, &eps, INCLUSION_TOL)?));
            }
            if csv.is_none() {
                report.set("grid", to_value(&grid));
            }
            report.emit()
        }
        Command::Gen { eigs, blocks, kappa, seed, out } => {
            let eigenvalues = parse_complex_list(eigs)?;
            let block_sizes = match blocks {
                Some(b) => b
                    .split(',')
                    .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Input(format!("bad block size {s:?}"))))
                    .collect::<Result<Vec<_>, _>>()?,
                None => vec![1; eigenvalues.len()],
            };
            let spec = JordanSpec::new(eigenvalues, block_sizes, *kappa, *seed);
            let g = jordan_matrix(&spec)?;
            if let Some(path) = out.as_deref().filter(|p| MatrixFormat::from_path(p) == MatrixFormat::MatrixMarket) {
                return write_matrix(&g.matrix, path, MatrixFormat::MatrixMarket);
            }
            let mut report = Report::new("gen", to_value(&spec), out.clone());
            if let Value::Object(fields) = to_value(&g) {
                for (k, v) in fields {
                    report.set(&k, v);
                }
            }
            report.emit()
        }
        Command::Roots { monic, solver, out } => {
            solver.validate()?;
            let coeffs = parse_complex_list(monic)?;
            let r = polynomial_root(&coeffs, &solver.solver_params(1.0))?;
            let config = config_of(&[("coefficients", json!(coeffs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())), ("solver", to_value(solver))]);
            let mut report = Report::new("roots", config, out.clone());
            report.set("root", pair(r.root));
            report.set("eigenvalue", pair(r.eigenvalue));
            report.set("scale", json!(r.scale));
            report.set("tolerance", json!(r.tolerance));
            report.set("note", json!("one root per run; no deflation"));
            report.set("trace", with_trace(solver.trace, to_value(&r.trace)));
            report.emit()
        }
        Command::ApproxSqrt { eta, nu, input, mu, eps, resolution, csv, out } => {
            if *resolution < 2 {
                return Err(Error::Input("resolution must be at least 2".into()));
            }
            if let Some(nu) = nu {
                if !(*nu > 0.0) || !nu.is_finite() {
                    return Err(Error::Input(format!("nu must be positive, got {nu}")));
                }
            }
            let mu = mu.as_deref().map(parse_complex).transpose()?;
            let eta = nu.map_or(*eta, |nu| nu / (1.0 + nu));
            let parts = sqrt_product_parts(eta, *eps)?;
            let p = &parts.product;
            let xs: Vec<f64> = (0..*resolution)
                .map(|i| -1.0 + 2.0 * i as f64 / (*resolution - 1) as f64)
                .collect();
            let mut max_err: f64 = 0.0;
            let mut peak: f64 = 0.0;
            let mut table = String::from("x,p,sqrt,error\n");
            for &x in &xs {
                let px = p.eval(x);
                peak = peak.max(px.abs());
                // sqrt and its error only where the approximation is claimed
                if x >= eta {
                    let err = (px - x.sqrt()).abs();
                    max_err = max_err.max(err);
                    table.push_str(&format!("{x},{px},{},{err}\n", x.sqrt()));
                } else {
                    table.push_str(&format!("{x},{px},,\n"));
                }
            }
            if let Some(path) = csv {
                std::fs::write(path, &table)?;
            }
            let config = config_of(&[
                ("eta", json!(eta)),
                ("nu", json!(nu)),
                ("input", to_value(input)),
                ("mu", mu.map_or(Value::Null, pair)),
                ("eps", json!(eps)),
                ("resolution", json!(resolution)),
                ("csv", to_value(csv)),
            ]);
            let mut report = Report::new("approx-sqrt", config, out.clone());
            report.set("degree", json!(p.degree()));
            report.set("sqrt_degree", json!(parts.sqrt_factor.degree()));
            report.set("step_degree", json!(parts.step_factor.degree()));
            report.set("max_error_on_interval", json!(max_err));
            report.set("max_abs", json!(peak));
            report.set("coefficients", json!(p.coeffs));
            if let (Some(path), Some(mu)) = (input, mu) {
                let a = read_matrix(path, MatrixFormat::from_path(path))?;
                // verify_hmu rebuilds the product for eta = nu / (1 + nu)
                let nu = nu.unwrap_or(eta / (1.0 - eta));
                report.set("hmu", to_value(&verify_hmu(&a, mu, nu, *eps)?));
            }
            report.emit()
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Eig { .. } => "eig",
        Command::EigReal { .. } => "eig-real",
        Command::Extreme { .. } => "extreme",
        Command::Gap { .. } => "gap",
        Command::Eigvec { .. } => "eigvec",
        Command::Pspec { .. } => "pspec",
        Command::Gen { .. } => "gen",
        Command::Roots { .. } => "roots",
        Command::ApproxSqrt { .. } => "approx-sqrt",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            let mut error = json!({ "category": category, "message": e.to_string() });
            if let Some(trace) = e.trace() {
                error["trace"] = with_trace(TraceMode::Summary, to_value(trace));
            }
            let body = json!({ "command": command_name(&cli.command), "error": error });
            print_stdout(&serde_json::to_string_pretty(&body).expect("json"));
            log::error!("{e}");
            ExitCode::from(category.exit_code() as u8)
        }
    }
}
