mod output;

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use l1torus::bspline_fourier::{m0_closed, MndEvaluator, MndMethod, DEFAULT_SEED};
use l1torus::kernels::{dirichlet, e_fn, e_fn_upto, g_fn, g_series, h_fn, h_poly, h_series, poisson_product};
use l1torus::numerics::{shell_count, shell_enumerate};
use l1torus::pdf::{gram_matrix, min_eigenvalue, pdf_check, spdf_check, GramSpec};
use l1torus::special::factorial;
use l1torus::summability::{partial_sum, partial_sum_convolution, synth, CoeffSeq, SampledTorusFn};
use l1torus::torus::TorusPoint;
use l1torus::verify::{run_suites, tabulated_shell_count, Suite, VerifyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use output::{emit, Cell, Format, Table};

const SEED_ENV: &str = "L1TORUS_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "l1torus",
    version,
    about = "l1-invariant kernels, B-spline Fourier means and positive definiteness on the torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate E_n, D_{n,d}, G_{n,d}, H_{n,d} or h_{n,d}
    Kernel(KernelArgs),
    /// Evaluate m_{n,d}(u)
    Mnd(MndArgs),
    /// Run identity suites and report a JSON summary
    Verify(VerifyArgs),
    /// Positive definiteness verdict for a kernel spec file
    Pdf(PdfArgs),
    /// l1 shell counts N_d(n) by two routes
    Count(CountArgs),
    /// l1 partial sums of a sampled function
    PartialSum(PartialSumArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct Degrees {
    #[arg(long)]
    n: Option<usize>,
    /// Rows for every degree 0..=nmax
    #[arg(long, conflicts_with = "n")]
    nmax: Option<usize>,
}

impl Degrees {
    fn range(&self) -> Result<std::ops::RangeInclusive<usize>, CliError> {
        match (self.n, self.nmax) {
            (Some(n), None) => Ok(n..=n),
            (None, Some(m)) => Ok(0..=m),
            _ => Err(CliError::Usage("give --n or --nmax".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    #[value(name = "E")]
    E,
    #[value(name = "D")]
    D,
    #[value(name = "G")]
    G,
    #[value(name = "H")]
    H,
    #[value(name = "h")]
    Small,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    degrees: Degrees,
    #[arg(long, value_enum)]
    what: What,
    /// Point on T^d (E, D) or angle in [0, pi] (G, H), comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Option<Vec<f64>>,
    /// Values of u in [-1, 1] (G, H, h), comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    u: Option<Vec<f64>>,
    /// Points per axis of a uniform grid (theta in [-pi, pi)^d or u in [-1, 1])
    #[arg(long)]
    grid: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Finite closed form (d = 2, or n = 0 for any d)
    Closed,
    /// Cesaro-summed Gegenbauer series
    Series,
    /// Monte Carlo torus average
    Mc,
}

#[derive(Args, Debug)]
struct MndArgs {
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    degrees: Degrees,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    u: Option<Vec<f64>>,
    /// Interior u-grid: M equispaced points in (-1, 1)
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Series)]
    method: MethodArg,
    /// Series terms
    #[arg(long = "K")]
    k: Option<usize>,
    /// Monte Carlo evaluations per value
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name, repeatable; "all" runs every suite. Default: every suite except mnd-mc
    #[arg(long)]
    suite: Vec<String>,
    /// Dimensions, comma separated
    #[arg(long, value_delimiter = ',')]
    d: Vec<usize>,
    #[arg(long, alias = "N")]
    nmax: Option<usize>,
    /// Random points per dimension
    #[arg(long, default_value_t = 30)]
    points: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Override every tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Monte Carlo evaluations per value (mnd-mc)
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PdfArgs {
    /// Kernel spec JSON: {"head": [...], "tail": {"kind": ...}}
    spec: PathBuf,
    /// Dimension for the sampled Gram matrix
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Points in the sampled Gram matrix
    #[arg(long, default_value_t = 12)]
    points: usize,
    /// Degree at which the kernel is truncated for sampling
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    degrees: Degrees,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FuncArg {
    /// prod_i P_r(theta_i), coefficients r^{|alpha|}
    Poisson,
}

#[derive(Args, Debug)]
struct PartialSumArgs {
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    degrees: Degrees,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
    /// Built-in function
    #[arg(long, value_enum, conflicts_with = "spec")]
    func: Option<FuncArg>,
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    /// Kernel spec JSON defining an l1-invariant function
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Truncation degree for a spec kernel
    #[arg(long = "K", default_value_t = 12)]
    k: usize,
    /// Sample points per axis (default 2 * n + 2)
    #[arg(long)]
    grid: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failed,
    Io(std::io::Error),
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn resolve_seed(flag: Option<u64>, default: u64) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))),
        Err(_) => Ok(default),
    }
}

fn point(d: usize, theta: &[f64]) -> Result<TorusPoint, CliError> {
    if theta.len() != d {
        return Err(CliError::Usage(format!(
            "--theta needs {d} values, got {}",
            theta.len()
        )));
    }
    TorusPoint::new(theta.to_vec()).map_err(usage)
}

fn torus_grid(d: usize, l: usize) -> Vec<Vec<f64>> {
    let total = l.pow(d as u32);
    (0..total)
        .map(|idx| {
            let mut rest = idx;
            let mut v = vec![0.0; d];
            // last axis varies fastest
            for t in v.iter_mut().rev() {
                *t = -PI + 2.0 * PI * (rest % l) as f64 / l as f64;
                rest /= l;
            }
            v
        })
        .collect()
}

fn u_grid(m: usize, closed: bool) -> Vec<f64> {
    if closed {
        if m == 1 {
            return vec![0.0];
        }
        (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect()
    } else {
        (1..=m).map(|i| -1.0 + 2.0 * i as f64 / (m + 1) as f64).collect()
    }
}

fn cmd_kernel(a: &KernelArgs) -> Result<(), CliError> {
    let degrees = a.degrees.range()?;
    let table = match a.what {
        What::E | What::D => {
            let thetas = match (&a.theta, a.grid) {
                (Some(t), None) => vec![t.clone()],
                (None, Some(l)) if l > 0 => torus_grid(a.d, l),
                _ => return Err(CliError::Usage("E and D need exactly one of --theta or --grid".into())),
            };
            let mut header: Vec<String> = vec!["n".into()];
            header.extend((1..=a.d).map(|i| format!("theta_{i}")));
            header.push("value".into());
            let mut t = Table::new(header);
            for n in degrees {
                for th in &thetas {
                    let p = point(a.d, th)?;
                    let v = if a.what == What::E {
                        e_fn(a.d, n, &p)
                    } else {
                        dirichlet(a.d, n, &p)
                    }
                    .map_err(usage)?;
                    let mut row = vec![Cell::from(n)];
                    row.extend(th.iter().map(|&x| Cell::from(x)));
                    row.push(Cell::from(v));
                    t.push(row);
                }
            }
            t
        }
        What::G | What::H | What::Small => {
            if let (Some(theta), true) = (&a.theta, a.what != What::Small) {
                if a.u.is_some() || a.grid.is_some() {
                    return Err(CliError::Usage("give one of --theta, --u or --grid".into()));
                }
                let mut t = Table::new(["n", "theta", "value"]);
                for n in degrees {
                    for &th in theta {
                        if !(0.0..=PI).contains(&th) {
                            return Err(CliError::Usage(format!("theta must lie in [0, pi], got {th}")));
                        }
                        let v = if a.what == What::G {
                            g_fn(a.d, n, th)
                        } else {
                            h_fn(a.d, n, th)
                        }
                        .map_err(usage)?;
                        t.push(vec![Cell::from(n), Cell::from(th), Cell::from(v)]);
                    }
                }
                t
            } else {
                let us = match (&a.u, a.grid) {
                    (Some(u), None) => u.clone(),
                    (None, Some(m)) if m > 0 => u_grid(m, true),
                    _ => return Err(CliError::Usage("give exactly one of --u or --grid".into())),
                };
                if let Some(u) = us.iter().find(|u| !(-1.0..=1.0).contains(*u)) {
                    return Err(CliError::Usage(format!("u must lie in [-1, 1], got {u}")));
                }
                let mut t = Table::new(["n", "u", "value"]);
                for n in degrees {
                    let series = match a.what {
                        What::G => Some(g_series(a.d, n as i64).map_err(usage)?),
                        What::H => Some(h_series(a.d, n).map_err(usage)?),
                        _ => None,
                    };
                    for &u in &us {
                        let v = match &series {
                            Some(s) => s.eval(u),
                            None => h_poly(a.d, n, u).map_err(usage)?,
                        };
                        t.push(vec![Cell::from(n), Cell::from(u), Cell::from(v)]);
                    }
                }
                t
            }
        }
    };
    emit(&table.render(a.common.format), a.common.out.as_deref()).map_err(CliError::Io)
}

fn cmd_mnd(a: &MndArgs) -> Result<(), CliError> {
    let degrees = a.degrees.range()?;
    let us = match (&a.u, a.grid) {
        (Some(u), None) => u.clone(),
        (None, Some(m)) if m > 0 => u_grid(m, false),
        _ => return Err(CliError::Usage("give exactly one of --u or --grid".into())),
    };
    if let Some(u) = us.iter().find(|u| !u.is_finite()) {
        return Err(CliError::Usage(format!("u must be finite, got {u}")));
    }
    let seed = resolve_seed(a.seed, DEFAULT_SEED)?;
    let mut t = match a.method {
        MethodArg::Mc => Table::new(["n", "u", "value", "std_error"]),
        MethodArg::Series => Table::new(["n", "u", "value", "residual"]),
        MethodArg::Closed => Table::new(["n", "u", "value"]),
    };
    for n in degrees {
        let evaluator = match a.method {
            MethodArg::Closed if a.d == 2 => Some(MndEvaluator::new(2, n, MndMethod::ClosedFormD2).map_err(usage)?),
            MethodArg::Closed if n == 0 => None,
            MethodArg::Closed => {
                return Err(CliError::Usage(format!(
                    "closed forms exist for d = 2 or n = 0, got d = {}, n = {n}",
                    a.d
                )))
            }
            MethodArg::Series => {
                let mut e = MndEvaluator::new(a.d, n, MndMethod::GegenbauerSeries).map_err(usage)?;
                if let Some(k) = a.k {
                    e = e.with_terms(k);
                }
                Some(e)
            }
            MethodArg::Mc => {
                let mut e = MndEvaluator::new(a.d, n, MndMethod::TorusQuadrature)
                    .map_err(usage)?
                    .with_seed(seed);
                if let Some(b) = a.budget {
                    e = e.with_budget(b);
                }
                Some(e)
            }
        };
        for &u in &us {
            let (value, error) = match &evaluator {
                Some(e) => {
                    let v = e.eval(u).map_err(usage)?;
                    (v.value, v.error)
                }
                None => (m0_closed(a.d, u).map_err(usage)?, 0.0),
            };
            let mut row = vec![Cell::from(n), Cell::from(u), Cell::from(value)];
            if a.method != MethodArg::Closed {
                row.push(Cell::from(error));
            }
            t.push(row);
        }
    }
    emit(&t.render(a.common.format), a.common.out.as_deref()).map_err(CliError::Io)
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let suites: Vec<Suite> = if a.suite.is_empty() {
        Suite::ALL.into_iter().filter(|s| *s != Suite::MndMc).collect()
    } else if a.suite.iter().any(|s| s == "all") {
        Suite::ALL.to_vec()
    } else {
        a.suite
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_, _>>()
            .map_err(usage)?
    };
    let cfg = VerifyConfig {
        dims: a.d.clone(),
        nmax: a.nmax,
        points: a.points,
        seed: resolve_seed(a.seed, l1torus::verify::DEFAULT_VERIFY_SEED)?,
        tolerance: a.tol,
        budget: a.budget,
    };
    let reports = run_suites(&suites, &cfg).map_err(usage)?;
    let pass = reports.iter().all(|r| r.pass);
    let doc = json!({
        "pass": pass,
        "seed": cfg.seed,
        "identities": reports,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("plain values");
    text.push('\n');
    emit(&text, a.out.as_deref()).map_err(CliError::Io)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

fn read_spec(path: &PathBuf) -> Result<CoeffSeq, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let c: CoeffSeq = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: malformed kernel spec: {e}", path.display())))?;
    c.validate().map_err(usage)?;
    Ok(c)
}

fn random_points(rng: &mut ChaCha8Rng, d: usize, count: usize) -> Vec<TorusPoint> {
    (0..count)
        .map(|_| TorusPoint::new((0..d).map(|_| rng.random_range(-PI..PI)).collect()).expect("finite"))
        .collect()
}

fn cmd_pdf(a: &PdfArgs) -> Result<(), CliError> {
    let c = read_spec(&a.spec)?;
    if a.d == 0 || a.points == 0 {
        return Err(CliError::Usage("--d and --points must be positive".into()));
    }
    let verdict = pdf_check(&c).map_err(usage)?;
    let (spdf, witness, gap) = match verdict.witness {
        Some(i) => (json!("n/a"), json!(i), json!(null)),
        None => {
            let s = spdf_check(&c).map_err(usage)?;
            (json!(s.spdf), json!(s.witness.map(|(n, l)| [n, l])), json!(s.gap))
        }
    };
    let (q, _) = c.tail_pattern();
    let truncation =
        a.k.unwrap_or_else(|| c.head.len().max(c.periodic_from() as usize) + 2 * q as usize + 8);
    let seed = resolve_seed(a.seed, DEFAULT_SEED)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = GramSpec::new(a.d, random_points(&mut rng, a.d, a.points), c, truncation).map_err(usage)?;
    let gram = gram_matrix(&spec).map_err(usage)?;
    let min_eig = min_eigenvalue(&gram).map_err(usage)?;
    let doc = json!({
        "pdf": verdict.pdf,
        "spdf": spdf,
        "witness": witness,
        "cover_gap": gap,
        "min_eig_sample": min_eig,
        "gram": {"d": a.d, "points": a.points, "truncation": truncation, "seed": seed, "norm": gram.frobenius_norm()},
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("plain values");
    text.push('\n');
    emit(&text, a.out.as_deref()).map_err(CliError::Io)
}

fn cmd_count(a: &CountArgs) -> Result<(), CliError> {
    if a.d < 2 {
        return Err(CliError::Usage(
            "count compares with h_{n,d}(1), which needs d >= 2".into(),
        ));
    }
    let mut t = Table::new(["n", "lattice", "enumerated", "h_route", "tabulated"]);
    for n in a.degrees.range()? {
        let count = shell_count(a.d, n).map_err(usage)?;
        let brute = shell_enumerate(a.d, n).map_err(usage)?.len() as u64;
        let via_h = h_poly(a.d, n, 1.0).map_err(usage)? / factorial(a.d - 1);
        let tab = tabulated_shell_count(a.d, n)
            .filter(|_| n >= 1)
            .map_or(Cell::Text(String::new()), Cell::from);
        t.push(vec![
            Cell::from(n),
            Cell::from(count),
            Cell::from(brute),
            Cell::from(via_h),
            tab,
        ]);
    }
    emit(&t.render(a.common.format), a.common.out.as_deref()).map_err(CliError::Io)
}

fn cmd_partial_sum(a: &PartialSumArgs) -> Result<(), CliError> {
    let p = point(a.d, &a.theta)?;
    let degrees = a.degrees.range()?;
    let nmax = *degrees.end();
    let l = a.grid.unwrap_or(2 * nmax + 2);
    let d = a.d;
    // sampled function and the exact S_n at p
    let (f, exact): (SampledTorusFn, Vec<f64>) = match (&a.spec, a.func) {
        (Some(path), None) => {
            let c = read_spec(path)?;
            let k = a.k;
            let f = SampledTorusFn::from_fn(d, l, |y| {
                let yp = TorusPoint::new(y.to_vec()).expect("grid nodes are finite");
                synth(d, &c, k, &yp).expect("dimension checked").into()
            })
            .map_err(usage)?;
            let exact = degrees
                .clone()
                .map(|n| synth(d, &c, n.min(k), &p).map_err(usage))
                .collect::<Result<_, _>>()?;
            (f, exact)
        }
        (None, Some(FuncArg::Poisson)) => {
            if !(0.0..1.0).contains(&a.r) {
                return Err(CliError::Usage(format!("--r must lie in [0, 1), got {}", a.r)));
            }
            let r = a.r;
            let f = SampledTorusFn::from_fn(d, l, |y| {
                let yp = TorusPoint::new(y.to_vec()).expect("grid nodes are finite");
                poisson_product(d, r, &yp).expect("r checked").into()
            })
            .map_err(usage)?;
            let e = e_fn_upto(d, nmax, &p).map_err(usage)?;
            let exact = degrees
                .clone()
                .map(|n| e[..=n].iter().enumerate().map(|(k, v)| v * r.powi(k as i32)).sum())
                .collect();
            (f, exact)
        }
        _ => return Err(CliError::Usage("give exactly one of --func or --spec".into())),
    };
    let mut t = Table::new(["n", "coefficients", "convolution", "exact"]);
    for (n, ex) in degrees.zip(exact) {
        let direct = partial_sum(&f, n, &p).map_err(usage)?;
        let conv = partial_sum_convolution(&f, n, &p).map_err(usage)?;
        t.push(vec![
            Cell::from(n),
            Cell::from(direct.re),
            Cell::from(conv.re),
            Cell::from(ex),
        ]);
    }
    emit(&t.render(a.common.format), a.common.out.as_deref()).map_err(CliError::Io)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Kernel(a) => cmd_kernel(a),
        Command::Mnd(a) => cmd_mnd(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Pdf(a) => cmd_pdf(a),
        Command::Count(a) => cmd_count(a),
        Command::PartialSum(a) => cmd_partial_sum(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
