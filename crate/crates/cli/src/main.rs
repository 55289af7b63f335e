mod checks;
mod input;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use umvue::beta_est::{self, fit_beta, BetaParams, BetaSample};
use umvue::gamma_est::{self, fit_gamma, GammaFit, GammaSample, UMVUE_N_MAX};
use umvue::gseries::{CoeffTable, GseriesConfig};
use umvue::numkit::Tolerance;
use umvue::Error;

/// Exit status and message for a failed command.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { code: 2, msg: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain { .. } | Error::Parse(_) | Error::Config(_) | Error::Io(_) => 2,
            Error::Precondition(_) | Error::DegenerateSample(_) => 3,
            _ => 1,
        };
        CliError { code, msg: e.to_string() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "umvue", version, about = "Unbiased and closed-form estimators for the Gamma and Beta families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Print shortest round-trip decimals instead of six places.
    #[arg(long, global = true)]
    full_precision: bool,
    /// Relative tolerance for the Table 1 minimiser.
    #[arg(long, global = true)]
    tol_rel: Option<f64>,
    /// Absolute tolerance (bracket width) for the Table 1 minimiser.
    #[arg(long, global = true)]
    tol_abs: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit every applicable estimator to a sample.
    Estimate(EstimateArgs),
    /// Least efficiency of the Beta shape estimator over a grid of β.
    Table1 {
        /// Grid lo:step:hi, or a single β.
        #[arg(long, default_value = "0.05:0.05:10")]
        grid: String,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Replications per Monte Carlo unbiasedness check.
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Asymptotic efficiencies at a parameter point.
    Efficiency {
        #[arg(long, value_enum)]
        dist: Dist,
        #[arg(long)]
        alpha: f64,
        /// Second Beta shape.
        #[arg(long)]
        beta: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    dist: Dist,
    /// Data file, `-` for stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Inline whitespace-separated values.
    #[arg(long, allow_hyphen_values = true)]
    data: Option<String>,
    /// Take the k-th comma-separated field of each line (1-based).
    #[arg(long)]
    column: Option<usize>,
    /// Largest n for which UMVUEs are computed.
    #[arg(long, default_value_t = UMVUE_N_MAX)]
    nmax: usize,
    /// Coefficient cache directory (default: $UMVUE_CACHE_DIR, then the user cache dir).
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Dist {
    Gamma,
    Beta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Identities,
    Unbiasedness,
    Clt,
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let c = &cli.common;
    match &cli.command {
        Command::Estimate(a) => estimate(a, c).map(|_| 0),
        Command::Table1 { grid } => table1(grid, c).map(|_| 0),
        Command::Verify { suite, reps, seed } => verify(*suite, *reps, *seed, c),
        Command::Efficiency { dist, alpha, beta } => efficiency(*dist, *alpha, *beta, c).map(|_| 0),
    }
}

fn num(v: f64, full: bool) -> String {
    if full {
        format!("{v}")
    } else {
        format!("{v:.6}")
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v).map_err(|e| CliError { code: 1, msg: e.to_string() })?;
    println!("{s}");
    Ok(())
}

/// Rows of (name, value or reason it is missing).
fn print_rows(rows: &[(&str, Result<f64, String>)], c: &Common) {
    for (name, v) in rows {
        match (c.format, v) {
            (Format::Csv, Ok(x)) => println!("{name},{}", num(*x, c.full_precision)),
            (Format::Csv, Err(_)) => println!("{name},"),
            (_, Ok(x)) => println!("{name:<20} {}", num(*x, c.full_precision)),
            (_, Err(why)) => println!("{name:<20} unavailable ({why})"),
        }
    }
}

fn cache_dir(flag: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = flag {
        return Some(p.to_path_buf());
    }
    if let Some(p) = std::env::var_os("UMVUE_CACHE_DIR") {
        return Some(PathBuf::from(p));
    }
    let base = std::env::var_os("XDG_CACHE_HOME")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))?;
    Some(base.join("umvue"))
}

fn coeff_table(n: usize, nmax: usize, cache: Option<&Path>) -> Result<CoeffTable, CliError> {
    let cfg = GseriesConfig { n_max: nmax, ..GseriesConfig::default() };
    if let Some(dir) = cache_dir(cache) {
        match CoeffTable::load_or_build(n, &cfg, &dir) {
            Ok(t) => return Ok(t),
            Err(Error::Io(e)) => eprintln!("warning: coefficient cache {} unusable ({e}); building in memory", dir.display()),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(CoeffTable::build_adaptive(n, &cfg)?)
}

fn estimate(a: &EstimateArgs, c: &Common) -> Result<(), CliError> {
    if a.nmax > UMVUE_N_MAX {
        return Err(CliError::usage(format!("--nmax must be at most {UMVUE_N_MAX}")));
    }
    let values = input::read_values(a.input.as_deref(), a.data.as_deref(), a.column)?;
    match a.dist {
        Dist::Gamma => estimate_gamma(values, a, c),
        Dist::Beta => estimate_beta(values, c),
    }
}

fn estimate_gamma(values: Vec<f64>, a: &EstimateArgs, c: &Common) -> Result<(), CliError> {
    let s = GammaSample::new(values)?;
    let n = s.n();
    let tbl = if (3..=a.nmax).contains(&n) { Some(coeff_table(n, a.nmax, a.cache.as_deref())?) } else { None };
    let fit = fit_gamma(&s, tbl.as_ref())?;
    if c.format == Format::Json {
        return print_json(&fit);
    }
    if c.format == Format::Text {
        println!("gamma sample, n = {n}");
        println!("{:<20} {}", "X", num(fit.suffstat.x, c.full_precision));
        println!("{:<20} {}", "Y", num(fit.suffstat.y, c.full_precision));
    }
    print_rows(&gamma_rows(&fit, a.nmax), c);
    if c.format == Format::Text {
        for note in &fit.variance_finiteness_notes {
            println!("note: {note}");
        }
    }
    Ok(())
}

fn gamma_rows(f: &GammaFit, nmax: usize) -> Vec<(&'static str, Result<f64, String>)> {
    let n = f.n;
    let why = |needs_four: bool| {
        if needs_four && n < 4 {
            "UMVUE of alpha and lambda requires n >= 4".to_string()
        } else {
            format!("UMVUEs are computed for n <= {nmax}")
        }
    };
    let opt = |v: Option<f64>, needs_four| v.ok_or_else(|| why(needs_four));
    vec![
        ("umvue_alpha", opt(f.umvue_alpha, true)),
        ("umvue_lambda", opt(f.umvue_lambda, true)),
        ("umvue_inv_alpha", opt(f.umvue_inv_alpha, false)),
        ("umvue_inv_lambda", opt(f.umvue_inv_lambda, false)),
        ("yechen_inv_lambda", Ok(f.yechen_inv_lambda)),
        ("yechen_inv_alpha", Ok(f.yechen_inv_alpha)),
        ("yechen_alpha", Ok(f.yechen_alpha)),
        ("yechen_lambda", Ok(f.yechen_lambda)),
        ("louzada_alpha", Ok(f.louzada_alpha)),
    ]
}

fn estimate_beta(values: Vec<f64>, c: &Common) -> Result<(), CliError> {
    let fit = fit_beta(&BetaSample::new(values)?)?;
    if c.format == Format::Json {
        return print_json(&fit);
    }
    if c.format == Format::Text {
        println!("beta sample, n = {}", fit.n);
    }
    print_rows(
        &[
            ("alpha_hat", Ok(fit.alpha_hat)),
            ("beta_hat", Ok(fit.beta_hat)),
            ("u_stat", Ok(fit.u_stat)),
            ("v_stat", Ok(fit.v_stat)),
            ("se_alpha", Ok(fit.se_alpha)),
            ("se_beta", Ok(fit.se_beta)),
        ],
        c,
    );
    Ok(())
}

fn table1(grid: &str, c: &Common) -> Result<(), CliError> {
    let betas = input::parse_grid(grid)?;
    let mut tol = beta_est::table1_tolerance();
    if let Some(r) = c.tol_rel {
        tol = tol.with_rel(r);
    }
    if let Some(a) = c.tol_abs {
        tol = tol.with_abs(a);
    }
    let tol = Tolerance::new(tol.rel, tol.abs, tol.max_iter)?;
    let rows = beta_est::table1_with(&betas, tol)?;
    for r in rows.iter().filter(|r| r.flagged) {
        eprintln!("warning: beta={}: minimum not interior to the bracket", r.beta);
    }
    match c.format {
        Format::Json => print_json(&rows),
        Format::Csv if !c.full_precision => {
            print!("{}", beta_est::table1_csv(&rows));
            Ok(())
        }
        _ => {
            println!("beta,alpha_star,rho1_star");
            for r in &rows {
                let f = |v| num(v, c.full_precision);
                println!("{},{},{}", f(r.beta), f(r.alpha_star), f(r.rho1_star));
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    suite: &'a str,
    pass: bool,
    checks: &'a [checks::Check],
    failures: Vec<&'a str>,
}

fn verify(suite: Suite, reps: usize, seed: u64, c: &Common) -> Result<u8, CliError> {
    if reps < 2 {
        return Err(CliError::usage("--reps must be at least 2"));
    }
    let mut all = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        all.extend(checks::identities());
    }
    if matches!(suite, Suite::Unbiasedness | Suite::All) {
        all.extend(checks::unbiasedness_mc(reps, seed));
    }
    if matches!(suite, Suite::Clt | Suite::All) {
        all.extend(checks::clt(seed));
    }
    let failures: Vec<&str> = all.iter().filter(|k| !k.pass).map(|k| k.name.as_str()).collect();
    let name = suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let report = VerifyReport { suite: &name, pass: failures.is_empty(), checks: &all, failures };
    if c.format == Format::Json {
        print_json(&report)?;
    } else {
        for k in &all {
            println!("{} {}: {}", if k.pass { "PASS" } else { "FAIL" }, k.name, k.detail);
        }
        let list = serde_json::to_string(&report.failures).map_err(|e| CliError { code: 1, msg: e.to_string() })?;
        println!("failures: {list}");
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn efficiency(dist: Dist, alpha: f64, beta: Option<f64>, c: &Common) -> Result<(), CliError> {
    match dist {
        Dist::Gamma => {
            if beta.is_some() {
                return Err(CliError::usage("--beta applies to --dist beta only"));
            }
            let p = gamma_est::GammaParams::new(alpha, 1.0)?;
            let rows = [
                ("are_inv_lambda", Ok(gamma_est::are_inv_lambda(p.alpha))),
                ("are_alpha_yechen", Ok(gamma_est::are_alpha_yechen(p.alpha))),
            ];
            if c.format == Format::Json {
                return print_json(&serde_json::json!({
                    "alpha": alpha,
                    "are_inv_lambda": gamma_est::are_inv_lambda(alpha),
                    "are_alpha_yechen": gamma_est::are_alpha_yechen(alpha),
                }));
            }
            print_rows(&rows, c);
        }
        Dist::Beta => {
            let b = beta.ok_or_else(|| CliError::usage("--dist beta needs --beta"))?;
            let p = BetaParams::new(alpha, b)?;
            let v = beta_est::v_sq_un(&p);
            let (r1, r2) = (beta_est::rho1(&p), beta_est::rho2(&p));
            if c.format == Format::Json {
                return print_json(&serde_json::json!({
                    "alpha": alpha, "beta": b, "rho1": r1, "rho2": r2, "v_sq": v.v_sq, "inv_v_sq": v.inv_v_sq,
                }));
            }
            print_rows(&[("rho1", Ok(r1)), ("rho2", Ok(r2)), ("v_sq", Ok(v.v_sq)), ("inv_v_sq", Ok(v.inv_v_sq))], c);
        }
    }
    Ok(())
}
