//! `moserlab` command line.
//!
//! Exit codes: 0 success, 1 configuration error or bad usage, 2 solver or
//! diagnostic failure, 3 failed `--check`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::constants::{build_ledger, LedgerInputs};
use crate::error::{Error, Result};
use crate::experiments::{
    convergence_study, export, run_sweep, ExportFormat, SweepResult, DEFAULT_LEVELS, DEFAULT_T_FINAL,
};
use crate::fields::{validate, ProblemSpec};
use crate::format::sig12;
use crate::moser::{
    assemble_bound, default_alpha, diagnose, normalize_owned, render_summary, write_trace_csv, BoundReport,
    DiagnosticSettings, Diagnostics, MoserTrace, DEFAULT_BETA0,
};
use crate::solver::{solve_ibvp, solve_split, write_solution_csv, SolveOptions};

/// Smallest observed convergence order accepted by `convergence --check`.
pub const MIN_CONVERGENCE_ORDER: f64 = 1.7;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "moserlab", version, about = "Sup-norm bounds for linear parabolic problems on a grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the configured problem and write solution.csv.
    Solve(Common),
    /// Solve, then run the L1, ladder and interpolation diagnostics.
    Diagnose(Diagnose),
    /// Print the exponent and constant ledger.
    Ledger(Ledger),
    /// Sweep the bump family over eps and fit the logarithmic law.
    Sweep(Sweep),
    /// Refinement study against a manufactured solution.
    Convergence(Convergence),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Directory for output files; nothing is written without it.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Exit 3 unless every diagnostic inequality holds.
    #[arg(long)]
    check: bool,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct MoserFlags {
    #[arg(long)]
    beta0: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Args)]
struct Diagnose {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    moser: MoserFlags,
}

#[derive(Debug, Args)]
struct Sweep {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    moser: MoserFlags,
    /// Overrides the eps list of the [sweep] section.
    #[arg(long, value_name = "a,b,c", value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct Ledger {
    /// Takes N, lambda, q, domain volume and T from a problem file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long = "N", value_name = "N")]
    dim: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BETA0)]
    beta0: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct Convergence {
    /// Space dimension; both 1 and 2 when omitted.
    #[arg(long = "N", value_name = "N")]
    dim: Option<usize>,
    #[arg(long)]
    check: bool,
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

/// Outcome of a subcommand that ran to completion.
struct Report {
    stdout: String,
    check_failures: Vec<String>,
}

impl Report {
    fn new(stdout: String) -> Self {
        Report {
            stdout,
            check_failures: Vec::new(),
        }
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (threads, check) = match &cli.command {
        Command::Solve(c) => (c.threads, c.check),
        Command::Diagnose(d) => (d.common.threads, d.common.check),
        Command::Sweep(s) => (s.common.threads, s.common.check),
        Command::Ledger(_) => (None, false),
        Command::Convergence(c) => (c.threads, c.check),
    };
    let outcome = with_threads(threads, || match cli.command {
        Command::Solve(c) => cmd_solve(&c),
        Command::Diagnose(d) => cmd_diagnose(&d),
        Command::Ledger(l) => cmd_ledger(&l),
        Command::Sweep(s) => cmd_sweep(&s),
        Command::Convergence(c) => cmd_convergence(&c),
    });
    match outcome {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(report.stdout.as_bytes());
            let _ = out.flush();
            if check && !report.check_failures.is_empty() {
                for f in &report.check_failures {
                    eprintln!("check failed: {f}");
                }
                EXIT_CHECK
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Resolution { .. } | Error::EmptySweep => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

fn with_threads<R: Send>(threads: Option<usize>, job: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match threads {
        None => job(),
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {k} threads: {e}")))?
            .install(job),
    }
}

fn load_problem(path: &Path) -> Result<(Config, ProblemSpec)> {
    let config = Config::load(path)?;
    let spec = config.problem()?;
    check_admissible(&spec)?;
    Ok((config, spec))
}

fn check_admissible(spec: &ProblemSpec) -> Result<()> {
    let report = validate(spec);
    if report.is_admissible() {
        Ok(())
    } else {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        Err(Error::Config(msgs.join("; ")))
    }
}

fn prepare_out(out: &Option<PathBuf>) -> Result<Option<&Path>> {
    match out {
        None => Ok(None),
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            Ok(Some(dir.as_path()))
        }
    }
}

fn cmd_solve(c: &Common) -> Result<Report> {
    let (config, spec) = load_problem(&c.config)?;
    let out = prepare_out(&c.out)?;
    let sol = solve_ibvp(&spec, &config.solve_options())?;
    let mut s = String::new();
    let _ = writeln!(s, "steps = {}", sol.steps);
    let _ = writeln!(s, "max_cg_iterations = {}", sol.iterations.iter().max().copied().unwrap_or(0));
    let _ = writeln!(
        s,
        "max_relative_residual = {}",
        sig12(sol.residuals.iter().copied().fold(0.0, f64::max))
    );
    let _ = writeln!(s, "phi_sup = {}", sig12(crate::norms::ess_sup(&sol.phi)));
    let _ = writeln!(s, "phi_min = {}", sig12(sol.phi.min_value()));
    let _ = writeln!(s, "phi_max = {}", sig12(sol.phi.max_value()));
    if let Some(dir) = out {
        write_solution_csv(&sol.phi, &dir.join("solution.csv"))?;
    }
    Ok(Report::new(s))
}

struct Analysis {
    bound: BoundReport,
    diagnostics: Diagnostics,
}

fn analyze(spec: &ProblemSpec, opts: &SolveOptions, beta0: f64, alpha: Option<f64>, i_max: usize) -> Result<Analysis> {
    let (s1, s2) = solve_split(spec, opts)?;
    let phi = s1.phi.zip_with(&s2.phi, |a, b| a + b)?;
    drop(s2);
    let q = spec.q;
    // the exponent block is refreshed once α is known
    let mut bound = assemble_bound(&phi, &spec.phi0, &spec.f, q, beta0, alpha.unwrap_or(0.5))?;
    drop(phi);
    let pair = normalize_owned(s1.phi, spec.f.clone())?;
    let alpha = match alpha {
        Some(a) => a,
        None => default_alpha(&pair.u, beta0, q)?,
    };
    bound.exponents = crate::moser::exponents(beta0, q, spec.grid().dim(), alpha)?;
    let diagnostics = diagnose(&pair, q, &DiagnosticSettings { beta0, alpha, i_max })?;
    Ok(Analysis { bound, diagnostics })
}

fn diagnostic_failures(label: &str, d: &Diagnostics) -> Vec<String> {
    let mut fails = Vec::new();
    if !d.l1.pass {
        fails.push(format!("{label}l1_check: {} > {}", sig12(d.l1.lhs), sig12(d.l1.rhs)));
    }
    for b in d.branches() {
        if !b.interpolation.pass {
            fails.push(format!(
                "{label}interpolation_check [{}]: {} > {}",
                b.sign.label(),
                sig12(b.interpolation.lhs),
                sig12(b.interpolation.rhs)
            ));
        }
        if !b.trace.is_monotone(LADDER_MONOTONE_TOLERANCE) {
            fails.push(format!("{label}ladder [{}] is not nondecreasing", b.sign.label()));
        }
    }
    fails
}

/// Relative slack allowed between consecutive averaged ladder norms.
const LADDER_MONOTONE_TOLERANCE: f64 = 1e-12;

fn ledger_for(config: &Config, beta0: f64, alpha: f64) -> Result<String> {
    let grid = config.grid()?;
    let ledger = build_ledger(LedgerInputs {
        dim: grid.dim(),
        lambda: config.coefficients.lambda,
        q: config.forcing.q,
        domain_volume: grid.domain_volume(),
        t_final: grid.t_final(),
        c_s: None,
        beta0,
        alpha,
    })?;
    Ok(ledger.render_text())
}

fn write_outputs(dir: &Path, trace: &MoserTrace, ledger: &str) -> Result<()> {
    write_trace_csv(trace, &dir.join("trace.csv"))?;
    let path = dir.join("ledger.txt");
    std::fs::write(&path, ledger).map_err(|e| Error::io(&path, e))
}

fn cmd_diagnose(d: &Diagnose) -> Result<Report> {
    let (config, spec) = load_problem(&d.common.config)?;
    let out = prepare_out(&d.common.out)?;
    let beta0 = d.moser.beta0.unwrap_or(config.moser.beta0);
    let alpha = d.moser.alpha.or(config.moser.alpha);
    let a = analyze(&spec, &config.solve_options(), beta0, alpha, config.moser.i_max)?;
    let stdout = render_summary(&a.bound, Some(&a.diagnostics));
    if let Some(dir) = out {
        let ledger = ledger_for(&config, beta0, a.diagnostics.alpha)?;
        write_outputs(dir, &a.diagnostics.primary().trace, &ledger)?;
    }
    Ok(Report {
        stdout,
        check_failures: diagnostic_failures("", &a.diagnostics),
    })
}

fn cmd_ledger(l: &Ledger) -> Result<Report> {
    let mut inputs = match &l.config {
        Some(path) => {
            let config = Config::load(path)?;
            let grid = config.grid()?;
            LedgerInputs {
                dim: grid.dim(),
                lambda: config.coefficients.lambda,
                q: config.forcing.q,
                domain_volume: grid.domain_volume(),
                t_final: grid.t_final(),
                c_s: None,
                beta0: l.beta0,
                alpha: l.alpha,
            }
        }
        None => {
            let (Some(dim), Some(q)) = (l.dim, l.q) else {
                return Err(Error::Config("ledger needs --N and --q, or --config".into()));
            };
            LedgerInputs::unit(dim, q, l.beta0, l.alpha)
        }
    };
    if let Some(dim) = l.dim {
        inputs.dim = dim;
    }
    if let Some(q) = l.q {
        inputs.q = q;
    }
    let text = build_ledger(inputs)?.render_text();
    if let Some(dir) = prepare_out(&l.out)? {
        let path = dir.join("ledger.txt");
        std::fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(Report::new(text))
}

fn sweep_failures(result: &SweepResult) -> Vec<String> {
    let mut fails: Vec<String> = result
        .skipped
        .iter()
        .map(|k| format!("eps = {} skipped: {}", sig12(k.eps), k.reason))
        .collect();
    for row in &result.rows {
        fails.extend(diagnostic_failures(&format!("eps = {}: ", sig12(row.eps)), &row.diagnostics));
    }
    fails
}

fn cmd_sweep(s: &Sweep) -> Result<Report> {
    let config = Config::load(&s.common.config)?;
    let template = config.sweep_template()?;
    let family = config.bump_family()?;
    let eps = match &s.eps_list {
        Some(list) => list.clone(),
        None => config.sweep_section()?.eps.clone(),
    };
    let out = prepare_out(&s.common.out)?;
    let mut opts = config.sweep_options();
    if let Some(b) = s.moser.beta0 {
        opts.beta0 = b;
    }
    if let Some(a) = s.moser.alpha {
        opts.alpha = Some(a);
    }
    let result = run_sweep(&template, &family, &eps, &opts)?;
    if let Some(dir) = out {
        export(&result, &dir.join("sweep.csv"), ExportFormat::Csv)?;
        export(&result, &dir.join("sweep.svg"), ExportFormat::Svg)?;
        let ledger = ledger_for(&config, result.beta0, result.alpha)?;
        match result.rows.last() {
            Some(row) => write_outputs(dir, &row.diagnostics.primary().trace, &ledger)?,
            None => {
                let path = dir.join("ledger.txt");
                std::fs::write(&path, &ledger).map_err(|e| Error::io(&path, e))?;
            }
        }
    }
    Ok(Report {
        stdout: crate::experiments::render_text(&result),
        check_failures: sweep_failures(&result),
    })
}

fn cmd_convergence(c: &Convergence) -> Result<Report> {
    let dims = match c.dim {
        Some(d) => vec![d],
        None => vec![1, 2],
    };
    let mut s = String::new();
    let mut fails = Vec::new();
    for dim in dims {
        let r = convergence_study(dim, &DEFAULT_LEVELS, DEFAULT_T_FINAL, &SolveOptions::default())?;
        let _ = writeln!(s, "N = {dim}");
        let _ = writeln!(s, "{:>6} {:>6} {:>14} {:>14} {:>14} {:>10}", "nx", "nt", "h", "dt", "error_max", "order");
        for (k, row) in r.rows.iter().enumerate() {
            let order = if k == 0 { String::from("-") } else { sig12(r.orders[k - 1]) };
            let _ = writeln!(
                s,
                "{:>6} {:>6} {:>14} {:>14} {:>14} {:>10}",
                row.nx,
                row.nt,
                sig12(row.h),
                sig12(row.dt),
                sig12(row.error_max),
                order
            );
        }
        let min = r.min_order();
        let _ = writeln!(s, "min_order = {}", sig12(min));
        if !(min >= MIN_CONVERGENCE_ORDER) {
            fails.push(format!("N = {dim}: order {} < {MIN_CONVERGENCE_ORDER}", sig12(min)));
        }
    }
    Ok(Report {
        stdout: s,
        check_failures: fails,
    })
}
