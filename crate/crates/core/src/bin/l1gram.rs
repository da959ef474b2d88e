use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use l1gram::bounds::{
    gamma_plus_bounds, piplus_dual_upper, piplus_rank1_lower, rho1_exact, rho1_multistart, BoundReport,
    MultistartOptions, RatioMode, DEFAULT_N_CAP,
};
use l1gram::decompose::{PivotRule, Tolerances};
use l1gram::experiments::{
    cmd_compare, cmd_decompose, cmd_lemmas, cmd_scaling, init_thread_pool, OutputFormat, RunConfig,
};
use l1gram::io::{load_matrix, save_reports};
use l1gram::randcert::EnsembleKind;
use l1gram::{Error, Result, Rng};

/// Rank-one l1 decompositions of PSD matrices and ratio certificates.
///
/// Exit codes: 0 success, 2 invalid input, 3 numerical failure.
/// L1GRAM_THREADS sets the worker thread count.
#[derive(Parser)]
#[command(name = "l1gram", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a matrix file; writes the decomposition and a validation report.
    Decompose(DecomposeArgs),
    /// Eigen versus peeling cost on a random ensemble.
    Compare(CompareArgs),
    /// Ratio certificates across sizes with a log-log exponent fit.
    Scaling(ScalingArgs),
    /// Witness feasibility, spectral edge and restricted-norm curves.
    Lemmas(LemmasArgs),
    /// Bound reports (JSON) for a single matrix.
    Bounds(BoundsArgs),
}

#[derive(Clone)]
struct Sizes(Vec<usize>);

fn parse_n_list(s: &str) -> std::result::Result<Sizes, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad size {t:?}"));
        if let Some((a, b)) = part.split_once("..") {
            let (lo, hi) = (num(a)?, num(b.trim_start_matches('='))?);
            if lo > hi {
                return Err(format!("empty range {part:?}"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(num(part)?);
        }
    }
    if out.is_empty() {
        return Err("no sizes given".into());
    }
    Ok(Sizes(out))
}

fn parse_pivot(s: &str) -> std::result::Result<PivotRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_ensemble(s: &str) -> std::result::Result<EnsembleKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct Sweep {
    /// Sizes: comma list and inclusive ranges, e.g. "4,6,8" or "4..12".
    #[arg(long, value_parser = parse_n_list)]
    n: Option<Sizes>,
    /// Number of seeds per size.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    /// Base seed; seeds are base, base + 1, ...
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Tol {
    /// PSD tolerance, relative to 1 + |tr A|.
    #[arg(long, default_value_t = 1e-8)]
    tol_psd: f64,
    /// Eigenvalues below this times tr(A) are dropped.
    #[arg(long, default_value_t = 1e-12)]
    tol_rank: f64,
    /// Pivots below this times tr(A) count as zero.
    #[arg(long, default_value_t = 1e-12)]
    tol_pivot: f64,
    /// Peeling stops once the residual trace is below this times tr(A).
    #[arg(long, default_value_t = 1e-12)]
    tol_stop: f64,
    /// Jacobi convergence, relative to ||A||_F.
    #[arg(long, default_value_t = 1e-10)]
    tol_eig: f64,
    /// Reconstruction tolerance, relative to 1 + ||A||_1.
    #[arg(long, default_value_t = 1e-8)]
    tol_rec: f64,
}

impl Tol {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            tol_psd: self.tol_psd,
            tol_rank: self.tol_rank,
            tol_pivot: self.tol_pivot,
            tol_stop: self.tol_stop,
            tol_eig: self.tol_eig,
        }
    }
}

#[derive(Args)]
struct DecomposeArgs {
    /// Matrix file: n on the first line, then n rows.
    matrix: PathBuf,
    /// Pivot rule (max_diagonal, min_cost_per_trace, max_trace_removal,
    /// fixed:i,j,..., random:SEED), or "eigen" for the eigenvector decomposition.
    #[arg(long, default_value = "min_cost_per_trace")]
    pivot: String,
    /// Decomposition output (default: <matrix>.dec).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tol: Tol,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    sweep: Sweep,
    /// wishart[:p], circulant[:eps], all_ones, diagonal[:max].
    #[arg(long, value_parser = parse_ensemble, default_value = "wishart")]
    ensemble: EnsembleKind,
    /// Single pivot rule; all standard rules if omitted.
    #[arg(long, value_parser = parse_pivot)]
    pivot: Option<PivotRule>,
    #[command(flatten)]
    tol: Tol,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    sweep: Sweep,
    /// Witness constant c in a = c n^(-3/2).
    #[arg(long, default_value_t = 3.0)]
    c: f64,
    /// Restricted-norm level for kappa calibration (structured mode).
    #[arg(long, default_value_t = 0.125)]
    beta: f64,
    /// exact (n <= 12), structured, heuristic.
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    /// Sampled subsets per size when exhaustive search is too large.
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Args)]
struct LemmasArgs {
    #[command(flatten)]
    sweep: Sweep,
    #[arg(long, default_value_t = 3.0)]
    c: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QuantityArg {
    All,
    Rho1,
    Piplus,
    GammaPlus,
}

#[derive(Args)]
struct BoundsArgs {
    matrix: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    quantity: QuantityArg,
    /// Multistart restarts (used when n exceeds the exact-enumeration cap).
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bisection tolerance for the dual upper bound.
    #[arg(long, default_value_t = 1e-6)]
    tol_dual: f64,
    /// Projection iterations per bisection step.
    #[arg(long, default_value_t = 300)]
    iter_cap: usize,
    /// JSON output; witnesses go to side files next to it. Stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sweep_config(s: &Sweep, default_n: &[usize]) -> RunConfig {
    RunConfig {
        n_list: s.n.clone().map_or_else(|| default_n.to_vec(), |v| v.0),
        seeds: s.seeds,
        seed: s.seed,
        format: s.format.into(),
        out: s.out.clone(),
        ..RunConfig::default()
    }
}

fn run(cli: Cli) -> Result<()> {
    init_thread_pool()?;
    match cli.command {
        Command::Decompose(a) => {
            let rule = if a.pivot == "eigen" { None } else { Some(a.pivot.parse::<PivotRule>()?) };
            let out = a.out.unwrap_or_else(|| {
                let mut p = a.matrix.clone().into_os_string();
                p.push(".dec");
                p.into()
            });
            let o = cmd_decompose(&a.matrix, rule.as_ref(), &out, &a.tol.tolerances(), a.tol.tol_rec)?;
            let v = &o.validation;
            let text = format!(
                "total_cost {:.12e}\nn_trace {:.12e}\none_norm {:.12e}\nmargin {:.12e}\n\
                 reconstruction_error {:.3e}\ndecomposition {}\nvalidation {}\n",
                o.total_cost,
                o.n_trace,
                o.one_norm,
                v.margin,
                v.reconstruction_error,
                o.export_path.display(),
                o.report_path.display()
            );
            std::io::stdout().write_all(text.as_bytes())?;
            if !o.validation.ok() {
                return Err(Error::Reconstruction {
                    error: o.validation.reconstruction_error,
                    limit: o.validation.reconstruction_limit,
                });
            }
        }
        Command::Compare(a) => {
            let cfg = RunConfig {
                ensemble: a.ensemble,
                pivot: a.pivot,
                tolerances: a.tol.tolerances(),
                tol_rec: a.tol.tol_rec,
                ..sweep_config(&a.sweep, &[20])
            };
            cmd_compare(&cfg)?.write(cfg.format, cfg.out.as_deref())?;
        }
        Command::Scaling(a) => {
            let mode: RatioMode = a.mode.parse()?;
            let default_n: Vec<usize> = match mode {
                RatioMode::Exact => (4..=DEFAULT_N_CAP).collect(),
                _ => vec![100, 200, 400, 800],
            };
            let cfg = RunConfig {
                c: a.c,
                beta: a.beta,
                mode,
                restarts: a.restarts,
                steps: a.steps,
                samples: a.samples,
                ..sweep_config(&a.sweep, &default_n)
            };
            let out = cmd_scaling(&cfg)?;
            out.result.write(cfg.format, cfg.out.as_deref())?;
            match out.exponent {
                Some(e) => eprintln!("exponent {e:.4}"),
                None => eprintln!("exponent undefined (need at least two sizes with positive ratios)"),
            }
        }
        Command::Lemmas(a) => {
            let cfg = RunConfig { c: a.c, samples: a.samples, ..sweep_config(&a.sweep, &[50, 100, 200, 500]) };
            cmd_lemmas(&cfg)?.write(cfg.format, cfg.out.as_deref())?;
        }
        Command::Bounds(a) => {
            let t = load_matrix(&a.matrix)?;
            let mut reports: Vec<BoundReport> = Vec::new();
            let rho1 = if t.n() <= DEFAULT_N_CAP {
                rho1_exact(&t, DEFAULT_N_CAP)?
            } else {
                let opts = MultistartOptions { restarts: a.restarts, steps: a.steps, polish: true };
                rho1_multistart(&t, opts, &Rng::new(a.seed))?
            };
            if matches!(a.quantity, QuantityArg::All | QuantityArg::Rho1) {
                reports.push(rho1.clone());
            }
            if matches!(a.quantity, QuantityArg::All | QuantityArg::Piplus) {
                reports.push(piplus_rank1_lower(&t, &rho1)?);
                reports.push(piplus_dual_upper(&t, a.tol_dual, a.iter_cap)?);
            }
            if matches!(a.quantity, QuantityArg::All | QuantityArg::GammaPlus) {
                match gamma_plus_bounds(&t) {
                    Ok(r) => reports.push(r),
                    Err(e @ Error::NotPsd { .. }) if a.quantity == QuantityArg::All => {
                        eprintln!("gamma_plus_upper skipped: {e}");
                    }
                    Err(e) => return Err(e),
                }
            }
            match &a.out {
                Some(p) => save_reports(p, &mut reports)?,
                None => {
                    let text = serde_json::to_string_pretty(&reports)? + "\n";
                    std::io::stdout().write_all(text.as_bytes())?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // Output closed early (e.g. piped into `head`).
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
