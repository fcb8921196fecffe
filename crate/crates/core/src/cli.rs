use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytics::{self, wald_thresholds};
use crate::config::{self, OutputFormat, TableSpec};
use crate::distributions::{DistributionSpec, HypothesisPair, DEFAULT_MOMENT_TOL};
use crate::error::{Error, Result};
use crate::montecarlo::{run_experiment, ExperimentConfig, ExperimentSummary, TruthMode, THREADS_ENV};
use crate::report::{emit_table, run_table};
use crate::stopping::{Procedure, DEFAULT_CAP};

#[derive(Debug, Parser)]
#[command(name = "adaptive-sprt", version, about = "Adaptive sequential testing of two simple hypotheses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean and variance of the per-observation log-likelihood ratio.
    Moments {
        #[command(flatten)]
        pair: PairArgs,
        /// Integrate numerically even when a closed form exists.
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = DEFAULT_MOMENT_TOL)]
        tol: f64,
    },
    /// Expected inferior allocations, closed form and series.
    N1star {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = analytics::SERIES_EPS)]
        eps: f64,
    },
    /// Wald boundaries a and b.
    Thresholds {
        #[arg(long)]
        alpha: f64,
        /// Defaults to alpha.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Monte Carlo run of the adaptive procedure.
    Simulate(SimulateArgs),
    /// Monte Carlo run of the classical alternating SPRT.
    Classical(SimulateArgs),
    /// Regenerate a table from a preset or a config document.
    Table(TableArgs),
}

#[derive(Debug, Args)]
struct PairArgs {
    #[command(flatten)]
    source: PairSource,
    /// Common variance for the normal pair.
    #[arg(long, requires = "normal")]
    variance: Option<f64>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct PairSource {
    /// Unit-variance normal pair: mean of f0, mean of f1.
    #[arg(long, num_args = 2, value_names = ["THETA0", "THETA1"], allow_negative_numbers = true)]
    normal: Option<Vec<f64>>,
    /// Poisson pair: rate of f0, rate of f1.
    #[arg(long, num_args = 2, value_names = ["LAMBDA0", "LAMBDA1"])]
    poisson: Option<Vec<f64>>,
    /// Asymmetric Laplace pair: m0 λ0 κ0 m1 λ1 κ1.
    #[arg(long, num_args = 6, value_names = ["M0", "L0", "K0", "M1", "L1", "K1"], allow_negative_numbers = true)]
    laplace: Option<Vec<f64>>,
}

impl PairArgs {
    fn pair(&self) -> Result<HypothesisPair> {
        let src = &self.source;
        if let Some(v) = &src.normal {
            let var = self.variance.unwrap_or(1.0);
            return HypothesisPair::new(DistributionSpec::normal(v[0], var)?, DistributionSpec::normal(v[1], var)?);
        }
        if let Some(v) = &src.poisson {
            return HypothesisPair::poisson(v[0], v[1]);
        }
        if let Some(v) = &src.laplace {
            return HypothesisPair::asymmetric_laplace((v[0], v[1], v[2]), (v[3], v[4], v[5]));
        }
        Err(Error::config("no hypothesis pair given"))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TruthArg {
    H0,
    H1,
    Random,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long)]
    alpha: f64,
    /// Defaults to alpha.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    replications: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "h0")]
    truth: TruthArg,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Worker threads (also read from the environment).
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["preset", "config"])))]
struct TableArgs {
    /// table1, table2, table3 or table4.
    #[arg(long)]
    preset: Option<String>,
    /// TOML configuration document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; scenario i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

/// Parses `argv` and runs the command, writing results to `out`.
/// Returns the process exit code: 0 on success, 2 on usage errors, 1 otherwise.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Moments { pair, numeric, tol } => {
            let pair = pair.pair()?;
            let m = if numeric { pair.llr_moments_numeric(tol)? } else { pair.llr_moments()? };
            writeln!(out, "eta_x    {}", display(m.eta_x))?;
            writeln!(out, "sigma2_x {}", display(m.sigma2_x))?;
            writeln!(out, "eta_y    {}", display(m.eta_y))?;
            writeln!(out, "sigma2_y {}", display(m.sigma2_y))?;
        }
        Command::N1star { pair, eps } => {
            if eps.is_nan() || eps <= 0.0 {
                return Err(Error::domain(format!("eps must be > 0, got {eps}")));
            }
            let m = pair.pair()?.llr_moments()?;
            writeln!(out, "closed_form {}", display(analytics::n1_star_closed_form(&m)))?;
            writeln!(out, "series      {}", display(analytics::n1_star_series(&m, eps)))?;
        }
        Command::Thresholds { alpha, beta } => {
            let t = wald_thresholds(alpha, beta.unwrap_or(alpha))?;
            writeln!(out, "a {}", display(t.a))?;
            writeln!(out, "b {}", display(t.b))?;
        }
        Command::Simulate(args) => simulate(args, Procedure::Adaptive, out)?,
        Command::Classical(args) => simulate(args, Procedure::Classical, out)?,
        Command::Table(args) => table(args, out)?,
    }
    Ok(())
}

/// Twelve significant digits, shortest form: hides last-bit noise such as
/// 399.9999999999999 in terminal output.
fn display(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn simulate(args: SimulateArgs, procedure: Procedure, out: &mut dyn Write) -> Result<()> {
    let cfg = ExperimentConfig {
        pair: args.pair.pair()?,
        truth: match args.truth {
            TruthArg::H0 => TruthMode::H0,
            TruthArg::H1 => TruthMode::H1,
            TruthArg::Random => TruthMode::Random,
        },
        alpha: args.alpha,
        beta: args.beta.unwrap_or(args.alpha),
        replications: args.replications,
        master_seed: args.seed,
        procedure,
        cap: args.cap,
        threads: args.threads,
    };
    let s = run_experiment(&cfg)?;
    print_summary(&cfg, &s, out)
}

fn print_summary(cfg: &ExperimentConfig, s: &ExperimentSummary, out: &mut dyn Write) -> Result<()> {
    let asn_label = match s.procedure {
        Procedure::Adaptive => "asn",
        Procedure::Classical => "rounds",
    };
    writeln!(out, "procedure       {}", s.procedure.name())?;
    writeln!(out, "f0              {}", cfg.pair.f0())?;
    writeln!(out, "f1              {}", cfg.pair.f1())?;
    writeln!(out, "alpha           {}", s.alpha)?;
    writeln!(out, "beta            {}", s.beta)?;
    writeln!(out, "replications    {}", s.replications)?;
    writeln!(out, "seed            {}", s.master_seed)?;
    writeln!(out, "pcs             {:.4} (se {:.4})", s.pcs, s.se_pcs)?;
    writeln!(out, "e_n1            {:.4} (se {:.4})", s.mean_n_inferior, s.se_n_inferior)?;
    writeln!(out, "{asn_label:<15} {:.4} (se {:.4})", s.asn, s.se_asn)?;
    if s.procedure == Procedure::Classical {
        writeln!(out, "total_draws     {:.4}", s.mean_total_draws)?;
    }
    writeln!(out, "n1_star_closed  {}", display(s.n1_star_closed))?;
    writeln!(out, "n1_star_series  {}", display(s.n1_star_series))?;
    writeln!(out, "asn_wald_k0     {}", display(s.asn_wald_k0))?;
    Ok(())
}

fn table(args: TableArgs, out: &mut dyn Write) -> Result<()> {
    let mut spec: TableSpec = match (&args.preset, &args.config) {
        (Some(name), _) => config::preset(name)?,
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
            config::parse_config(&text)?
        }
        (None, None) => return Err(Error::config("either --preset or --config is required")),
    };
    if let Some(seed) = args.seed {
        spec.override_seed(seed);
    }
    if let Some(n) = args.replications {
        if n == 0 {
            return Err(Error::config("--replications must be at least 1"));
        }
        spec.override_replications(n);
    }
    if let Some(f) = args.format {
        spec.format = match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Markdown => OutputFormat::Markdown,
        };
    }
    if args.output.is_some() {
        spec.output = args.output;
    }
    let results = match args.threads {
        Some(n) => {
            if n == 0 {
                return Err(Error::config("--threads must be at least 1"));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?
                .install(|| run_table(&spec))?
        }
        None => run_table(&spec)?,
    };
    emit_table(&results, &spec, out)
}
