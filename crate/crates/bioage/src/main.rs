//! `bioage`: tables, bands, densities, simulations and calibration for the
//! stochastic biological-age lifecycle model.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bioage::commands::{self, CliError, TableKind};
use bioage::config::{RunConfig, CONFIG_ENV};

#[derive(Parser)]
#[command(
    name = "bioage",
    about = "Lifecycle spending under stochastic biological age",
    after_help = "Config file keys mirror the long flags (key = value, `#` comments); \
                  flags win over the file. $BIOAGE_CONFIG names a default config file. \
                  Exit codes: 0 ok, 1 solver failure, 2 invalid input, 3 stability \
                  violation, 4 calibration bracket failure."
)]
struct Cli {
    /// Config file read before flag overrides
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Hazard rate at the initial pin age
    #[arg(long, global = true)]
    lambda0: Option<f64>,
    /// Hazard rate at the terminal pin age
    #[arg(long = "lambda-t", global = true)]
    lambda_t: Option<f64>,
    /// Initial chronological age
    #[arg(long, global = true)]
    kappa0: Option<f64>,
    /// Terminal age where aging stops
    #[arg(long = "kappa-t", global = true)]
    kappa_t: Option<f64>,
    /// Mean-reversion speed of the age gap
    #[arg(long, global = true)]
    xi: Option<f64>,
    /// Biological-age volatility (years per sqrt(year))
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Longevity risk aversion
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Subjective discount rate
    #[arg(long, global = true)]
    rho: Option<f64>,
    /// Risk-free rate
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Age grid step
    #[arg(long, global = true)]
    da: Option<f64>,
    /// Time grid step
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Truncation below the initial age
    #[arg(long = "a-min", global = true)]
    a_min: Option<f64>,
    /// Truncation above the terminal age
    #[arg(long = "a-max", global = true)]
    a_max: Option<f64>,
    /// Monte Carlo path count
    #[arg(long = "n-paths", global = true)]
    n_paths: Option<u64>,
    /// Monte Carlo step size
    #[arg(long = "mc-dt", global = true)]
    mc_dt: Option<f64>,
    /// Random seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for default file names
    #[arg(long = "out-dir", global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    Erl,
    Spending,
}

#[derive(Subcommand)]
enum Command {
    /// Lifetime or spending table over the standard age block
    Table {
        #[arg(value_enum)]
        which: TableArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Survivor biological-age band and the induced spending band
    Band {
        #[arg(long, default_value_t = 45.0)]
        t_max: f64,
        #[arg(long, default_value_t = 5.0)]
        t_step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Survivor sub-density slices at chosen chronological ages
    Density {
        /// Comma-separated chronological ages
        #[arg(long, value_delimiter = ',')]
        c_ages: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected remaining lifetime at one (C-age, B-age) pair
    ErlQuery {
        #[arg(long)]
        c_age: f64,
        #[arg(long)]
        b_age: f64,
    },
    /// Optimal spending rate (percent of wealth) at one (C-age, B-age) pair
    SpendQuery {
        #[arg(long)]
        c_age: f64,
        #[arg(long)]
        b_age: f64,
    },
    /// Monte Carlo estimates with standard errors
    Simulate {
        /// Also write one row per path
        #[arg(long)]
        paths_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Calibrate sigma from a two-row `c_age,rate_lo,rate_hi` CI file
    Calibrate {
        #[arg(long)]
        cis: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        bracket_lo: f64,
        #[arg(long, default_value_t = 0.6)]
        bracket_hi: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Characteristics-approximation spending curve
    Approx {
        /// Starting biological age (defaults to kappa0)
        #[arg(long)]
        a0: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    let env_path = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    if let Some(path) = cli.config.as_ref().or(env_path.as_ref()) {
        cfg.apply_file(path).map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    macro_rules! overlay {
        ($($field:ident),*) => {
            $(if let Some(v) = cli.$field { cfg.$field = v; })*
        };
    }
    overlay!(lambda0, lambda_t, kappa0, kappa_t, xi, sigma, gamma, rho, r, da, dt, n_paths, mc_dt, seed);
    if let Some(v) = cli.a_min {
        cfg.a_min = Some(v);
    }
    if let Some(v) = cli.a_max {
        cfg.a_max = Some(v);
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    cfg.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = build_config(cli)?;
    match &cli.cmd {
        Command::Table { which, out } => {
            let kind = match which {
                TableArg::Erl => TableKind::Erl,
                TableArg::Spending => TableKind::Spending,
            };
            let path = commands::table(&cfg, kind, out.as_deref())?;
            println!("{}", path.display());
        }
        Command::Band { t_max, t_step, out } => {
            let path = commands::band(&cfg, *t_max, *t_step, out.as_deref())?;
            println!("{}", path.display());
        }
        Command::Density { c_ages, out } => {
            let path = commands::density_slices(&cfg, c_ages.clone(), out.as_deref())?;
            println!("{}", path.display());
        }
        Command::ErlQuery { c_age, b_age } => {
            println!("{:.4}", commands::erl_query(&cfg, *c_age, *b_age)?);
        }
        Command::SpendQuery { c_age, b_age } => {
            println!("{:.4}", commands::spend_query(&cfg, *c_age, *b_age)?);
        }
        Command::Simulate { paths_file, out } => {
            let path = commands::simulate(&cfg, paths_file.as_deref(), out.as_deref())?;
            println!("{}", path.display());
        }
        Command::Calibrate { cis, bracket_lo, bracket_hi, out } => {
            let (sigma_hat, path) =
                commands::calibrate(&cfg, cis, (*bracket_lo, *bracket_hi), out.as_deref())?;
            println!("sigma_hat = {sigma_hat:.4}");
            println!("{}", path.display());
        }
        Command::Approx { a0, out } => {
            let path = commands::approx(&cfg, *a0, out.as_deref())?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
