use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use heterocyl_cli::config::OUTPUT_DIR_ENV;
use heterocyl_cli::{cmd_euler_export, cmd_lambda_star, cmd_report, cmd_solve, cmd_verify, Outcome, RunConfig};
use heterocyl_core::{DomainKind, Window};

/// Monotone heteroclinic solutions of −Δu = u³ − λu⁵ in the strip (0,1)×ℝ.
#[derive(Parser, Debug)]
#[command(name = "heterocyl", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags mirror the configuration keys and win over the file.
#[derive(Args, Debug)]
struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    nx: Option<usize>,
    #[arg(long, global = true)]
    nz_per_unit: Option<usize>,
    /// Comma-separated truncation half-lengths.
    #[arg(long, global = true, value_delimiter = ',')]
    n_schedule: Option<Vec<f64>>,
    #[arg(long, global = true)]
    grad_tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    eps_tail: Option<f64>,
    #[arg(long = "eps-h", global = true)]
    eps_h: Option<f64>,
    #[arg(long, global = true)]
    lambda_tol: Option<f64>,
    #[arg(long, global = true)]
    lambda_nx: Option<usize>,
    #[arg(long = "lambda", global = true)]
    lambda_override: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Stop the continuation at the first stage meeting the tail criteria.
    #[arg(long, global = true)]
    stop_early: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// λ* by bisection on the grid and by the time map; writes φ.
    LambdaStar,
    /// Continuation solve; writes the field checkpoint and reports.
    Solve,
    /// Full diagnostic and Euler suite on a checkpoint.
    Verify {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Velocity, pressure and θ CSVs of an extension on a window.
    EulerExport {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Kind::Strip)]
        domain: Kind,
        /// x_min,x_max,z_min,z_max
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 1.0, -8.0, 8.0])]
        window: Vec<f64>,
        /// Sampling step (default: the checkpoint's hx).
        #[arg(long)]
        h: Option<f64>,
    },
    /// Summarizes the reports found in the output directory.
    Report,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Strip,
    HalfPlane,
    Plane,
}

impl From<Kind> for DomainKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Strip => DomainKind::Strip,
            Kind::HalfPlane => DomainKind::HalfPlane,
            Kind::Plane => DomainKind::Plane,
        }
    }
}

fn build_config(o: &Overrides) -> anyhow::Result<RunConfig> {
    let mut c = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    macro_rules! apply {
        ($($f:ident),*) => { $(if let Some(v) = o.$f.clone() { c.$f = v; })* };
    }
    apply!(nx, nz_per_unit, n_schedule, grad_tol, max_iter, eps_tail, eps_h, lambda_tol, lambda_nx, seed);
    if o.lambda_override.is_some() {
        c.lambda_override = o.lambda_override;
    }
    if o.stop_early {
        c.exhaust_schedule = false;
    }
    c.resolve_output_dir(o.output_dir.clone(), std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from));
    c.validate()?;
    Ok(c)
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let config = build_config(&cli.overrides)?;
    let default_checkpoint = || -> anyhow::Result<PathBuf> {
        let dir = config.output_dir.as_ref().context("no checkpoint given and no output directory")?;
        Ok(dir.join(heterocyl_cli::commands::CHECKPOINT_FILE))
    };
    match cli.command {
        Command::LambdaStar => cmd_lambda_star(&config),
        Command::Solve => cmd_solve(&config),
        Command::Verify { checkpoint } => {
            let cp = checkpoint.map(Ok).unwrap_or_else(default_checkpoint)?;
            cmd_verify(&config, &cp)
        }
        Command::EulerExport { checkpoint, domain, window, h } => {
            let cp = checkpoint.map(Ok).unwrap_or_else(default_checkpoint)?;
            let &[x_min, x_max, z_min, z_max] = window.as_slice() else {
                anyhow::bail!("--window takes four values x_min,x_max,z_min,z_max, got {}", window.len());
            };
            let w = Window::new(x_min, x_max, z_min, z_max)?;
            cmd_euler_export(&config, &cp, domain.into(), w, h)
        }
        Command::Report => cmd_report(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { Outcome::Usage.code() } else { 0 };
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Outcome::Usage.code())
        }
    }
}
