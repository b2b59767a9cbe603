//! Command-line front end.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::idealgas::{beta_c, f0, mu0, rho_s, ThermoPoint};
use crate::lattice::{sandwich, RadialFn};
use crate::paramsweep::{
    default_params, fmt_f64, optimize_params, sweep_sigma, write_csv, write_json_lines,
    SweepOptions,
};
use crate::scattering::{
    scattering_length, solve_zero_energy, verify_g_lemma, RadialPotential, DEFAULT_GRID_POINTS,
};
use crate::trialbound::{assemble_bound, BoundBreakdown, TrialParameters};

/// Hard disk of unit radius, used when no potential file is given.
pub const BUNDLED_HARD_DISK: &str = include_str!("../data/hard_disk.pot");

#[derive(Debug, Parser)]
#[command(name = "bose2d", version, about = "Free-energy upper bound for the dilute 2D Bose gas")]
pub struct Cli {
    /// TOML file with default values for the flags below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the zero-energy scattering problem and write (r, g₀).
    Scatter(CommonArgs),
    /// Ideal-gas thermodynamics at (σ, βρ) points, ρ = 1.
    Thermo(CommonArgs),
    /// Assemble the itemized bound at one (σ, βρ) point.
    Bound(CommonArgs),
    /// Run the built-in consistency checks; nonzero exit on failure.
    Verify(CommonArgs),
    /// Sweep σ and βρ with default (or optimized) parameters.
    Sweep(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Potential description file (default: unit hard disk).
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// One value or a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    /// One value or a comma-separated list.
    #[arg(long = "beta-rho", value_delimiter = ',')]
    pub beta_rho: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub optimize: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Truncation radius for `scatter`.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Grid points for `scatter`.
    #[arg(long)]
    pub grid: Option<usize>,
}

/// Keys accepted in the `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub potential: Option<PathBuf>,
    pub sigma: Option<Vec<f64>>,
    pub beta_rho: Option<Vec<f64>>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub optimize: Option<bool>,
    pub seed: Option<u64>,
    pub radius: Option<f64>,
    pub grid: Option<usize>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub potential_file: Option<PathBuf>,
    pub sigma: Vec<f64>,
    pub beta_rho: Vec<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub optimize: bool,
    pub seed: Option<u64>,
    pub radius: Option<f64>,
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Scatter,
    Thermo,
    Bound,
    Verify,
    Sweep,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) if e.is_validation() => 1,
            CliError::Config(_) => 1,
            _ => 2,
        }
    }

    fn class(&self) -> &'static str {
        if self.exit_code() == 1 {
            "validation"
        } else {
            "numerical"
        }
    }
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                toml::from_str::<ConfigFile>(&text)
                    .map_err(|e| CliError::Config(e.to_string().replace('\n', " ")))?
            }
            None => ConfigFile::default(),
        };
        let (command, args) = match cli.command {
            Command::Scatter(a) => (CommandKind::Scatter, a),
            Command::Thermo(a) => (CommandKind::Thermo, a),
            Command::Bound(a) => (CommandKind::Bound, a),
            Command::Verify(a) => (CommandKind::Verify, a),
            Command::Sweep(a) => (CommandKind::Sweep, a),
        };
        let default_sigma = match command {
            CommandKind::Sweep => vec![25.0, 50.0, 100.0, 200.0],
            _ => vec![50.0],
        };
        let default_beta_rho = match command {
            CommandKind::Sweep => vec![1.0, 10.0],
            _ => vec![1.0],
        };
        Ok(Self {
            command,
            potential_file: args.potential.or(file.potential),
            sigma: args.sigma.or(file.sigma).unwrap_or(default_sigma),
            beta_rho: args.beta_rho.or(file.beta_rho).unwrap_or(default_beta_rho),
            format: args.format.or(file.format).unwrap_or(Format::Csv),
            out: args.out.or(file.out),
            optimize: args.optimize || file.optimize.unwrap_or(false),
            seed: args.seed.or(file.seed),
            radius: args.radius.or(file.radius),
            grid: args.grid.or(file.grid).unwrap_or(DEFAULT_GRID_POINTS),
        })
    }

    fn potential(&self) -> Result<RadialPotential, CliError> {
        let text = match &self.potential_file {
            Some(path) => fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            None => BUNDLED_HARD_DISK.to_string(),
        };
        Ok(RadialPotential::parse(&text)?)
    }

    fn single_point(&self) -> Result<(f64, f64), CliError> {
        match (self.sigma.as_slice(), self.beta_rho.as_slice()) {
            ([s], [b]) => Ok((*s, *b)),
            _ => Err(CliError::Config("`bound` takes a single --sigma and --beta-rho".into())),
        }
    }
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code. Diagnostics go to stderr as one line.
pub fn run_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match RunConfig::resolve(cli).and_then(|cfg| run(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bose2d: error[{}]: {}", e.class(), e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

pub fn run_from_env() -> i32 {
    run_args(std::env::args_os())
}

/// Executes `cfg`, writing to `cfg.out` or stdout.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let mut buf = Vec::new();
    let result = match cfg.command {
        CommandKind::Scatter => scatter(cfg, &mut buf),
        CommandKind::Thermo => thermo(cfg, &mut buf),
        CommandKind::Bound => bound(cfg, &mut buf),
        CommandKind::Verify => verify(cfg, &mut buf),
        CommandKind::Sweep => sweep(cfg, &mut buf),
    };
    // verify writes its report even when checks fail
    if result.is_ok() || matches!(result, Err(CliError::ChecksFailed(_))) {
        emit(cfg.out.as_deref(), &buf)?;
    }
    result
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes),
        None => {
            let mut stdout = io::stdout().lock();
            match stdout.write_all(bytes).and_then(|()| stdout.flush()) {
                // reader closed early, e.g. `| head`
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r,
            }
        }
    }
}

fn scatter(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<(), CliError> {
    let v = cfg.potential()?;
    let radius = cfg.radius.unwrap_or(10.0 * v.inner_scale().max(v.core_radius()));
    let sol = solve_zero_energy(&v, radius, cfg.grid)?;
    match cfg.format {
        Format::Csv => {
            writeln!(w, "r,g")?;
            for (r, g) in sol.grid.iter().zip(&sol.g) {
                writeln!(w, "{},{}", fmt_f64(*r), fmt_f64(*g))?;
            }
            writeln!(
                w,
                "# r_max={} a_r={} functional_value={}",
                fmt_f64(sol.r_max),
                fmt_f64(sol.a_r),
                fmt_f64(sol.functional_value)
            )?;
        }
        Format::Json => {
            serde_json::to_writer(&mut *w, &sol).map_err(io::Error::from)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ThermoRow {
    sigma: f64,
    beta_rho: f64,
    f0: f64,
    mu0: f64,
    beta_c: f64,
    rho_s: f64,
}

fn thermo(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &sigma in &cfg.sigma {
        for &beta_rho in &cfg.beta_rho {
            let t = ThermoPoint::from_sigma(sigma, beta_rho, 1.0)?;
            rows.push(ThermoRow {
                sigma,
                beta_rho,
                f0: f0(t.beta, t.rho)?,
                mu0: mu0(t.beta, t.rho)?,
                beta_c: beta_c(t.rho, t.a)?,
                rho_s: rho_s(t.beta, t.rho, t.a)?,
            });
        }
    }
    match cfg.format {
        Format::Csv => {
            writeln!(w, "sigma,beta_rho,f0,mu0,beta_c,rho_s")?;
            for r in &rows {
                let cols = [r.sigma, r.beta_rho, r.f0, r.mu0, r.beta_c, r.rho_s].map(fmt_f64);
                writeln!(w, "{}", cols.join(","))?;
            }
        }
        Format::Json => {
            for r in &rows {
                serde_json::to_writer(&mut *w, r).map_err(io::Error::from)?;
                writeln!(w)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundReport {
    sigma: f64,
    beta_rho: f64,
    rho: f64,
    a: f64,
    optimized: bool,
    seed: Option<u64>,
    breakdown: BoundBreakdown,
    params: TrialParameters,
}

fn bound(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<(), CliError> {
    let (sigma, beta_rho) = cfg.single_point()?;
    let v = cfg.potential()?;
    let t = ThermoPoint::from_sigma(sigma, beta_rho, 1.0)?;
    let a_v = scattering_length(&v, 1e-10)?;
    let v = v.scaled(t.a / a_v)?;
    let mut params = default_params(sigma, t.rho, t.a, t.beta)?;
    if cfg.optimize {
        params = optimize_params(&t, &v, &params, cfg.seed)?.params;
    }
    let breakdown = assemble_bound(&t, &params, &v)?;
    let report = BoundReport {
        sigma,
        beta_rho,
        rho: t.rho,
        a: t.a,
        optimized: cfg.optimize,
        seed: cfg.seed,
        breakdown,
        params,
    };
    match cfg.format {
        Format::Csv => {
            writeln!(w, "term,value")?;
            for (name, value) in breakdown.terms() {
                writeln!(w, "{name},{}", fmt_f64(value))?;
            }
            writeln!(w, "total,{}", fmt_f64(breakdown.total))?;
            writeln!(w, "b1,{}", fmt_f64(breakdown.b1))?;
            writeln!(w, "b2,{}", fmt_f64(breakdown.b2))?;
            writeln!(w, "sigma,{}", fmt_f64(sigma))?;
            writeln!(w, "beta_rho,{}", fmt_f64(beta_rho))?;
        }
        Format::Json => {
            serde_json::to_writer(&mut *w, &report).map_err(io::Error::from)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Check {
    suite: &'static str,
    name: String,
    passed: bool,
    detail: String,
}

fn verify(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<(), CliError> {
    let mut checks = Vec::new();

    // Riemann-sum sandwich
    let bose = RadialFn::bose_occupation(1.0, -0.1);
    for ell in [5.0, 10.0, 20.0, 40.0] {
        let s = sandwich(&bose, ell)?;
        checks.push(Check {
            suite: "sandwich",
            name: format!("bose ell={ell}"),
            passed: s.holds() && s.warnings.is_empty(),
            detail: format!(
                "lower={} sum={} upper={}",
                fmt_f64(s.lower_bound),
                fmt_f64(s.lattice_sum),
                fmt_f64(s.upper_bound)
            ),
        });
    }
    let gauss = RadialFn::new(|t: f64| (-t).exp());
    let s = sandwich(&gauss, 2.0 * PI)?;
    checks.push(Check {
        suite: "sandwich",
        name: "gaussian ell=2pi".into(),
        passed: s.holds(),
        detail: format!("sum={}", fmt_f64(s.lattice_sum)),
    });

    // scattering minimiser
    let v = cfg.potential()?;
    let scale = v.inner_scale().max(v.core_radius());
    for factor in [10.0, 100.0, 1000.0] {
        let sol = solve_zero_energy(&v, factor * scale, cfg.grid)?;
        let report = verify_g_lemma(&sol);
        let target = 4.0 * PI / sol.ln_r_over_a();
        let rel = (sol.functional_value - target).abs() / target;
        checks.push(Check {
            suite: "g_lemma",
            name: format!("R={}", fmt_f64(sol.r_max)),
            passed: report.all_passed() && rel <= 1e-6,
            detail: format!(
                "a_r={} margins=({:.3e};{:.3e};{:.3e}) functional_rel_err={rel:.3e}",
                fmt_f64(sol.a_r),
                report.log_lower_bound.worst_margin,
                report.monotone.worst_margin,
                report.derivative_integral.worst_margin
            ),
        });
    }

    // ideal gas: scaling relation and chemical potential; for 4πβρ much
    // above 4π, μ₀ ~ e^{-4πβρ} is below finite-difference resolution
    for beta in [0.1, 0.3, 1.0] {
        for rho in [0.05, 0.2, 0.5] {
            let lhs = f0(beta, rho)?;
            let rhs = rho * rho * f0(beta * rho, 1.0)?;
            let h = 1e-3 * rho;
            let f = |d: f64| f0(beta, rho + d * h);
            let fd = (8.0 * (f(1.0)? - f(-1.0)?) - (f(2.0)? - f(-2.0)?)) / (12.0 * h);
            let m = mu0(beta, rho)?;
            let scaling_ok = (lhs - rhs).abs() <= 1e-12 * lhs.abs();
            let mu_ok = (fd - m).abs() <= 1e-6 * m.abs();
            checks.push(Check {
                suite: "f0",
                name: format!("beta={beta} rho={rho}"),
                passed: scaling_ok && mu_ok,
                detail: format!(
                    "scaling_rel={:.3e} mu_rel={:.3e}",
                    (lhs - rhs).abs() / lhs.abs(),
                    (fd - m).abs() / m.abs()
                ),
            });
        }
    }

    match cfg.format {
        Format::Csv => {
            writeln!(w, "suite,name,passed,detail")?;
            for c in &checks {
                writeln!(w, "{},{},{},{}", c.suite, c.name, c.passed, c.detail)?;
            }
        }
        Format::Json => {
            for c in &checks {
                serde_json::to_writer(&mut *w, c).map_err(io::Error::from)?;
                writeln!(w)?;
            }
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

fn sweep(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<(), CliError> {
    let v = cfg.potential()?;
    let opts = SweepOptions {
        optimize: cfg.optimize,
        seed: cfg.seed,
        ..SweepOptions::default()
    };
    let report = sweep_sigma(&cfg.sigma, &cfg.beta_rho, &v, &opts)?;
    match cfg.format {
        Format::Csv => write_csv(&report, &mut *w)?,
        Format::Json => write_json_lines(&report, &mut *w)?,
    }
    Ok(())
}
