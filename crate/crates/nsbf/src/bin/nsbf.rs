//! Command line front end: eigenvalue runs, solution tables, coefficient
//! dumps, kernel slices, decay studies, and reference-solver runs, all
//! driven by a JSON config.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use nsbf::coeffs::{
    beta_coefficients, gamma_coefficients, shifted_potential, CoefficientSet,
};
use nsbf::config::{
    DecayBlock, KernelBlock, KernelKindSpec, RunConfig, SweepBlock, Truncation,
};
use nsbf::decay::fit_decay_slope;
use nsbf::error::{NsbfError, Result};
use nsbf::evaluate::EvaluationRequest;
use nsbf::grid::Grid;
use nsbf::kernel::{kernel_k, kernel_k1, kernel_r, KernelSlice};
use nsbf::oracle::oracle_solution;
use nsbf::particular::{ensure_nonvanishing, Problem};
use nsbf::potential::Potential;
use nsbf::spectral::{default_scan_step, find_eigenvalues, BoundaryCondition};

#[derive(Parser)]
#[command(name = "nsbf", about = "Perturbed-Bessel solver based on Neumann series of Bessel functions", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    config: PathBuf,
    /// Output directory (overrides the config's output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mesh intervals (overrides the config's problem.mesh).
    #[arg(long)]
    mesh: Option<usize>,
    /// Truncation order: a number or "auto" (overrides method.n1).
    #[arg(long)]
    n: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the boundary-value problem.
    Eigs(Common),
    /// Solution table u (and u') over a frequency sweep.
    Solve(Common),
    /// Coefficient magnitudes and verification-residual histories.
    Coeffs(Common),
    /// One kernel slice at fixed x.
    Kernel(Common),
    /// Decay-slope study over a potential family.
    Decay(Common),
    /// Reference-solver table in the same format as `solve`.
    Oracle(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Eigs(c) => ("eigs", c),
        Command::Solve(c) => ("solve", c),
        Command::Coeffs(c) => ("coeffs", c),
        Command::Kernel(c) => ("kernel", c),
        Command::Decay(c) => ("decay", c),
        Command::Oracle(c) => ("oracle", c),
    };

    let cfg = match load_config(common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let base = common
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let out_path = match output_path(&cfg, common, name) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };

    let run = match name {
        "eigs" => run_eigs(&cfg, &base, &out_path),
        "solve" => run_solve(&cfg, &base, &out_path),
        "coeffs" => run_coeffs(&cfg, &base, &out_path),
        "kernel" => run_kernel(&cfg, &base, &out_path),
        "decay" => run_decay(&cfg, &base, &out_path),
        "oracle" => run_oracle(&cfg, &base, &out_path),
        _ => unreachable!(),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ NsbfError::Config(_)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(3)
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_path(&common.config)?;
    if let Some(mesh) = common.mesh {
        cfg.problem.mesh = mesh;
    }
    if let Some(n) = &common.n {
        cfg.method.n1 = Truncation::parse(n)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_path(cfg: &RunConfig, common: &Common, name: &str) -> Result<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .map_err(|e| NsbfError::Config(format!("cannot create output directory {dir:?}: {e}")))?;
    let prefix = cfg.output.prefix.clone().unwrap_or_else(|| name.to_string());
    Ok(dir.join(format!("{prefix}.csv")))
}

/// The coefficient pipeline shared by every series-based subcommand.
struct Pipeline {
    problem: Problem,
    cs: CoefficientSet,
    n1: usize,
    n2: Option<usize>,
}

fn build_pipeline(cfg: &RunConfig, base: &Path, need_gamma: bool) -> Result<Pipeline> {
    let (problem, grid) = cfg.build_problem(base)?;
    let ps = ensure_nonvanishing(&problem, &grid)?;
    let (qs, q0) = shifted_potential(problem.potential(), &grid, ps.lambda())?;

    let want_gamma = need_gamma || cfg.method.n2.is_some();
    let order_for = |t: Truncation| match t {
        Truncation::Auto => cfg.method.max_order,
        Truncation::Fixed(n) => n.max(1),
    };
    let max1 = order_for(cfg.method.n1);
    let max2 = cfg.method.n2.map(order_for).unwrap_or(cfg.method.max_order);
    let build_order = if want_gamma { max1.max(max2) } else { max1 };

    let mut cs = beta_coefficients(&ps, &qs, q0, build_order)?;
    if want_gamma {
        gamma_coefficients(&mut cs, &ps, build_order)?;
    }

    let n1 = match cfg.method.n1 {
        Truncation::Auto => cs.select_beta_truncation(),
        Truncation::Fixed(n) => n,
    };
    let n2 = if want_gamma {
        Some(match cfg.method.n2.unwrap_or(Truncation::Auto) {
            Truncation::Auto => cs.select_gamma_truncation(),
            Truncation::Fixed(n) => n,
        })
    } else {
        None
    };

    eprintln!(
        "nsbf: ell = {}, b = {:.6}, mesh = {}, shift lambda = {:.6}",
        problem.ell(),
        problem.b(),
        cfg.problem.mesh,
        cs.lambda()
    );
    eprintln!(
        "nsbf: N1 = {n1} (residual {:.3e})",
        cs.beta_residuals().get(n1).copied().unwrap_or(f64::NAN)
    );
    if let Some(n2) = n2 {
        match cs.gamma_residuals() {
            Some(res) => eprintln!(
                "nsbf: N2 = {n2} (residual {:.3e})",
                res.get(n2).copied().unwrap_or(f64::NAN)
            ),
            None => eprintln!("nsbf: N2 = {n2} (residual unavailable: q(0) unbounded)"),
        }
    }
    Ok(Pipeline { problem, cs, n1, n2 })
}

fn csv_writer(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path)
        .map_err(|e| NsbfError::Io(e))?;
    Ok(BufWriter::new(file))
}

fn run_eigs(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let bc = cfg.boundary.to_condition()?;
    let need_gamma = !matches!(bc, BoundaryCondition::Dirichlet);
    let p = build_pipeline(cfg, base, need_gamma)?;
    let omega_max = cfg.method.omega_max.ok_or_else(|| {
        NsbfError::Config("eigs needs method.omega_max".into())
    })?;
    let b = p.problem.b();
    let step = cfg.method.scan_step.unwrap_or_else(|| default_scan_step(b));
    if step > PI / (4.0 * b) {
        eprintln!(
            "nsbf: warning: scan step {step:.6} exceeds pi/(4b) = {:.6}; eigenvalues may be missed",
            PI / (4.0 * b)
        );
    }
    let req = EvaluationRequest::new(&p.cs, b, p.n1, p.n2.unwrap_or(0))?;
    let spectrum = find_eigenvalues(&req, bc, omega_max, step)?;
    let mut w = csv_writer(out)?;
    writeln!(w, "n,omega,residual").map_err(io_err)?;
    for (i, (&omega, &res)) in spectrum
        .eigenvalues()
        .iter()
        .zip(spectrum.residuals())
        .enumerate()
    {
        writeln!(w, "{},{:.15e},{:.15e}", i + 1, omega, res).map_err(io_err)?;
    }
    eprintln!("nsbf: {} eigenvalues in [{:.3}, {omega_max}]", spectrum.len(), 1e-3);
    Ok(())
}

fn sweep_of(cfg: &RunConfig) -> Result<&SweepBlock> {
    cfg.sweep
        .as_ref()
        .ok_or_else(|| NsbfError::Config("this subcommand needs a sweep block".into()))
}

fn run_solve(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let sweep = sweep_of(cfg)?;
    let p = build_pipeline(cfg, base, false)?;
    let x = sweep.x.unwrap_or(p.problem.b());
    let req = EvaluationRequest::new(&p.cs, x, p.n1, p.n2.unwrap_or(0))?;
    let mut w = csv_writer(out)?;
    if let Some(n2) = p.n2 {
        let _ = n2;
        writeln!(w, "omega,u,du").map_err(io_err)?;
        for omega in sweep.omegas()? {
            let (u, du) = req.pair(omega)?;
            writeln!(w, "{omega:.15e},{u:.15e},{du:.15e}").map_err(io_err)?;
        }
    } else {
        writeln!(w, "omega,u").map_err(io_err)?;
        for omega in sweep.omegas()? {
            let u = req.u(omega)?;
            writeln!(w, "{omega:.15e},{u:.15e}").map_err(io_err)?;
        }
    }
    Ok(())
}

fn run_coeffs(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let p = build_pipeline(cfg, base, false)?;
    let cs = &p.cs;
    let mut w = csv_writer(out)?;
    let gamma = !cs.gamma().is_empty();
    if gamma {
        writeln!(w, "n,beta_end,beta_residual,gamma_end,gamma_residual").map_err(io_err)?;
    } else {
        writeln!(w, "n,beta_end,beta_residual").map_err(io_err)?;
    }
    for n in 0..cs.beta().len() {
        let beta_end = cs.beta()[n].end_value();
        let beta_res = cs.beta_residuals()[n];
        if gamma {
            let gamma_end = cs.gamma()[n].end_value();
            let gamma_res = cs
                .gamma_residuals()
                .and_then(|r| r.get(n).copied())
                .unwrap_or(f64::NAN);
            writeln!(
                w,
                "{n},{beta_end:.15e},{beta_res:.15e},{gamma_end:.15e},{gamma_res:.15e}"
            )
            .map_err(io_err)?;
        } else {
            writeln!(w, "{n},{beta_end:.15e},{beta_res:.15e}").map_err(io_err)?;
        }
    }
    Ok(())
}

fn run_kernel(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let block: &KernelBlock = cfg
        .kernel
        .as_ref()
        .ok_or_else(|| NsbfError::Config("kernel subcommand needs a kernel block".into()))?;
    if block.t_count < 2 {
        return Err(NsbfError::Config("kernel.t_count must be at least 2".into()));
    }
    let need_gamma = matches!(block.kind, KernelKindSpec::K1);
    let p = build_pipeline(cfg, base, need_gamma)?;
    let x = block.x;
    let (t_min, n) = match block.kind {
        KernelKindSpec::R => (-x, p.n1),
        KernelKindSpec::K => (0.0, p.n1),
        KernelKindSpec::K1 => (0.0, p.n2.unwrap_or(p.n1)),
    };
    let t: Vec<f64> = (0..block.t_count)
        .map(|i| t_min + (x - t_min) * i as f64 / (block.t_count - 1) as f64)
        .collect();
    let slice: KernelSlice = match block.kind {
        KernelKindSpec::K => kernel_k(&p.cs, x, &t, n)?,
        KernelKindSpec::K1 => kernel_k1(&p.cs, x, &t, n)?,
        KernelKindSpec::R => kernel_r(&p.cs, x, &t, n)?,
    };
    let mut w = csv_writer(out)?;
    writeln!(w, "t,value").map_err(io_err)?;
    for (ti, vi) in slice.t().iter().zip(slice.values()) {
        writeln!(w, "{ti:.15e},{vi:.15e}").map_err(io_err)?;
    }
    Ok(())
}

fn run_decay(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let block: &DecayBlock = cfg
        .decay
        .as_ref()
        .ok_or_else(|| NsbfError::Config("decay subcommand needs a decay block".into()))?;
    let mut w = csv_writer(out)?;
    match block.family.as_str() {
        "qm" => {
            let ell = block.ells.first().copied().unwrap_or(1.0);
            writeln!(w, "m,slope").map_err(io_err)?;
            for m in 0..=5u32 {
                let slope = family_slope(cfg, base, ell, Potential::qm(m)?, block.count)?;
                writeln!(w, "{m},{slope:.15e}").map_err(io_err)?;
                eprintln!("nsbf: q_{m}: slope {slope:.3}");
            }
        }
        "sqrt" => {
            let ells = if block.ells.is_empty() {
                vec![1.0, 2.0, 5.0]
            } else {
                block.ells.clone()
            };
            writeln!(w, "ell,slope").map_err(io_err)?;
            for ell in ells {
                let q = Potential::Power { c: 1.0, p: 0.5 };
                let slope = family_slope(cfg, base, ell, q, block.count)?;
                writeln!(w, "{ell:.15e},{slope:.15e}").map_err(io_err)?;
                eprintln!("nsbf: ell = {ell}: slope {slope:.3}");
            }
        }
        other => {
            return Err(NsbfError::Config(format!(
                "decay.family must be \"qm\" or \"sqrt\", got \"{other}\""
            )))
        }
    }
    Ok(())
}

/// Decay exponent (positive for decaying coefficients) of one family member.
fn family_slope(
    cfg: &RunConfig,
    _base: &Path,
    ell: f64,
    q: Potential,
    count: usize,
) -> Result<f64> {
    let problem = Problem::new(ell, cfg.problem.b, q)?;
    let grid = Arc::new(Grid::new(cfg.problem.b, cfg.problem.mesh)?);
    let ps = ensure_nonvanishing(&problem, &grid)?;
    let (qs, q0) = shifted_potential(problem.potential(), &grid, ps.lambda())?;
    let cs = beta_coefficients(&ps, &qs, q0, count)?;
    let mags: Vec<f64> = (1..=count)
        .map(|n| cs.beta()[n].end_value().abs())
        .collect();
    Ok(-fit_decay_slope(&mags)?)
}

fn run_oracle(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let sweep = sweep_of(cfg)?;
    let (problem, _grid) = cfg.build_problem(base)?;
    let x = sweep.x.unwrap_or(problem.b());
    if (x - problem.b()).abs() > 1e-12 * problem.b() {
        return Err(NsbfError::Config(
            "oracle tables are emitted at x = b; set sweep.x to b or omit it".into(),
        ));
    }
    let mut w = csv_writer(out)?;
    writeln!(w, "omega,u,du").map_err(io_err)?;
    for omega in sweep.omegas()? {
        let r = oracle_solution(&problem, omega, cfg.method.oracle_tolerance)?;
        writeln!(w, "{omega:.15e},{:.15e},{:.15e}", r.end_u(), r.end_du()).map_err(io_err)?;
    }
    Ok(())
}

fn io_err(e: std::io::Error) -> NsbfError {
    NsbfError::Io(e)
}
