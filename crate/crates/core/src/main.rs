use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;

use paraqg::config::RunConfig;
use paraqg::enhance::{enhance_noise, Component, EnhanceOptions};
use paraqg::experiments::{
    chi_independence, consistency_run, eps_convergence, pi0_monte_carlo, pi0_tables, regularity, residual_rows,
    seed_for, selftest, summarize_cauchy, summarize_regularity, write_csv, SELFTEST_FILES,
};
use paraqg::noise::{sample_noise, Mollifier};
use paraqg::snapshot::Snapshot;
use paraqg::solver::{picard_solve, reconstruct};
use paraqg::{DyadicPartition, Error, SpectralField};

#[derive(Parser)]
#[command(name = "paraqg", version, about = "Paracontrolled solver and verification harness for the stochastic QG equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat TOML run configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; replicate seeds are derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone, Copy, PartialEq)]
enum Command {
    /// Build drivers for every eps and write their norms and snapshots.
    Enhance,
    /// Picard solve on the driver at the smallest eps.
    Solve,
    /// Paracontrolled vs classical mild solution on a smooth driver.
    Consistency,
    /// Cauchy differences in eps with common random numbers, and the cut-off comparison.
    EpsConvergence,
    /// Block-decay slopes against the expected regularities.
    Regularity,
    /// Order-zero chaos tables and Monte-Carlo means.
    ChaosCheck,
    /// Invariant suite at desk scale.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Enhance => "enhance",
            Command::Solve => "solve",
            Command::Consistency => "consistency",
            Command::EpsConvergence => "eps-convergence",
            Command::Regularity => "regularity",
            Command::ChaosCheck => "chaos-check",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    version: &'a str,
    created_unix: u64,
    master_seed: u64,
    seeds: Vec<u64>,
    config: &'a RunConfig,
    outputs: Vec<String>,
}

struct Run {
    cfg: RunConfig,
    out: PathBuf,
    master: u64,
    outputs: Vec<String>,
}

impl Run {
    fn seeds(&self) -> Vec<u64> {
        (0..self.cfg.seeds as u64).map(|i| seed_for(self.master, i)).collect()
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out.join(name)
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> paraqg::Result<()> {
        let p = self.path(name);
        write_csv(&p, rows)
    }

    fn snapshot(&mut self, name: &str, f: &SpectralField, t: f64) -> paraqg::Result<()> {
        let p = self.path(name);
        Snapshot::of(f, t).save(&p)
    }

    fn enhance_opts(&self) -> EnhanceOptions {
        let steps = (self.cfg.t_final / self.cfg.dt).round() as usize;
        EnhanceOptions { record_stride: (steps / 25).max(1), ..Default::default() }
    }

    fn finest(&self) -> paraqg::Result<Mollifier> {
        Mollifier::new(*self.cfg.eps_list.last().unwrap(), self.cfg.chi_profile)
    }
}

#[derive(Serialize)]
struct NormRow {
    eps: f64,
    component: &'static str,
    alpha: f64,
    norm: f64,
}

fn cmd_enhance(run: &mut Run) -> paraqg::Result<()> {
    let cfg = run.cfg.clone();
    let grid = cfg.grid()?;
    let part = DyadicPartition::new(grid);
    let noise = sample_noise(grid, cfg.dt, cfg.t_burn, cfg.t_final, seed_for(run.master, 0))?;
    let drivers = enhance_noise(&noise, cfg.theta, &cfg.mollifiers()?, &run.enhance_opts())?;
    let mut rows = Vec::new();
    for (d, &eps) in drivers.iter().zip(&cfg.eps_list) {
        for (c, norm) in d.norm_snapshot(cfg.kappa, &part)? {
            rows.push(NormRow { eps, component: c.name(), alpha: c.regularity(cfg.theta) - cfg.kappa, norm });
        }
        for c in [Component::X, Component::Y] {
            let f = d.parts(c)[0];
            run.snapshot(&format!("{}_eps{eps}.pqgf", c.name()), f.last(), f.t_final())?;
        }
    }
    run.csv("enhance_norms.csv", &rows)
}

fn cmd_solve(run: &mut Run) -> paraqg::Result<()> {
    let cfg = run.cfg.clone();
    let grid = cfg.grid()?;
    let noise = sample_noise(grid, cfg.dt, cfg.t_burn, cfg.t_final, seed_for(run.master, 0))?;
    let opts = EnhanceOptions::default();
    let driver = enhance_noise(&noise, cfg.theta, &[run.finest()?], &opts)?.remove(0);
    let zero = SpectralField::zeros(grid);
    let (sol, report) = picard_solve(&driver, &zero, &zero, &cfg.exponents()?, cfg.t_final, &cfg.picard())?;
    let u = reconstruct(&driver.truncate(sol.v.len()), &sol.v, &sol.w)?;
    let p = run.path("solve_report.json");
    std::fs::write(p, serde_json::to_string_pretty(&report)?)?;
    let last = u.len() - 1;
    for q in 0..=4 {
        let m = q * last / 4;
        run.snapshot(&format!("u_{q}.pqgf"), &u.values()[m], u.time(m))?;
    }
    println!("T_star = {} after {} iterations, converged = {}", report.t_star, report.iterations, report.converged);
    Ok(())
}

fn cmd_consistency(run: &mut Run) -> paraqg::Result<()> {
    let cfg = run.cfg.clone();
    let exps = cfg.exponents()?;
    let mut rows = Vec::new();
    for dt in [cfg.dt, cfg.dt / 2.0] {
        let (row, report) = consistency_run(cfg.grid()?, &exps, dt, cfg.t_final, 1.0, &cfg.picard())?;
        println!("dt = {dt}: relative difference {:.3e}", row.rel_diff);
        if rows.is_empty() {
            run.csv("residual_decay.csv", &residual_rows(&report.residuals))?;
        }
        rows.push(row);
    }
    run.csv("consistency.csv", &rows)
}

fn cmd_eps_convergence(run: &mut Run) -> paraqg::Result<()> {
    let cfg = run.cfg.clone();
    let seeds = run.seeds();
    let opts = run.enhance_opts();
    let rows = eps_convergence(
        cfg.grid()?,
        cfg.theta,
        cfg.chi_profile,
        &cfg.eps_list,
        &seeds,
        cfg.dt,
        cfg.t_burn,
        cfg.t_final,
        0.1,
        &opts,
    )?;
    run.csv("eps_convergence.csv", &rows)?;
    let summary = summarize_cauchy(&rows);
    for s in &summary {
        println!("{:>5}: monotone {}/{}, rate {:.3}", s.component, s.monotone_seeds, s.seeds, s.rate);
    }
    run.csv("eps_convergence_summary.csv", &summary)?;
    let eps = *cfg.eps_list.last().unwrap();
    let chi = chi_independence(cfg.grid()?, cfg.theta, eps, &seeds, cfg.dt, cfg.t_burn, cfg.t_final, 0.1, &opts)?;
    run.csv("chi_independence.csv", &chi)
}

fn cmd_regularity(run: &mut Run) -> paraqg::Result<()> {
    let cfg = run.cfg.clone();
    let grid = cfg.grid()?;
    let j_max = DyadicPartition::new(grid).j_max();
    let rows = regularity(
        grid,
        cfg.theta,
        &run.finest()?,
        cfg.dt,
        cfg.t_burn,
        cfg.t_final,
        &run.seeds(),
        (2, j_max - 1),
        &EnhanceOptions::default(),
    )?;
    run.csv("regularity.csv", &rows)?;
    let summary = summarize_regularity(&rows);
    for s in &summary {
        println!("{:>5}: slope {:.3} (reference {:.3})", s.component, s.mean_slope, s.reference);
    }
    run.csv("regularity_summary.csv", &summary)
}

fn cmd_chaos_check(run: &mut Run) -> paraqg::Result<()> {
    let cfg = run.cfg.clone();
    let moll = run.finest()?;
    let tables = pi0_tables(cfg.theta, &moll, cfg.grid()?)?;
    run.csv("chaos_tables.csv", &tables)?;
    let means = pi0_monte_carlo(
        cfg.grid()?,
        cfg.theta,
        &moll,
        cfg.dt,
        cfg.t_burn,
        cfg.t_final,
        &run.seeds(),
        &EnhanceOptions::default(),
    )?;
    run.csv("chaos_means.csv", &means)
}

fn cmd_selftest(run: &mut Run) -> paraqg::Result<bool> {
    let checks = selftest(&run.out, run.master)?;
    run.outputs.extend(SELFTEST_FILES.iter().map(|s| s.to_string()));
    for c in &checks {
        println!("{} {} ({:.3e}, threshold {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn write_manifest(run: &Run, cmd: Command) -> paraqg::Result<()> {
    let manifest = Manifest {
        subcommand: cmd.name(),
        version: env!("CARGO_PKG_VERSION"),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        master_seed: run.master,
        seeds: run.seeds(),
        config: &run.cfg,
        outputs: run.outputs.clone(),
    };
    let path = run.out.join(format!("manifest_{}.json", cmd.name()));
    std::fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

fn load_config(path: Option<&Path>, out: Option<PathBuf>) -> paraqg::Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    Ok(cfg)
}

fn execute(run: &mut Run, cmd: Command) -> paraqg::Result<bool> {
    std::fs::create_dir_all(&run.out)?;
    let ok = match cmd {
        Command::Enhance => cmd_enhance(run).map(|_| true),
        Command::Solve => cmd_solve(run).map(|_| true),
        Command::Consistency => cmd_consistency(run).map(|_| true),
        Command::EpsConvergence => cmd_eps_convergence(run).map(|_| true),
        Command::Regularity => cmd_regularity(run).map(|_| true),
        Command::ChaosCheck => cmd_chaos_check(run).map(|_| true),
        Command::Selftest => cmd_selftest(run),
    }?;
    write_manifest(run, cmd)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(cli.config.as_deref(), cli.out) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut run = Run { out: cfg.out_dir.clone(), cfg, master: cli.seed, outputs: Vec::new() };
    match execute(&mut run, cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("selftest: some checks failed");
            ExitCode::FAILURE
        }
        Err(e @ (Error::Config(_) | Error::InsufficientBurnIn(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
