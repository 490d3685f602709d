//! Command-line driver. Exit codes: 0 success, 1 invalid input, 2 runtime
//! failure (light-cone contact, or a failed audit under `--strict`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vlasov_wave::app::{run_convergence, run_division, run_evolve, run_picard, strict};
use vlasov_wave::config::{parse_config, Config, Mode};
use vlasov_wave::division::DEFAULT_SWEEP;
use vlasov_wave::{Error, Result};

/// Log filter variable, e.g. `VLASOV_WAVE_LOG=info`.
const LOG_ENV: &str = "VLASOV_WAVE_LOG";

#[derive(Parser)]
#[command(name = "vlasov-wave", version, about = "Phase-space solver for the 1D relativistic Vlasov–wave system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    config: PathBuf,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 2 when an audit fails.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Time-step the coupled system and write diagnostics.
    Run(Common),
    /// Solve on [0, T] by Picard iteration.
    Picard(Common),
    /// Check the division identity over a sweep of speeds.
    DivisionLemma {
        /// Comma-separated speeds in (-1, 1).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a_sweep: Option<Vec<f64>>,
        /// Write division_report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
        /// Largest accepted |lhs − rhs| / (1 + |rhs|).
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Run at three resolutions and report observed orders.
    Convergence(Common),
}

fn load(common: &Common, mode: Mode) -> Result<Config> {
    let text = std::fs::read_to_string(&common.config)?;
    let mut cfg = parse_config(&text)?;
    if cfg.mode != mode {
        log::warn!("config mode `{}` ignored by the `{}` subcommand", cfg.mode.name(), mode.name());
        cfg.mode = mode;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn evolve(common: &Common) -> Result<()> {
    let cfg = load(common, Mode::Evolve)?;
    let out = run_evolve(&cfg, true)?;
    let a = &out.audit;
    let c = &a.conservation;
    println!("t_end            {:.6}", a.t_end);
    println!("steps            {}", a.steps);
    println!("energy drift     {:.3e} (grid)  {}", c.energy_drift, refined(c.energy_drift_refined, c.quadrature_refine));
    println!("mass change      {:.3e} (grid)  {}", c.mass_change, refined(c.mass_change_refined, c.quadrature_refine));
    println!("sup-norm error   {:.3e}", c.sup_norm_error);
    println!("min undershoot   {:.3e}", c.min_undershoot);
    println!("P(0), P(T)       {:.4}, {:.4}", a.support.p0, a.support.p_end);
    println!(
        "chain margins    (i) {:.3e}  (ii) {:.3e}  (iii) {:.3e}",
        a.gronwall.min_field_from_current, a.gronwall.min_current_from_support, a.gronwall.min_support_from_field
    );
    if let Some(r) = &a.representation {
        println!("∂x∂tA check      max err {:.3e}, fitted C {:.3}", r.max_abs_err, r.fitted_c);
    }
    println!("output           {}", cfg.output.dir.display());
    let failures = a.failures(&cfg.tolerances);
    for f in &failures {
        log::warn!("{f}");
    }
    if common.strict {
        strict(failures)?;
    }
    Ok(())
}

fn refined(v: Option<f64>, factor: usize) -> String {
    v.map_or(String::new(), |v| format!("{v:.3e} ({factor}x lattice)"))
}

fn picard(common: &Common) -> Result<()> {
    let cfg = load(common, Mode::Picard)?;
    let out = run_picard(&cfg, true)?;
    let s = &out.summary;
    println!("{:>4} {:>12} {:>8} {:>6}", "n", "distance", "ratio", "H1-H4");
    for r in &s.iterations {
        let ratio = r.ratio.map_or("-".to_string(), |q| format!("{q:.4}"));
        println!("{:>4} {:>12.4e} {:>8} {:>6}", r.n, r.distance, ratio, if r.audit.all_pass() { "pass" } else { "FAIL" });
    }
    println!("converged        {}", s.converged);
    println!("vs evolution     {:.3e} (bound {:.3e})", s.evolve_distance, s.evolve_bound);
    for p in &s.sweep {
        println!("T = {:.4}  ratio {:.4}", p.horizon, p.ratio);
    }
    if let Some(t) = s.threshold {
        println!("ratio exceeds 1 at T = {t:.4}");
    }
    let failures = s.failures();
    for f in &failures {
        log::warn!("{f}");
    }
    if common.strict {
        strict(failures)?;
    }
    Ok(())
}

fn division(a_sweep: Option<Vec<f64>>, out: Option<&Path>, strict_mode: bool, tol: f64) -> Result<()> {
    let speeds = a_sweep.unwrap_or_else(|| DEFAULT_SWEEP.to_vec());
    let rows = run_division(&speeds, out)?;
    println!("{:>6} {:>22} {:>22} {:>22} {:>10}", "a", "phi", "lhs", "rhs", "abs_err");
    let mut failures = Vec::new();
    for r in &rows {
        let ok = r.abs_err <= tol * (1.0 + r.rhs.abs());
        println!("{:>6} {:>22} {:>22.15e} {:>22.15e} {:>10.2e} {}", r.a, r.phi_preset, r.lhs, r.rhs, r.abs_err, if ok { "pass" } else { "FAIL" });
        if !ok {
            failures.push(format!("a = {}, {}: |lhs − rhs| = {:.3e}", r.a, r.phi_preset, r.abs_err));
        }
    }
    let max = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    println!("max abs_err {max:.3e}");
    if strict_mode {
        strict(failures)?;
    }
    Ok(())
}

fn convergence(common: &Common) -> Result<()> {
    let cfg = load(common, Mode::Convergence)?;
    let r = run_convergence(&cfg, true)?;
    println!("reference: {}", r.reference);
    println!("{:>6} {:>10} {:>12} {:>12} {:>12}", "nx", "dx", "f error", "drift", "drift (ref)");
    for l in &r.levels {
        let e = l.transport_error.map_or("-".to_string(), |e| format!("{e:.3e}"));
        let d = l.energy_drift_refined.map_or("-".to_string(), |d| format!("{d:.3e}"));
        println!("{:>6} {:>10.5} {:>12} {:>12.3e} {:>12}", l.nx, l.dx, e, l.energy_drift, d);
    }
    let fmt = |v: &[f64]| v.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join(", ");
    println!("transport orders      {}", fmt(&r.transport_orders));
    println!("energy-drift orders   {}", fmt(&r.energy_orders));
    if let Some(o) = &r.energy_orders_refined {
        println!("energy-drift orders   {} (refined lattice)", fmt(o));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run(c) => evolve(c),
        Command::Picard(c) => picard(c),
        Command::DivisionLemma { a_sweep, out, strict, tol } => division(a_sweep.clone(), out.as_deref(), *strict, *tol),
        Command::Convergence(c) => convergence(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = match &e {
                Error::Io(_) => 1,
                e => e.exit_code(),
            };
            eprintln!("error: {e}");
            ExitCode::from(code as u8)
        }
    }
}
