//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured quantities. Exits with status 1 when any criterion fails.
//!
//! Run with `cargo test -p vlasov-wave --test acceptance`.

use std::fs;
use std::path::Path;
use std::time::Instant;

use vlasov_wave::app::{run_evolve, run_picard, EvolveOutcome};
use vlasov_wave::convergence::{convergence_study, free_streaming_error};
use vlasov_wave::coupling::SolverOptions;
use vlasov_wave::division::{division_sweep, pair_m_dx_y, TestFunction, DEFAULT_SWEEP};
use vlasov_wave::wave::step_b_fields;
use vlasov_wave::{bump, Axis, Config, FieldState, Result, TransportMode};

/// Common horizon of the 128/256 refinement pair: 53 steps of 12/128 and
/// 106 of 12/256, inside the light-cone margin of both grids.
const PAIR_HORIZON: f64 = 4.96875;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

/// Shared runs, computed once.
struct Runs {
    desk: EvolveOutcome,
    desk_dir: tempfile::TempDir,
    pair_coarse: EvolveOutcome,
    pair_fine: EvolveOutcome,
}

fn desk_into(dir: &Path) -> Config {
    let mut cfg = Config::desk();
    cfg.output.dir = dir.to_path_buf();
    cfg
}

fn pair_run(n: usize) -> Result<EvolveOutcome> {
    let mut cfg = Config::desk();
    cfg.grid.nx = n;
    cfg.grid.nv = n;
    cfg.grid.t_final = PAIR_HORIZON;
    run_evolve(&cfg, false)
}

fn free_streaming(_: &Runs) -> Result<Outcome> {
    let mut cfg = Config::desk();
    cfg.solver.coupling = false;
    let out = run_evolve(&cfg, false)?;
    let sim = &out.simulation;
    let err = free_streaming_error(&sim.grid, &cfg.data, &sim.state.distribution.values, sim.time());

    let opts = SolverOptions { coupling: false, transport: TransportMode::DepthOne, ..Default::default() };
    let study = convergence_study(cfg.grid.bounds, &[64, 128, 256], 1.0, 1.0, &cfg.data, opts, 0)?;
    let errors: Vec<String> = study.levels.iter().map(|l| format!("{:.3e}", l.transport_error.unwrap_or(f64::NAN))).collect();
    let orders: Vec<String> = study.transport_orders.iter().map(|o| format!("{o:.2}")).collect();
    let orders_ok = study.transport_orders.iter().all(|&o| o >= 3.0);
    outcome(
        err <= 1e-6 && orders_ok,
        format!(
            "analytic L∞ error {err:.3e} (≤ 1e-6) at t = {:.4}; depth-one errors [{}] at t = {:.4}, orders [{}] (≥ 3)",
            sim.time(),
            errors.join(", "),
            study.levels[0].t_end,
            orders.join(", ")
        ),
    )
}

fn energy(r: &Runs) -> Result<Outcome> {
    let c = &r.desk.audit.conservation;
    let drift = c.energy_drift_best();
    let coarse = r.pair_coarse.audit.conservation.energy_drift_best();
    let fine = r.pair_fine.audit.conservation.energy_drift_best();
    let factor = coarse / fine;
    let grid_factor = r.pair_coarse.audit.conservation.energy_drift / r.pair_fine.audit.conservation.energy_drift;
    outcome(
        drift <= 1e-4 && factor >= 3.5,
        format!(
            "desk drift {drift:.3e} (≤ 1e-4; grid quadrature {:.3e}); at t = {PAIR_HORIZON}: 128 → {coarse:.3e}, 256 → {fine:.3e}, factor {factor:.2} (≥ 3.5; grid quadrature {grid_factor:.2})",
            c.energy_drift
        ),
    )
}

fn mass(r: &Runs) -> Result<Outcome> {
    let c = &r.desk.audit.conservation;
    let m = c.mass_change_best();
    outcome(m <= 1e-6, format!("relative change {m:.3e} (≤ 1e-6; grid quadrature {:.3e})", c.mass_change))
}

fn sup_norm(r: &Runs) -> Result<Outcome> {
    let c = &r.desk.audit.conservation;
    outcome(
        c.sup_norm_error <= 1e-3 && c.min_undershoot >= -1e-6,
        format!("|max f − ‖f₀‖∞| {:.3e} (≤ 1e-3); min undershoot {:.3e} (≥ −1e-6)", c.sup_norm_error, c.min_undershoot),
    )
}

fn wave(r: &Runs) -> Result<Outcome> {
    let axis = Axis::new(-6.0, 6.0, 256)?;
    let dt = axis.step();
    let n = axis.len();
    let steps = 40;
    let xs = axis.nodes();

    // Free wave: B⁺ moves left, B⁻ moves right, one node per step.
    let p0: Vec<f64> = xs.iter().map(|&x| bump(-1.0, 1.5, 1.0)(x)).collect();
    let m0: Vec<f64> = xs.iter().map(|&x| bump(0.5, 2.0, 0.7)(x)).collect();
    let zero = vec![0.0; n];
    let mut fs = FieldState { b_plus: p0.clone(), b_minus: m0.clone(), a: zero.clone(), time: 0.0 };
    for _ in 0..steps {
        fs = step_b_fields(&fs, &zero, &zero, dt);
    }
    let shift_exact = (0..n - steps).all(|i| fs.b_plus[i] == p0[i + steps])
        && (steps..n).all(|i| fs.b_minus[i] == m0[i - steps]);

    // j ≡ 1 from rest: inside the cone B± = t and A = t²/2.
    let ones = vec![1.0; n];
    let mut fs = FieldState::zero(n);
    let mut cone_err = 0.0f64;
    for k in 1..=steps {
        fs = step_b_fields(&fs, &ones, &ones, dt);
        let t = k as f64 * dt;
        for i in k..n - k {
            cone_err = cone_err
                .max((fs.b_plus[i] - t).abs())
                .max((fs.b_minus[i] - t).abs())
                .max((fs.a[i] - 0.5 * t * t).abs());
        }
    }

    let w = &r.desk.audit.wave;
    let pairwise = w.max_evolution_vs_rays.max(w.max_evolution_vs_dalembert).max(w.max_rays_vs_dalembert);
    outcome(
        shift_exact && cone_err <= 1e-12 && w.passes(),
        format!(
            "free shift bit-exact: {shift_exact}; cone error {cone_err:.3e} (≤ 1e-12); ∂tA pairwise max {pairwise:.3e} (≤ {:.3e}) over {} levels",
            w.bound, w.levels
        ),
    )
}

fn picard_contraction(_: &Runs) -> Result<Outcome> {
    let mut cfg = Config::desk();
    cfg.picard.horizon = 0.25;
    cfg.picard.sweep.clear();
    let s = run_picard(&cfg, false)?.summary;
    let ratios: Vec<f64> = s.iterations.iter().filter_map(|i| i.ratio).collect();
    let distances: Vec<f64> = s.iterations.iter().map(|i| i.distance).collect();
    let monotone = distances.windows(2).all(|w| w[1] < w[0]);
    let last = distances.last().copied().unwrap_or(f64::INFINITY);
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    outcome(
        !ratios.is_empty() && max_ratio <= 0.5 && monotone && last < 1e-8 && s.evolve_distance <= s.evolve_bound,
        format!(
            "{} maps, max ratio {max_ratio:.4} (≤ 0.5), distances monotone: {monotone}, final {last:.3e} (< 1e-8); vs evolution {:.3e} (≤ {:.3e})",
            distances.len(),
            s.evolve_distance,
            s.evolve_bound
        ),
    )
}

fn picard_audit(_: &Runs) -> Result<Outcome> {
    let mut cfg = Config::desk();
    cfg.picard.horizon = 0.25;
    cfg.picard.sweep.clear();
    let s = run_picard(&cfg, false)?.summary;
    let failing: Vec<usize> = s.iterations.iter().filter(|i| !i.audit.all_pass()).map(|i| i.n).collect();
    let worst = |f: fn(&vlasov_wave::picard::BtAudit) -> f64| s.iterations.iter().map(|i| f(&i.audit)).fold(0.0, f64::max);
    outcome(
        !s.iterations.is_empty() && failing.is_empty(),
        format!(
            "{} iterates audited, failing {:?}; worst measured/bound: H1 {:.3}, H2 {:.3}, H3 {:.3}, H4 {:.3}",
            s.iterations.len(),
            failing,
            worst(|a| a.h1.measured / a.h1.bound),
            worst(|a| a.h2.measured / a.h2.bound),
            worst(|a| a.h3.measured / a.h3.bound),
            worst(|a| a.h4.measured / a.h4.bound),
        ),
    )
}

fn gronwall(r: &Runs) -> Result<Outcome> {
    let g = &r.desk.audit.gronwall;
    let s = &r.desk.audit.support;
    let chain = [g.min_field_from_current, g.min_current_from_support, g.min_support_from_field];
    let ok = chain.iter().all(|&m| m >= -1e-6) && s.holds;
    outcome(
        ok,
        format!(
            "min margins (i) {:.3e}, (ii) {:.3e}, (iii) {:.3e} (≥ −1e-6) over {} steps; P(T) {:.4} ≤ {:.4}",
            chain[0],
            chain[1],
            chain[2],
            g.steps.len(),
            s.p_end,
            s.p0 + s.field_integral + s.dv
        ),
    )
}

fn representation(r: &Runs) -> Result<Outcome> {
    let Some(desk) = &r.desk.audit.representation else {
        return outcome(false, format!("skipped: {:?}", r.desk.audit.representation_skipped));
    };
    let (Some(coarse), Some(fine)) = (&r.pair_coarse.audit.representation, &r.pair_fine.audit.representation) else {
        return outcome(false, "refinement pair lacks the representation audit".into());
    };
    // C fitted on the 128 grid must cover the 256 grid.
    let c = coarse.fitted_c;
    let dx_fine = r.pair_fine.simulation.grid.dx();
    let scaling_ok = fine.max_abs_err <= c * dx_fine;
    let kernel_ok = desk.kernel_violations_2v0 == 0;
    outcome(
        scaling_ok && kernel_ok,
        format!(
            "desk: {} samples, max error {:.3e}, fitted C {:.4}; C at 128 {:.4} vs 256 {:.4}, 256 error {:.3e} ≤ C₁₂₈·Δx {:.3e}: {scaling_ok}; |K±| ≤ 2v₀ at {}/{} v-nodes (max |K±|/v₀ {:.4})",
            desk.samples.len(),
            desk.max_abs_err,
            desk.fitted_c,
            c,
            fine.fitted_c,
            fine.max_abs_err,
            c * dx_fine,
            desk.kernel_nodes - desk.kernel_violations_2v0,
            desk.kernel_nodes,
            desk.kernel_max_ratio
        ),
    )
}

fn division(_: &Runs) -> Result<Outcome> {
    let presets: Vec<TestFunction> = ["product_bump", "product_bump_squared", "offset"]
        .iter()
        .map(|n| TestFunction::preset(n).expect("preset exists"))
        .collect();
    let rows = division_sweep(&DEFAULT_SWEEP, &presets)?;
    let max = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    let closed = (pair_m_dx_y(0.0, &TestFunction::product_bump())? - 128.0 / 315.0).abs();
    outcome(
        rows.len() == 15 && max <= 1e-8 && closed <= 1e-10,
        format!("{} pairings, max |lhs − rhs| {max:.3e} (≤ 1e-8); a = 0 closed form error {closed:.3e} (≤ 1e-10)", rows.len()),
    )
}

fn csv_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir)? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            out.push((p.file_name().unwrap_or_default().to_string_lossy().into_owned(), fs::read(&p)?));
        }
    }
    out.sort();
    Ok(out)
}

fn determinism(r: &Runs) -> Result<Outcome> {
    let second = tempfile::tempdir()?;
    run_evolve(&desk_into(second.path()), true)?;
    let a = csv_files(r.desk_dir.path())?;
    let b = csv_files(second.path())?;
    let bytes: usize = a.iter().map(|(_, d)| d.len()).sum();
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    outcome(
        !a.is_empty() && a.len() == b.len() && differing.is_empty(),
        format!("{} CSV files ({bytes} bytes) compared, {} differ {:?}", a.len(), differing.len(), differing),
    )
}

type Criterion = (&'static str, fn(&Runs) -> Result<Outcome>);

fn main() {
    let start = Instant::now();
    let runs = (|| -> Result<Runs> {
        let desk_dir = tempfile::tempdir()?;
        let desk = run_evolve(&desk_into(desk_dir.path()), true)?;
        Ok(Runs { desk, desk_dir, pair_coarse: pair_run(128)?, pair_fine: pair_run(256)? })
    })();
    let runs = match runs {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL  shared desk runs: {e}");
            std::process::exit(1);
        }
    };
    println!("shared runs ready in {:.1} s", start.elapsed().as_secs_f64());

    let criteria: [Criterion; 11] = [
        ("free-streaming exactness", free_streaming),
        ("energy conservation", energy),
        ("mass conservation", mass),
        ("sup-norm preservation", sup_norm),
        ("wave solver exactness", wave),
        ("Picard contraction", picard_contraction),
        ("trial-set audit H1-H4", picard_audit),
        ("Grönwall chain", gronwall),
        ("∂x∂tA representation cross-check", representation),
        ("division identity", division),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let (pass, detail) = match check(&runs) {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{}  {name}: {detail} [{:.1} s]", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
