//! Whole runs for each mode: build the grid from a config, drive the solver,
//! collect audits, and write the output files.

use serde::Serialize;

use crate::config::{Config, Tolerances};
use crate::convergence::{convergence_study, relative_change, ConvergenceReport};
use crate::coupling::{Simulation, TransportMode};
use crate::diagnostics::{
    derivative_transport_audit, gronwall_audit, record, refined_particle_integrals, representation_audit,
    wave_cross_check, DerivativeAudit, DiagnosticsRecord, GronwallAudit, GronwallConstants, RepresentationAudit,
    WaveCrossCheck,
};
use crate::division::{division_sweep, DivisionRow, TestFunction};
use crate::error::{Error, Result};
use crate::grid::{build_grid, PhaseGrid};
use crate::output::{write_json, RunWriter};
use crate::picard::{contraction_threshold, distance, picard_solve, IterationRecord, PicardReport, ThresholdPoint};

/// Grid of a config for horizon `t_final`, with the light-cone check.
pub fn grid_for(cfg: &Config, t_final: f64) -> Result<PhaseGrid> {
    let g = &cfg.grid;
    build_grid(g.bounds, g.nx, g.nv, t_final, cfg.data.extent().as_ref())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationAudit {
    pub f0_sup: f64,
    /// Relative total-energy change at the last step, grid trapezoid.
    pub energy_drift: f64,
    /// Largest relative total-energy change over all steps, grid trapezoid.
    pub energy_drift_max: f64,
    pub mass_change: f64,
    pub quadrature_refine: usize,
    /// The same two changes with the particle integrals on the refined lattice.
    pub energy_drift_refined: Option<f64>,
    pub mass_change_refined: Option<f64>,
    /// `max_t |max f(t) − ‖f₀‖∞|`
    pub sup_norm_error: f64,
    /// Most negative sample over the run.
    pub min_undershoot: f64,
}

impl ConservationAudit {
    /// The refined measurement when available, else the grid one.
    pub fn energy_drift_best(&self) -> f64 {
        self.energy_drift_refined.unwrap_or(self.energy_drift)
    }

    pub fn mass_change_best(&self) -> f64 {
        self.mass_change_refined.unwrap_or(self.mass_change)
    }
}

/// `P(T) ≤ P(0) + ∫₀ᵀ ‖∂tA‖ + Δv`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportBound {
    pub p_end: f64,
    pub p0: f64,
    pub field_integral: f64,
    pub dv: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveAudit {
    pub t_end: f64,
    pub steps: usize,
    pub conservation: ConservationAudit,
    pub support: SupportBound,
    pub gronwall: GronwallAudit,
    pub wave: WaveCrossCheck,
    pub representation: Option<RepresentationAudit>,
    /// Why the representation audit was skipped.
    pub representation_skipped: Option<String>,
    pub derivative: DerivativeAudit,
}

impl EvolveAudit {
    /// Human-readable list of every check outside its tolerance.
    pub fn failures(&self, tol: &Tolerances) -> Vec<String> {
        let c = &self.conservation;
        let mut out = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                out.push(msg);
            }
        };
        check(c.energy_drift_best() <= tol.energy_drift, format!("energy drift {:.3e} > {:.1e}", c.energy_drift_best(), tol.energy_drift));
        check(c.mass_change_best() <= tol.mass, format!("mass change {:.3e} > {:.1e}", c.mass_change_best(), tol.mass));
        check(c.sup_norm_error <= tol.sup_norm, format!("sup-norm error {:.3e} > {:.1e}", c.sup_norm_error, tol.sup_norm));
        check(
            c.min_undershoot >= -tol.undershoot * c.f0_sup,
            format!("undershoot {:.3e} below −{:.1e}‖f₀‖", c.min_undershoot, tol.undershoot),
        );
        check(self.gronwall.passes(tol.gronwall_margin), "bound chain margin below tolerance".to_string());
        check(self.support.holds, format!("P(T) = {} exceeds its bound", self.support.p_end));
        check(self.wave.passes(), format!("∂tA computations disagree beyond {:.3e}", self.wave.bound));
        check(self.derivative.bounded, "derivative sup-norm exceeds its envelope".to_string());
        out
    }
}

pub struct EvolveOutcome {
    pub simulation: Simulation,
    pub records: Vec<DiagnosticsRecord>,
    pub audit: EvolveAudit,
}

/// Run the configured evolution. When `write` is true the output directory
/// receives the CSV/JSON files.
pub fn run_evolve(cfg: &Config, write: bool) -> Result<EvolveOutcome> {
    let grid = grid_for(cfg, cfg.grid.t_final)?;
    let mut sim = Simulation::new(grid, cfg.data, cfg.solver)?;
    let mut writer =
        if write { Some(RunWriter::new(&cfg.output.dir, cfg.output.snapshot_every, cfg.output.csv, cfg.output.json)?) } else { None };
    let refine = cfg.diagnostics.quadrature_refine;
    let refined0 = refined_particle_integrals(&sim, refine)?;
    let mut records = Vec::with_capacity(grid.n_steps + 1);
    log::info!("evolve: {} × {} grid, {} steps of {}", grid.nx1(), grid.nv1(), grid.n_steps, grid.dt);
    sim.run_with(|s| {
        let r = record(s);
        log::debug!("step {} t={:.4} total={:.12e}", r.step, r.t, r.total);
        records.push(r);
        if let Some(w) = writer.as_mut() {
            w.observe(s)?;
        }
        Ok(())
    })?;
    let refined1 = refined_particle_integrals(&sim, refine)?;

    let first = records[0];
    let last = *records.last().expect("at least the initial record");
    let energy_drift_max = records.iter().map(|r| relative_change(first.total, r.total)).fold(0.0, f64::max);
    let f0_sup = cfg.data.f0_sup();
    let refined = refined0.zip(refined1);
    let conservation = ConservationAudit {
        f0_sup,
        energy_drift: relative_change(first.total, last.total),
        energy_drift_max,
        mass_change: relative_change(first.mass, last.mass),
        quadrature_refine: if refined.is_some() { refine } else { 0 },
        energy_drift_refined: refined
            .map(|((_, k0), (_, k1))| relative_change(k0 + first.field, k1 + last.field)),
        mass_change_refined: refined.map(|((m0, _), (m1, _))| relative_change(m0, m1)),
        sup_norm_error: records.iter().map(|r| (r.f_max - f0_sup).abs()).fold(0.0, f64::max),
        min_undershoot: records.iter().map(|r| r.undershoot).fold(0.0, f64::min),
    };

    let dv = grid.dv();
    let gronwall = gronwall_audit(&records, GronwallConstants::new(&cfg.data, first.p_of_t), dv);
    let field_integral: f64 =
        records.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].sup_dta + w[1].sup_dta)).sum();
    let support = SupportBound {
        p_end: last.p_of_t,
        p0: first.p_of_t,
        field_integral,
        dv,
        holds: last.p_of_t <= first.p_of_t + field_integral + dv,
    };
    let wave = wave_cross_check(&sim, cfg.diagnostics.wave_levels)?;
    let (representation, representation_skipped) = if !cfg.data.field_data_trivial() {
        (None, Some("nonzero field data".to_string()))
    } else if sim.f_history.len() < 2 {
        (None, Some("distribution history not stored".to_string()))
    } else {
        let k = cfg.diagnostics.representation_samples;
        (Some(representation_audit(&sim, &records, k, k)?), None)
    };
    let derivative = derivative_transport_audit(
        &grid,
        &sim.f_history,
        &sim.force,
        cfg.diagnostics.derivative_stride,
        sim.support_threshold(),
    );
    let audit = EvolveAudit {
        t_end: grid.t_end(),
        steps: grid.n_steps,
        conservation,
        support,
        gronwall,
        wave,
        representation,
        representation_skipped,
        derivative,
    };
    if let Some(w) = writer {
        w.finish(&records, &audit.gronwall.steps, &audit)?;
    }
    Ok(EvolveOutcome { simulation: sim, records, audit })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardSummary {
    pub horizon: f64,
    pub n_levels: usize,
    pub converged: bool,
    pub iterations: Vec<IterationRecord>,
    pub max_ratio: Option<f64>,
    /// Every iterate produced by the map passes H1–H4.
    pub audits_pass: bool,
    /// `‖g* − f_evolve‖∞` over the whole block.
    pub evolve_distance: f64,
    /// `10 Δx²`
    pub evolve_bound: f64,
    pub sweep: Vec<ThresholdPoint>,
    pub threshold: Option<f64>,
}

impl PicardSummary {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.converged {
            out.push("Picard iteration did not converge".to_string());
        }
        if self.max_ratio.is_some_and(|r| r > 0.5) {
            out.push(format!("contraction ratio {:.3} > 0.5", self.max_ratio.unwrap_or(f64::NAN)));
        }
        if !self.audits_pass {
            out.push("an iterate left the trial set".to_string());
        }
        if self.evolve_distance > self.evolve_bound {
            out.push(format!("fixed point differs from the evolution by {:.3e}", self.evolve_distance));
        }
        out
    }
}

pub struct PicardOutcome {
    pub report: PicardReport,
    pub summary: PicardSummary,
}

/// Solve by Picard iteration on `[0, T]`, compare with the time-stepped run,
/// and optionally sweep horizons for the contraction threshold.
pub fn run_picard(cfg: &Config, write: bool) -> Result<PicardOutcome> {
    let grid = grid_for(cfg, cfg.picard.horizon)?;
    log::info!("picard: {} levels on a {} × {} grid", grid.n_steps + 1, grid.nx1(), grid.nv1());
    let report = picard_solve(&grid, &cfg.data, cfg.picard.max_iter, cfg.picard.tol)?;

    let mut options = cfg.solver;
    options.transport = TransportMode::Analytic;
    options.coupling = true;
    options.history_cap = grid.n_steps + 1;
    let mut sim = Simulation::new(grid, cfg.data, options)?;
    sim.run()?;
    let evolve_distance = distance(&report.solution.g_values, &sim.f_history);

    let (sweep, threshold) = if cfg.picard.sweep.is_empty() {
        (Vec::new(), None)
    } else {
        let mut steps: Vec<usize> =
            cfg.picard.sweep.iter().map(|&h| crate::grid::step_count(h, grid.dt).max(1)).collect();
        steps.sort_unstable();
        steps.dedup();
        let last = *steps.last().expect("non-empty sweep");
        let big = grid_for(cfg, grid.time(last))?;
        contraction_threshold(&big, &cfg.data, &steps)?
    };
    let summary = PicardSummary {
        horizon: report.horizon,
        n_levels: report.n_levels,
        converged: report.converged,
        max_ratio: report.iterations.iter().filter_map(|r| r.ratio).reduce(f64::max),
        audits_pass: report.iterations.iter().all(|r| r.audit.all_pass()),
        iterations: report.iterations.clone(),
        evolve_distance,
        evolve_bound: 10.0 * grid.dx() * grid.dx(),
        sweep,
        threshold,
    };
    if write && cfg.output.json {
        std::fs::create_dir_all(&cfg.output.dir)?;
        write_json(&cfg.output.dir.join("picard_report.json"), &summary)?;
    }
    Ok(PicardOutcome { report, summary })
}

/// Pair both sides of the division identity for every speed and preset.
pub fn run_division(speeds: &[f64], dir: Option<&std::path::Path>) -> Result<Vec<DivisionRow>> {
    let rows = division_sweep(speeds, &TestFunction::presets())?;
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
        write_json(&d.join("division_report.json"), &rows)?;
    }
    Ok(rows)
}

pub fn run_convergence(cfg: &Config, write: bool) -> Result<ConvergenceReport> {
    let g = &cfg.grid;
    let report = convergence_study(
        g.bounds,
        &cfg.resolutions,
        g.nv as f64 / g.nx as f64,
        g.t_final,
        &cfg.data,
        cfg.solver,
        cfg.diagnostics.quadrature_refine,
    )?;
    if write && cfg.output.json {
        std::fs::create_dir_all(&cfg.output.dir)?;
        write_json(&cfg.output.dir.join("convergence_report.json"), &report)?;
    }
    Ok(report)
}

/// Turn a list of failed checks into an audit error.
pub fn strict(failures: Vec<String>) -> Result<()> {
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Audit(failures.join("; ")))
    }
}
