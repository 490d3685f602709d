//! Three-resolution convergence study.
//!
//! All levels share the horizon of the coarsest grid, which is an exact
//! multiple of every finer time step. Uncoupled runs are compared with the
//! free-streaming closed form; coupled runs by successive differences on the
//! coarse nodes.

use serde::Serialize;

use crate::coupling::{Simulation, SolverOptions};
use crate::diagnostics::{field_energy, particle_integrals, refined_particle_integrals};
use crate::error::{Error, Result};
use crate::grid::{build_grid, DomainBounds, PhaseGrid};
use crate::profile::InitialData;
use crate::transport::v_hat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceLevel {
    pub nx: usize,
    pub nv: usize,
    pub dx: f64,
    pub t_end: f64,
    /// Closed-form error, or the difference to the next finer level.
    pub transport_error: Option<f64>,
    pub energy_drift: f64,
    pub mass_change: f64,
    pub energy_drift_refined: Option<f64>,
    pub mass_change_refined: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// `closed_form` or `successive_differences`
    pub reference: &'static str,
    pub levels: Vec<ConvergenceLevel>,
    pub transport_orders: Vec<f64>,
    pub energy_orders: Vec<f64>,
    pub energy_orders_refined: Option<Vec<f64>>,
}

/// Relative change `|b − a| / |a|`, or the absolute change when `a = 0`.
pub fn relative_change(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        (b - a).abs()
    } else {
        ((b - a) / a).abs()
    }
}

/// `log₂(e[k] / e[k+1])` for consecutive pairs.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Conservation of one finished run against its initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConservation {
    pub energy_drift: f64,
    pub mass_change: f64,
    pub energy_drift_refined: Option<f64>,
    pub mass_change_refined: Option<f64>,
}

/// Run to the end, measuring mass and energy at both ends on the grid and,
/// when `refine > 0`, on a `refine`-times finer lattice.
pub fn run_conserving(sim: &mut Simulation, refine: usize) -> Result<RunConservation> {
    let g = sim.grid;
    let (m0, k0) = particle_integrals(&g, &sim.state.distribution.values);
    let w0 = field_energy(&g, &sim.state.fields);
    let r0 = refined_particle_integrals(sim, refine)?;
    sim.run()?;
    let (m1, k1) = particle_integrals(&g, &sim.state.distribution.values);
    let w1 = field_energy(&g, &sim.state.fields);
    let r1 = refined_particle_integrals(sim, refine)?;
    let refined = r0.zip(r1);
    Ok(RunConservation {
        energy_drift: relative_change(k0 + w0, k1 + w1),
        mass_change: relative_change(m0, m1),
        energy_drift_refined: refined.map(|((_, ka), (_, kb))| relative_change(ka + w0, kb + w1)),
        mass_change_refined: refined.map(|((ma, _), (mb, _))| relative_change(ma, mb)),
    })
}

/// Free-streaming error `max |f − f₀(x − v̂t, v)|` over the grid.
pub fn free_streaming_error(grid: &PhaseGrid, data: &InitialData, f: &[f64], t: f64) -> f64 {
    let mut err = 0.0f64;
    for i in 0..grid.nx1() {
        let x = grid.x.node(i);
        for j in 0..grid.nv1() {
            let v = grid.v.node(j);
            err = err.max((f[grid.idx(i, j)] - data.f0.value(x - v_hat(v) * t, v)).abs());
        }
    }
    err
}

/// Run at `nx ∈ resolutions` (each double the previous) with `nv` scaled alike.
pub fn convergence_study(
    bounds: DomainBounds,
    resolutions: &[usize],
    nv_over_nx: f64,
    t_final: f64,
    data: &InitialData,
    options: SolverOptions,
    refine: usize,
) -> Result<ConvergenceReport> {
    if resolutions.len() < 2 || resolutions.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidGrid("convergence needs cell counts that double at each level".into()));
    }
    let extent = data.extent();
    let nv_of = |nx: usize| ((nx as f64 * nv_over_nx).round() as usize).max(2);
    let coarse = build_grid(bounds, resolutions[0], nv_of(resolutions[0]), t_final, extent.as_ref())?;
    let horizon = coarse.t_end();
    let closed_form = !options.coupling;

    let mut levels = Vec::new();
    let mut finals: Vec<(PhaseGrid, Vec<f64>)> = Vec::new();
    for &nx in resolutions {
        let g = build_grid(bounds, nx, nv_of(nx), horizon, extent.as_ref())?;
        log::info!("convergence level nx = {nx}: {} steps", g.n_steps);
        let mut sim = Simulation::new(g, *data, options)?;
        let c = run_conserving(&mut sim, refine)?;
        let f = sim.state.distribution.values;
        levels.push(ConvergenceLevel {
            nx,
            nv: g.v.cells,
            dx: g.dx(),
            t_end: g.t_end(),
            transport_error: closed_form.then(|| free_streaming_error(&g, data, &f, g.t_end())),
            energy_drift: c.energy_drift,
            mass_change: c.mass_change,
            energy_drift_refined: c.energy_drift_refined,
            mass_change_refined: c.mass_change_refined,
        });
        finals.push((g, f));
    }
    if !closed_form {
        for k in 0..finals.len() - 1 {
            let (gc, fc) = &finals[k];
            let (gf, ff) = &finals[k + 1];
            let rx = gf.x.cells / gc.x.cells;
            let rv = gf.v.cells / gc.v.cells;
            let mut d = 0.0f64;
            for i in 0..gc.nx1() {
                for j in 0..gc.nv1() {
                    d = d.max((fc[gc.idx(i, j)] - ff[gf.idx(rx * i, rv * j)]).abs());
                }
            }
            levels[k].transport_error = Some(d);
        }
    }
    let errors: Vec<f64> = levels.iter().filter_map(|l| l.transport_error).collect();
    let drifts: Vec<f64> = levels.iter().map(|l| l.energy_drift).collect();
    let refined: Option<Vec<f64>> = levels.iter().map(|l| l.energy_drift_refined).collect();
    Ok(ConvergenceReport {
        reference: if closed_form { "closed_form" } else { "successive_differences" },
        transport_orders: observed_orders(&errors),
        energy_orders: observed_orders(&drifts),
        energy_orders_refined: refined.map(|r| observed_orders(&r)),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::TransportMode;
    use crate::profile::Profile2d;

    #[test]
    fn orders_of_geometric_errors() {
        let o = observed_orders(&[1.0, 0.25, 0.0625]);
        assert_eq!(o, vec![2.0, 2.0]);
        assert_eq!(relative_change(0.0, -3.0), 3.0);
        assert_eq!(relative_change(2.0, 1.0), 0.5);
    }

    #[test]
    fn analytic_free_streaming_is_exact_at_every_level() {
        let data = InitialData { f0: Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0), ..InitialData::zero() };
        let b = DomainBounds { x_min: -6.0, x_max: 6.0, v_min: -4.0, v_max: 4.0 };
        let opts = SolverOptions { coupling: false, ..Default::default() };
        let r = convergence_study(b, &[16, 32, 64], 1.0, 1.0, &data, opts, 0).unwrap();
        assert_eq!(r.reference, "closed_form");
        assert!(r.levels.iter().all(|l| l.transport_error.unwrap() < 1e-13));
        assert!(r.levels.iter().all(|l| l.t_end == r.levels[0].t_end));
    }

    #[test]
    fn depth_one_converges() {
        let data = InitialData { f0: Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0), ..InitialData::zero() };
        let b = DomainBounds { x_min: -6.0, x_max: 6.0, v_min: -4.0, v_max: 4.0 };
        let opts = SolverOptions { coupling: false, transport: TransportMode::DepthOne, ..Default::default() };
        let r = convergence_study(b, &[32, 64, 128], 1.0, 1.0, &data, opts, 0).unwrap();
        assert_eq!(r.transport_orders.len(), 2);
        assert!(r.transport_orders.iter().all(|&o| o > 1.0), "{r:?}");
    }

    #[test]
    fn coupled_levels_use_successive_differences() {
        let data = InitialData { f0: Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0), ..InitialData::zero() };
        let b = DomainBounds { x_min: -6.0, x_max: 6.0, v_min: -4.0, v_max: 4.0 };
        let r = convergence_study(b, &[16, 32, 64], 1.0, 0.5, &data, SolverOptions::default(), 0).unwrap();
        assert_eq!(r.reference, "successive_differences");
        assert_eq!(r.transport_orders.len(), 1);
        assert!(r.levels[2].transport_error.is_none());
    }
}
