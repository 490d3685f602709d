//! Conserved quantities, support radius, and the a-priori bound chains.

use serde::Serialize;

use crate::coupling::{Simulation, TransportMode};
use crate::grid::PhaseGrid;
use crate::interp::interpolate_2d;
use crate::profile::InitialData;
use crate::state::FieldState;
use crate::transport::{evaluate_f, trace_forward, FieldHistory};
use crate::wave::{dalembert_a, dt_a_representation, dxdt_a_representation, DxDtA, KernelTable};

/// Per-step scalars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    /// `∬ √(1+v²) f dv dx`
    pub kinetic: f64,
    /// `½ ∫ (∂tA)² + (∂xA)² dx`
    pub field: f64,
    pub total: f64,
    /// Momentum support radius `P(t)`.
    pub p_of_t: f64,
    pub sup_dta: f64,
    pub sup_dxdta: f64,
    pub sup_j: f64,
    /// Largest value of `f(t)` found on the grid or at the image of the peak of `f₀`.
    pub f_max: f64,
    /// Most negative sample of `f`, or 0.
    pub undershoot: f64,
}

/// `(mass, kinetic)` by the 2-D trapezoid rule.
pub fn particle_integrals(grid: &PhaseGrid, f: &[f64]) -> (f64, f64) {
    let wx = grid.x.trapezoid_weights();
    let wv = grid.v.trapezoid_weights();
    let v0: Vec<f64> = grid.v.nodes().iter().map(|&v| 1f64.hypot(v)).collect();
    let (mut mass, mut kin) = (0.0, 0.0);
    for (row, w) in f.chunks_exact(grid.nv1()).zip(&wx) {
        let (mut m, mut k) = (0.0, 0.0);
        for j in 0..row.len() {
            m += wv[j] * row[j];
            k += wv[j] * v0[j] * row[j];
        }
        mass += w * m;
        kin += w * k;
    }
    (mass, kin)
}

/// `(mass, kinetic)` of the traced solution on a lattice `factor` times finer
/// than the grid, sampling `f` directly by characteristics. Only the analytic
/// transport defines `f` between nodes, so depth-one runs return `None`.
///
/// The trapezoid rule on the computational grid carries an `O(Δ³)` error on
/// `C¹` data whose sign depends on how the support edges fall between nodes;
/// the finer lattice separates that sampling error from the drift of the scheme.
pub fn refined_particle_integrals(sim: &Simulation, factor: usize) -> crate::error::Result<Option<(f64, f64)>> {
    if sim.options.transport != TransportMode::Analytic || factor == 0 {
        return Ok(None);
    }
    let g = &sim.grid;
    let fine = PhaseGrid {
        x: crate::grid::Axis::new(g.x.min, g.x.max, g.x.cells * factor)?,
        v: crate::grid::Axis::new(g.v.min, g.v.max, g.v.cells * factor)?,
        ..*g
    };
    let f = crate::transport::fill_analytic(&fine, &sim.data.f0, &sim.force, sim.state.step)?;
    Ok(Some(particle_integrals(&fine, &f)))
}

/// `¼ ∫ (B⁺)² + (B⁻)² dx`, which equals `½ ∫ (∂tA)² + (∂xA)² dx`.
pub fn field_energy(grid: &PhaseGrid, fields: &FieldState) -> f64 {
    let w = grid.x.trapezoid_weights();
    0.25 * (0..w.len()).map(|i| w[i] * (fields.b_plus[i].powi(2) + fields.b_minus[i].powi(2))).sum::<f64>()
}

/// Largest `|v|` on a v-row holding a sample above `threshold`; 0 for an empty support.
pub fn momentum_support(grid: &PhaseGrid, f: &[f64], threshold: f64) -> f64 {
    let nv1 = grid.nv1();
    let mut p = 0.0f64;
    for j in 0..nv1 {
        let v = grid.v.node(j).abs();
        if v > p && f.iter().skip(j).step_by(nv1).any(|&q| q > threshold) {
            p = v;
        }
    }
    p
}

fn sup(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, q| m.max(q.abs()))
}

/// Centered difference in x on interior nodes (one-sided at the ends).
pub fn dx_centered(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| match i {
            0 => (values[1] - values[0]) / dx,
            _ if i == n - 1 => (values[n - 1] - values[n - 2]) / dx,
            _ => (values[i + 1] - values[i - 1]) / (2.0 * dx),
        })
        .collect()
}

/// Diagnostics of the current simulation state.
pub fn record(sim: &Simulation) -> DiagnosticsRecord {
    let grid = &sim.grid;
    let st = &sim.state;
    let f = &st.distribution.values;
    let (mass, kinetic) = particle_integrals(grid, f);
    let field = field_energy(grid, &st.fields);
    let e = st.fields.dt_a();
    let mut f_max = st.distribution.max();
    if let Some((x0, v0)) = sim.data.f0.argmax() {
        if let Ok((x, v)) = trace_forward(&sim.force, 0, st.step, x0, v0) {
            let at = match sim.options.transport {
                TransportMode::Analytic => evaluate_f(&sim.data.f0, &sim.force, st.step, x, v).ok(),
                TransportMode::DepthOne => interpolate_2d(grid, f, x, v).ok(),
            };
            f_max = f_max.max(at.unwrap_or(0.0));
        }
    }
    DiagnosticsRecord {
        step: st.step,
        t: grid.time(st.step),
        mass,
        kinetic,
        field,
        total: kinetic + field,
        p_of_t: momentum_support(grid, f, sim.support_threshold()),
        sup_dta: sup(&e),
        sup_dxdta: sup(&dx_centered(&e, grid.dx())),
        sup_j: sup(&st.j),
        f_max,
        undershoot: st.distribution.undershoot(),
    }
}

/// Data-dependent constants of the bound chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GronwallConstants {
    /// `‖A₀'‖∞ + ‖A₁‖∞`
    pub data_term: f64,
    pub f0_sup: f64,
    pub p0: f64,
}

impl GronwallConstants {
    pub fn new(data: &InitialData, p0: f64) -> Self {
        GronwallConstants { data_term: data.a0.slope_sup() + data.a1.sup(), f0_sup: data.f0_sup(), p0 }
    }
}

/// Margins of the chain at one step (nonnegative means the inequality holds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainMargins {
    pub t: f64,
    /// `D + ∫₀ᵗ ‖j‖ − ‖∂tA(t)‖`
    pub field_from_current: f64,
    /// `2 ‖f₀‖ P(t) − ‖j(t)‖`
    pub current_from_support: f64,
    /// `P(0) + ∫₀ᵗ ‖∂tA‖ + Δv − P(t)`
    pub support_from_field: f64,
    /// `(D + P(0) + Δv) e^{ct} − ‖∂tA(t)‖`, `c = max(1, 2‖f₀‖)`
    pub envelope: f64,
    /// `(D + c') e^{c't} − ‖∂tA(t)‖`, `c' = 2‖f₀‖ max(1, P(0) + 1)`
    pub envelope_alt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GronwallAudit {
    pub constants: GronwallConstants,
    pub steps: Vec<ChainMargins>,
    pub min_field_from_current: f64,
    pub min_current_from_support: f64,
    pub min_support_from_field: f64,
    pub min_envelope: f64,
    pub min_envelope_alt: f64,
}

impl GronwallAudit {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_field_from_current >= -tol
            && self.min_current_from_support >= -tol
            && self.min_support_from_field >= -tol
            && self.min_envelope >= -tol
    }
}

/// Evaluate the chain at every record; time integrals use the trapezoid rule over the series.
pub fn gronwall_audit(records: &[DiagnosticsRecord], c: GronwallConstants, dv: f64) -> GronwallAudit {
    let rate = (2.0 * c.f0_sup).max(1.0);
    let rate_alt = 2.0 * c.f0_sup * (c.p0 + 1.0).max(1.0);
    let mut int_j = 0.0;
    let mut int_e = 0.0;
    let mut steps = Vec::with_capacity(records.len());
    for (k, r) in records.iter().enumerate() {
        if k > 0 {
            let p = &records[k - 1];
            let h = r.t - p.t;
            int_j += 0.5 * h * (p.sup_j + r.sup_j);
            int_e += 0.5 * h * (p.sup_dta + r.sup_dta);
        }
        steps.push(ChainMargins {
            t: r.t,
            field_from_current: c.data_term + int_j - r.sup_dta,
            current_from_support: 2.0 * c.f0_sup * r.p_of_t - r.sup_j,
            support_from_field: c.p0 + int_e + dv - r.p_of_t,
            envelope: (c.data_term + c.p0 + dv) * (rate * r.t).exp() - r.sup_dta,
            envelope_alt: (c.data_term + rate_alt) * (rate_alt * r.t).exp() - r.sup_dta,
        });
    }
    let min = |g: fn(&ChainMargins) -> f64| steps.iter().map(g).fold(f64::INFINITY, f64::min);
    GronwallAudit {
        constants: c,
        min_field_from_current: min(|m| m.field_from_current),
        min_current_from_support: min(|m| m.current_from_support),
        min_support_from_field: min(|m| m.support_from_field),
        min_envelope: min(|m| m.envelope),
        min_envelope_alt: min(|m| m.envelope_alt),
        steps,
    }
}

/// Bound on `‖∂x∂tA‖∞` over `[0, T]` from the four-term representation
/// (trivial field data), using the run's own `P`, `‖∂tA‖∞` and `‖f₀‖∞`:
///
/// * `|I_a| ≤ 2 T P √(1+P²) ‖∂tA‖ ‖f₀‖` since `∫_{−P}^{P} |K±| dv = 2P√(1+P²)`;
/// * `|I_b| ≤ ‖f₀‖ (2P₀ + 2P₀³/3)` since `1/(1+v̂) + 1/(1−v̂) = 2(1+v²)`;
/// * `|II| ≤ 2 P₀ ‖f₀‖` and `|∫ v² f dv| ≤ 2P³ ‖f₀‖ / 3`.
pub fn dxdta_bound(t_end: f64, p: f64, p0: f64, sup_dta: f64, f0_sup: f64) -> f64 {
    2.0 * t_end * p * 1f64.hypot(p) * sup_dta * f0_sup
        + f0_sup * (4.0 * p0 + 2.0 * p0.powi(3) / 3.0)
        + 2.0 * p.powi(3) * f0_sup / 3.0
}

/// The same bound with the kernel constant 2 in the form
/// `data + 2 P ‖f₀‖ (T (1+P) ‖∂tA‖ + 2 + P²)`.
pub fn dxdta_bound_c2(data_term: f64, t_end: f64, p: f64, sup_dta: f64, f0_sup: f64) -> f64 {
    data_term + 2.0 * p * f0_sup * (t_end * (1.0 + p) * sup_dta + 2.0 + p * p)
}

/// One sample of the `∂x∂tA` cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepresentationSample {
    pub t: f64,
    pub x: f64,
    pub representation: DxDtA,
    pub finite_difference: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationAudit {
    pub samples: Vec<RepresentationSample>,
    pub max_abs_err: f64,
    /// `max |representation − finite difference| / Δx`
    pub fitted_c: f64,
    /// `max |K±(v)| / √(1+v²)` over the v-nodes
    pub kernel_max_ratio: f64,
    /// v-nodes where `|K±(v)| > 2√(1+v²)`
    pub kernel_violations_2v0: usize,
    pub kernel_nodes: usize,
    pub sup_dxdta: f64,
    pub bound: f64,
    pub bound_c2: f64,
}

/// Compare the `∂x∂tA` representation against the centered x-difference of the
/// evolved `∂tA` on an `nt × nx` sample of levels and nodes.
pub fn representation_audit(
    sim: &Simulation,
    records: &[DiagnosticsRecord],
    nt: usize,
    nx: usize,
) -> crate::error::Result<RepresentationAudit> {
    let g = &sim.grid;
    let n_top = sim.state.step.min(sim.f_history.len().saturating_sub(1));
    let dx = g.dx();
    let mut samples = Vec::new();
    for a in 1..=nt {
        let n = (n_top * a + nt / 2) / nt;
        let fd = dx_centered(sim.force.level(n), dx);
        for b in 0..nx {
            let i = 1 + ((g.x.cells - 2) * (2 * b + 1)) / (2 * nx);
            let rep = dxdt_a_representation(&sim.data, g, &sim.f_history, &sim.force, n, i)?;
            samples.push(RepresentationSample {
                t: g.time(n),
                x: g.x.node(i),
                representation: rep,
                finite_difference: fd[i],
                abs_err: (rep.total - fd[i]).abs(),
            });
        }
    }
    let max_abs_err = samples.iter().map(|s| s.abs_err).fold(0.0, f64::max);
    let table = KernelTable::new(&g.v.nodes());
    let p = records.iter().map(|r| r.p_of_t).fold(0.0, f64::max) + g.dv();
    let p0 = records.first().map_or(0.0, |r| r.p_of_t) + g.dv();
    let sup_e = records.iter().map(|r| r.sup_dta).fold(0.0, f64::max);
    let sup_dxdta = records.iter().map(|r| r.sup_dxdta).fold(0.0, f64::max);
    let t_end = records.last().map_or(0.0, |r| r.t);
    let f0 = sim.data.f0_sup();
    let data_term = sim.data.a0.slope_sup() + sim.data.a1.sup();
    Ok(RepresentationAudit {
        samples,
        max_abs_err,
        fitted_c: max_abs_err / dx,
        kernel_max_ratio: table.max_ratio(),
        kernel_violations_2v0: table.violations(2.0).len(),
        kernel_nodes: table.v.len(),
        sup_dxdta,
        bound: dxdta_bound(t_end, p, p0, sup_e, f0),
        bound_c2: dxdta_bound_c2(data_term, t_end, p, sup_e, f0),
    })
}

/// Pairwise agreement of the three computations of `∂tA`: the evolved
/// `(B⁺ + B⁻)/2`, the ray formula, and the centered time difference of
/// d'Alembert's `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveCrossCheck {
    pub levels: usize,
    pub points: usize,
    pub max_evolution_vs_rays: f64,
    pub max_evolution_vs_dalembert: f64,
    pub max_rays_vs_dalembert: f64,
    /// `10 Δx²`
    pub bound: f64,
}

impl WaveCrossCheck {
    pub fn passes(&self) -> bool {
        self.max_evolution_vs_rays.max(self.max_evolution_vs_dalembert).max(self.max_rays_vs_dalembert) <= self.bound
    }
}

/// Compare at `nt` interior levels, every x-node.
pub fn wave_cross_check(sim: &Simulation, nt: usize) -> crate::error::Result<WaveCrossCheck> {
    let g = &sim.grid;
    let top = sim.state.step;
    let dt = g.dt;
    let (mut er, mut ed, mut rd, mut points) = (0.0f64, 0.0f64, 0.0f64, 0);
    let mut levels = 0;
    if top >= 2 {
        let nt = nt.clamp(1, top - 1);
        for a in 1..=nt {
            let n = 1 + ((top - 2) * a) / nt;
            levels += 1;
            let t = g.time(n);
            let evo = sim.force.level(n);
            for (i, &e) in evo.iter().enumerate() {
                let x = g.x.node(i);
                let rays = dt_a_representation(&sim.data, &sim.sources, t, x)?;
                let dal = (dalembert_a(&sim.data, &sim.sources, g.time(n + 1), x)?
                    - dalembert_a(&sim.data, &sim.sources, g.time(n - 1), x)?)
                    / (2.0 * dt);
                er = er.max((e - rays).abs());
                ed = ed.max((e - dal).abs());
                rd = rd.max((rays - dal).abs());
                points += 1;
            }
        }
    }
    Ok(WaveCrossCheck {
        levels,
        points,
        max_evolution_vs_rays: er,
        max_evolution_vs_dalembert: ed,
        max_rays_vs_dalembert: rd,
        bound: 10.0 * g.dx() * g.dx(),
    })
}

/// Residuals of the transport system satisfied by `(∂xf, ∂vf)`:
/// `L ∂xf = ∂x∂tA ∂vf` and `L ∂vf = −(1+v²)^{−3/2} ∂xf`, `L = ∂t + v̂∂x − ∂tA ∂v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeAudit {
    pub levels_checked: Vec<usize>,
    pub points: usize,
    pub max_residual_x: f64,
    pub max_residual_v: f64,
    /// `max(‖∂xf‖∞, ‖∂vf‖∞)` over the checked levels, for scale.
    pub derivative_scale: f64,
    /// `‖∂xf(t)‖∞ + ‖∂vf(t)‖∞` at every stored level.
    pub derivative_sup: Vec<f64>,
    /// `S(0) exp(∫₀ᵗ max(1, ‖∂x∂tA‖∞))` at every stored level.
    pub derivative_envelope: Vec<f64>,
    pub bounded: bool,
}

/// Centered-difference audit over the stored history. Stencils touching
/// samples at or below `threshold` are skipped: the data are only `C¹`, and
/// across the support edge the second differences are not consistent.
pub fn derivative_transport_audit(
    grid: &PhaseGrid,
    f_levels: &[Vec<f64>],
    force: &FieldHistory,
    stride: usize,
    threshold: f64,
) -> DerivativeAudit {
    let (dx, dv, dt) = (grid.dx(), grid.dv(), grid.dt);
    let (nx, nv) = (grid.x.cells, grid.v.cells);
    let n_levels = f_levels.len().min(force.len());
    let vs = grid.v.nodes();
    let vh: Vec<f64> = vs.iter().map(|&v| crate::transport::v_hat(v)).collect();
    let at = |n: usize, i: usize, j: usize| f_levels[n][grid.idx(i, j)];
    let fx = |n: usize, i: usize, j: usize| (at(n, i + 1, j) - at(n, i - 1, j)) / (2.0 * dx);
    let fv = |n: usize, i: usize, j: usize| (at(n, i, j + 1) - at(n, i, j - 1)) / (2.0 * dv);

    let mut derivative_sup = Vec::with_capacity(n_levels);
    for n in 0..n_levels {
        let (mut sx, mut sv) = (0.0f64, 0.0f64);
        for i in 1..nx {
            for j in 1..nv {
                sx = sx.max(fx(n, i, j).abs());
                sv = sv.max(fv(n, i, j).abs());
            }
        }
        derivative_sup.push(sx + sv);
    }
    let mut derivative_envelope = Vec::with_capacity(n_levels);
    let mut integral = 0.0;
    let rate = |n: usize| sup(&dx_centered(force.level(n), dx)).max(1.0);
    for n in 0..n_levels {
        if n > 0 {
            integral += 0.5 * dt * (rate(n - 1) + rate(n));
        }
        derivative_envelope.push(derivative_sup.first().copied().unwrap_or(0.0) * integral.exp());
    }
    let bounded = derivative_sup
        .iter()
        .zip(&derivative_envelope)
        .all(|(s, e)| s.is_finite() && *s <= e * (1.0 + 1e-9) + 1e-12);

    let stride = stride.max(1);
    let mut levels_checked = Vec::new();
    let (mut points, mut rx, mut rv, mut scale) = (0, 0.0f64, 0.0f64, 0.0f64);
    if n_levels >= 3 {
        for n in (1..n_levels - 1).step_by(stride) {
            levels_checked.push(n);
            let e = force.level(n);
            let ex = dx_centered(e, dx);
            for i in 2..nx - 1 {
                for j in 2..nv - 1 {
                    let inside = (n - 1..=n + 1).all(|m| {
                        (i - 2..=i + 2).all(|ii| (j - 2..=j + 2).all(|jj| at(m, ii, jj) > threshold))
                    });
                    if !inside {
                        continue;
                    }
                    let lx = (fx(n + 1, i, j) - fx(n - 1, i, j)) / (2.0 * dt)
                        + vh[j] * (fx(n, i + 1, j) - fx(n, i - 1, j)) / (2.0 * dx)
                        - e[i] * (fx(n, i, j + 1) - fx(n, i, j - 1)) / (2.0 * dv);
                    let lv = (fv(n + 1, i, j) - fv(n - 1, i, j)) / (2.0 * dt)
                        + vh[j] * (fv(n, i + 1, j) - fv(n, i - 1, j)) / (2.0 * dx)
                        - e[i] * (fv(n, i, j + 1) - fv(n, i, j - 1)) / (2.0 * dv);
                    let (gx, gv) = (fx(n, i, j), fv(n, i, j));
                    rx = rx.max((lx - ex[i] * gv).abs());
                    rv = rv.max((lv + (1.0 + vs[j] * vs[j]).powf(-1.5) * gx).abs());
                    scale = scale.max(gx.abs()).max(gv.abs());
                    points += 1;
                }
            }
        }
    }
    DerivativeAudit {
        levels_checked,
        points,
        max_residual_x: rx,
        max_residual_v: rv,
        derivative_scale: scale,
        derivative_sup,
        derivative_envelope,
        bounded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::SolverOptions;
    use crate::grid::{build_grid, DomainBounds};
    use crate::profile::{Bump, Profile1d, Profile2d};

    fn grid(nx: usize, nv: usize, t: f64) -> PhaseGrid {
        build_grid(DomainBounds { x_min: -6.0, x_max: 6.0, v_min: -4.0, v_max: 4.0 }, nx, nv, t, None).unwrap()
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let sim = Simulation::new(grid(16, 16, 1.0), InitialData::zero(), SolverOptions::default()).unwrap();
        let r = record(&sim);
        assert_eq!(r.total, 0.0);
        assert_eq!(r.p_of_t, 0.0);
    }

    #[test]
    fn free_wave_energy_is_conserved() {
        let data = InitialData { a1: Profile1d::Bump(Bump::new(0.0, 1.0, 1.0)), ..InitialData::zero() };
        let mut sim = Simulation::new(grid(256, 8, 2.0), data, SolverOptions::default()).unwrap();
        let e0 = record(&sim).field;
        // ½ ∫ A₁² = ½ · 256/315
        assert!((e0 - 0.5 * 256.0 / 315.0).abs() < 1e-6, "{e0}");
        sim.run().unwrap();
        assert!((record(&sim).field - e0).abs() < 1e-14);
    }

    #[test]
    fn refined_integrals_match_closed_form() {
        // ∬ b(x) b(v) = (16/15)² for unit bumps
        let g = grid(64, 64, 0.0);
        let data = InitialData { f0: Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0), ..InitialData::zero() };
        let sim = Simulation::new(g, data, SolverOptions::default()).unwrap();
        let (m, _) = refined_particle_integrals(&sim, 4).unwrap().unwrap();
        let (mg, _) = particle_integrals(&g, &sim.state.distribution.values);
        let exact = (16.0f64 / 15.0).powi(2);
        assert!((m - exact).abs() < (mg - exact).abs());
        assert!((m - exact).abs() < 1e-4, "{m}");
        let d1 = Simulation::new(g, data, SolverOptions { transport: TransportMode::DepthOne, ..Default::default() }).unwrap();
        assert!(refined_particle_integrals(&d1, 4).unwrap().is_none());
    }

    #[test]
    fn three_field_computations_agree() {
        let g = grid(128, 64, 2.0);
        let data = InitialData { f0: Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0), ..InitialData::zero() };
        let mut sim = Simulation::new(g, data, SolverOptions::default()).unwrap();
        sim.run().unwrap();
        let w = wave_cross_check(&sim, 5).unwrap();
        assert_eq!(w.points, 5 * g.nx1());
        assert!(w.passes(), "{w:?}");
    }

    #[test]
    fn support_radius_of_bump() {
        let g = grid(64, 64, 0.0);
        let data = InitialData { f0: Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0), ..InitialData::zero() };
        let sim = Simulation::new(g, data, SolverOptions::default()).unwrap();
        let p = record(&sim).p_of_t;
        assert!((p - 1.5).abs() <= g.dv(), "{p}");
    }

    #[test]
    fn chain_on_zero_run_keeps_data_margins() {
        let recs: Vec<DiagnosticsRecord> = (0..5)
            .map(|k| DiagnosticsRecord {
                step: k,
                t: k as f64 * 0.1,
                mass: 0.0,
                kinetic: 0.0,
                field: 0.0,
                total: 0.0,
                p_of_t: 0.0,
                sup_dta: 0.0,
                sup_dxdta: 0.0,
                sup_j: 0.0,
                f_max: 0.0,
                undershoot: 0.0,
            })
            .collect();
        let c = GronwallConstants { data_term: 0.5, f0_sup: 0.0, p0: 0.0 };
        let a = gronwall_audit(&recs, c, 0.1);
        assert!(a.passes(0.0));
        assert_eq!(a.min_field_from_current, 0.5);
        assert_eq!(a.min_support_from_field, 0.1);
    }

    #[test]
    fn free_streaming_derivative_residual_is_small() {
        let g = grid(128, 128, 1.0);
        let data = InitialData { f0: Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0), ..InitialData::zero() };
        let opts = SolverOptions { coupling: false, ..Default::default() };
        let mut sim = Simulation::new(g, data, opts).unwrap();
        sim.run().unwrap();
        let a = derivative_transport_audit(&g, &sim.f_history, &sim.force, 1, 1e-12);
        assert!(a.points > 100);
        assert!(a.max_residual_x < 0.05 * a.derivative_scale, "{a:?}");
        assert!(a.max_residual_v < 0.05 * a.derivative_scale);
        assert!(a.bounded);
    }
}
