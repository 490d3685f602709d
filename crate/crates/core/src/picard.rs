//! Picard iteration for the coupled system on a fixed horizon.
//!
//! A trial density `g` on the space-time block generates a current `j_g`, the
//! current generates `∂tA_g` by the ray formula, and transporting `f₀` along
//! the characteristics of that field gives `Φ(g)`. Fixed points of `Φ` solve
//! the coupled problem.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::profile::InitialData;
use crate::state::SUPPORT_EPS;
use crate::transport::{fill_analytic, moments, FieldHistory};
use crate::wave::{dt_a_representation, SourceHistory};

/// One measured hypothesis: `measured ≤ bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn le(measured: f64, bound: f64) -> Self {
        Check { measured, bound, pass: measured <= bound }
    }
}

/// The four membership conditions of the trial set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BtAudit {
    /// `‖g‖∞ ≤ ‖f₀‖_{W^{1,∞}}`
    pub h1: Check,
    /// Support inside `(−R−1, R+1) × (−M−1, M+1)`: measured is the largest
    /// excess `max(|x| − R − 1, |v| − M − 1)` over the support, bound 0.
    pub h2: Check,
    /// Discrete Lipschitz constant `≤ 3‖f₀‖_{W^{1,∞}}`
    pub h3: Check,
    /// `‖∂t g‖∞ ≤ 3‖f₀‖_{W^{1,∞}}(2 + ‖A₀'‖∞ + ‖A₁‖∞)`
    pub h4: Check,
    /// The same with `‖A₀‖∞` in place of `‖A₀'‖∞` (reported only).
    pub h4_a0: Check,
}

impl BtAudit {
    pub fn all_pass(&self) -> bool {
        self.h1.pass && self.h2.pass && self.h3.pass && self.h4.pass
    }
}

/// A trial density on levels `0..=n` of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardIterate {
    pub g_values: Vec<Vec<f64>>,
    pub audit: Option<BtAudit>,
    pub distance_to_prev: Option<f64>,
}

impl PicardIterate {
    pub fn new(g_values: Vec<Vec<f64>>) -> Self {
        PicardIterate { g_values, audit: None, distance_to_prev: None }
    }

    /// `f₀` repeated at every level.
    pub fn constant_extension(grid: &PhaseGrid, data: &InitialData, n_levels: usize) -> Self {
        let f0 = sample_f0(grid, data);
        Self::new(vec![f0; n_levels])
    }

    pub fn n_levels(&self) -> usize {
        self.g_values.len()
    }
}

fn sample_f0(grid: &PhaseGrid, data: &InitialData) -> Vec<f64> {
    let mut out = vec![0.0; grid.n_nodes()];
    for i in 0..grid.nx1() {
        for j in 0..grid.nv1() {
            out[grid.idx(i, j)] = data.f0.value(grid.x.node(i), grid.v.node(j));
        }
    }
    out
}

/// `sup |a − b|` over every stored node of two blocks.
pub fn distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// `∂tA_g` at every level and node from the ray formula.
pub fn field_of(grid: &PhaseGrid, data: &InitialData, g: &PicardIterate) -> Result<FieldHistory> {
    let mut src = SourceHistory::new(grid.x, grid.dt);
    for level in &g.g_values {
        src.push(moments(grid, level).1);
    }
    let mut hist = FieldHistory::new(grid.x, grid.dt);
    for n in 0..g.n_levels() {
        let t = grid.time(n);
        let e = (0..grid.nx1())
            .map(|i| dt_a_representation(data, &src, t, grid.x.node(i)))
            .collect::<Result<Vec<f64>>>()?;
        hist.push(e);
    }
    Ok(hist)
}

/// The solution map `Φ(g)`.
pub fn phi(grid: &PhaseGrid, data: &InitialData, g: &PicardIterate) -> Result<PicardIterate> {
    let hist = field_of(grid, data, g)?;
    let mut levels = Vec::with_capacity(g.n_levels());
    for n in 0..g.n_levels() {
        levels.push(fill_analytic(grid, &data.f0, &hist, n)?);
    }
    let mut out = PicardIterate::new(levels);
    out.audit = Some(audit_bt(grid, data, &out));
    Ok(out)
}

/// `‖Φ(g₁) − Φ(g₂)‖∞ / ‖g₁ − g₂‖∞`.
pub fn contraction_ratio(grid: &PhaseGrid, data: &InitialData, g1: &PicardIterate, g2: &PicardIterate) -> Result<f64> {
    let d = distance(&g1.g_values, &g2.g_values);
    if d == 0.0 {
        return Err(Error::ZeroDistance);
    }
    let p1 = phi(grid, data, g1)?;
    let p2 = phi(grid, data, g2)?;
    Ok(distance(&p1.g_values, &p2.g_values) / d)
}

/// Evaluate the four membership conditions by discrete sup-norms and
/// nearest-neighbour difference quotients.
pub fn audit_bt(grid: &PhaseGrid, data: &InitialData, g: &PicardIterate) -> BtAudit {
    let w = data.f0_w1inf();
    let (r, m) = data.support_radii();
    let thr = SUPPORT_EPS * data.f0_sup();
    let (dx, dv, dt) = (grid.dx(), grid.dv(), grid.dt);
    let (nx1, nv1) = (grid.nx1(), grid.nv1());
    let (mut sup, mut excess, mut lip, mut dtg) = (0.0f64, f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for (n, level) in g.g_values.iter().enumerate() {
        for i in 0..nx1 {
            let x = grid.x.node(i);
            for j in 0..nv1 {
                let q = level[grid.idx(i, j)];
                sup = sup.max(q.abs());
                if q.abs() > thr {
                    let v = grid.v.node(j);
                    excess = excess.max((x.abs() - r - 1.0).max(v.abs() - m - 1.0));
                }
                if i + 1 < nx1 {
                    lip = lip.max((level[grid.idx(i + 1, j)] - q).abs() / dx);
                }
                if j + 1 < nv1 {
                    lip = lip.max((level[grid.idx(i, j + 1)] - q).abs() / dv);
                }
            }
        }
        if n > 0 {
            let prev = &g.g_values[n - 1];
            dtg = dtg.max(level.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / dt);
        }
    }
    let excess = if excess == f64::NEG_INFINITY { -1.0 } else { excess };
    let h2 = Check { measured: excess, bound: 0.0, pass: excess < 0.0 };
    let slope = data.a0.slope_sup();
    let a0 = data.a0.sup();
    let a1 = data.a1.sup();
    BtAudit {
        h1: Check::le(sup, w),
        h2,
        h3: Check::le(lip, 3.0 * w),
        h4: Check::le(dtg, 3.0 * w * (2.0 + slope + a1)),
        h4_a0: Check::le(dtg, 3.0 * w * (2.0 + a0 + a1)),
    }
}

/// One row of the iteration log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub n: usize,
    /// `‖g_{n+1} − g_n‖∞`
    pub distance: f64,
    /// `distance_n / distance_{n−1}`
    pub ratio: Option<f64>,
    pub audit: BtAudit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    pub horizon: f64,
    pub n_levels: usize,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub solution: PicardIterate,
}

/// Iterate `g_{n+1} = Φ(g_n)` from the constant extension of `f₀` until
/// `‖g_{n+1} − g_n‖∞ < tol · ‖f₀‖∞` or `max_iter` maps have been applied.
pub fn picard_solve(grid: &PhaseGrid, data: &InitialData, max_iter: usize, tol: f64) -> Result<PicardReport> {
    let n_levels = grid.n_steps + 1;
    let mut g = PicardIterate::constant_extension(grid, data, n_levels);
    g.audit = Some(audit_bt(grid, data, &g));
    let stop = tol * data.f0_sup();
    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut converged = false;
    for n in 0..max_iter {
        let mut next = phi(grid, data, &g)?;
        let d = distance(&next.g_values, &g.g_values);
        next.distance_to_prev = Some(d);
        let ratio = iterations.last().and_then(|r| (r.distance > 0.0).then(|| d / r.distance));
        log::info!("picard iteration {n}: distance {d:.3e}");
        iterations.push(IterationRecord { n, distance: d, ratio, audit: next.audit.expect("phi audits its output") });
        g = next;
        if d <= stop {
            converged = true;
            break;
        }
    }
    Ok(PicardReport { horizon: grid.t_end(), n_levels, iterations, converged, solution: g })
}

/// `Φ`-contraction measured between the first two iterates on a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub horizon: f64,
    pub ratio: f64,
}

/// Contraction ratio `‖Φ(g₁) − Φ(g₀)‖ / ‖g₁ − g₀‖` for each horizon (a multiple
/// of `dt`), and the first horizon where it exceeds 1 (refined by bisection
/// over step counts).
pub fn contraction_threshold(
    grid: &PhaseGrid,
    data: &InitialData,
    step_counts: &[usize],
) -> Result<(Vec<ThresholdPoint>, Option<f64>)> {
    let ratio_at = |steps: usize| -> Result<f64> {
        let g = PhaseGrid { n_steps: steps, ..*grid };
        let g0 = PicardIterate::constant_extension(&g, data, steps + 1);
        let g1 = phi(&g, data, &g0)?;
        let g2 = phi(&g, data, &g1)?;
        let d0 = distance(&g1.g_values, &g0.g_values);
        if d0 == 0.0 {
            return Err(Error::ZeroDistance);
        }
        Ok(distance(&g2.g_values, &g1.g_values) / d0)
    };
    let mut points = Vec::new();
    let mut first_above = None;
    let mut last_below = 0usize;
    for &s in step_counts {
        let r = ratio_at(s)?;
        points.push(ThresholdPoint { horizon: grid.time(s), ratio: r });
        if r > 1.0 {
            first_above = Some(s);
            break;
        }
        last_below = s;
    }
    let threshold = match first_above {
        None => None,
        Some(mut hi) => {
            let mut lo = last_below;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                let r = ratio_at(mid)?;
                points.push(ThresholdPoint { horizon: grid.time(mid), ratio: r });
                if r > 1.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(grid.time(hi))
        }
    };
    points.sort_by(|a, b| a.horizon.total_cmp(&b.horizon));
    Ok((points, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainBounds};
    use crate::profile::Profile2d;

    fn setup(nx: usize, t: f64) -> (PhaseGrid, InitialData) {
        let data = InitialData { f0: Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0), ..InitialData::zero() };
        let g = build_grid(DomainBounds { x_min: -6.0, x_max: 6.0, v_min: -4.0, v_max: 4.0 }, nx, nx, t, None).unwrap();
        (g, data)
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let (g, _) = setup(32, 0.5);
        let data = InitialData::zero();
        let z = PicardIterate::constant_extension(&g, &data, g.n_steps + 1);
        let p = phi(&g, &data, &z).unwrap();
        assert_eq!(distance(&p.g_values, &z.g_values), 0.0);
    }

    #[test]
    fn image_preserves_sup_norm() {
        let (g, data) = setup(64, 0.5);
        let g0 = PicardIterate::constant_extension(&g, &data, g.n_steps + 1);
        let p = phi(&g, &data, &g0).unwrap();
        let a = p.audit.unwrap();
        assert!(a.h1.measured <= data.f0_sup());
        assert_eq!(p.g_values[0], g0.g_values[0]);
    }

    #[test]
    fn equal_iterates_have_no_ratio() {
        let (g, data) = setup(32, 0.25);
        let g0 = PicardIterate::constant_extension(&g, &data, g.n_steps + 1);
        assert!(matches!(contraction_ratio(&g, &data, &g0, &g0.clone()), Err(Error::ZeroDistance)));
    }

    #[test]
    fn constant_extension_passes_and_scaling_breaks_h1() {
        let (g, data) = setup(64, 0.25);
        let g0 = PicardIterate::constant_extension(&g, &data, g.n_steps + 1);
        let a = audit_bt(&g, &data, &g0);
        assert!(a.all_pass(), "{a:?}");
        assert_eq!(a.h4.measured, 0.0);
        // push the sup-norm above ‖f₀‖_{W^{1,∞}} = 1 + 2·1.5396
        let w = data.f0_w1inf();
        let big = PicardIterate::new(g0.g_values.iter().map(|l| l.iter().map(|q| q * w * 1.01).collect()).collect());
        let b = audit_bt(&g, &data, &big);
        assert!(!b.h1.pass);
        assert!(b.h2.pass);
    }

    #[test]
    fn small_horizon_contracts() {
        let (g, data) = setup(64, 0.25);
        let rep = picard_solve(&g, &data, 50, 1e-10).unwrap();
        assert!(rep.converged);
        for w in rep.iterations.windows(2) {
            assert!(w[1].distance < w[0].distance);
        }
        for r in rep.iterations.iter().skip(1) {
            assert!(r.ratio.unwrap() <= 0.5, "{r:?}");
        }
    }
}
