//! Characteristics of the transport operator `∂t + v̂ ∂x − E ∂v` (`E = ∂tA`),
//! semi-Lagrangian evaluation of `f`, and velocity moments.
//!
//! Characteristics are integrated with fixed-step RK4 whose step is the grid
//! time step. Fields are stored once per time level; RK stages at half levels
//! use the average of the neighbouring levels (linear in time), and positions
//! between nodes use cubic interpolation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Axis, PhaseGrid};
use crate::interp::{eval_2d_unchecked, eval_unchecked};
use crate::profile::Profile2d;

/// Relativistic velocity `v / √(1 + v²)`.
#[inline(always)]
pub fn v_hat(v: f64) -> f64 {
    v / 1f64.hypot(v)
}

/// Lebesgue constant of four-point cubic interpolation on a uniform grid.
const CUBIC_LEBESGUE: f64 = 1.25;

/// Forcing `E(s, x)` sampled on half time levels `s = m·dt/2`.
pub trait ForceField: Sync {
    fn dt(&self) -> f64;

    fn at_half(&self, m: usize, x: f64) -> Result<f64>;

    /// Upper bound for `|V(t_k) − V(0)|` along any discrete characteristic.
    fn drift(&self, _level: usize) -> f64 {
        f64::INFINITY
    }
}

/// Closed-form forcing, mostly for tests.
pub struct AnalyticForce<F> {
    pub dt: f64,
    pub field: F,
}

impl<F: Fn(f64, f64) -> f64 + Sync> ForceField for AnalyticForce<F> {
    fn dt(&self) -> f64 {
        self.dt
    }

    fn at_half(&self, m: usize, x: f64) -> Result<f64> {
        Ok((self.field)(m as f64 * 0.5 * self.dt, x))
    }
}

/// `E = ∂tA` at every stored time level on the x-nodes.
#[derive(Debug, Clone)]
pub struct FieldHistory {
    axis: Axis,
    dt: f64,
    inv_dx: f64,
    levels: Vec<Vec<f64>>,
    mids: Vec<Vec<f64>>,
    sups: Vec<f64>,
    drift: Vec<f64>,
}

impl FieldHistory {
    pub fn new(axis: Axis, dt: f64) -> Self {
        FieldHistory {
            axis,
            dt,
            inv_dx: 1.0 / axis.step(),
            levels: Vec::new(),
            mids: Vec::new(),
            sups: Vec::new(),
            drift: Vec::new(),
        }
    }

    /// `n_levels` identically zero levels.
    pub fn zero(axis: Axis, dt: f64, n_levels: usize) -> Self {
        let mut h = Self::new(axis, dt);
        for _ in 0..n_levels {
            h.push(vec![0.0; axis.len()]);
        }
        h
    }

    pub fn from_levels(axis: Axis, dt: f64, levels: impl IntoIterator<Item = Vec<f64>>) -> Self {
        let mut h = Self::new(axis, dt);
        for l in levels {
            h.push(l);
        }
        h
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// `max |E(t_k, ·)|` over the nodes.
    pub fn sup(&self, k: usize) -> f64 {
        self.sups[k]
    }

    pub fn push(&mut self, level: Vec<f64>) {
        assert_eq!(level.len(), self.axis.len(), "field level has wrong length");
        let sup = level.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        if let Some(prev) = self.levels.last() {
            self.mids.push(prev.iter().zip(&level).map(|(a, b)| 0.5 * (a + b)).collect());
            let k = self.sups.len();
            let w = self.drift[k - 1] + self.dt * CUBIC_LEBESGUE * sup.max(self.sups[k - 1]);
            self.drift.push(w);
        } else {
            self.drift.push(0.0);
        }
        self.sups.push(sup);
        self.levels.push(level);
    }

    /// Replace the newest level (used when a predicted field is corrected).
    pub fn replace_last(&mut self, level: Vec<f64>) {
        self.levels.pop().expect("empty history");
        self.mids.pop();
        self.sups.pop();
        self.drift.pop();
        self.push(level);
    }

    pub fn truncate(&mut self, n_levels: usize) {
        self.levels.truncate(n_levels);
        self.mids.truncate(n_levels.saturating_sub(1));
        self.sups.truncate(n_levels);
        self.drift.truncate(n_levels);
    }

    /// `E(t, x)` with linear interpolation between levels and cubic in x.
    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        let t_max = self.dt * (self.len().saturating_sub(1)) as f64;
        if self.is_empty() || t < 0.0 || t > t_max * (1.0 + 1e-12) {
            return Err(Error::BeyondHistory { t, t_max, dt: self.dt });
        }
        if !self.axis.contains(x) {
            return Err(Error::OutOfDomain { q: x, lo: self.axis.min, hi: self.axis.max });
        }
        let s = t / self.dt;
        let k = (s.floor() as usize).min(self.len().saturating_sub(2));
        let th = (s - k as f64).clamp(0.0, 1.0);
        let e0 = self.interp(&self.levels[k], x);
        if self.len() == 1 {
            return Ok(e0);
        }
        let e1 = self.interp(&self.levels[k + 1], x);
        Ok(e0 + th * (e1 - e0))
    }

    #[inline(always)]
    fn interp(&self, samples: &[f64], x: f64) -> f64 {
        eval_unchecked(self.axis.min, self.inv_dx, self.axis.cells, samples, x)
    }
}

impl ForceField for FieldHistory {
    fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    fn at_half(&self, m: usize, x: f64) -> Result<f64> {
        if !self.axis.contains(x) {
            return Err(Error::LightCone(format!(
                "characteristic left the domain at x = {x} (t = {})",
                m as f64 * 0.5 * self.dt
            )));
        }
        let samples = if m.is_multiple_of(2) { self.levels.get(m / 2) } else { self.mids.get(m / 2) };
        match samples {
            Some(s) => Ok(self.interp(s, x)),
            None => Err(Error::BeyondHistory {
                t: m as f64 * 0.5 * self.dt,
                t_max: self.dt * self.len().saturating_sub(1) as f64,
                dt: self.dt,
            }),
        }
    }

    fn drift(&self, level: usize) -> f64 {
        self.drift.get(level).copied().unwrap_or(f64::INFINITY)
    }
}

/// One traced characteristic between two time levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Characteristic {
    pub t_start: f64,
    pub t_end: f64,
    pub x_start: f64,
    pub v_start: f64,
    pub x_end: f64,
    pub v_end: f64,
}

/// One RK4 step of `dX/ds = v̂(V)`, `dV/ds = −E(s, X)` between half levels
/// `m0` and `m0 ± 2`; `sign` is +1 forward and −1 backward.
#[inline(always)]
fn rk4_step<F: ForceField + ?Sized>(force: &F, m0: usize, sign: f64, x: f64, v: f64) -> Result<(f64, f64)> {
    let h = sign * force.dt();
    let (m_mid, m1) = if sign > 0.0 { (m0 + 1, m0 + 2) } else { (m0 - 1, m0 - 2) };
    let k1x = v_hat(v);
    let k1v = -force.at_half(m0, x)?;
    let x2 = x + 0.5 * h * k1x;
    let v2 = v + 0.5 * h * k1v;
    let k2x = v_hat(v2);
    let k2v = -force.at_half(m_mid, x2)?;
    let x3 = x + 0.5 * h * k2x;
    let v3 = v + 0.5 * h * k2v;
    let k3x = v_hat(v3);
    let k3v = -force.at_half(m_mid, x3)?;
    let x4 = x + h * k3x;
    let v4 = v + h * k3v;
    let k4x = v_hat(v4);
    let k4v = -force.at_half(m1, x4)?;
    Ok((
        x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    ))
}

/// Trace the characteristic through `(t_n, x, v)` back to level `m ≤ n`.
pub fn trace_backward<F: ForceField + ?Sized>(force: &F, n: usize, m: usize, x: f64, v: f64) -> Result<Characteristic> {
    assert!(m <= n);
    let (mut xs, mut vs) = (x, v);
    for k in (m + 1..=n).rev() {
        (xs, vs) = rk4_step(force, 2 * k, -1.0, xs, vs)?;
    }
    let dt = force.dt();
    Ok(Characteristic { t_start: m as f64 * dt, t_end: n as f64 * dt, x_start: xs, v_start: vs, x_end: x, v_end: v })
}

/// Trace forward from `(t_m, x, v)` to level `n ≥ m`; returns the arrival point.
pub fn trace_forward<F: ForceField + ?Sized>(force: &F, m: usize, n: usize, x: f64, v: f64) -> Result<(f64, f64)> {
    assert!(m <= n);
    let (mut xs, mut vs) = (x, v);
    for k in m..n {
        (xs, vs) = rk4_step(force, 2 * k, 1.0, xs, vs)?;
    }
    Ok((xs, vs))
}

/// Light cone of the initial support: where `f(t_k)` can be nonzero.
#[derive(Debug, Clone, Copy)]
struct Cone {
    x_lo: f64,
    x_hi: f64,
    v_lo: f64,
    v_hi: f64,
    v_abs: f64,
}

impl Cone {
    fn of(f0: &Profile2d) -> Option<Cone> {
        let (x_lo, x_hi, v_lo, v_hi) = f0.support()?;
        Some(Cone { x_lo, x_hi, v_lo, v_hi, v_abs: v_lo.abs().max(v_hi.abs()) })
    }

    /// False when no characteristic through `(t, x, v)` can start in the support.
    #[inline]
    fn may_contain(&self, t: f64, drift: f64, x: f64, v: f64) -> bool {
        if !drift.is_finite() {
            return true;
        }
        if v + drift <= self.v_lo || v - drift >= self.v_hi {
            return false;
        }
        let reach = v_hat(self.v_abs + drift) * t;
        x + reach > self.x_lo && x - reach < self.x_hi
    }
}

/// `f(t_n, x, v) = f₀(X(0), V(0))` along the traced characteristic.
pub fn evaluate_f<F: ForceField + ?Sized>(f0: &Profile2d, force: &F, n: usize, x: f64, v: f64) -> Result<f64> {
    let Some(cone) = Cone::of(f0) else { return Ok(0.0) };
    evaluate_in_cone(f0, &cone, force, n, x, v)
}

#[inline]
fn evaluate_in_cone<F: ForceField + ?Sized>(
    f0: &Profile2d,
    cone: &Cone,
    force: &F,
    n: usize,
    x: f64,
    v: f64,
) -> Result<f64> {
    let dt = force.dt();
    if !cone.may_contain(n as f64 * dt, force.drift(n), x, v) {
        return Ok(0.0);
    }
    let (mut xs, mut vs) = (x, v);
    for k in (1..=n).rev() {
        (xs, vs) = rk4_step(force, 2 * k, -1.0, xs, vs)?;
        if !cone.may_contain((k - 1) as f64 * dt, force.drift(k - 1), xs, vs) {
            return Ok(0.0);
        }
    }
    Ok(f0.value(xs, vs))
}

/// `evaluate_f` at a time that must coincide with a stored level.
pub fn evaluate_f_at<F: ForceField + ?Sized>(f0: &Profile2d, force: &F, t: f64, x: f64, v: f64) -> Result<f64> {
    let dt = force.dt();
    let s = t / dt;
    let n = s.round();
    if t < 0.0 || (s - n).abs() > 1e-9 {
        return Err(Error::BeyondHistory { t, t_max: f64::NAN, dt });
    }
    evaluate_f(f0, force, n as usize, x, v)
}

/// Fill level `n` of the grid by backward tracing to `t = 0`.
pub fn fill_analytic<F: ForceField + ?Sized>(grid: &PhaseGrid, f0: &Profile2d, force: &F, n: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; grid.n_nodes()];
    let Some(cone) = Cone::of(f0) else { return Ok(out) };
    let nv1 = grid.nv1();
    out.par_chunks_mut(nv1).enumerate().try_for_each(|(i, row)| -> Result<()> {
        let x = grid.x.node(i);
        for (j, f) in row.iter_mut().enumerate() {
            *f = evaluate_in_cone(f0, &cone, force, n, x, grid.v.node(j))?;
        }
        Ok(())
    })?;
    Ok(out)
}

/// Advance stored samples from level `n − 1` to `n` with one backward RK4
/// step and tensor-cubic interpolation of the previous level. Departure
/// points outside the grid carry no mass (the domain margin keeps them in
/// the vacuum region).
pub fn step_depth_one<F: ForceField + ?Sized>(grid: &PhaseGrid, prev: &[f64], force: &F, n: usize) -> Result<Vec<f64>> {
    assert!(n >= 1);
    let nv1 = grid.nv1();
    let mut out = vec![0.0; grid.n_nodes()];
    out.par_chunks_mut(nv1).enumerate().try_for_each(|(i, row)| -> Result<()> {
        let x = grid.x.node(i);
        for (j, f) in row.iter_mut().enumerate() {
            let v = grid.v.node(j);
            let (xs, vs) = match rk4_step(force, 2 * n, -1.0, x, v) {
                Ok(p) => p,
                Err(Error::LightCone(_)) => {
                    *f = 0.0;
                    continue;
                }
                Err(e) => return Err(e),
            };
            *f = if grid.x.contains(xs) && grid.v.contains(vs) { eval_2d_unchecked(grid, prev, xs, vs) } else { 0.0 };
        }
        Ok(())
    })?;
    Ok(out)
}

/// Fail if `f` exceeds `threshold` on the outermost ring of nodes.
pub fn check_boundary(grid: &PhaseGrid, values: &[f64], threshold: f64) -> Result<()> {
    let (nx, nv) = (grid.x.cells, grid.v.cells);
    let on_edge = |i: usize, j: usize| {
        let f = values[grid.idx(i, j)];
        (f.abs() > threshold).then(|| (grid.x.node(i), grid.v.node(j), f))
    };
    let hit = (0..=nv)
        .find_map(|j| on_edge(0, j).or_else(|| on_edge(nx, j)))
        .or_else(|| (0..=nx).find_map(|i| on_edge(i, 0).or_else(|| on_edge(i, nv))));
    match hit {
        Some((x, v, f)) => Err(Error::LightCone(format!(
            "distribution reached the domain boundary: f({x}, {v}) = {f:e}; enlarge the domain"
        ))),
        None => Ok(()),
    }
}

/// Charge and current densities `ρ = ∫ f dv`, `j = ∫ v̂ f dv` (trapezoid in v).
///
/// Summation pairs the nodes `j` and `nv − j`, so on a v-grid symmetric about
/// zero an even `f` yields `j = 0` exactly.
pub fn moments(grid: &PhaseGrid, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nv1 = grid.nv1();
    let w = grid.v.trapezoid_weights();
    let vh: Vec<f64> = grid.v.nodes().into_iter().map(v_hat).collect();
    let mut rho = Vec::with_capacity(grid.nx1());
    let mut cur = Vec::with_capacity(grid.nx1());
    for row in values.chunks_exact(nv1) {
        let (mut r, mut c) = (0.0, 0.0);
        let (mut a, mut b) = (0, nv1 - 1);
        while a < b {
            r += w[a] * row[a] + w[b] * row[b];
            c += w[a] * vh[a] * row[a] + w[b] * vh[b] * row[b];
            a += 1;
            b -= 1;
        }
        if a == b {
            r += w[a] * row[a];
            c += w[a] * vh[a] * row[a];
        }
        rho.push(r);
        cur.push(c);
    }
    (rho, cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainBounds};
    use crate::profile::Bump;

    fn grid(nx: usize, nv: usize, t: f64) -> PhaseGrid {
        build_grid(DomainBounds { x_min: -6.0, x_max: 6.0, v_min: -4.0, v_max: 4.0 }, nx, nv, t, None).unwrap()
    }

    #[test]
    fn v_hat_values() {
        assert_eq!(v_hat(0.0), 0.0);
        assert!((v_hat(1.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((1.0 - v_hat(1e8)).abs() < 1e-15);
        assert!(v_hat(1e300) <= 1.0);
        assert_eq!(v_hat(-2.0), -v_hat(2.0));
    }

    #[test]
    fn zero_field_is_free_streaming() {
        let g = grid(64, 16, 1.0);
        let h = FieldHistory::zero(g.x, g.dt, g.n_steps + 1);
        let c = trace_backward(&h, g.n_steps, 0, 0.3, 0.8).unwrap();
        assert!((c.x_start - (0.3 - v_hat(0.8) * g.t_end())).abs() < 1e-14);
        assert_eq!(c.v_start, 0.8);
    }

    #[test]
    fn constant_field_shifts_momentum() {
        let g = grid(64, 16, 1.0);
        let n = g.n_steps;
        let h = FieldHistory::from_levels(g.x, g.dt, (0..=n).map(|_| vec![0.25; g.nx1()]));
        let c = trace_backward(&h, n, 0, 0.0, 0.1).unwrap();
        assert!((c.v_start - (0.1 + 0.25 * g.t_end())).abs() < 1e-14);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let field = |s: f64, x: f64| 0.3 * x.cos() * (1.0 + s);
        let depart = |n: usize| {
            let f = AnalyticForce { dt: 1.0 / n as f64, field };
            let c = trace_backward(&f, n, 0, 0.2, 0.5).unwrap();
            (c.x_start, c.v_start)
        };
        let r = depart(128);
        let err = |n| {
            let d = depart(n);
            (d.0 - r.0).abs().max((d.1 - r.1).abs())
        };
        let ratio = err(8) / err(16);
        assert!(ratio >= 16.0 * 0.9, "ratio {ratio}");
    }

    #[test]
    fn backward_then_forward_round_trip() {
        let g = grid(128, 16, 2.0);
        let n = g.n_steps;
        let levels = (0..=n).map(|k| {
            let t = g.time(k);
            g.x.nodes().into_iter().map(|x| 0.2 * (-x * x).exp() * (1.0 + t)).collect()
        });
        let h = FieldHistory::from_levels(g.x, g.dt, levels);
        let c = trace_backward(&h, n, 0, 0.4, -0.3).unwrap();
        let (x, v) = trace_forward(&h, 0, n, c.x_start, c.v_start).unwrap();
        assert!((x - 0.4).abs() < 1e-7 && (v + 0.3).abs() < 1e-7, "{x} {v}");
        assert!((c.x_start - c.x_end).abs() <= c.t_end - c.t_start);
    }

    #[test]
    fn departure_map_lipschitz_on_short_horizon() {
        let g = grid(128, 16, 0.25);
        let n = g.n_steps;
        let levels = (0..=n).map(|_| g.x.nodes().into_iter().map(|x| 0.5 * x.sin()).collect());
        let h = FieldHistory::from_levels(g.x, g.dt, levels);
        let d = 1e-5;
        for &(x, v) in &[(0.0, 0.0), (0.7, 1.2), (-1.3, -0.4)] {
            let a = trace_backward(&h, n, 0, x, v).unwrap();
            for (dx, dv) in [(d, 0.0), (0.0, d)] {
                let b = trace_backward(&h, n, 0, x + dx, v + dv).unwrap();
                let dep = (a.x_start - b.x_start).abs() + (a.v_start - b.v_start).abs();
                assert!(dep <= 3.0 * d, "{dep}");
            }
        }
    }

    #[test]
    fn leaving_domain_is_light_cone_error() {
        let g = build_grid(DomainBounds { x_min: -1.0, x_max: 1.0, v_min: -2.0, v_max: 2.0 }, 16, 8, 2.0, None).unwrap();
        let h = FieldHistory::zero(g.x, g.dt, g.n_steps + 1);
        let e = trace_backward(&h, g.n_steps, 0, 0.9, -1.5).unwrap_err();
        assert!(matches!(e, Error::LightCone(_)));
    }

    #[test]
    fn evaluate_identity_and_free_streaming() {
        let g = grid(64, 64, 1.0);
        let f0 = Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0);
        let h = FieldHistory::zero(g.x, g.dt, g.n_steps + 1);
        assert_eq!(evaluate_f(&f0, &h, 0, 0.3, 0.2).unwrap(), f0.value(0.3, 0.2));
        let t = g.t_end();
        let got = evaluate_f(&f0, &h, g.n_steps, 0.5, 0.7).unwrap();
        assert!((got - f0.value(0.5 - v_hat(0.7) * t, 0.7)).abs() < 1e-15);
        assert_eq!(evaluate_f(&Profile2d::Zero, &h, g.n_steps, 0.5, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn cone_pruning_agrees_with_full_trace() {
        let g = grid(64, 32, 2.0);
        let n = g.n_steps;
        let f0 = Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0);
        let levels = (0..=n).map(|k| g.x.nodes().into_iter().map(|x| 0.3 * (x - g.time(k)).cos()).collect());
        let h = FieldHistory::from_levels(g.x, g.dt, levels);
        let filled = fill_analytic(&g, &f0, &h, n).unwrap();
        for i in (0..g.nx1()).step_by(3) {
            for j in (0..g.nv1()).step_by(2) {
                let (x, v) = (g.x.node(i), g.v.node(j));
                let full = match trace_backward(&h, n, 0, x, v) {
                    Ok(c) => f0.value(c.x_start, c.v_start),
                    Err(_) => 0.0,
                };
                assert_eq!(filled[g.idx(i, j)], full, "node ({x}, {v})");
            }
        }
    }

    #[test]
    fn moments_closed_forms() {
        let g = build_grid(DomainBounds { x_min: -1.0, x_max: 1.0, v_min: -2.0, v_max: 2.0 }, 4, 4000, 0.0, None)
            .unwrap();
        let zero = vec![0.0; g.n_nodes()];
        let (r, j) = moments(&g, &zero);
        assert!(r.iter().chain(&j).all(|&q| q == 0.0));
        // indicator of [0, 1] in v, half values at the jumps: ∫₀¹ v̂ dv = √2 − 1
        let j0 = g.v.node_index(0.0, 1e-6).unwrap();
        let j1 = g.v.node_index(1.0, 1e-6).unwrap();
        let mut ind = vec![0.0; g.n_nodes()];
        for i in 0..g.nx1() {
            for jj in j0..=j1 {
                ind[g.idx(i, jj)] = if jj == j0 || jj == j1 { 0.5 } else { 1.0 };
            }
        }
        let (_, j) = moments(&g, &ind);
        assert!((j[2] - (2f64.sqrt() - 1.0)).abs() < 1e-6, "{}", j[2]);
    }

    #[test]
    fn even_distribution_has_zero_current() {
        let g = grid(32, 64, 0.0);
        let b = Bump::new(0.0, 2.0, 1.0);
        let mut vals = vec![0.0; g.n_nodes()];
        for i in 0..g.nx1() {
            for j in 0..g.nv1() {
                vals[g.idx(i, j)] = (1.0 + g.x.node(i).powi(2)).recip() * b.value(g.v.node(j));
            }
        }
        let (rho, cur) = moments(&g, &vals);
        assert!(cur.iter().all(|&c| c == 0.0));
        assert!(rho.iter().zip(&cur).all(|(r, c)| c.abs() <= *r && *r >= 0.0));
    }

    #[test]
    fn boundary_check() {
        let g = grid(8, 8, 0.0);
        let mut vals = vec![0.0; g.n_nodes()];
        assert!(check_boundary(&g, &vals, 1e-12).is_ok());
        vals[g.idx(8, 3)] = 1e-6;
        assert!(matches!(check_boundary(&g, &vals, 1e-12), Err(Error::LightCone(_))));
    }

    #[test]
    fn depth_one_step_matches_shift_for_zero_field() {
        let g = grid(128, 128, 0.0);
        let f0 = Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0);
        let prev: Vec<f64> = (0..g.n_nodes()).map(|k| f0.value(g.x.node(k / g.nv1()), g.v.node(k % g.nv1()))).collect();
        let h = FieldHistory::zero(g.x, g.dt, 2);
        let next = step_depth_one(&g, &prev, &h, 1).unwrap();
        let mut err = 0.0f64;
        for i in 0..g.nx1() {
            for j in 0..g.nv1() {
                let (x, v) = (g.x.node(i), g.v.node(j));
                err = err.max((next[g.idx(i, j)] - f0.value(x - v_hat(v) * g.dt, v)).abs());
            }
        }
        assert!(err < 5e-3, "{err}");
    }
}
