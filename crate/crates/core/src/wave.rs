//! The wave equation `(∂t² − ∂x²) A = j` on the line.
//!
//! The evolution uses `B± = ∂tA ± ∂xA`, which satisfy `(∂t ∓ ∂x) B± = j`:
//! `B⁺` moves left and `B⁻` moves right at unit speed, so with `dt = dx` a
//! step is an index shift plus a trapezoid of `j` along the ray. The closed
//! forms below (d'Alembert, the ray representation of `∂tA`, and the
//! representation of `∂x∂tA`) evaluate the same fields by quadrature over the
//! stored histories and serve as independent cross-checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Axis, PhaseGrid};
use crate::interp::eval_unchecked;
use crate::profile::InitialData;
use crate::state::FieldState;
use crate::transport::{v_hat, FieldHistory};

/// Stored current densities `j(t_k, x_i)`, one row per time level.
#[derive(Debug, Clone)]
pub struct SourceHistory {
    pub axis: Axis,
    pub dt: f64,
    pub j_values: Vec<Vec<f64>>,
}

impl SourceHistory {
    pub fn new(axis: Axis, dt: f64) -> Self {
        SourceHistory { axis, dt, j_values: Vec::new() }
    }

    pub fn push(&mut self, j: Vec<f64>) {
        assert_eq!(j.len(), self.axis.len());
        self.j_values.push(j);
    }

    pub fn len(&self) -> usize {
        self.j_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j_values.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.dt * self.len().saturating_sub(1) as f64
    }

    /// Index of the stored level at time `t`.
    pub fn level_of(&self, t: f64) -> Result<usize> {
        level_index(t, self.dt, self.len())
    }

    /// `j(t_k, y)`, cubic in `y`, zero outside the domain.
    #[inline]
    fn at(&self, k: usize, y: f64) -> f64 {
        if self.axis.contains(y) {
            eval_unchecked(self.axis.min, 1.0 / self.axis.step(), self.axis.cells, &self.j_values[k], y)
        } else {
            0.0
        }
    }
}

pub(crate) fn level_index(t: f64, dt: f64, n_levels: usize) -> Result<usize> {
    let s = t / dt;
    let k = s.round();
    let t_max = dt * n_levels.saturating_sub(1) as f64;
    if n_levels == 0 || t < 0.0 || (s - k).abs() > 1e-9 * s.max(1.0) || k as usize >= n_levels {
        return Err(Error::BeyondHistory { t, t_max, dt });
    }
    Ok(k as usize)
}

/// `B±(0) = A₁ ± A₀'` and `A(0) = A₀` on the nodes.
pub fn initial_fields(data: &InitialData, axis: &Axis) -> FieldState {
    let xs = axis.nodes();
    FieldState {
        b_plus: xs.iter().map(|&x| data.a1.value(x) + data.a0.derivative(x)).collect(),
        b_minus: xs.iter().map(|&x| data.a1.value(x) - data.a0.derivative(x)).collect(),
        a: xs.iter().map(|&x| data.a0.value(x)).collect(),
        time: 0.0,
    }
}

/// First half of a step: shift `B±` one node along their characteristics and
/// add `dt/2 · j^n` taken at the departure node. Inflow nodes become zero.
pub(crate) fn shift_and_kick(b_plus: &[f64], b_minus: &[f64], j_n: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
    let n = b_plus.len();
    let half = 0.5 * dt;
    let mut p = vec![0.0; n];
    let mut m = vec![0.0; n];
    for i in 0..n - 1 {
        p[i] = b_plus[i + 1] + half * j_n[i + 1];
        m[i + 1] = b_minus[i] + half * j_n[i];
    }
    (p, m)
}

/// Second half of a step: add `dt/2 · j^{n+1}` at the arrival node.
pub(crate) fn finish_kick(p: &mut [f64], m: &mut [f64], j_np1: &[f64], dt: f64) {
    let n = p.len();
    let half = 0.5 * dt;
    for i in 0..n - 1 {
        p[i] += half * j_np1[i];
        m[i + 1] += half * j_np1[i + 1];
    }
}

/// Advance `B±` by one step `dt = dx` given the currents at both ends of the
/// step, and integrate `A` in time with the trapezoid rule.
pub fn step_b_fields(field: &FieldState, j_n: &[f64], j_np1: &[f64], dt: f64) -> FieldState {
    let (mut p, mut m) = shift_and_kick(&field.b_plus, &field.b_minus, j_n, dt);
    finish_kick(&mut p, &mut m, j_np1, dt);
    let a = integrate_a(&field.a, &field.b_plus, &field.b_minus, &p, &m, dt);
    FieldState { b_plus: p, b_minus: m, a, time: field.time + dt }
}

/// `A^{n+1} = A^n + dt/2 (∂tA^n + ∂tA^{n+1})`.
pub(crate) fn integrate_a(a: &[f64], p0: &[f64], m0: &[f64], p1: &[f64], m1: &[f64], dt: f64) -> Vec<f64> {
    (0..a.len()).map(|i| a[i] + 0.25 * dt * (p0[i] + m0[i] + p1[i] + m1[i])).collect()
}

/// Integral over `[a, b]` of the piecewise-linear interpolant of `samples`,
/// taken as zero outside the axis. Equals the trapezoid rule when `a`, `b`
/// are nodes.
fn linear_integral(axis: &Axis, samples: &[f64], a: f64, b: f64) -> f64 {
    let a = a.max(axis.min);
    let b = b.min(axis.max);
    if b <= a {
        return 0.0;
    }
    let h = axis.step();
    let at = |y: f64| eval_linear(axis, samples, y);
    let ia = ((a - axis.min) / h).floor() as usize;
    let ib = (((b - axis.min) / h).ceil() as usize).min(axis.cells);
    let mut sum = 0.0;
    let mut lo = a;
    for k in ia..ib {
        let hi = axis.node(k + 1).min(b);
        if hi > lo {
            sum += 0.5 * (hi - lo) * (at(lo) + at(hi));
        }
        lo = hi.max(lo);
    }
    sum
}

fn eval_linear(axis: &Axis, samples: &[f64], y: f64) -> f64 {
    let s = (y - axis.min) / axis.step();
    let i = (s.floor().max(0.0) as usize).min(axis.cells - 1);
    let t = s - i as f64;
    samples[i] + t * (samples[i + 1] - samples[i])
}

fn trapezoid_time_weights(n: usize, dt: f64) -> impl Iterator<Item = (usize, f64)> {
    (0..=n).map(move |k| (k, if n == 0 { 0.0 } else if k == 0 || k == n { 0.5 * dt } else { dt }))
}

/// `A(t, x)` from d'Alembert's formula:
/// `½[A₀(x+t) + A₀(x−t)] + ½∫_{x−t}^{x+t} A₁ + ½∫₀ᵗ∫_{x−(t−s)}^{x+(t−s)} j(s, y) dy ds`.
pub fn dalembert_a(data: &InitialData, src: &SourceHistory, t: f64, x: f64) -> Result<f64> {
    let n = src.level_of(t)?;
    let t = n as f64 * src.dt;
    let mut a = 0.5 * (data.a0.value(x + t) + data.a0.value(x - t))
        + 0.5 * (data.a1.antiderivative(x + t) - data.a1.antiderivative(x - t));
    let mut duhamel = 0.0;
    for (k, w) in trapezoid_time_weights(n, src.dt) {
        let r = t - k as f64 * src.dt;
        duhamel += w * linear_integral(&src.axis, &src.j_values[k], x - r, x + r);
    }
    a += 0.5 * duhamel;
    Ok(a)
}

/// `∂tA(t, x) = ½(A₀'(x+t) − A₀'(x−t) + A₁(x+t) + A₁(x−t)) + ½∫₀ᵗ[j(τ, x−(t−τ)) + j(τ, x+(t−τ))] dτ`,
/// trapezoid in `τ` over the stored levels.
pub fn dt_a_representation(data: &InitialData, src: &SourceHistory, t: f64, x: f64) -> Result<f64> {
    let n = src.level_of(t)?;
    let t = n as f64 * src.dt;
    let mut e = 0.5
        * (data.a0.derivative(x + t) - data.a0.derivative(x - t) + data.a1.value(x + t) + data.a1.value(x - t));
    let mut rays = 0.0;
    for (k, w) in trapezoid_time_weights(n, src.dt) {
        let r = t - k as f64 * src.dt;
        rays += w * (src.at(k, x - r) + src.at(k, x + r));
    }
    e += 0.5 * rays;
    Ok(e)
}

/// `K±(v) = d/dv [1/(1 ± v̂)] = (v ∓ v₀) / (1 + v² ± v v₀)`, `v₀ = √(1+v²)`.
#[inline]
pub fn kernel(sign: f64, v: f64) -> f64 {
    // K⁺(v) = −(v₀ − v)²/v₀ and K⁻(v) = −K⁺(−v); evaluate v₀ − v without cancellation.
    let u = sign * v;
    let v0 = 1f64.hypot(v);
    let d = if u >= 0.0 { 1.0 / (v0 + u) } else { v0 - u };
    -sign * d * d / v0
}

/// `K±` tabulated on the v-nodes together with the pointwise `2v₀` comparison.
#[derive(Debug, Clone, Serialize)]
pub struct KernelTable {
    pub v: Vec<f64>,
    pub k_plus: Vec<f64>,
    pub k_minus: Vec<f64>,
}

impl KernelTable {
    pub fn new(v_nodes: &[f64]) -> Self {
        KernelTable {
            v: v_nodes.to_vec(),
            k_plus: v_nodes.iter().map(|&v| kernel(1.0, v)).collect(),
            k_minus: v_nodes.iter().map(|&v| kernel(-1.0, v)).collect(),
        }
    }

    /// Largest `max(|K⁺|, |K⁻|) / v₀` over the table.
    pub fn max_ratio(&self) -> f64 {
        self.v
            .iter()
            .zip(self.k_plus.iter().zip(&self.k_minus))
            .map(|(&v, (p, m))| p.abs().max(m.abs()) / 1f64.hypot(v))
            .fold(0.0, f64::max)
    }

    /// Nodes where `|K±(v)| > c·v₀`.
    pub fn violations(&self, c: f64) -> Vec<f64> {
        self.v
            .iter()
            .zip(self.k_plus.iter().zip(&self.k_minus))
            .filter(|(&v, (p, m))| p.abs().max(m.abs()) > c * 1f64.hypot(v))
            .map(|(&v, _)| v)
            .collect()
    }
}

/// The four contributions to `∂x∂tA(t, x)` and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DxDtA {
    /// `½ Σ± ∫₀ᵗ∫ K±(v) ∂tA(t−s, x±s) f(t−s, x±s, v) dv ds`
    pub i_a: f64,
    /// `−½ Σ± ∫ f₀(x±t, v) / (1 ± v̂) dv`
    pub i_b: f64,
    /// `½ Σ± ρ(0, x±t)`
    pub ii: f64,
    /// `∫ v² f(t, x, v) dv`
    pub local_moment: f64,
    pub total: f64,
}

/// `∂x∂tA` at node `i` and level `n` from the stored histories of `f`
/// (`f_levels[k]` on the phase grid) and `∂tA` (`e_hist`), for trivial field
/// data. Trapezoid in `s` over the levels and in `v` over the v-nodes.
pub fn dxdt_a_representation(
    data: &InitialData,
    grid: &PhaseGrid,
    f_levels: &[Vec<f64>],
    e_hist: &FieldHistory,
    n: usize,
    i: usize,
) -> Result<DxDtA> {
    if !data.field_data_trivial() {
        return Err(Error::Unsupported("the ∂x∂tA representation needs A₀ = A₁ = 0".into()));
    }
    let dt = grid.dt;
    let stored = f_levels.len().min(e_hist.len());
    if n >= stored {
        return Err(Error::BeyondHistory { t: n as f64 * dt, t_max: dt * stored.saturating_sub(1) as f64, dt });
    }
    let nv1 = grid.nv1();
    let nx = grid.x.cells as isize;
    let wv = grid.v.trapezoid_weights();
    let vs = grid.v.nodes();
    let table = KernelTable::new(&vs);
    let x = grid.x.node(i);
    let t = n as f64 * dt;

    let ray = |k: usize, node: isize, kern: &[f64]| -> f64 {
        if node < 0 || node > nx {
            return 0.0;
        }
        let node = node as usize;
        let e = e_hist.level(k)[node];
        if e == 0.0 {
            return 0.0;
        }
        let row = &f_levels[k][node * nv1..(node + 1) * nv1];
        e * row.iter().zip(kern).zip(&wv).map(|((f, kk), w)| f * kk * w).sum::<f64>()
    };
    let mut i_a = 0.0;
    for (k, w) in trapezoid_time_weights(n, dt) {
        let off = (n - k) as isize;
        i_a += w * (ray(k, i as isize + off, &table.k_plus) + ray(k, i as isize - off, &table.k_minus));
    }
    i_a *= 0.5;

    let mut i_b = 0.0;
    let mut ii = 0.0;
    for (j, &v) in vs.iter().enumerate() {
        let fp = data.f0.value(x + t, v);
        let fm = data.f0.value(x - t, v);
        i_b += wv[j] * (fp / (1.0 + v_hat(v)) + fm / (1.0 - v_hat(v)));
        ii += wv[j] * (fp + fm);
    }
    let i_b = -0.5 * i_b;
    let ii = 0.5 * ii;

    let row = &f_levels[n][i * nv1..(i + 1) * nv1];
    let local_moment = row.iter().zip(&vs).zip(&wv).map(|((f, v), w)| f * v * v * w).sum::<f64>();
    Ok(DxDtA { i_a, i_b, ii, local_moment, total: i_a + i_b + ii + local_moment })
}
