//! Four-point Lagrange interpolation on uniform axes.
//!
//! Interior intervals use the cubic through nodes `i-1..=i+2`; the first and
//! last interval fall back to linear interpolation. Queries outside the axis
//! are errors: the light-cone margin keeps every legitimate query inside.

use crate::error::{Error, Result};
use crate::grid::{Axis, PhaseGrid};

/// Cubic Lagrange weights for nodes `i-1, i, i+1, i+2` at fraction `t ∈ [0, 1]` of `[x_i, x_{i+1}]`.
#[inline(always)]
pub fn cubic_weights(t: f64) -> [f64; 4] {
    if t == 0.0 {
        return [0.0, 1.0, 0.0, 0.0];
    } else if t == 1.0 {
        return [0.0, 0.0, 1.0, 0.0];
    }
    let tm1 = t - 1.0;
    let tm2 = t - 2.0;
    let tp1 = t + 1.0;
    [
        -t * tm1 * tm2 / 6.0,
        tp1 * tm1 * tm2 / 2.0,
        -tp1 * t * tm2 / 2.0,
        tp1 * t * tm1 / 6.0,
    ]
}

/// Stencil for a query: either a linear pair or a cubic quadruple.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stencil {
    Linear { i: usize, t: f64 },
    Cubic { i: usize, w: [f64; 4] },
}

#[inline(always)]
pub(crate) fn stencil(min: f64, inv_h: f64, cells: usize, q: f64) -> Stencil {
    let s = (q - min) * inv_h;
    let mut i = s.floor() as isize;
    if i < 0 {
        i = 0;
    }
    if i as usize >= cells {
        i = cells as isize - 1;
    }
    let i = i as usize;
    let mut t = s - i as f64;
    // land exactly on nodes despite round-off in the fraction
    if t.abs() < 1e-12 {
        t = 0.0;
    } else if (1.0 - t).abs() < 1e-12 {
        t = 1.0;
    }
    if i == 0 || i + 1 == cells {
        Stencil::Linear { i, t }
    } else {
        Stencil::Cubic { i, w: cubic_weights(t) }
    }
}

/// Interpolate `samples` (one per node of an axis described by `min`, `1/h`, `cells`) at `q`.
/// The caller guarantees `q` lies inside the axis.
#[inline(always)]
pub(crate) fn eval_unchecked(min: f64, inv_h: f64, cells: usize, samples: &[f64], q: f64) -> f64 {
    match stencil(min, inv_h, cells, q) {
        Stencil::Linear { i, t } => samples[i] + t * (samples[i + 1] - samples[i]),
        Stencil::Cubic { i, w } => {
            w[0] * samples[i - 1] + w[1] * samples[i] + w[2] * samples[i + 1] + w[3] * samples[i + 2]
        }
    }
}

/// Interpolate nodal samples on `axis` at `q`.
pub fn interpolate_1d(axis: &Axis, samples: &[f64], q: f64) -> Result<f64> {
    debug_assert_eq!(samples.len(), axis.len());
    if !axis.contains(q) {
        return Err(Error::OutOfDomain { q, lo: axis.min, hi: axis.max });
    }
    Ok(eval_unchecked(axis.min, 1.0 / axis.step(), axis.cells, samples, q))
}

/// Tensor-product interpolation of x-major phase-space samples at `(x, v)`.
pub fn interpolate_2d(grid: &PhaseGrid, samples: &[f64], x: f64, v: f64) -> Result<f64> {
    debug_assert_eq!(samples.len(), grid.n_nodes());
    if !grid.x.contains(x) {
        return Err(Error::OutOfDomain { q: x, lo: grid.x.min, hi: grid.x.max });
    }
    if !grid.v.contains(v) {
        return Err(Error::OutOfDomain { q: v, lo: grid.v.min, hi: grid.v.max });
    }
    Ok(eval_2d_unchecked(grid, samples, x, v))
}

pub(crate) fn eval_2d_unchecked(grid: &PhaseGrid, samples: &[f64], x: f64, v: f64) -> f64 {
    let nv1 = grid.nv1();
    let sx = stencil(grid.x.min, 1.0 / grid.x.step(), grid.x.cells, x);
    let sv = stencil(grid.v.min, 1.0 / grid.v.step(), grid.v.cells, v);
    let row = |i: usize| -> f64 {
        let r = &samples[i * nv1..(i + 1) * nv1];
        match sv {
            Stencil::Linear { i: j, t } => r[j] + t * (r[j + 1] - r[j]),
            Stencil::Cubic { i: j, w } => w[0] * r[j - 1] + w[1] * r[j] + w[2] * r[j + 1] + w[3] * r[j + 2],
        }
    };
    match sx {
        Stencil::Linear { i, t } => {
            let a = row(i);
            a + t * (row(i + 1) - a)
        }
        Stencil::Cubic { i, w } => w[0] * row(i - 1) + w[1] * row(i) + w[2] * row(i + 1) + w[3] * row(i + 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Bump;

    fn sample(axis: &Axis, f: impl Fn(f64) -> f64) -> Vec<f64> {
        axis.nodes().into_iter().map(f).collect()
    }

    #[test]
    fn exact_on_cubics() {
        let axis = Axis::new(-2.0, 2.0, 16).unwrap();
        let s = sample(&axis, |x| x * x * x);
        let v = interpolate_1d(&axis, &s, 0.37).unwrap();
        assert!((v - 0.37f64.powi(3)).abs() < 1e-15);
        let s = sample(&axis, |x| 2.0 - x + 0.5 * x * x - 0.25 * x * x * x);
        for q in [-1.2, -0.01, 0.77, 1.49] {
            let e = 2.0 - q + 0.5 * q * q - 0.25 * q * q * q;
            assert!((interpolate_1d(&axis, &s, q).unwrap() - e).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_at_nodes() {
        let axis = Axis::new(-1.0, 3.0, 10).unwrap();
        let s = sample(&axis, |x| (3.0 * x).sin() + 0.1);
        for (i, x) in axis.nodes().into_iter().enumerate() {
            assert_eq!(interpolate_1d(&axis, &s, x).unwrap(), s[i]);
        }
    }

    #[test]
    fn out_of_domain_is_error() {
        let axis = Axis::new(0.0, 1.0, 4).unwrap();
        let s = vec![0.0; 5];
        assert!(matches!(interpolate_1d(&axis, &s, 1.0001), Err(Error::OutOfDomain { .. })));
        assert!(interpolate_1d(&axis, &s, -1e-12).is_err());
    }

    fn max_err(cells: usize, f: &impl Fn(f64) -> f64, qlo: f64, qhi: f64) -> f64 {
        let axis = Axis::new(-2.0, 2.0, cells).unwrap();
        let s = sample(&axis, f);
        (0..=4000)
            .map(|k| qlo + (qhi - qlo) * k as f64 / 4000.0)
            .map(|q| (interpolate_1d(&axis, &s, q).unwrap() - f(q)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn third_order_on_smooth_part_of_bump() {
        // Away from the support edge, where the bump is a polynomial, the cubic
        // rule converges at fourth order.
        let b = Bump::new(0.0, 1.0, 1.0);
        let f = |z: f64| b.value(z);
        let e1 = max_err(32, &f, -0.75, 0.75);
        let e2 = max_err(64, &f, -0.75, 0.75);
        assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn bump_edge_limits_global_order_to_two() {
        // f'' jumps at |z| = 1, so across the whole line the error ratio is ≈ 4.
        let b = Bump::new(0.0, 1.0, 1.0);
        let f = |z: f64| b.value(z);
        let e1 = max_err(64, &f, -1.7, 1.7);
        let e2 = max_err(128, &f, -1.7, 1.7);
        let r = e1 / e2;
        assert!(r > 3.5 && r < 5.0, "ratio {r}");
    }

    #[test]
    fn squared_bump_is_third_order_everywhere() {
        let b = Bump::new(0.0, 1.0, 1.0);
        let f = |z: f64| b.value(z).powi(2);
        let e1 = max_err(64, &f, -1.7, 1.7);
        let e2 = max_err(128, &f, -1.7, 1.7);
        assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn two_dimensional_exact_on_bicubics() {
        let grid = crate::grid::build_grid(
            crate::grid::DomainBounds { x_min: -1.0, x_max: 1.0, v_min: -2.0, v_max: 2.0 },
            10,
            12,
            0.0,
            None,
        )
        .unwrap();
        let f = |x: f64, v: f64| (x * x * x - x) * (1.0 + v * v - 0.3 * v * v * v);
        let mut s = vec![0.0; grid.n_nodes()];
        for i in 0..grid.nx1() {
            for j in 0..grid.nv1() {
                s[grid.idx(i, j)] = f(grid.x.node(i), grid.v.node(j));
            }
        }
        let got = interpolate_2d(&grid, &s, 0.13, -0.71).unwrap();
        assert!((got - f(0.13, -0.71)).abs() < 1e-13);
        assert!(interpolate_2d(&grid, &s, 0.0, 2.5).is_err());
    }
}
