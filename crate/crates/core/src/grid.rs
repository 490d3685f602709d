//! Uniform phase-space grid with the unit-CFL time step.
//!
//! The time step is locked to the position spacing (`dt == dx`) so that the
//! characteristics of the wave operator, `x ± t`, pass through grid nodes at
//! every step. Node counts are `cells + 1` per axis, endpoints included.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One uniformly sampled axis with `cells + 1` nodes spanning `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub cells: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, cells: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(Error::InvalidGrid(format!("axis bounds must satisfy min < max, got [{min}, {max}]")));
        }
        if cells < 2 {
            return Err(Error::InvalidGrid(format!("cell count must be ≥ 2, got {cells}")));
        }
        Ok(Axis { min, max, cells })
    }

    #[inline]
    pub fn step(&self) -> f64 {
        (self.max - self.min) / self.cells as f64
    }

    /// Number of nodes (`cells + 1`).
    #[inline]
    pub fn len(&self) -> usize {
        self.cells + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.cells {
            self.max
        } else if 2 * i > self.cells && self.min == -self.max {
            // mirror so symmetric axes are exactly antisymmetric
            -(self.min + (self.cells - i) as f64 * self.step())
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    #[inline]
    pub fn contains(&self, q: f64) -> bool {
        q >= self.min && q <= self.max
    }

    /// Trapezoid weights over the nodes.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.step();
        let mut w = vec![h; self.len()];
        w[0] = 0.5 * h;
        w[self.cells] = 0.5 * h;
        w
    }

    /// Index of the node closest to `q`, if `q` lies on a node within `tol` cells.
    pub fn node_index(&self, q: f64, tol: f64) -> Option<usize> {
        let s = (q - self.min) / self.step();
        let k = s.round();
        if (s - k).abs() <= tol && k >= 0.0 && k <= self.cells as f64 {
            Some(k as usize)
        } else {
            None
        }
    }
}

/// Position/momentum bounds of the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

/// Bounding box of the initial data: x-extent of every initial profile
/// (distribution and field data) and the v-extent of the distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialExtent {
    pub x_lo: f64,
    pub x_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x: Axis,
    pub v: Axis,
    pub dt: f64,
    pub n_steps: usize,
}

impl PhaseGrid {
    #[inline]
    pub fn dx(&self) -> f64 {
        self.x.step()
    }

    #[inline]
    pub fn dv(&self) -> f64 {
        self.v.step()
    }

    #[inline]
    pub fn nx1(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn nv1(&self) -> usize {
        self.v.len()
    }

    /// Flat index of node `(i, j)`; storage is x-major.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.v.len() + j
    }

    pub fn n_nodes(&self) -> usize {
        self.x.len() * self.v.len()
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_steps)
    }

    /// Same domain and horizon with both axes refined or coarsened to new cell counts.
    pub fn with_cells(&self, nx: usize, nv: usize, t_final: f64) -> Result<PhaseGrid> {
        build_grid(
            DomainBounds { x_min: self.x.min, x_max: self.x.max, v_min: self.v.min, v_max: self.v.max },
            nx,
            nv,
            t_final,
            None,
        )
    }
}

/// Step count for a horizon; tolerant to round-off in `t_final / dt`.
pub fn step_count(t_final: f64, dt: f64) -> usize {
    let r = t_final / dt;
    let k = r.round();
    if (r - k).abs() < 1e-9 * r.max(1.0) {
        k as usize
    } else {
        r.ceil() as usize
    }
}

/// Build the unit-CFL grid. When `extent` is supplied, the light cone of the
/// initial data after `n_steps` must stay inside the domain; the cone may end
/// on the outermost cell (compactly supported data vanish there with their
/// first derivative).
pub fn build_grid(
    bounds: DomainBounds,
    nx: usize,
    nv: usize,
    t_final: f64,
    extent: Option<&InitialExtent>,
) -> Result<PhaseGrid> {
    if !t_final.is_finite() || t_final < 0.0 {
        return Err(Error::InvalidGrid(format!("t_final must be ≥ 0, got {t_final}")));
    }
    let x = Axis::new(bounds.x_min, bounds.x_max, nx)
        .map_err(|e| Error::InvalidGrid(format!("x axis: {e}")))?;
    let v = Axis::new(bounds.v_min, bounds.v_max, nv)
        .map_err(|e| Error::InvalidGrid(format!("v axis: {e}")))?;
    let dt = x.step();
    let n_steps = step_count(t_final, dt);
    let grid = PhaseGrid { x, v, dt, n_steps };
    if let Some(ext) = extent {
        check_margin(&grid, ext)?;
    }
    Ok(grid)
}

fn check_margin(grid: &PhaseGrid, ext: &InitialExtent) -> Result<()> {
    let t = grid.t_end();
    let slack = grid.dx();
    let lo = ext.x_lo - t;
    let hi = ext.x_hi + t;
    if lo < grid.x.min - slack || hi > grid.x.max + slack {
        let required = (ext.x_hi - ext.x_lo) + 2.0 * t;
        return Err(Error::DomainTooSmall(format!(
            "initial support [{}, {}] spread by the light cone over t = {t} reaches [{lo}, {hi}], \
             outside the domain [{}, {}]; need an x-extent of at least {required} around the support",
            ext.x_lo, ext.x_hi, grid.x.min, grid.x.max
        )));
    }
    if ext.v_lo <= grid.v.min || ext.v_hi >= grid.v.max {
        return Err(Error::DomainTooSmall(format!(
            "initial momentum support [{}, {}] must lie strictly inside [{}, {}]",
            ext.v_lo, ext.v_hi, grid.v.min, grid.v.max
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x0: f64, x1: f64, v0: f64, v1: f64) -> DomainBounds {
        DomainBounds { x_min: x0, x_max: x1, v_min: v0, v_max: v1 }
    }

    #[test]
    fn coarse_grid_has_unit_cfl() {
        let g = build_grid(b(-4.0, 4.0, -2.0, 2.0), 8, 8, 1.0, None).unwrap();
        assert_eq!(g.dt, 1.0);
        assert_eq!(g.n_steps, 1);
        assert_eq!(g.dt, g.dx());
    }

    #[test]
    fn fine_grid_step_count() {
        let g = build_grid(b(-4.0, 4.0, -2.0, 2.0), 800, 8, 1.0, None).unwrap();
        assert!((g.dt - 0.01).abs() < 1e-15);
        assert_eq!(g.n_steps, 100);
    }

    #[test]
    fn light_cone_margin_rejected() {
        let ext = InitialExtent { x_lo: -3.0, x_hi: 3.0, v_lo: -1.0, v_hi: 1.0 };
        let err = build_grid(b(-4.0, 4.0, -2.0, 2.0), 80, 8, 2.0, Some(&ext)).unwrap_err();
        match err {
            Error::DomainTooSmall(msg) => assert!(msg.contains("at least 10"), "{msg}"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn desk_margin_accepted() {
        let ext = InitialExtent { x_lo: -1.0, x_hi: 1.0, v_lo: -0.5, v_hi: 1.5 };
        let g = build_grid(b(-6.0, 6.0, -4.0, 4.0), 256, 256, 5.0, Some(&ext)).unwrap();
        assert_eq!(g.n_steps, 107);
    }

    #[test]
    fn bad_sizes() {
        assert!(build_grid(b(-1.0, 1.0, -1.0, 1.0), 1, 8, 1.0, None).is_err());
        assert!(build_grid(b(1.0, -1.0, -1.0, 1.0), 8, 8, 1.0, None).is_err());
        assert!(build_grid(b(-1.0, 1.0, -1.0, 1.0), 8, 8, -1.0, None).is_err());
    }

    #[test]
    fn last_node_is_exact_endpoint() {
        let a = Axis::new(-6.0, 6.0, 256).unwrap();
        assert_eq!(a.node(256), 6.0);
        assert_eq!(a.node(0), -6.0);
        assert_eq!(a.node_index(0.0, 1e-9), Some(128));
    }
}
