//! Simulation state containers.

use serde::{Deserialize, Serialize};

use crate::grid::PhaseGrid;

/// Relative threshold below which a sample counts as outside the support.
pub const SUPPORT_EPS: f64 = 1e-12;

/// Node-aligned bounding box `[x_lo, x_hi] × [v_lo, v_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub x_lo: f64,
    pub x_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

/// Samples of `f(t, ·, ·)` on the phase grid (x-major).
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionState {
    pub values: Vec<f64>,
    pub time: f64,
    pub support_box: Option<SupportBox>,
}

impl DistributionState {
    /// Wrap samples and compute the support box against `threshold`.
    pub fn new(grid: &PhaseGrid, values: Vec<f64>, time: f64, threshold: f64) -> Self {
        let support_box = support_box(grid, &values, threshold);
        DistributionState { values, time, support_box }
    }

    pub fn sample(grid: &PhaseGrid, f: impl Fn(f64, f64) -> f64, time: f64, threshold: f64) -> Self {
        let mut values = vec![0.0; grid.n_nodes()];
        for i in 0..grid.nx1() {
            let x = grid.x.node(i);
            for j in 0..grid.nv1() {
                values[grid.idx(i, j)] = f(x, grid.v.node(j));
            }
        }
        Self::new(grid, values, time, threshold)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Most negative sample, or 0.
    pub fn undershoot(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::min)
    }
}

/// Bounding box of the nodes where `f > threshold`.
pub fn support_box(grid: &PhaseGrid, values: &[f64], threshold: f64) -> Option<SupportBox> {
    let nv1 = grid.nv1();
    let (mut ilo, mut ihi, mut jlo, mut jhi) = (usize::MAX, 0, usize::MAX, 0);
    for (i, row) in values.chunks_exact(nv1).enumerate() {
        for (j, &f) in row.iter().enumerate() {
            if f > threshold {
                ilo = ilo.min(i);
                ihi = ihi.max(i);
                jlo = jlo.min(j);
                jhi = jhi.max(j);
            }
        }
    }
    (ilo != usize::MAX).then(|| SupportBox {
        x_lo: grid.x.node(ilo),
        x_hi: grid.x.node(ihi),
        v_lo: grid.v.node(jlo),
        v_hi: grid.v.node(jhi),
    })
}

/// Wave variables on the x-nodes. `b_plus = ∂tA + ∂xA`, `b_minus = ∂tA − ∂xA`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub b_plus: Vec<f64>,
    pub b_minus: Vec<f64>,
    pub a: Vec<f64>,
    pub time: f64,
}

impl FieldState {
    pub fn zero(n: usize) -> Self {
        FieldState { b_plus: vec![0.0; n], b_minus: vec![0.0; n], a: vec![0.0; n], time: 0.0 }
    }

    pub fn dt_a(&self) -> Vec<f64> {
        self.b_plus.iter().zip(&self.b_minus).map(|(p, m)| 0.5 * (p + m)).collect()
    }

    pub fn dx_a(&self) -> Vec<f64> {
        self.b_plus.iter().zip(&self.b_minus).map(|(p, m)| 0.5 * (p - m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainBounds};

    #[test]
    fn support_box_of_single_node() {
        let g = build_grid(DomainBounds { x_min: -1.0, x_max: 1.0, v_min: -1.0, v_max: 1.0 }, 4, 4, 0.0, None)
            .unwrap();
        let mut vals = vec![0.0; g.n_nodes()];
        vals[g.idx(1, 3)] = 1.0;
        vals[g.idx(2, 2)] = 1e-14;
        let s = DistributionState::new(&g, vals, 0.0, 1e-12);
        let b = s.support_box.unwrap();
        assert_eq!((b.x_lo, b.x_hi, b.v_lo, b.v_hi), (-0.5, -0.5, 0.5, 0.5));
        assert!(DistributionState::new(&g, vec![0.0; g.n_nodes()], 0.0, 1e-12).support_box.is_none());
    }

    #[test]
    fn field_split() {
        let f = FieldState { b_plus: vec![3.0], b_minus: vec![1.0], a: vec![0.0], time: 0.0 };
        assert_eq!(f.dt_a(), vec![2.0]);
        assert_eq!(f.dx_a(), vec![1.0]);
    }
}
