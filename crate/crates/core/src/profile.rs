//! Compactly supported initial-data profiles.
//!
//! Every preset is built from the quartic bump `h (1 - z²)²`, `z = (x - c)/r`,
//! which is C¹ with compact support; products of two bumps give the phase-space
//! distribution.

use serde::{Deserialize, Serialize};

/// Quartic bump `height * (1 - ((z - center)/radius)²)²` on `|z - center| < radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
    pub height: f64,
}

/// Maximum of `|d/dz (1 - z²)²|`, attained at `z = 1/√3`.
pub const BUMP_SLOPE_MAX: f64 = 1.539_600_717_839_002; // 8 / (3√3)

impl Bump {
    pub fn new(center: f64, radius: f64, height: f64) -> Self {
        debug_assert!(radius > 0.0);
        Bump { center, radius, height }
    }

    #[inline]
    pub fn value(&self, z: f64) -> f64 {
        let s = (z - self.center) / self.radius;
        if s.abs() < 1.0 {
            let q = 1.0 - s * s;
            self.height * q * q
        } else {
            0.0
        }
    }

    #[inline]
    pub fn derivative(&self, z: f64) -> f64 {
        let s = (z - self.center) / self.radius;
        if s.abs() < 1.0 {
            -4.0 * self.height * s * (1.0 - s * s) / self.radius
        } else {
            0.0
        }
    }

    /// Antiderivative vanishing to the left of the support.
    pub fn antiderivative(&self, z: f64) -> f64 {
        let s = ((z - self.center) / self.radius).clamp(-1.0, 1.0);
        let prim = |s: f64| s - 2.0 * s.powi(3) / 3.0 + s.powi(5) / 5.0;
        self.height * self.radius * (prim(s) - prim(-1.0))
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    pub fn sup(&self) -> f64 {
        self.height.abs()
    }

    pub fn slope_sup(&self) -> f64 {
        self.height.abs() * BUMP_SLOPE_MAX / self.radius
    }
}

/// `bump(center, radius, height)` as a closure.
pub fn bump(center: f64, radius: f64, height: f64) -> impl Fn(f64) -> f64 {
    let b = Bump::new(center, radius, height);
    move |z| b.value(z)
}

/// One-dimensional field data (`A₀`, `A₁`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Profile1d {
    Zero,
    Bump(Bump),
}

impl Profile1d {
    #[inline]
    pub fn value(&self, z: f64) -> f64 {
        match self {
            Profile1d::Zero => 0.0,
            Profile1d::Bump(b) => b.value(z),
        }
    }

    #[inline]
    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            Profile1d::Zero => 0.0,
            Profile1d::Bump(b) => b.derivative(z),
        }
    }

    pub fn antiderivative(&self, z: f64) -> f64 {
        match self {
            Profile1d::Zero => 0.0,
            Profile1d::Bump(b) => b.antiderivative(z),
        }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Profile1d::Zero => None,
            Profile1d::Bump(b) => Some(b.support()),
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Profile1d::Zero => 0.0,
            Profile1d::Bump(b) => b.sup(),
        }
    }

    pub fn slope_sup(&self) -> f64 {
        match self {
            Profile1d::Zero => 0.0,
            Profile1d::Bump(b) => b.slope_sup(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile1d::Zero) || self.sup() == 0.0
    }
}

/// Phase-space distribution `f₀(x, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Profile2d {
    Zero,
    /// `x.value(x) * v.value(v)`; the overall height lives in `x.height`, `v.height == 1`.
    Product { x: Bump, v: Bump },
}

impl Profile2d {
    pub fn bump2d(x_center: f64, x_radius: f64, v_center: f64, v_radius: f64, height: f64) -> Self {
        Profile2d::Product {
            x: Bump::new(x_center, x_radius, height),
            v: Bump::new(v_center, v_radius, 1.0),
        }
    }

    #[inline]
    pub fn value(&self, x: f64, v: f64) -> f64 {
        match self {
            Profile2d::Zero => 0.0,
            Profile2d::Product { x: bx, v: bv } => {
                let a = bx.value(x);
                if a == 0.0 {
                    0.0
                } else {
                    a * bv.value(v)
                }
            }
        }
    }

    pub fn dx(&self, x: f64, v: f64) -> f64 {
        match self {
            Profile2d::Zero => 0.0,
            Profile2d::Product { x: bx, v: bv } => bx.derivative(x) * bv.value(v),
        }
    }

    pub fn dv(&self, x: f64, v: f64) -> f64 {
        match self {
            Profile2d::Zero => 0.0,
            Profile2d::Product { x: bx, v: bv } => bx.value(x) * bv.derivative(v),
        }
    }

    /// `(x_lo, x_hi, v_lo, v_hi)` of the open support.
    pub fn support(&self) -> Option<(f64, f64, f64, f64)> {
        match self {
            Profile2d::Zero => None,
            Profile2d::Product { x, v } => {
                let (a, b) = x.support();
                let (c, d) = v.support();
                Some((a, b, c, d))
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Profile2d::Zero => 0.0,
            Profile2d::Product { x, v } => x.sup() * v.sup(),
        }
    }

    pub fn dx_sup(&self) -> f64 {
        match self {
            Profile2d::Zero => 0.0,
            Profile2d::Product { x, v } => x.slope_sup() * v.sup(),
        }
    }

    pub fn dv_sup(&self) -> f64 {
        match self {
            Profile2d::Zero => 0.0,
            Profile2d::Product { x, v } => x.sup() * v.slope_sup(),
        }
    }

    /// Location of the maximum of `|f₀|`.
    pub fn argmax(&self) -> Option<(f64, f64)> {
        match self {
            Profile2d::Zero => None,
            Profile2d::Product { x, v } => Some((x.center, v.center)),
        }
    }
}

/// The Cauchy data `(f₀, A₀, A₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub f0: Profile2d,
    pub a0: Profile1d,
    pub a1: Profile1d,
}

impl InitialData {
    pub fn zero() -> Self {
        InitialData { f0: Profile2d::Zero, a0: Profile1d::Zero, a1: Profile1d::Zero }
    }

    pub fn field_data_trivial(&self) -> bool {
        self.a0.is_zero() && self.a1.is_zero()
    }

    pub fn f0_sup(&self) -> f64 {
        self.f0.sup()
    }

    /// `‖f₀‖_{W^{1,∞}} = ‖f₀‖_∞ + ‖∂ₓf₀‖_∞ + ‖∂ᵥf₀‖_∞`.
    pub fn f0_w1inf(&self) -> f64 {
        self.f0.sup() + self.f0.dx_sup() + self.f0.dv_sup()
    }

    /// Radii of the smallest origin-centred boxes `(-R, R) × (-M, M)` holding supp f₀.
    pub fn support_radii(&self) -> (f64, f64) {
        match self.f0.support() {
            None => (0.0, 0.0),
            Some((a, b, c, d)) => (a.abs().max(b.abs()), c.abs().max(d.abs())),
        }
    }

    /// Union of the x-supports of all data plus the v-support of f₀.
    pub fn extent(&self) -> Option<crate::grid::InitialExtent> {
        let mut xs: Vec<(f64, f64)> = Vec::new();
        let mut vs = None;
        if let Some((a, b, c, d)) = self.f0.support() {
            xs.push((a, b));
            vs = Some((c, d));
        }
        xs.extend(self.a0.support());
        xs.extend(self.a1.support());
        if xs.is_empty() {
            return None;
        }
        let x_lo = xs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let x_hi = xs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let (v_lo, v_hi) = vs.unwrap_or((0.0, 0.0));
        Some(crate::grid::InitialExtent { x_lo, x_hi, v_lo, v_hi })
    }
}
