//! Quadrature check of the division identity
//!
//! ```text
//! ∂x²Y = (∂t + a∂x)(m ∂xY) + δ₀/(a² − 1),   Y = ½·1{|x| ≤ t},   m = x/(ax − t)
//! ```
//!
//! Both sides are paired against a compactly supported test function `φ(t, x)`.
//! Every pairing reduces to integrals of `φ` or its partials along the rays
//! `x = ±t`, `t ≥ 0`, plus the point value `φ(0, 0)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::Bump;

/// A one-variable factor of a product test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    /// `b(z)`
    Bump(Bump),
    /// `b(z)²`
    BumpSquared(Bump),
    /// `(z − c)·b(z)`, odd about the centre `c`.
    Odd(Bump),
}

impl Factor {
    pub fn value(&self, z: f64) -> f64 {
        match self {
            Factor::Bump(b) => b.value(z),
            Factor::BumpSquared(b) => b.value(z).powi(2),
            Factor::Odd(b) => (z - b.center) * b.value(z),
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            Factor::Bump(b) => b.derivative(z),
            Factor::BumpSquared(b) => 2.0 * b.value(z) * b.derivative(z),
            Factor::Odd(b) => b.value(z) + (z - b.center) * b.derivative(z),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let (Factor::Bump(b) | Factor::BumpSquared(b) | Factor::Odd(b)) = self;
        b.support()
    }
}

/// `φ(t, x) = T(t)·X(x)` with exact partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub name: &'static str,
    pub t: Factor,
    pub x: Factor,
}

impl TestFunction {
    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.t.value(t) * self.x.value(x)
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        self.t.derivative(t) * self.x.value(x)
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        self.t.value(t) * self.x.derivative(x)
    }

    /// `φ(t, −x)`
    pub fn reflected(&self) -> ReflectedX {
        ReflectedX(*self)
    }

    /// `b(t)·b(x)` with the unit bump.
    pub fn product_bump() -> Self {
        let b = Bump::new(0.0, 1.0, 1.0);
        TestFunction { name: "product_bump", t: Factor::Bump(b), x: Factor::Bump(b) }
    }

    /// `b(t)²·b(x)²`
    pub fn product_bump_squared() -> Self {
        let b = Bump::new(0.0, 1.0, 1.0);
        TestFunction { name: "product_bump_squared", t: Factor::BumpSquared(b), x: Factor::BumpSquared(b) }
    }

    /// A product of bumps centred off the origin.
    pub fn offset() -> Self {
        TestFunction {
            name: "offset",
            t: Factor::Bump(Bump::new(0.3, 1.2, 1.0)),
            x: Factor::Bump(Bump::new(-0.2, 0.9, 1.0)),
        }
    }

    /// `b(t)·x·b(x)`: odd in `x`, so `φ(0, 0) = 0` and the ray terms cancel.
    pub fn odd_in_x() -> Self {
        let b = Bump::new(0.0, 1.0, 1.0);
        TestFunction { name: "odd_in_x", t: Factor::Bump(b), x: Factor::Odd(b) }
    }

    /// Supported in `t ∈ (1.5, 2.5)`, `|x| < 0.5`: misses both rays.
    pub fn away_from_rays() -> Self {
        TestFunction {
            name: "away_from_rays",
            t: Factor::Bump(Bump::new(2.0, 0.5, 1.0)),
            x: Factor::Bump(Bump::new(0.0, 0.5, 1.0)),
        }
    }

    pub fn presets() -> Vec<TestFunction> {
        vec![
            Self::product_bump(),
            Self::product_bump_squared(),
            Self::offset(),
            Self::odd_in_x(),
            Self::away_from_rays(),
        ]
    }

    pub fn preset(name: &str) -> Option<TestFunction> {
        Self::presets().into_iter().find(|p| p.name == name)
    }

    /// Breakpoints of `t ↦ φ(t, s·t)` on `[0, ∞)`: the clipped support interval and interior kinks.
    fn ray_pieces(&self, s: f64) -> Vec<f64> {
        let (t_lo, t_hi) = self.t.support();
        let (x_lo, x_hi) = self.x.support();
        // x = s·t, so t ∈ [x_lo, x_hi]/s
        let (r_lo, r_hi) = if s > 0.0 { (x_lo, x_hi) } else { (-x_hi, -x_lo) };
        let lo = t_lo.max(r_lo).max(0.0);
        let hi = t_hi.min(r_hi);
        if hi <= lo {
            return Vec::new();
        }
        let mut pts = vec![lo, hi];
        for k in [t_lo, t_hi, r_lo, r_hi, self.t.support_center(), s * self.x.support_center()] {
            if k > lo && k < hi {
                pts.push(k);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

impl Factor {
    fn support_center(&self) -> f64 {
        let (lo, hi) = self.support();
        0.5 * (lo + hi)
    }
}

/// `φ(t, −x)` for a product test function.
#[derive(Debug, Clone, Copy)]
pub struct ReflectedX(pub TestFunction);

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Default absolute tolerance of every ray integral.
pub const QUAD_TOL: f64 = 1e-10;

/// `∫₀^∞ g(t, s·t) dt` split at the support breakpoints of `φ`.
fn ray_integral(phi: &TestFunction, s: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    let pts = phi.ray_pieces(s);
    let n = pts.len().saturating_sub(1).max(1);
    pts.windows(2)
        .map(|w| adaptive_simpson(&|t| g(t, s * t), w[0], w[1], QUAD_TOL / n as f64))
        .sum()
}

fn check_speed(a: f64) -> Result<()> {
    if a.is_finite() && a.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::SpeedOutOfRange(a))
    }
}

/// `⟨m ∂xY, ψ⟩ = ½/(a+1) ∫₀^∞ ψ(t,−t) dt − ½/(a−1) ∫₀^∞ ψ(t,t) dt` for a
/// ray integrand `ψ` derived from `phi`.
fn pair_m_dx_y_with(a: f64, phi: &TestFunction, psi: impl Fn(f64, f64) -> f64) -> Result<f64> {
    check_speed(a)?;
    let minus = ray_integral(phi, -1.0, &psi);
    let plus = ray_integral(phi, 1.0, &psi);
    Ok(0.5 / (a + 1.0) * minus - 0.5 / (a - 1.0) * plus)
}

/// `⟨m ∂xY, φ⟩`
pub fn pair_m_dx_y(a: f64, phi: &TestFunction) -> Result<f64> {
    pair_m_dx_y_with(a, phi, |t, x| phi.value(t, x))
}

/// `⟨m ∂xY, φ(t, −x)⟩`
pub fn pair_m_dx_y_reflected(a: f64, phi: &ReflectedX) -> Result<f64> {
    let p = &phi.0;
    check_speed(a)?;
    // φ(t, −x) on the ray x = ±t is φ(t, ∓t)
    let minus = ray_integral(p, 1.0, |t, x| p.value(t, x));
    let plus = ray_integral(p, -1.0, |t, x| p.value(t, x));
    Ok(0.5 / (a + 1.0) * minus - 0.5 / (a - 1.0) * plus)
}

/// `⟨T(m ∂xY), φ⟩ = −⟨m ∂xY, Tφ⟩` with `T = ∂t + a∂x`.
pub fn pair_lhs(a: f64, phi: &TestFunction) -> Result<f64> {
    pair_m_dx_y_with(a, phi, |t, x| phi.dt(t, x) + a * phi.dx(t, x)).map(|v| -v)
}

/// The delta term `−φ(0,0)/(a² − 1)`.
pub fn delta_term(a: f64, phi: &TestFunction) -> Result<f64> {
    check_speed(a)?;
    Ok(-phi.value(0.0, 0.0) / (a * a - 1.0))
}

/// `⟨∂x²Y, φ⟩ = ½ ∫₀^∞ (∂xφ(t,t) − ∂xφ(t,−t)) dt`
pub fn pair_dxx_y(phi: &TestFunction) -> f64 {
    let plus = ray_integral(phi, 1.0, |t, x| phi.dx(t, x));
    let minus = ray_integral(phi, -1.0, |t, x| phi.dx(t, x));
    0.5 * (plus - minus)
}

/// `−φ(0,0)/(a² − 1) + ⟨∂x²Y, φ⟩`
pub fn pair_rhs(a: f64, phi: &TestFunction) -> Result<f64> {
    Ok(delta_term(a, phi)? + pair_dxx_y(phi))
}

/// One row of the identity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisionRow {
    pub a: f64,
    pub phi_preset: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
}

pub const DEFAULT_SWEEP: [f64; 5] = [-0.9, -0.5, 0.0, 0.5, 0.9];

/// Pair both sides for every `(a, φ)` combination.
pub fn division_sweep(speeds: &[f64], presets: &[TestFunction]) -> Result<Vec<DivisionRow>> {
    let mut rows = Vec::with_capacity(speeds.len() * presets.len());
    for &a in speeds {
        for phi in presets {
            let lhs = pair_lhs(a, phi)?;
            let rhs = pair_rhs(a, phi)?;
            rows.push(DivisionRow { a, phi_preset: phi.name.to_string(), lhs, rhs, abs_err: (lhs - rhs).abs() });
        }
    }
    Ok(rows)
}
