//! Conformal corner model `w = z + z₀z²`, its conformal factor
//! `F = |1 + 2z₀z|²`, and assembly of the heat-trace coefficients through
//! order `t^{1/2}` for a curvilinear polygon.
//!
//! Curvatures are signed positive toward the interior, so a convex corner has
//! `κ± >= 0`. On the flat sector `0 < arg z < α` the image of the `θ = 0` ray
//! has curvature `κ₊ = 2 Im z₀` and the image of the `θ = α` ray has
//! `κ₋ = −2 Im(z₀ e^{iα})`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerData {
    pub alpha: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
}

impl CornerData {
    pub fn new(alpha: f64, kappa_plus: f64, kappa_minus: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0 * PI) {
            return Err(domain(format!("corner angle must lie in (0, 2π), got {alpha}")));
        }
        if !kappa_plus.is_finite() || !kappa_minus.is_finite() {
            return Err(domain("corner curvatures must be finite"));
        }
        Ok(Self { alpha, kappa_plus, kappa_minus })
    }

    pub fn is_straight(&self) -> bool {
        self.kappa_plus == 0.0 && self.kappa_minus == 0.0
    }
}

/// `z₀ = u₀ + i v₀ = r₀ e^{iθ₀}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub u0: f64,
    pub v0: f64,
    pub r0: f64,
    pub theta0: f64,
}

impl ModelParams {
    pub fn from_z0(u0: f64, v0: f64) -> Self {
        let r0 = u0.hypot(v0);
        let theta0 = if r0 > 0.0 { v0.atan2(u0) } else { 0.0 };
        Self { u0, v0, r0, theta0 }
    }

    /// `∇F(y)` in Cartesian components.
    pub fn factor_gradient(&self, y: [f64; 2]) -> [f64; 2] {
        let s = 8.0 * self.r0 * self.r0;
        [4.0 * self.u0 + s * y[0], -4.0 * self.v0 + s * y[1]]
    }

    /// `F(y) = |1 + 2z₀y|²` in Cartesian components.
    pub fn factor_at(&self, y: [f64; 2]) -> f64 {
        let re = 1.0 + 2.0 * (self.u0 * y[0] - self.v0 * y[1]);
        let im = 2.0 * (self.u0 * y[1] + self.v0 * y[0]);
        re * re + im * im
    }
}

/// Solves `κ₊ = 2v₀`, `κ₋ = −2(u₀ sin α + v₀ cos α)` for `z₀`.
pub fn model_from_corner(c: CornerData) -> Result<ModelParams> {
    let sa = c.alpha.sin();
    if (c.alpha - PI).abs() < 1e-9 {
        return Err(Error::ModelBreakdown(c.alpha));
    }
    let v0 = 0.5 * c.kappa_plus;
    let u0 = -(c.kappa_plus * c.alpha.cos() + c.kappa_minus) / (2.0 * sa);
    Ok(ModelParams::from_z0(u0, v0))
}

/// `r₀ = ½ |csc α| √(κ₊² + κ₋² + 2κ₊κ₋ cos α)`, the modulus of the solution
/// of the curvature system.
pub fn r0_from_curvatures(alpha: f64, kappa_plus: f64, kappa_minus: f64) -> Result<f64> {
    if (alpha - PI).abs() < 1e-9 {
        return Err(Error::ModelBreakdown(alpha));
    }
    let q = kappa_plus * kappa_plus + kappa_minus * kappa_minus + 2.0 * kappa_plus * kappa_minus * alpha.cos();
    Ok(0.5 * q.max(0.0).sqrt() / alpha.sin().abs())
}

/// `(κ₊, κ₋) = (2 Im z₀, −2 Im(z₀ e^{iα}))`.
pub fn curvatures_from_model(m: ModelParams, alpha: f64) -> (f64, f64) {
    let (s, c) = alpha.sin_cos();
    (2.0 * m.v0, -2.0 * (m.u0 * s + m.v0 * c))
}

/// `F(re^{iθ}) = 1 + 4r₀r cos(θ+θ₀) + 4r₀²r²`.
pub fn conformal_factor(r: f64, theta: f64, m: ModelParams) -> f64 {
    1.0 + 4.0 * m.r0 * r * (theta + m.theta0).cos() + 4.0 * m.r0 * m.r0 * r * r
}

/// Orientation `θ₀` of the reference corner `κ₊ > 0`, `κ₋ = 0`, at which
/// `c_{1/2}(α)` is quoted.
pub fn reference_theta0(alpha: f64) -> f64 {
    if alpha < PI {
        PI - alpha
    } else {
        -alpha
    }
}

/// `(κ₊ + κ₋) / (2 |sin α|)`: the corner's projection onto the reference
/// orientation. Equals `r₀` for a one-sided corner (`κ₋ = 0`, `κ₊ > 0`).
pub fn effective_radius(c: CornerData) -> Result<f64> {
    if (c.alpha - PI).abs() < 1e-9 {
        return Err(Error::ModelBreakdown(c.alpha));
    }
    Ok((c.kappa_plus + c.kappa_minus) / (2.0 * c.alpha.sin().abs()))
}

/// Corner contribution to the `t^{1/2}` coefficient.
///
/// The first-order corner term is linear in `z₀`, proportional to
/// `Re(z₀ e^{iα/2}) ∝ κ₊ + κ₋`; with `c12_value` quoted at the reference
/// orientation this gives `c12_value · (κ₊ + κ₋) / (2|sin α|)`.
pub fn corner_contribution(c: CornerData, c12_value: f64) -> Result<f64> {
    Ok(c12_value * effective_radius(c)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainDescription {
    pub area: f64,
    pub perimeter: f64,
    /// `∫κ ds` over the smooth boundary arcs.
    pub kappa_integral: f64,
    /// `∫κ² ds` over the smooth boundary arcs.
    pub kappa_sq_integral: f64,
    pub corners: Vec<CornerData>,
}

impl DomainDescription {
    pub fn validate(&self) -> Result<()> {
        if !(self.area > 0.0) || !(self.perimeter > 0.0) {
            return Err(domain("area and perimeter must be positive"));
        }
        if !(self.kappa_sq_integral >= 0.0) || !self.kappa_integral.is_finite() {
            return Err(domain("curvature integrals must be finite with ∫κ² >= 0"));
        }
        Ok(())
    }

    pub fn unit_disk() -> Self {
        Self {
            area: PI,
            perimeter: 2.0 * PI,
            kappa_integral: 2.0 * PI,
            kappa_sq_integral: 2.0 * PI,
            corners: vec![],
        }
    }

    pub fn unit_half_disk() -> Self {
        let c = CornerData { alpha: PI / 2.0, kappa_plus: 1.0, kappa_minus: 0.0 };
        Self {
            area: PI / 2.0,
            perimeter: PI + 2.0,
            kappa_integral: PI,
            kappa_sq_integral: PI,
            corners: vec![c, c],
        }
    }

    pub fn rectangle(a: f64, b: f64) -> Self {
        let c = CornerData { alpha: PI / 2.0, kappa_plus: 0.0, kappa_minus: 0.0 };
        Self {
            area: a * b,
            perimeter: 2.0 * (a + b),
            kappa_integral: 0.0,
            kappa_sq_integral: 0.0,
            corners: vec![c; 4],
        }
    }
}

/// `(a₋₁, a₋½, a₀, a½)` of `Tr e^{-tΔ} ~ Σ a_p t^p`.
///
/// `c12_table` maps corner angles to reference-orientation `c_{1/2}` values;
/// straight corners need no entry.
pub fn heat_trace_coefficients(d: &DomainDescription, c12_table: &[(f64, f64)]) -> Result<[f64; 4]> {
    d.validate()?;
    let sqrt_pi = PI.sqrt();
    let mut angle_sum = 0.0;
    let mut corner_sum = 0.0;
    for c in &d.corners {
        angle_sum += (PI * PI - c.alpha * c.alpha) / (2.0 * c.alpha);
        if c.is_straight() {
            continue;
        }
        let value = c12_table
            .iter()
            .find(|(a, _)| (a - c.alpha).abs() <= 1e-9)
            .map(|&(_, v)| v)
            .ok_or(Error::IncompleteTable(c.alpha))?;
        corner_sum += corner_contribution(*c, value)?;
    }
    Ok([
        d.area / (4.0 * PI),
        -d.perimeter / (8.0 * sqrt_pi),
        (d.kappa_integral + angle_sum) / (12.0 * PI),
        d.kappa_sq_integral / (256.0 * sqrt_pi) + corner_sum,
    ])
}

/// `1/(16√π)`, the reference-orientation corner value at a right angle.
pub fn c12_right_angle() -> f64 {
    1.0 / (16.0 * PI.sqrt())
}
