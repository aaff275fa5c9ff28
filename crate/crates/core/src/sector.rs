//! Dirichlet heat kernel on the infinite sector at unit time, in front-face
//! variables, together with the geometric weights `D²`, `S` and the
//! first-order perturbation kernel `b`.
//!
//! Two evaluation routes are available:
//!
//! * the Bessel series `a = ½ e^{-(R²+R'²)/4} Σ I_{πj/α}(RR'/2) φ_j(θ) φ_j(θ')`,
//!   summed with `e^{-x} I_ν(x)` so that nothing overflows; once
//!   `RR'/2 > 50` the series is replaced by the geometric-optics image sum,
//!   which differs from it only by the diffracted wave, bounded by
//!   `e^{-(R+R')²/4} <= e^{-100}`;
//! * the finite reflection-group image sum, exact when `α = π/m`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::specfun::{bessel_i_scaled, Accuracy};

/// Above this value of `RR'/2` the series path switches to geometric optics.
pub const GEOMETRIC_OPTICS_THRESHOLD: f64 = 50.0;

const ANGLE_SLACK: f64 = 1e-12;

/// How the sector kernel is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelSource {
    #[default]
    Series,
    /// Reflection-group images; only valid for `α = π/m`.
    Images,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorGeometry {
    alpha: f64,
    truncation_j: usize,
    tol: f64,
    source: KernelSource,
    images: usize,
    acc: Accuracy,
}

impl SectorGeometry {
    pub fn new(alpha: f64, truncation_j: usize, tol: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0 * PI) {
            return Err(domain(format!("sector angle must lie in (0, 2π), got {alpha}")));
        }
        if truncation_j == 0 {
            return Err(domain("truncation_j must be positive"));
        }
        if !(tol > 0.0 && tol < 1e-3) {
            return Err(domain(format!("kernel tolerance must lie in (0, 1e-3), got {tol}")));
        }
        Ok(Self {
            alpha,
            truncation_j,
            tol,
            source: KernelSource::Series,
            images: 0,
            acc: Accuracy::default(),
        })
    }

    /// Default truncation cap (200 terms) and tolerance `1e-10`.
    pub fn with_defaults(alpha: f64) -> Result<Self> {
        Self::new(alpha, 200, 1e-10)
    }

    pub fn with_source(mut self, source: KernelSource) -> Result<Self> {
        if source == KernelSource::Images {
            self.images = wedge_order(self.alpha)?;
        }
        self.source = source;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn truncation_j(&self) -> usize {
        self.truncation_j
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn source(&self) -> KernelSource {
        self.source
    }
}

/// `m` such that `α = π/m`, or a domain error.
pub fn wedge_order(alpha: f64) -> Result<usize> {
    let m = (PI / alpha).round();
    if m >= 1.0 && (m * alpha - PI).abs() <= 1e-12 * PI {
        Ok(m as usize)
    } else {
        Err(domain(format!("image kernel requires alpha = π/m, got {alpha}")))
    }
}

/// A point `(R, θ)` in scaled polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontFacePoint {
    pub r: f64,
    pub theta: f64,
}

impl FrontFacePoint {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() || !theta.is_finite() {
            return Err(domain(format!("invalid front-face point ({r}, {theta})")));
        }
        Ok(Self { r, theta })
    }

    fn check_in(&self, alpha: f64) -> Result<()> {
        if self.theta < -ANGLE_SLACK || self.theta > alpha + ANGLE_SLACK {
            return Err(domain(format!(
                "angle {} outside the sector [0, {alpha}]",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Orientation `θ₀` of `∇F(0)` and the corner scale `r₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelAngle {
    pub theta0: f64,
    pub r0: f64,
}

impl ModelAngle {
    pub fn new(theta0: f64, r0: f64) -> Result<Self> {
        if !(r0 >= 0.0) || !r0.is_finite() || !theta0.is_finite() {
            return Err(domain(format!("invalid model angle (theta0={theta0}, r0={r0})")));
        }
        Ok(Self { theta0, r0 })
    }

    /// Unit-scale orientation, as used inside `b`.
    pub fn unit(theta0: f64) -> Self {
        Self { theta0, r0: 1.0 }
    }
}

/// `(D², S)` with `D² = R² + R'² − 2RR' cos(θ−θ')` and
/// `S = R cos(θ+θ₀) + R' cos(θ'+θ₀)`.
pub fn geometry_factors(p: FrontFacePoint, q: FrontFacePoint, theta0: f64) -> (f64, f64) {
    let d2 = p.r * p.r + q.r * q.r - 2.0 * p.r * q.r * (p.theta - q.theta).cos();
    let s = p.r * (p.theta + theta0).cos() + q.r * (q.theta + theta0).cos();
    (d2.max(0.0), s)
}

/// Value and first derivatives of `a(R, θ, R', θ')`, plus the polar
/// Laplacian in the first slot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelJet {
    pub a: f64,
    pub d_r: f64,
    pub d_theta: f64,
    pub d_rp: f64,
    pub laplacian: f64,
}

/// Full kernel jet at `(p, q)` using the geometry's evaluation route.
pub fn kernel_jet(p: FrontFacePoint, q: FrontFacePoint, geom: &SectorGeometry) -> Result<KernelJet> {
    p.check_in(geom.alpha)?;
    q.check_in(geom.alpha)?;
    jet_unchecked(p, q, geom)
}

pub(crate) fn jet_unchecked(
    p: FrontFacePoint,
    q: FrontFacePoint,
    geom: &SectorGeometry,
) -> Result<KernelJet> {
    match geom.source {
        KernelSource::Images => Ok(finite_image_jet(p, q, geom.alpha, geom.images)),
        KernelSource::Series => {
            if 0.5 * p.r * q.r > GEOMETRIC_OPTICS_THRESHOLD {
                Ok(geometric_optics_jet(p, q, geom.alpha))
            } else {
                series_jet(p, q, geom)
            }
        }
    }
}

pub(crate) fn value_unchecked(p: FrontFacePoint, q: FrontFacePoint, geom: &SectorGeometry) -> Result<f64> {
    match geom.source {
        KernelSource::Images => Ok(finite_image_jet(p, q, geom.alpha, geom.images).a),
        KernelSource::Series => {
            if 0.5 * p.r * q.r > GEOMETRIC_OPTICS_THRESHOLD {
                Ok(geometric_optics_jet(p, q, geom.alpha).a)
            } else {
                Ok(series_sum(p, q, geom, false)?.a)
            }
        }
    }
}

/// Sector heat kernel `a` at unit time.
pub fn kernel_a(p: FrontFacePoint, q: FrontFacePoint, geom: &SectorGeometry) -> Result<f64> {
    p.check_in(geom.alpha)?;
    q.check_in(geom.alpha)?;
    let on_wall = |x: FrontFacePoint| x.theta == 0.0 || x.theta == geom.alpha;
    if on_wall(p) || on_wall(q) {
        return Ok(0.0);
    }
    value_unchecked(p, q, geom)
}

/// Independent closed form for `α = π/m`: alternating-sign sum of free
/// Gaussians over the `2m` reflections of `q`.
pub fn kernel_a_images(p: FrontFacePoint, q: FrontFacePoint, alpha: f64) -> Result<f64> {
    let m = wedge_order(alpha)?;
    p.check_in(alpha)?;
    q.check_in(alpha)?;
    Ok(finite_image_jet(p, q, alpha, m).a)
}

/// `(∂_R a, ∂_θ a, Δ_{R,θ} a)` in the first slot.
///
/// On the series route the Laplacian comes from the conic-scaling identity
/// `Δa = −a − ½(R∂_R + R'∂_{R'})a`, so only first derivatives of the Bessel
/// series are needed.
pub fn derivatives_a(
    p: FrontFacePoint,
    q: FrontFacePoint,
    geom: &SectorGeometry,
) -> Result<(f64, f64, f64)> {
    if !(p.r > 0.0) {
        return Err(domain("derivatives of a require R > 0"));
    }
    let j = kernel_jet(p, q, geom)?;
    Ok((j.d_r, j.d_theta, j.laplacian))
}

/// Perturbation kernel `b` (with `r₀` divided out):
///
/// `b = (½D²S + 4R cos(θ+θ₀)) a + 4R cos(θ+θ₀) Δa + ∇(D²S)·∇a`.
///
/// Only `angle.theta0` is used.
pub fn kernel_b(
    p: FrontFacePoint,
    q: FrontFacePoint,
    geom: &SectorGeometry,
    angle: ModelAngle,
) -> Result<f64> {
    if !(p.r > 0.0) {
        return Err(domain("kernel b requires R > 0"));
    }
    let jet = kernel_jet(p, q, geom)?;
    Ok(b_from_jet(p, q, angle.theta0, &jet))
}

#[inline]
pub(crate) fn b_from_jet(p: FrontFacePoint, q: FrontFacePoint, theta0: f64, jet: &KernelJet) -> f64 {
    let (r, th, rp, thp) = (p.r, p.theta, q.r, q.theta);
    let (s_d, c_d) = (th - thp).sin_cos();
    let (s_0, c_0) = (th + theta0).sin_cos();
    let d2 = (r * r + rp * rp - 2.0 * r * rp * c_d).max(0.0);
    let s = r * c_0 + rp * (thp + theta0).cos();
    let grad_r = 2.0 * (r - rp * c_d) * s + d2 * c_0;
    let grad_t = 2.0 * rp * s_d * s - d2 * s_0;
    let w = 4.0 * r * c_0;
    (0.5 * d2 * s + w) * jet.a + w * jet.laplacian + grad_r * jet.d_r + grad_t * jet.d_theta / r
}

/// `b` from the rearranged form
/// `½D²S a + 4R cos(θ+θ₀) Δa + ½Δ(D²S a) − ½D²S Δa`,
/// with `Δ(D²S a)` taken by a fourth-order finite-difference polar stencil of
/// the product, independently of the gradient form.
pub fn kernel_b_clean(
    p: FrontFacePoint,
    q: FrontFacePoint,
    geom: &SectorGeometry,
    angle: ModelAngle,
) -> Result<f64> {
    if !(p.r > 0.0) {
        return Err(domain("kernel b requires R > 0"));
    }
    let jet = kernel_jet(p, q, geom)?;
    let theta0 = angle.theta0;
    let (d2, s) = geometry_factors(p, q, theta0);
    let product = |r: f64, th: f64| -> Result<f64> {
        let pp = FrontFacePoint { r, theta: th };
        let (d2, s) = geometry_factors(pp, q, theta0);
        Ok(d2 * s * jet_unchecked(pp, q, geom)?.a)
    };
    let h_r = 2e-3 * p.r.min(1.0);
    let h_t = 2e-3;
    let lap_product = polar_laplacian_fd(&product, p.r, p.theta, h_r, h_t)?;
    let w = 4.0 * p.r * (p.theta + theta0).cos();
    Ok(0.5 * d2 * s * jet.a + w * jet.laplacian + 0.5 * lap_product - 0.5 * d2 * s * jet.laplacian)
}

/// Fourth-order central-difference polar Laplacian of `f` at `(r, θ)`.
pub(crate) fn polar_laplacian_fd<F>(f: &F, r: f64, th: f64, h_r: f64, h_t: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let f0 = f(r, th)?;
    let d1 = |g: &dyn Fn(f64) -> Result<f64>, h: f64| -> Result<(f64, f64)> {
        let (m2, m1, p1, p2) = (g(-2.0 * h)?, g(-h)?, g(h)?, g(2.0 * h)?);
        let first = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        let second = (-m2 + 16.0 * m1 - 30.0 * f0 + 16.0 * p1 - p2) / (12.0 * h * h);
        Ok((first, second))
    };
    let (fr, frr) = d1(&|d| f(r + d, th), h_r)?;
    let (_, ftt) = d1(&|d| f(r, th + d), h_t)?;
    Ok(frr + fr / r + ftt / (r * r))
}

/// Maximum absolute residuals of the four polar-operator identities
/// `Δ(D²) = 4`, `ΔS = 0`, `Δ(D²S) = 8R cos(θ+θ₀)`,
/// `(R∂_R + R'∂_{R'})(D²S) = 3D²S`, by exact differentiation of the
/// closed forms.
pub fn verify_polarops(samples: &[(FrontFacePoint, FrontFacePoint, f64)]) -> [f64; 4] {
    let mut worst = [0.0f64; 4];
    for &(p, q, theta0) in samples {
        let r = polar_op_residuals(p, q, theta0);
        for (w, v) in worst.iter_mut().zip(r) {
            *w = w.max(v.abs());
        }
    }
    worst
}

/// Residual of the conic-scaling identity `Δa + a + ½(R∂_R + R'∂_{R'})a`
/// with every derivative taken by finite differences of `kernel_a`.
pub fn conic_scaling_residual(p: FrontFacePoint, q: FrontFacePoint, geom: &SectorGeometry) -> Result<f64> {
    let h_t = 1e-3;
    let margin = 2.0 * h_t;
    if !(p.r > 0.0 && q.r > 0.0) || p.theta < margin || p.theta > geom.alpha - margin {
        return Err(domain("conic-scaling check needs interior points with R, R' > 0"));
    }
    q.check_in(geom.alpha)?;
    let a = |p: FrontFacePoint, q: FrontFacePoint| value_unchecked(p, q, geom);
    let h_r = 1e-3 * p.r.min(1.0);
    let lap = polar_laplacian_fd(&|r, th| a(FrontFacePoint { r, theta: th }, q), p.r, p.theta, h_r, h_t)?;
    let d = |f: &dyn Fn(f64) -> Result<f64>, x: f64, h: f64| -> Result<f64> {
        Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
    };
    let a_r = d(&|r| a(FrontFacePoint { r, ..p }, q), p.r, h_r)?;
    let h_rp = 1e-3 * q.r.min(1.0);
    let a_rp = d(&|r| a(p, FrontFacePoint { r, ..q }), q.r, h_rp)?;
    Ok(lap + a(p, q)? + 0.5 * (p.r * a_r + q.r * a_rp))
}

/// Signed residuals of the four identities at one sample.
pub fn polar_op_residuals(p: FrontFacePoint, q: FrontFacePoint, theta0: f64) -> [f64; 4] {
    let (r, th, rp, thp) = (p.r, p.theta, q.r, q.theta);
    let (sd, cd) = (th - thp).sin_cos();
    let (s0, c0) = (th + theta0).sin_cos();
    let c0p = (thp + theta0).cos();

    let d = r * r + rp * rp - 2.0 * r * rp * cd;
    let d_r = 2.0 * r - 2.0 * rp * cd;
    let d_rr = 2.0;
    let d_t = 2.0 * r * rp * sd;
    let d_tt = 2.0 * r * rp * cd;
    let d_rp = 2.0 * rp - 2.0 * r * cd;

    let s = r * c0 + rp * c0p;
    let s_r = c0;
    let s_rr = 0.0;
    let s_t = -r * s0;
    let s_tt = -r * c0;
    let s_rp = c0p;

    let lap = |f_r: f64, f_rr: f64, f_tt: f64| f_rr + f_r / r + f_tt / (r * r);

    let p_r = d_r * s + d * s_r;
    let p_rr = d_rr * s + 2.0 * d_r * s_r + d * s_rr;
    let p_tt = d_tt * s + 2.0 * d_t * s_t + d * s_tt;
    let p_rp = d_rp * s + d * s_rp;

    [
        lap(d_r, d_rr, d_tt) - 4.0,
        lap(s_r, s_rr, s_tt),
        lap(p_r, p_rr, p_tt) - 8.0 * r * c0,
        r * p_r + rp * p_rp - 3.0 * d * s,
    ]
}

// --- evaluation routes -----------------------------------------------------

#[inline]
fn add_image(jet: &mut KernelJet, z: (f64, f64), rp: f64, psi: f64, sign: f64) {
    let (sp, cp) = psi.sin_cos();
    let dx = z.0 - rp * cp;
    let dy = z.1 - rp * sp;
    let d2 = dx * dx + dy * dy;
    let e = sign * (-0.25 * d2).exp();
    jet.a += e;
    jet.d_r -= 0.5 * dx * e; // x-gradient, rotated below
    jet.d_theta -= 0.5 * dy * e; // y-gradient, rotated below
    jet.d_rp += 0.5 * (dx * cp + dy * sp) * e;
    jet.laplacian += (0.25 * d2 - 1.0) * e;
}

#[inline]
fn finish_images(mut jet: KernelJet, p: FrontFacePoint) -> KernelJet {
    let norm = 1.0 / (4.0 * PI);
    let (st, ct) = p.theta.sin_cos();
    let (gx, gy) = (jet.d_r, jet.d_theta);
    jet.a *= norm;
    jet.d_r = norm * (gx * ct + gy * st);
    jet.d_theta = norm * p.r * (-gx * st + gy * ct);
    jet.d_rp *= norm;
    jet.laplacian *= norm;
    jet
}

pub(crate) fn finite_image_jet(p: FrontFacePoint, q: FrontFacePoint, alpha: f64, m: usize) -> KernelJet {
    let (st, ct) = p.theta.sin_cos();
    let z = (p.r * ct, p.r * st);
    let mut jet = KernelJet::default();
    for k in 0..m {
        let base = 2.0 * k as f64 * alpha;
        add_image(&mut jet, z, q.r, base + q.theta, 1.0);
        add_image(&mut jet, z, q.r, base - q.theta, -1.0);
    }
    finish_images(jet, p)
}

/// Images visible from `p` (angular separation below π) for a general wedge.
pub(crate) fn geometric_optics_jet(p: FrontFacePoint, q: FrontFacePoint, alpha: f64) -> KernelJet {
    let (st, ct) = p.theta.sin_cos();
    let z = (p.r * ct, p.r * st);
    let mut jet = KernelJet::default();
    let two_a = 2.0 * alpha;
    for (offset, sign) in [(q.theta, 1.0), (-q.theta, -1.0)] {
        let lo = ((p.theta - offset - PI) / two_a).ceil() as i64;
        let hi = ((p.theta - offset + PI) / two_a).floor() as i64;
        for k in lo..=hi {
            let psi = offset + two_a * k as f64;
            if (p.theta - psi).abs() < PI {
                add_image(&mut jet, z, q.r, psi, sign);
            }
        }
    }
    finish_images(jet, p)
}

fn series_jet(p: FrontFacePoint, q: FrontFacePoint, geom: &SectorGeometry) -> Result<KernelJet> {
    series_sum(p, q, geom, true)
}

fn series_sum(
    p: FrontFacePoint,
    q: FrontFacePoint,
    geom: &SectorGeometry,
    with_derivatives: bool,
) -> Result<KernelJet> {
    let (r, rp) = (p.r, q.r);
    let x = 0.5 * r * rp;
    if x == 0.0 {
        return Ok(KernelJet::default());
    }
    let alpha = geom.alpha;
    let env = 0.5 * (-0.25 * (r - rp) * (r - rp)).exp() * (2.0 / alpha);
    let step = PI / alpha;
    let (mut sa, mut sdx, mut sdt) = (0.0, 0.0, 0.0);
    let mut scale = 0.0f64;
    let mut j = 1usize;
    loop {
        if j > geom.truncation_j {
            return Err(Error::Accuracy {
                what: format!(
                    "sector series not converged after {} terms (R={r}, R'={rp})",
                    geom.truncation_j
                ),
                partial: env * sa,
            });
        }
        let nu = step * j as f64;
        let i0 = bessel_i_scaled(nu, x, geom.acc)?;
        let (sn_p, cs_p) = (nu * p.theta).sin_cos();
        let sn_q = (nu * q.theta).sin();
        sa += i0 * sn_p * sn_q;
        let mut bound = i0;
        if with_derivatives {
            let i1 = bessel_i_scaled(nu + 1.0, x, geom.acc)?;
            let di = i1 + (nu / x - 1.0) * i0;
            sdx += di * sn_p * sn_q;
            sdt += nu * i0 * cs_p * sn_q;
            bound = bound.max(di.abs()).max(nu * i0);
        }
        if j == 1 {
            scale = bound;
        }
        if bound <= 1e-2 * geom.tol * scale {
            break;
        }
        j += 1;
    }
    let a = env * sa;
    if !with_derivatives {
        return Ok(KernelJet { a, ..KernelJet::default() });
    }
    let d_r = env * (-0.5 * (r - rp) * sa + 0.5 * rp * sdx);
    let d_rp = env * (0.5 * (r - rp) * sa + 0.5 * r * sdx);
    let d_theta = env * sdt;
    let laplacian = -a - 0.5 * (r * d_r + rp * d_rp);
    Ok(KernelJet { a, d_r, d_theta, d_rp, laplacian })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(r: f64, t: f64) -> FrontFacePoint {
        FrontFacePoint::new(r, t).unwrap()
    }

    fn quarter() -> SectorGeometry {
        SectorGeometry::with_defaults(PI / 2.0).unwrap()
    }

    #[test]
    fn geometry_factor_examples() {
        let p = pt(1.3, 0.7);
        assert_eq!(geometry_factors(p, p, 0.4).0, 0.0);
        let (d2, _) = geometry_factors(pt(1.0, 0.0), pt(1.0, PI / 2.0), 1.1);
        assert!((d2 - 2.0).abs() < 1e-15);
        let (_, s) = geometry_factors(pt(2.0, 0.0), pt(3.0, 0.0), 0.0);
        assert_eq!(s, 5.0);
    }

    #[test]
    fn quarter_plane_diagonal_value() {
        let e = (1.0 - 2.0 * (-0.5f64).exp() + (-1.0f64).exp()) / (4.0 * PI);
        assert!((e - 0.012_320_03).abs() < 1e-8);
        let p = pt(1.0, PI / 4.0);
        let series = kernel_a(p, p, &quarter()).unwrap();
        let images = kernel_a_images(p, p, PI / 2.0).unwrap();
        assert!((series - e).abs() < 1e-12 * e.max(1.0));
        assert!((images - e).abs() < 1e-15);
    }

    #[test]
    fn half_plane_two_image_formula() {
        for (r, t) in [(0.5, 0.3), (2.0, 1.2), (3.3, 2.9)] {
            let p = pt(r, t);
            let e = (1.0 - (-(r * t.sin()).powi(2)).exp()) / (4.0 * PI);
            assert!((kernel_a_images(p, p, PI).unwrap() - e).abs() < 1e-15);
        }
    }

    #[test]
    fn vanishes_on_walls() {
        let g = SectorGeometry::with_defaults(2.0).unwrap();
        for wall in [0.0, 2.0] {
            let v = kernel_a(pt(1.1, 0.8), pt(0.9, wall), &g).unwrap();
            assert!(v.abs() < 1e-13, "{v}");
        }
        assert!(kernel_a_images(pt(1.0, 0.3), pt(2.0, PI / 3.0), PI / 3.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rejects_non_wedge_angles_for_images() {
        assert!(kernel_a_images(pt(1.0, 0.1), pt(1.0, 0.2), 1.0).is_err());
        assert!(SectorGeometry::with_defaults(1.0)
            .unwrap()
            .with_source(KernelSource::Images)
            .is_err());
    }

    #[test]
    fn series_matches_images_for_wedges() {
        for m in [2usize, 3, 4] {
            let alpha = PI / m as f64;
            let g = SectorGeometry::with_defaults(alpha).unwrap();
            for &r in &[0.3, 1.7, 4.0] {
                for &rp in &[0.5, 2.2, 3.9] {
                    for &ft in &[0.2, 0.5, 0.9] {
                        let p = pt(r, ft * alpha);
                        let q = pt(rp, (1.0 - 0.6 * ft) * alpha);
                        let s = kernel_a(p, q, &g).unwrap();
                        let i = kernel_a_images(p, q, alpha).unwrap();
                        assert!((s - i).abs() <= 1e-8 * i.abs(), "m={m} {p:?} {q:?}: {s} vs {i}");
                    }
                }
            }
        }
    }

    #[test]
    fn geometric_optics_reproduces_finite_images_for_wedges() {
        for m in [1usize, 2, 3, 5] {
            let alpha = PI / m as f64;
            let p = pt(11.0, 0.3 * alpha);
            let q = pt(10.0, 0.8 * alpha);
            let a = finite_image_jet(p, q, alpha, m);
            let b = geometric_optics_jet(p, q, alpha);
            assert!((a.a - b.a).abs() < 1e-14 * a.a.abs().max(1e-300) + 1e-40);
            assert!((a.laplacian - b.laplacian).abs() < 1e-13 * a.laplacian.abs() + 1e-40);
        }
    }

    #[test]
    fn series_and_geometric_optics_agree_at_switch() {
        // Non-wedge angle: the diffracted wave is below e^{-2x}.
        let g = SectorGeometry::with_defaults(2.3).unwrap();
        let p = pt(10.0, 1.0);
        let q = pt(9.99, 1.3);
        let s = series_sum(p, q, &g, true).unwrap();
        let o = geometric_optics_jet(p, q, 2.3);
        assert!((s.a - o.a).abs() < 1e-10 * o.a);
        assert!((s.d_r - o.d_r).abs() < 1e-8 * o.a);
        assert!((s.d_theta - o.d_theta).abs() < 1e-8 * o.a);
    }

    #[test]
    fn jet_matches_image_derivatives() {
        let alpha = PI / 2.0;
        let g = quarter();
        let p = pt(1.2, 0.5);
        let q = pt(0.8, 1.1);
        let s = kernel_jet(p, q, &g).unwrap();
        let i = finite_image_jet(p, q, alpha, 2);
        for (x, y) in [(s.a, i.a), (s.d_r, i.d_r), (s.d_theta, i.d_theta), (s.d_rp, i.d_rp), (s.laplacian, i.laplacian)] {
            assert!((x - y).abs() < 1e-7 * i.a.abs().max(1e-3), "{x} vs {y}");
        }
    }

    #[test]
    fn bisector_symmetry_kills_theta_derivative() {
        let g = SectorGeometry::with_defaults(1.3).unwrap();
        let p = pt(1.4, 0.65);
        let (_, dt, _) = derivatives_a(p, p, &g).unwrap();
        assert!(dt.abs() < 1e-13);
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        for alpha in [0.9, 2.0, 4.5] {
            let g = SectorGeometry::with_defaults(alpha).unwrap();
            let q = pt(1.1, 0.45 * alpha);
            let p = pt(1.3, 0.5 * alpha);
            let (_, _, lap) = derivatives_a(p, q, &g).unwrap();
            let f = |r: f64, t: f64| kernel_a(pt(r, t), q, &g);
            let h = 1e-4;
            let f0 = f(p.r, p.theta).unwrap();
            let frr = (f(p.r + h, p.theta).unwrap() - 2.0 * f0 + f(p.r - h, p.theta).unwrap()) / (h * h);
            let fr = (f(p.r + h, p.theta).unwrap() - f(p.r - h, p.theta).unwrap()) / (2.0 * h);
            let ftt = (f(p.r, p.theta + h).unwrap() - 2.0 * f0 + f(p.r, p.theta - h).unwrap()) / (h * h);
            let fd = frr + fr / p.r + ftt / (p.r * p.r);
            assert!(((lap - fd) / lap).abs() < 1e-5, "alpha={alpha}: {lap} vs {fd}");
        }
    }

    #[test]
    fn b_vanishes_when_source_on_wall() {
        let g = SectorGeometry::with_defaults(1.9).unwrap();
        for wall in [0.0, 1.9] {
            let v = kernel_b(pt(1.0, 0.7), pt(1.4, wall), &g, ModelAngle::unit(0.3)).unwrap();
            assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn b_image_oracle() {
        // Independent b built only from hand-differentiated image Gaussians.
        let alpha = PI / 2.0;
        let (p, q) = (pt(1.0, PI / 4.0), pt(1.5, PI / 3.0));
        let (zx, zy) = (p.r * p.theta.cos(), p.r * p.theta.sin());
        let (wx, wy) = (q.r * q.theta.cos(), q.r * q.theta.sin());
        let (mut a, mut ax, mut ay, mut lap) = (0.0, 0.0, 0.0, 0.0);
        for (gx, gy, sg) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
            let (dx, dy) = (zx - gx * wx, zy - gy * wy);
            let r2 = dx * dx + dy * dy;
            let e = sg * (-r2 / 4.0f64).exp() / (4.0 * PI);
            a += e;
            ax -= dx / 2.0 * e;
            ay -= dy / 2.0 * e;
            lap += (r2 / 4.0 - 1.0) * e;
        }
        let d2 = (zx - wx).powi(2) + (zy - wy).powi(2);
        let s = zx + wx; // θ₀ = 0
        let gx = 2.0 * (zx - wx) * s + d2;
        let gy = 2.0 * (zy - wy) * s;
        let oracle = (0.5 * d2 * s + 4.0 * zx) * a + 4.0 * zx * lap + gx * ax + gy * ay;
        let g = SectorGeometry::with_defaults(alpha).unwrap();
        let v = kernel_b(p, q, &g, ModelAngle::unit(0.0)).unwrap();
        assert!(((v - oracle) / oracle).abs() < 1e-6, "{v} vs {oracle}");
    }

    #[test]
    fn both_forms_of_b_agree() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let g = SectorGeometry::with_defaults(2.2).unwrap();
        for _ in 0..20 {
            let p = pt(0.3 + 2.5 * next(), 2.2 * (0.1 + 0.8 * next()));
            let q = pt(0.3 + 2.5 * next(), 2.2 * (0.1 + 0.8 * next()));
            let th0 = 2.0 * PI * next();
            let a = kernel_b(p, q, &g, ModelAngle::unit(th0)).unwrap();
            let b = kernel_b_clean(p, q, &g, ModelAngle::unit(th0)).unwrap();
            let scale = a.abs().max(1e-3 * kernel_a(p, q, &g).unwrap().abs());
            assert!((a - b).abs() <= 1e-6 * scale.max(1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn polar_identities_hold() {
        let p = pt(1.0, 0.6);
        let r = verify_polarops(&[(p, p, 0.0)]);
        assert!(r.iter().all(|v| *v <= 1e-12), "{r:?}");
        // D²S is homogeneous of degree 3.
        let (p, q) = (pt(0.7, 0.3), pt(1.9, 1.0));
        let (d2, s) = geometry_factors(p, q, 0.4);
        let (d2b, sb) = geometry_factors(pt(1.4, 0.3), pt(3.8, 1.0), 0.4);
        assert!((d2b * sb - 8.0 * d2 * s).abs() < 1e-12);
    }
}
