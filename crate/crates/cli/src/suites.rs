//! Verification suites. Each returns named checks with their tolerances; the
//! `verify` command and the acceptance run both use them.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sectorheat::conformal::{c12_right_angle, ModelParams};
use sectorheat::corner::{c12, verify_td_subleading, FinitePartConfig, FinitePartResult};
use sectorheat::error::Result;
use sectorheat::halfdisk_zeta::{
    check_difference_lemma, difference_ratios, hhat_constant_from_zeta, hhat_expansion, mcmahon_envelope,
    residue_check, zeta_residue_check,
};
use sectorheat::sector::{
    conic_scaling_residual, kernel_a, kernel_a_images, polar_op_residuals, FrontFacePoint, KernelSource,
    SectorGeometry,
};
use sectorheat::spectra::{fit_domain, DomainSpec, ExpansionFit};

use crate::args::Profile;

pub const DEFAULT_SEED: u64 = 0x5EC7_0A11;

/// Tolerance applied to the fitted spectral traces.
pub const TRACE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `|value − target| <= tolerance`.
    Abs,
    /// `|value − target| <= tolerance·|target|`.
    Rel,
    /// `value <= tolerance`.
    AtMost,
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Abs => "abs",
            Mode::Rel => "rel",
            Mode::AtMost => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub mode: Mode,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, target: f64, tolerance: f64, mode: Mode) -> Self {
        let pass = value.is_finite()
            && match mode {
                Mode::Abs => (value - target).abs() <= tolerance,
                Mode::Rel => (value - target).abs() <= tolerance * target.abs(),
                Mode::AtMost => value <= tolerance,
            };
        Self { name: name.into(), value, target, tolerance, mode, pass }
    }

    pub fn abs(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::new(name, value, target, tolerance, Mode::Abs)
    }

    pub fn rel(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::new(name, value, target, tolerance, Mode::Rel)
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, 0.0, limit, Mode::AtMost)
    }
}

pub fn finite_part_config(profile: Profile, source: KernelSource) -> FinitePartConfig {
    let mut cfg = match profile {
        Profile::Fast => FinitePartConfig::fast(),
        Profile::Accurate => FinitePartConfig::accurate(),
    };
    cfg.source = source;
    cfg
}

fn point(rng: &mut ChaCha8Rng, alpha: f64, r: (f64, f64), frac: (f64, f64)) -> FrontFacePoint {
    FrontFacePoint { r: rng.gen_range(r.0..r.1), theta: alpha * rng.gen_range(frac.0..frac.1) }
}

/// The four polar-operator identities at 100 random samples.
pub fn polarops(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 4];
    for _ in 0..100 {
        let alpha = rng.gen_range(0.3..2.0 * PI - 0.3);
        let p = point(&mut rng, alpha, (0.05, 5.0), (0.0, 1.0));
        let q = point(&mut rng, alpha, (0.05, 5.0), (0.0, 1.0));
        let theta0 = rng.gen_range(-PI..PI);
        for (w, r) in worst.iter_mut().zip(polar_op_residuals(p, q, theta0)) {
            *w = w.max(r.abs());
        }
    }
    let names = ["polarops.lap_D2", "polarops.lap_S", "polarops.lap_D2S", "polarops.euler_D2S"];
    names.iter().zip(worst).map(|(n, w)| Check::at_most(*n, w, 1e-10)).collect()
}

/// Conic-scaling identity of the series kernel at 50 random interior samples.
pub fn conic_scaling(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let alpha = rng.gen_range(0.4..5.5);
        let g = SectorGeometry::with_defaults(alpha)?;
        let p = point(&mut rng, alpha, (0.3, 4.0), (0.1, 0.9));
        let q = point(&mut rng, alpha, (0.3, 4.0), (0.05, 0.95));
        worst = worst.max(conic_scaling_residual(p, q, &g)?.abs());
    }
    Ok(vec![Check::at_most("conic_scaling", worst, 1e-6)])
}

/// Series kernel against the image sum on a 5⁴ grid, `R, R' <= 4`.
pub fn kernel_oracle() -> Result<Vec<Check>> {
    let rs = [0.8, 1.6, 2.4, 3.2, 4.0];
    let mut out = Vec::new();
    for m in [2u32, 3, 4] {
        let alpha = PI / m as f64;
        let g = SectorGeometry::with_defaults(alpha)?;
        let ths: Vec<f64> = (0..5).map(|i| alpha * (i as f64 + 0.5) / 5.0).collect();
        let mut worst = 0.0f64;
        for &r in &rs {
            for &rp in &rs {
                for &t in &ths {
                    for &tp in &ths {
                        let p = FrontFacePoint::new(r, t)?;
                        let q = FrontFacePoint::new(rp, tp)?;
                        let b = kernel_a_images(p, q, alpha)?;
                        worst = worst.max((kernel_a(p, q, &g)? - b).abs() / b.abs());
                    }
                }
            }
        }
        out.push(Check::at_most(format!("kernel_oracle.pi_over_{m}"), worst, 1e-8));
    }
    Ok(out)
}

/// Quadrature of the td-symbol integral against its closed form at three
/// generic points and the two trivial zeros (`X = 0`, `X ⊥ ∇F`).
pub fn td_subleading() -> Result<Vec<Check>> {
    let m = ModelParams::from_z0(0.15, 0.25);
    let y0 = [0.1, 0.2];
    let v = m.factor_gradient(y0);
    let perp = [-0.9 * v[1], 0.9 * v[0]];
    let cases: [(&str, [f64; 2], [f64; 2]); 5] = [
        ("td.generic_1", [0.8, -0.3], [0.2, 0.1]),
        ("td.generic_2", [1.5, 0.7], [0.05, 0.3]),
        ("td.generic_3", [-0.4, 1.1], [0.3, -0.2]),
        ("td.zero_x", [0.0, 0.0], [0.3, 0.1]),
        ("td.zero_perpendicular", perp, y0),
    ];
    let mut out = Vec::new();
    for (name, x, y) in cases {
        let (num, closed) = verify_td_subleading(m, x, y)?;
        // Scale of the closed form with X·∇F replaced by |X||∇F|.
        let g = m.factor_gradient(y);
        let x2 = x[0] * x[0] + x[1] * x[1];
        let scale = x2 * x2.sqrt() * g[0].hypot(g[1]) * (-0.25 * m.factor_at(y) * x2).exp() / (32.0 * PI);
        let denom = closed.abs().max(scale);
        let diff = if denom > 0.0 { (num - closed).abs() / denom } else { (num - closed).abs() };
        out.push(Check::at_most(name, diff, 1e-4));
    }
    Ok(out)
}

/// `c½(π/2)` at the reference orientation with the image kernel.
pub fn c12_right(profile: Profile) -> Result<FinitePartResult> {
    c12(PI / 2.0, &finite_part_config(profile, KernelSource::Images))
}

/// `2×` the per-corner value in the half-disk `t^{1/2}` coefficient: the
/// coefficient minus the smooth-boundary share `∫κ²/(256√π) = √π/256`.
pub fn c12_from_half_disk(a_half: f64) -> f64 {
    a_half - PI.sqrt() / 256.0
}

/// Quadrature value inside ±3% of the closed form, and pairwise 4%
/// agreement of quadrature, half-disk fit and closed form.
pub fn pi2_checks(quadrature: f64, half_disk_a_half: f64) -> Vec<Check> {
    let closed = c12_right_angle();
    let spectral = c12_from_half_disk(half_disk_a_half);
    vec![
        Check::abs("pi2.quadrature_window", quadrature, closed, 0.03 * closed),
        Check::rel("pi2.quadrature_vs_spectral", quadrature, spectral, 0.04),
        Check::rel("pi2.quadrature_vs_closed", quadrature, closed, 0.04),
        Check::rel("pi2.spectral_vs_closed", spectral, closed, 0.04),
    ]
}

pub fn pi2(profile: Profile) -> Result<Vec<Check>> {
    let q = c12_right(profile)?.value;
    let fit = fit_domain(DomainSpec::HalfDisk { radius: 1.0 }, TRACE_EPS)?;
    Ok(pi2_checks(q, coefficient(&fit, 0.5)))
}

fn coefficient(fit: &ExpansionFit, p: f64) -> f64 {
    fit.coefficient(p).unwrap_or(f64::NAN)
}

pub fn half_disk_fit_checks(fit: &ExpansionFit) -> Vec<Check> {
    let sp = PI.sqrt();
    vec![
        Check::rel("half_disk.a_-1", coefficient(fit, -1.0), 0.125, 1e-3),
        Check::rel("half_disk.a_-1/2", coefficient(fit, -0.5), -(sp / 8.0 + 1.0 / (4.0 * sp)), 1e-3),
        Check::rel("half_disk.a_0", coefficient(fit, 0.0), 5.0 / 24.0, 5e-3),
        Check::rel("half_disk.a_1/2", coefficient(fit, 0.5), sp / 256.0 + c12_right_angle(), 1e-2),
    ]
}

pub fn disk_fit_checks(fit: &ExpansionFit) -> Vec<Check> {
    vec![
        Check::rel("disk.a_1/2", coefficient(fit, 0.5), PI.sqrt() / 128.0, 1e-2),
        Check::rel("disk.a_0", coefficient(fit, 0.0), 1.0 / 6.0, 5e-3),
    ]
}

pub fn square_fit_checks(fit: &ExpansionFit) -> Vec<Check> {
    vec![
        Check::at_most("square.|a_1/2|", coefficient(fit, 0.5).abs(), 1e-3),
        Check::rel("square.a_0", coefficient(fit, 0.0), 0.25, 5e-3),
    ]
}

pub fn fits() -> Result<Vec<Check>> {
    let mut out = half_disk_fit_checks(&fit_domain(DomainSpec::HalfDisk { radius: 1.0 }, TRACE_EPS)?);
    out.extend(disk_fit_checks(&fit_domain(DomainSpec::Disk { radius: 1.0 }, TRACE_EPS)?));
    out.extend(square_fit_checks(&fit_domain(DomainSpec::Rectangle { a: 1.0, b: 1.0 }, TRACE_EPS)?));
    Ok(out)
}

/// Residues, the `Ĥ` expansion and the difference lemma.
pub fn zeta() -> Result<Vec<Check>> {
    let sp = PI.sqrt();
    let small: Vec<f64> = (0..30).map(|i| 1e-4 * 100f64.powf(i as f64 / 29.0)).collect();
    let (a, c, h) = hhat_expansion(&small)?;
    let decades: Vec<f64> = (0..21).map(|i| 1e-3 * 100f64.powf(i as f64 / 20.0)).collect();
    let ratios = difference_ratios(&decades, 1e-15)?;
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    Ok(vec![
        Check::abs("zeta.residue", residue_check(1e-4)?, 0.5 / sp, 1e-6),
        Check::abs("zeta.hurwitz_residue", zeta_residue_check(1e-4)?, 0.5, 1e-8),
        Check::abs("zeta.hhat_constant_from_zeta", hhat_constant_from_zeta()?, -0.25, 1e-12),
        Check::rel("zeta.hhat_leading", a, 0.5 / sp, 1e-3),
        Check::abs("zeta.hhat_constant_fit", c, -0.25, 1e-4),
        Check::rel("zeta.htilde_half_coefficient", h, -1.0 / (8.0 * sp), 5e-3),
        Check::at_most("zeta.difference_ratio_max", check_difference_lemma(&decades)?, 1.0),
        Check::at_most("zeta.difference_ratio_spread", hi / lo, 3.0),
    ])
}

pub fn mcmahon() -> Result<Vec<Check>> {
    Ok(vec![Check::at_most("mcmahon.envelope", mcmahon_envelope(5, 50)?, 0.01)])
}
