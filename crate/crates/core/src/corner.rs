//! Corner coefficient of the `t^{1/2}` heat invariant: the Hadamard finite
//! part of the sector little trace of the convolution `a ∗ b`, and the
//! td-symbol Gaussian integral that fixes the diagonal subleading term.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::conformal::{reference_theta0, ModelParams};
use crate::error::{domain, Error, Result};
use crate::quadrature::{uniform_edges, GaussLegendre};
use crate::sector::{
    b_from_jet, jet_unchecked, value_unchecked, FrontFacePoint, KernelSource, ModelAngle, SectorGeometry,
};

/// Breakpoints in `u = √σ`, refined geometrically toward `σ = 1`.
const SIGMA_EDGES: [f64; 11] = [
    0.0, 0.25, 0.5, 0.75, 0.9, 0.97, 0.99, 0.997, 0.999, 0.9997, 1.0,
];

/// Admissible relative mismatch between fitted and geometric divergences.
const DIVERGENCE_TOLERANCE: f64 = 0.05;

/// Wall distances `Rθ` at which the outer angular panels break; the diagonal
/// density decays like `e^{-d²}` away from a wall.
const WALL_LAYER: [f64; 5] = [1.0, 2.0, 3.25, 4.75, 6.5];

/// Regularisation and quadrature parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePartConfig {
    /// Gauss–Legendre order per panel in `u = √σ`.
    pub sigma_nodes: usize,
    /// Order per unit panel of the outer radius `R`.
    pub radial_nodes: usize,
    /// Order per panel of the outer angle `θ`.
    pub angular_nodes: usize,
    /// Order per half-window of the inner variables `ρ` and `φ`.
    pub inner_nodes: usize,
    /// Cutoffs at which the truncated integral is recorded.
    pub rmax_grid: Vec<f64>,
    /// Index range `[start, end)` of `rmax_grid` used in the fit.
    pub fit_window: (usize, usize),
    /// Orientation `θ₀` of `∇F(0)`; `None` selects the reference corner
    /// (`κ₊ > 0`, `κ₋ = 0`), see [`reference_theta0`].
    pub theta0: Option<f64>,
    pub source: KernelSource,
    pub kernel_tol: f64,
    /// Inner window half-width in units of the Gaussian length scale.
    pub inner_width: f64,
    /// Maximum admissible relative fit residual.
    pub residual_threshold: f64,
}

impl FinitePartConfig {
    pub fn fast() -> Self {
        Self {
            sigma_nodes: 12,
            radial_nodes: 6,
            angular_nodes: 6,
            inner_nodes: 10,
            rmax_grid: (3..=10).map(f64::from).collect(),
            fit_window: (1, 8),
            theta0: None,
            source: KernelSource::Series,
            kernel_tol: 1e-10,
            inner_width: 8.0,
            residual_threshold: 1e-2,
        }
    }

    pub fn accurate() -> Self {
        Self {
            sigma_nodes: 16,
            radial_nodes: 8,
            angular_nodes: 8,
            inner_nodes: 12,
            rmax_grid: (3..=14).map(f64::from).collect(),
            fit_window: (1, 12),
            ..Self::fast()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.sigma_nodes, self.radial_nodes, self.angular_nodes, self.inner_nodes]
            .iter()
            .any(|&n| n < 2)
        {
            return Err(domain("quadrature orders must be at least 2"));
        }
        let g = &self.rmax_grid;
        if g.len() < 4 || g[0] <= 0.0 || g.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("rmax_grid must be positive, strictly increasing, >= 4 entries"));
        }
        let (s, e) = self.fit_window;
        if e > g.len() || s >= e || e - s < 3 {
            return Err(domain("fit_window must select at least 3 grid entries"));
        }
        if !(self.inner_width > 0.0) || !(self.residual_threshold > 0.0) {
            return Err(domain("inner_width and residual_threshold must be positive"));
        }
        Ok(())
    }

    /// `θ₀` in effect at angle `α`.
    pub fn orientation(&self, alpha: f64) -> f64 {
        self.theta0.unwrap_or_else(|| reference_theta0(alpha))
    }

    fn geometry(&self, alpha: f64) -> Result<SectorGeometry> {
        SectorGeometry::new(alpha, 200, self.kernel_tol)?.with_source(self.source)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinitePartResult {
    /// The finite part: the constant term of the cutoff model.
    pub value: f64,
    /// Coefficient of `Rmax` removed before the fit.
    pub slope: f64,
    /// Coefficient of `Rmax²` removed before the fit.
    pub quadratic: f64,
    /// RMS fit residual relative to `|value|`.
    pub residual: f64,
    /// Largest relative deviation of the freely fitted divergent
    /// coefficients from `slope` and `quadratic`.
    pub divergence_mismatch: f64,
    /// Largest shift of `value` under a shortened fit window or an extra
    /// `1/Rmax³` tail term.
    pub error_bar: f64,
    pub per_cutoff: Vec<(f64, f64)>,
    /// True when the residual exceeded the configured threshold.
    pub flagged: bool,
}

struct Nodes {
    sigma: Vec<(f64, f64)>,
    inner_r: GaussLegendre,
    inner_t: GaussLegendre,
    outer_r: GaussLegendre,
    outer_t: GaussLegendre,
}

impl Nodes {
    fn new(cfg: &FinitePartConfig) -> Self {
        let gs = GaussLegendre::new(cfg.sigma_nodes);
        Self {
            sigma: gs.composite(&SIGMA_EDGES),
            inner_r: GaussLegendre::new(cfg.inner_nodes),
            inner_t: GaussLegendre::new(cfg.inner_nodes),
            outer_r: GaussLegendre::new(cfg.radial_nodes),
            outer_t: GaussLegendre::new(cfg.angular_nodes),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0 * PI) {
        return Err(domain(format!("corner angle must lie in (0, 2π), got {alpha}")));
    }
    if (alpha - PI).abs() < 1e-9 {
        return Err(Error::ModelBreakdown(alpha));
    }
    Ok(())
}

/// Inner `(σ, ρ, φ)` convolution integral at the diagonal point `(R, θ)`,
/// including the overall minus sign of the trace formula.
pub fn little_trace_integrand(
    r: f64,
    theta: f64,
    alpha: f64,
    angle: ModelAngle,
    cfg: &FinitePartConfig,
) -> Result<f64> {
    check_alpha(alpha)?;
    cfg.validate()?;
    check_point(r, theta, alpha)?;
    let geom = cfg.geometry(alpha)?;
    little_trace(r, theta, angle.theta0, &geom, cfg, &Nodes::new(cfg))
}

/// Diagonal measure term `4R cos(θ+θ₀) a(R,θ;R,θ)`: the first-order change of
/// the area element `F dx` paired with the flat kernel.
pub fn measure_term(r: f64, theta: f64, alpha: f64, angle: ModelAngle, cfg: &FinitePartConfig) -> Result<f64> {
    check_alpha(alpha)?;
    check_point(r, theta, alpha)?;
    let geom = cfg.geometry(alpha)?;
    let p = FrontFacePoint { r, theta };
    Ok(4.0 * r * (theta + angle.theta0).cos() * value_unchecked(p, p, &geom)?)
}

fn check_point(r: f64, theta: f64, alpha: f64) -> Result<()> {
    if !(r > 0.0) || !(theta > 0.0 && theta < alpha) {
        return Err(domain(format!("little trace needs R > 0 and 0 < θ < α (R={r}, θ={theta})")));
    }
    Ok(())
}

fn little_trace(
    r: f64,
    theta: f64,
    theta0: f64,
    geom: &SectorGeometry,
    cfg: &FinitePartConfig,
    nodes: &Nodes,
) -> Result<f64> {
    let alpha = geom.alpha();
    let mut total = 0.0;
    for &(u, wu) in &nodes.sigma {
        let s = u * u;
        let one_minus = 1.0 - s;
        let k = 1.0 / one_minus.sqrt();
        let centre = r / u;
        let width = cfg.inner_width * std::f64::consts::SQRT_2 * (one_minus / s).sqrt().min(1.0);
        let rho_lo = (centre - width).max(0.0);
        let rho_hi = centre + width;
        let (phi_lo, phi_hi) = if width < centre {
            let half = (width / centre).asin();
            ((theta - half).max(0.0), (theta + half).min(alpha))
        } else {
            (0.0, alpha)
        };
        let rho_mid = centre.clamp(rho_lo, rho_hi);
        let phi_mid = theta.clamp(phi_lo, phi_hi);
        let p_outer = FrontFacePoint { r: r * k, theta };
        let q_far = FrontFacePoint { r: centre, theta };
        let mut inner = 0.0;
        for (rlo, rhi) in [(rho_lo, rho_mid), (rho_mid, rho_hi)] {
            if rhi <= rlo {
                continue;
            }
            for (rho, wr) in nodes.inner_r.mapped(rlo, rhi) {
                let mut ring = 0.0;
                for (plo, phi_hi2) in [(phi_lo, phi_mid), (phi_mid, phi_hi)] {
                    if phi_hi2 <= plo {
                        continue;
                    }
                    for (phi, wp) in nodes.inner_t.mapped(plo, phi_hi2) {
                        let a = value_unchecked(p_outer, FrontFacePoint { r: u * rho * k, theta: phi }, geom)?;
                        if a == 0.0 {
                            continue;
                        }
                        let zeta = FrontFacePoint { r: rho, theta: phi };
                        let jet = jet_unchecked(zeta, q_far, geom)?;
                        ring += wp * a * b_from_jet(zeta, q_far, theta0, &jet);
                    }
                }
                inner += wr * rho * ring;
            }
        }
        // dσ σ^{-1/2} = 2 du
        total += 2.0 * wu * inner / one_minus;
    }
    Ok(-total)
}

/// Full diagonal density minus the flat interior part `R cos(θ+θ₀)/π` of the
/// measure term, which is integrated in closed form.
fn reduced_density(
    r: f64,
    theta: f64,
    theta0: f64,
    geom: &SectorGeometry,
    cfg: &FinitePartConfig,
    nodes: &Nodes,
) -> Result<f64> {
    let p = FrontFacePoint { r, theta };
    let diag = value_unchecked(p, p, geom)? - 0.25 / PI;
    Ok(little_trace(r, theta, theta0, geom, cfg, nodes)? + 4.0 * r * (theta + theta0).cos() * diag)
}

/// `∫_0^{Rmax} ∫_0^α R cos(θ+θ₀)/π · R dθ dR`.
pub fn interior_cubic(rmax: f64, alpha: f64, theta0: f64) -> f64 {
    rmax.powi(3) / (3.0 * PI) * ((alpha + theta0).sin() - theta0.sin())
}

/// `θ` panels for the outer integral at radius `R`: breakpoints at fixed
/// distances from each wall, so the edge layers are resolved uniformly in `R`.
fn theta_edges(r: f64, alpha: f64) -> Vec<f64> {
    let half = 0.5 * alpha;
    let mut e = vec![0.0, half, alpha];
    for d in WALL_LAYER {
        let t = d / r;
        if t < half * 0.95 {
            e.push(t);
            e.push(alpha - t);
        }
    }
    e.sort_by(f64::total_cmp);
    e
}

fn radial_profile(
    r: f64,
    theta0: f64,
    geom: &SectorGeometry,
    cfg: &FinitePartConfig,
    nodes: &Nodes,
) -> Result<f64> {
    let alpha = geom.alpha();
    let mut sum = 0.0;
    for (t, w) in nodes.outer_t.composite(&theta_edges(r, alpha)) {
        sum += w * reduced_density(r, t, theta0, geom, cfg, nodes)?;
    }
    Ok(r * sum)
}

/// `R ∫_0^α (little trace)(R, θ) dθ` with the flat interior part of the
/// measure term removed: the integrand of the outer radial integral.
pub fn radial_trace_profile(r: f64, alpha: f64, angle: ModelAngle, cfg: &FinitePartConfig) -> Result<f64> {
    check_alpha(alpha)?;
    cfg.validate()?;
    if !(r > 0.0) {
        return Err(domain(format!("R must be positive, got {r}")));
    }
    let geom = cfg.geometry(alpha)?;
    radial_profile(r, angle.theta0, &geom, cfg, &Nodes::new(cfg))
}

/// Outer `R` panels: unit panels up to the last cutoff, with every cutoff
/// on a panel edge.
fn radial_edges(grid: &[f64]) -> Vec<f64> {
    let mut edges = vec![0.0];
    for &g in grid {
        let last = *edges.last().unwrap();
        let n = ((g - last).ceil() as usize).max(1);
        edges.extend(uniform_edges(last, g, n).into_iter().skip(1));
    }
    edges
}

/// Truncated integrals of the reduced profile at every cutoff of `grid`.
fn cutoff_integrals(alpha: f64, theta0: f64, grid: &[f64], cfg: &FinitePartConfig) -> Result<Vec<(f64, f64)>> {
    let geom = cfg.geometry(alpha)?;
    let nodes = Nodes::new(cfg);
    let edges = radial_edges(grid);
    let panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let tasks: Vec<(usize, f64, f64)> = panels
        .iter()
        .enumerate()
        .flat_map(|(i, &(a, b))| nodes.outer_r.mapped(a, b).map(move |(x, w)| (i, x, w)).collect::<Vec<_>>())
        .collect();
    let values: Vec<Result<f64>> = tasks
        .par_iter()
        .map(|&(_, x, w)| radial_profile(x, theta0, &geom, cfg, &nodes).map(|g| w * g))
        .collect();
    let mut panel_sums = vec![0.0; panels.len()];
    for (&(i, _, _), v) in tasks.iter().zip(values) {
        panel_sums[i] += v?;
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut next = 0;
    for (i, &(_, b)) in panels.iter().enumerate() {
        acc += panel_sums[i];
        if next < grid.len() && (b - grid[next]).abs() < 1e-12 {
            out.push((b, acc));
            next += 1;
        }
    }
    Ok(out)
}

/// `∫_0^{Rmax} ∫_0^α (little trace) R dθ dR`, measure term included.
pub fn partial_trace_integral(rmax: f64, alpha: f64, angle: ModelAngle, cfg: &FinitePartConfig) -> Result<f64> {
    check_alpha(alpha)?;
    cfg.validate()?;
    if !(rmax >= 0.0) {
        return Err(domain(format!("Rmax must be nonnegative, got {rmax}")));
    }
    if rmax == 0.0 {
        return Ok(0.0);
    }
    let raw = cutoff_integrals(alpha, angle.theta0, &[rmax], cfg)?;
    Ok(raw[0].1 + interior_cubic(rmax, alpha, angle.theta0))
}

/// Divergent part of the truncated integral fixed by the geometry of the
/// edges: `(A, Q)` in `A·Rmax + Q·Rmax²` for `r₀ = 1`.
///
/// `Q` is the first-order change of the length of the two edges,
/// `−(cos θ₀ + cos(θ₀+α))/(8√π)`, and `A` their curvature term
/// `(κ₊ + κ₋)/(12π)` with `κ₊ = 2 sin θ₀`, `κ₋ = −2 sin(θ₀+α)`.
pub fn edge_divergence(alpha: f64, theta0: f64) -> (f64, f64) {
    let a = (theta0.sin() - (theta0 + alpha).sin()) / (6.0 * PI);
    let q = -(theta0.cos() + (theta0 + alpha).cos()) / (8.0 * PI.sqrt());
    (a, q)
}

/// Remainder model after the divergences are removed: `1, 1/Rmax, 1/Rmax²`.
fn basis(rmax: f64) -> [f64; 3] {
    [1.0, 1.0 / rmax, 1.0 / (rmax * rmax)]
}

struct Fit {
    coef: Vec<f64>,
    rms: f64,
}

fn least_squares<const P: usize>(points: &[(f64, f64)], f: impl Fn(f64) -> [f64; P]) -> Result<Fit> {
    let n = points.len();
    let p = P.min(n);
    let a = DMatrix::from_fn(n, p, |i, j| f(points[i].0)[j]);
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&y, 1e-14)
        .map_err(|e| domain(format!("finite-part fit failed: {e}")))?;
    let r = &a * &coef - &y;
    let rms = (r.norm_squared() / n as f64).sqrt();
    Ok(Fit { coef: coef.iter().copied().collect(), rms })
}

fn fit_cutoffs(points: &[(f64, f64)]) -> Result<Fit> {
    least_squares(points, basis)
}

/// `c_{1/2}(α)` as the Hadamard finite part of the truncated sector trace.
///
/// The closed-form interior cubic and the edge divergences
/// ([`edge_divergence`]) are removed from the truncated integral, and the
/// remainder is modelled as `B + E/Rmax + G/Rmax²`; `B` is the finite part.
pub fn c12(alpha: f64, cfg: &FinitePartConfig) -> Result<FinitePartResult> {
    check_alpha(alpha)?;
    cfg.validate()?;
    let theta0 = cfg.orientation(alpha);
    let per_cutoff = cutoff_integrals(alpha, theta0, &cfg.rmax_grid, cfg)?
        .into_iter()
        .map(|(r, v)| (r, v + interior_cubic(r, alpha, theta0)))
        .collect();
    finite_part_from_cutoffs(per_cutoff, alpha, cfg)
}

/// Finite part and diagnostics from precomputed `(Rmax, integral)` pairs.
pub fn finite_part_from_cutoffs(
    per_cutoff: Vec<(f64, f64)>,
    alpha: f64,
    cfg: &FinitePartConfig,
) -> Result<FinitePartResult> {
    check_alpha(alpha)?;
    cfg.validate()?;
    if per_cutoff.len() != cfg.rmax_grid.len() {
        return Err(domain("one integral per grid cutoff is required"));
    }
    let theta0 = cfg.orientation(alpha);
    let (slope, quadratic) = edge_divergence(alpha, theta0);
    let cubic_free: Vec<(f64, f64)> = per_cutoff
        .iter()
        .map(|&(r, v)| (r, v - interior_cubic(r, alpha, theta0)))
        .collect();
    let reduced: Vec<(f64, f64)> = cubic_free
        .iter()
        .map(|&(r, v)| (r, v - slope * r - quadratic * r * r))
        .collect();
    let (s, e) = cfg.fit_window;
    let fit = fit_cutoffs(&reduced[s..e])?;
    let value = fit.coef[0];
    let mut spread = 0.0f64;
    for (ws, we) in [(s + 1, e), (s, e - 1)] {
        if we - ws >= 4 {
            let alt = fit_cutoffs(&reduced[ws..we])?;
            spread = spread.max((alt.coef[0] - value).abs());
        }
    }
    // Truncation of the tail model: one more inverse power.
    if e - s >= 6 {
        let wider = least_squares(&reduced[s..e], |r| [1.0, 1.0 / r, 1.0 / (r * r), 1.0 / (r * r * r)])?;
        spread = spread.max((wider.coef[0] - value).abs());
    }
    // Unconstrained fit of the divergent coefficients as a consistency check.
    let free = least_squares(&cubic_free[s..e], |r| [1.0, r, r * r, 1.0 / r])?;
    let divergence_mismatch = if e - s >= 5 {
        ((free.coef[1] - slope).abs() / slope.abs().max(1e-3))
            .max((free.coef[2] - quadratic).abs() / quadratic.abs().max(1e-3))
    } else {
        0.0
    };
    let residual = fit.rms / value.abs().max(f64::MIN_POSITIVE);
    let flagged = residual > cfg.residual_threshold || divergence_mismatch > DIVERGENCE_TOLERANCE;
    if flagged {
        return Err(Error::Regularization {
            value,
            residual: residual.max(divergence_mismatch),
            threshold: cfg.residual_threshold,
        });
    }
    Ok(FinitePartResult {
        value,
        slope,
        quadratic,
        residual,
        divergence_mismatch,
        error_bar: spread,
        per_cutoff,
        flagged,
    })
}

/// Subleading td-symbol term at `(X, y)`: the `(σ, Z̃)` Gaussian integral
///
/// `−1/(16π²) ∫_0^1 (1−σ)^{-1} σ^{-1/2} ∫ (Z̃·V)(cZ̃² − 1)
///   exp(−cZ̃² − c(X − √σ Z̃)²/(1−σ)) dZ̃ dσ`,
///
/// with `c = F(y)/4` and `V = ∇F(y)`, by tensor Gauss–Legendre quadrature,
/// returned with the closed form `−X²(X·∇F) e^{−F X²/4} / (32π)`.
pub fn verify_td_subleading(model: ModelParams, x: [f64; 2], y: [f64; 2]) -> Result<(f64, f64)> {
    if !x.iter().chain(y.iter()).all(|v| v.is_finite()) {
        return Err(domain("td-symbol arguments must be finite"));
    }
    let f = model.factor_at(y);
    if !(f > 0.0) {
        return Err(domain(format!("conformal factor vanishes at y = {y:?}")));
    }
    let c = 0.25 * f;
    let v = model.factor_gradient(y);
    let x2 = x[0] * x[0] + x[1] * x[1];
    let xv = x[0] * v[0] + x[1] * v[1];
    let closed = -x2 * xv * (-c * x2).exp() / (32.0 * PI);
    if x2 == 0.0 {
        // The Z̃-integrand is odd at X = 0.
        return Ok((0.0, closed));
    }

    let gu = GaussLegendre::new(16);
    let gz = GaussLegendre::new(24);
    let mut total = 0.0;
    // σ = u², dσ σ^{-1/2} = 2 du
    for (u, wu) in gu.mapped(0.0, 1.0) {
        let s = u * u;
        let one_minus = 1.0 - s;
        let half = 9.0 * (one_minus / (2.0 * c)).sqrt();
        let centre = [u * x[0], u * x[1]];
        let mut inner = 0.0;
        for (z1, w1) in gz.composite(&[centre[0] - half, centre[0], centre[0] + half]) {
            for (z2, w2) in gz.composite(&[centre[1] - half, centre[1], centre[1] + half]) {
                let zz = z1 * z1 + z2 * z2;
                let (d1, d2) = (x[0] - u * z1, x[1] - u * z2);
                let e = (-c * zz - c * (d1 * d1 + d2 * d2) / one_minus).exp();
                inner += w1 * w2 * (z1 * v[0] + z2 * v[1]) * (c * zz - 1.0) * e;
            }
        }
        total += 2.0 * wu * inner / one_minus;
    }
    Ok((-total / (16.0 * PI * PI), closed))
}
