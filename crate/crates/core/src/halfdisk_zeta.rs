//! The half-disk comparison series
//!
//! - `H(t)  = Σ e^{−t j_{0,k}²}`
//! - `H̃(t) = Σ e^{−t((k−¼)²π² + ¼)} = e^{−t/4} Ĥ(t)`
//! - `Ĥ(t)  = Σ e^{−t(k−¼)²π²}`
//!
//! and the zeta-function route to their short-time expansions:
//! `Ĥ(t) = t^{−½}/(2√π) − ¼ + O(t)` from the poles of
//! `Γ(s) π^{−2s} ζ(2s, ¾)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::specfun::{bessel_j_zero, bessel_j_zeros_below, hurwitz_zeta, log_gamma, Accuracy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    H,
    Htilde,
    Hhat,
}

/// `β_k = (k − ¼)π`.
fn beta(k: usize) -> f64 {
    (k as f64 - 0.25) * PI
}

/// Largest `x` needed so that `Σ_{β > x} e^{−tβ²} <= eps`, using
/// `Σ_{β_k > x} e^{−tβ_k²} <= e^{−tx²}(1 + 1/(2πtx))`.
fn sum_limit(t: f64, eps: f64) -> f64 {
    let mut x = ((1.0 / eps).ln().max(1.0) / t).sqrt();
    while (-t * x * x).exp() * (1.0 + 1.0 / (2.0 * PI * t * x)) > eps {
        x *= 1.1;
    }
    x
}

fn hhat_sum(t: f64, xmax: f64) -> f64 {
    let mut s = 0.0;
    let mut k = 1;
    loop {
        let b = beta(k);
        if b > xmax {
            break;
        }
        s += (-t * b * b).exp();
        k += 1;
    }
    s
}

fn check_t(t: f64, eps: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() || !(eps > 0.0) {
        return Err(domain(format!("series need t > 0 and eps > 0 (t={t}, eps={eps})")));
    }
    Ok(())
}

/// Series value with omitted tail below `eps`.
pub fn series_value(kind: SeriesKind, t: f64, eps: f64) -> Result<f64> {
    check_t(t, eps)?;
    let xmax = sum_limit(t, eps);
    match kind {
        SeriesKind::Hhat => Ok(hhat_sum(t, xmax)),
        SeriesKind::Htilde => Ok((-0.25 * t).exp() * hhat_sum(t, xmax)),
        SeriesKind::H => {
            // j_{0,k} > β_k, so the same limit bounds the tail.
            let zeros = bessel_j_zeros_below(0.0, xmax)?;
            Ok(zeros.iter().map(|j| (-t * j * j).exp()).sum())
        }
    }
}

/// `|H(t) − H̃(t)| / t` at every grid point.
pub fn difference_ratios(t_grid: &[f64], eps: f64) -> Result<Vec<f64>> {
    t_grid
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t <= 0.5) {
                return Err(domain(format!("difference lemma grid must lie in (0, 0.5], got {t}")));
            }
            let h = series_value(SeriesKind::H, t, eps)?;
            let ht = series_value(SeriesKind::Htilde, t, eps)?;
            Ok((h - ht).abs() / t)
        })
        .collect()
}

/// `max |H − H̃| / t` over the grid.
pub fn check_difference_lemma(t_grid: &[f64]) -> Result<f64> {
    if t_grid.is_empty() {
        return Err(domain("empty grid"));
    }
    Ok(difference_ratios(t_grid, 1e-15)?.into_iter().fold(0.0, f64::max))
}

/// Fit `Ĥ(t) ≈ a t^{−½} + c + d t` on the grid; returns `(a, c, −a/4)`, the
/// last being the `t^{½}` coefficient of `H̃ = e^{−t/4} Ĥ`.
pub fn hhat_expansion(t_grid: &[f64]) -> Result<(f64, f64, f64)> {
    let tmin = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let tmax = t_grid.iter().copied().fold(0.0, f64::max);
    if t_grid.len() < 6 || !(tmin > 0.0) || tmax > 0.2 || tmax / tmin < 100.0 {
        return Err(domain("grid needs >= 6 points spanning two decades in (0, 0.2]"));
    }
    let n = t_grid.len();
    // Rows scaled by √t so every column is O(1) at small t.
    let a = DMatrix::from_fn(n, 3, |i, j| {
        let t = t_grid[i];
        [1.0, t.sqrt(), t * t.sqrt()][j]
    });
    let y = t_grid
        .iter()
        .map(|&t| series_value(SeriesKind::Hhat, t, 1e-16).map(|v| v * t.sqrt()))
        .collect::<Result<Vec<f64>>>()?;
    let svd = a.svd(true, true);
    let s = &svd.singular_values;
    let cond = s.max() / s.min();
    if !(cond < 1e10) {
        return Err(Error::Conditioning(cond));
    }
    let c = svd
        .solve(&DVector::from_vec(y), 0.0)
        .map_err(|e| domain(format!("Ĥ fit failed: {e}")))?;
    Ok((c[0], c[1], -c[0] / 4.0))
}

/// The constant of `Ĥ` from the zeta route: `ζ(0, ¾) = ½ − ¾`.
pub fn hhat_constant_from_zeta() -> Result<f64> {
    hurwitz_zeta(0.0, 0.75, Accuracy::default())
}

/// `Γ(s) π^{−2s} ζ(2s, ¾)`, the Mellin transform of `Ĥ`.
fn hhat_mellin(s: f64) -> Result<f64> {
    Ok(log_gamma(s)?.exp() * PI.powf(-2.0 * s) * hurwitz_zeta(2.0 * s, 0.75, Accuracy::default())?)
}

fn residue_at_half<F: Fn(f64) -> Result<f64>>(f: F, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1e-3) {
        return Err(domain(format!("delta must lie in (0, 1e-3], got {delta}")));
    }
    let sym = |d: f64| -> Result<f64> { Ok(0.5 * (d * f(0.5 + d)? - d * f(0.5 - d)?)) };
    let (r1, r2) = (sym(delta)?, sym(0.5 * delta)?);
    Ok((4.0 * r2 - r1) / 3.0)
}

/// Residue of `Γ(s) π^{−2s} ζ(2s, ¾)` at `s = ½` from symmetric evaluations
/// at `½ ± δ` and `½ ± δ/2`, Richardson-extrapolated.
pub fn residue_check(delta: f64) -> Result<f64> {
    residue_at_half(hhat_mellin, delta)
}

/// Residue of `ζ(2s, ¾)` alone at `s = ½` (expected `½`).
pub fn zeta_residue_check(delta: f64) -> Result<f64> {
    residue_at_half(|s| hurwitz_zeta(2.0 * s, 0.75, Accuracy::default()), delta)
}

/// One-sided estimates `±δ·f(½ ± δ)` for the Mellin transform.
pub fn one_sided_residues(delta: f64) -> Result<(f64, f64)> {
    Ok((delta * hhat_mellin(0.5 + delta)?, -delta * hhat_mellin(0.5 - delta)?))
}

/// `max_k |j_{0,k} − (β_k + 1/(8β_k))| · k³` over `kmin..=kmax`.
pub fn mcmahon_envelope(kmin: usize, kmax: usize) -> Result<f64> {
    if kmin == 0 || kmax < kmin {
        return Err(domain("need 1 <= kmin <= kmax"));
    }
    let acc = Accuracy::default();
    let mut worst = 0.0f64;
    for k in kmin..=kmax {
        let b = beta(k);
        let z = bessel_j_zero(0.0, k, acc)?;
        worst = worst.max((z - (b + 1.0 / (8.0 * b))).abs() * (k as f64).powi(3));
    }
    Ok(worst)
}
