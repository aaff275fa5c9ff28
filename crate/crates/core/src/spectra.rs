//! Exact Dirichlet spectra of separable model domains, heat traces with a
//! Weyl-bounded tail, and weighted least-squares extraction of short-time
//! expansion coefficients.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::specfun::bessel_j_zeros_below;

/// Default cap on the number of distinct eigenvalues enumerated.
pub const DEFAULT_BUDGET: usize = 2_000_000;

/// Smallest admissible `Λ²t` for the tail policy.
const MIN_CUTOFF_TIME: f64 = 36.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainSpec {
    Disk { radius: f64 },
    HalfDisk { radius: f64 },
    CircularSector { radius: f64, beta: f64 },
    Rectangle { a: f64, b: f64 },
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DomainSpec::Disk { radius } | DomainSpec::HalfDisk { radius } => radius > 0.0 && radius.is_finite(),
            DomainSpec::CircularSector { radius, beta } => {
                radius > 0.0 && radius.is_finite() && beta > 0.0 && beta < 2.0 * PI
            }
            DomainSpec::Rectangle { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(domain(format!("invalid domain {self:?}")))
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            DomainSpec::Disk { radius } => PI * radius * radius,
            DomainSpec::HalfDisk { radius } => 0.5 * PI * radius * radius,
            DomainSpec::CircularSector { radius, beta } => 0.5 * beta * radius * radius,
            DomainSpec::Rectangle { a, b } => a * b,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match *self {
            DomainSpec::Disk { radius } => 2.0 * PI * radius,
            DomainSpec::HalfDisk { radius } => (PI + 2.0) * radius,
            DomainSpec::CircularSector { radius, beta } => (beta + 2.0) * radius,
            DomainSpec::Rectangle { a, b } => 2.0 * (a + b),
        }
    }

    /// Upper estimate of the eigenvalue count below `cutoff` (Weyl plus
    /// boundary term plus margin).
    fn count_estimate(&self, cutoff: f64) -> f64 {
        let l = cutoff.sqrt();
        self.area() * cutoff / (4.0 * PI) + self.perimeter() * l / (4.0 * PI) + 10.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// `(eigenvalue, multiplicity)`, ascending.
    pub values: Vec<(f64, usize)>,
    pub cutoff: f64,
    pub complete_below_cutoff: bool,
    /// Area used by the Weyl tail bound.
    area: f64,
}

impl Spectrum {
    /// Number of eigenvalues counted with multiplicity.
    pub fn count(&self) -> usize {
        self.values.iter().map(|v| v.1).sum()
    }

    /// `Σ m e^{−λt}` over the enumerated eigenvalues, compensated, in
    /// ascending eigenvalue order.
    pub fn partial_trace(&self, t: f64) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for &(l, m) in &self.values {
            let term = m as f64 * (-l * t).exp();
            let next = sum + term;
            comp += if sum.abs() >= term.abs() { (sum - next) + term } else { (term - next) + sum };
            sum = next;
        }
        sum + comp
    }

    /// Weyl-density bound `2 (|Ω|/4π) e^{−Λ²t}/t` on the omitted tail.
    pub fn tail_bound(&self, t: f64) -> f64 {
        2.0 * self.area / (4.0 * PI) * (-self.cutoff * t).exp() / t
    }
}

/// All Dirichlet eigenvalues `<= cutoff` with multiplicities.
pub fn eigenvalues_below(d: DomainSpec, cutoff: f64) -> Result<Spectrum> {
    eigenvalues_below_with_budget(d, cutoff, DEFAULT_BUDGET)
}

pub fn eigenvalues_below_with_budget(d: DomainSpec, cutoff: f64, budget: usize) -> Result<Spectrum> {
    d.validate()?;
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(domain(format!("cutoff must be positive and finite, got {cutoff}")));
    }
    let estimate = d.count_estimate(cutoff);
    if estimate > budget as f64 {
        return Err(Error::Resource(format!(
            "about {estimate:.0} eigenvalues below {cutoff} exceed the budget of {budget}"
        )));
    }
    let mut values = match d {
        DomainSpec::Disk { radius } => bessel_branches(0.0, 1.0, radius, cutoff, true)?,
        DomainSpec::HalfDisk { radius } => bessel_branches(1.0, 1.0, radius, cutoff, false)?,
        DomainSpec::CircularSector { radius, beta } => bessel_branches(1.0, PI / beta, radius, cutoff, false)?,
        DomainSpec::Rectangle { a, b } => lattice(a, b, cutoff),
    };
    values.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for (l, m) in values {
        match merged.last_mut() {
            Some(last) if last.0 == l => last.1 += m,
            _ => merged.push((l, m)),
        }
    }
    Ok(Spectrum { values: merged, cutoff, complete_below_cutoff: true, area: d.area() })
}

/// Squared zeros `(j_{ν,k}/ρ)²` for `ν = (m0 + i)·step`, `i = 0, 1, …`, until
/// the first zero of the order exceeds the cutoff (`j_{ν,1} > ν`).
fn bessel_branches(m0: f64, step: f64, radius: f64, cutoff: f64, doubled: bool) -> Result<Vec<(f64, usize)>> {
    let xmax = cutoff.sqrt() * radius;
    let orders: Vec<f64> = (0..)
        .map(|i| (m0 + i as f64) * step)
        .take_while(|&nu| nu < xmax)
        .collect();
    let branches: Vec<Result<Vec<(f64, usize)>>> = orders
        .par_iter()
        .map(|&nu| {
            let mult = if doubled && nu > 0.0 { 2 } else { 1 };
            let zeros = bessel_j_zeros_below(nu, xmax)?;
            Ok(zeros
                .into_iter()
                .map(|j| (j * j / (radius * radius), mult))
                .filter(|&(l, _)| l <= cutoff)
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for b in branches {
        out.extend(b?);
    }
    Ok(out)
}

fn lattice(a: f64, b: f64, cutoff: f64) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    let p2 = PI * PI;
    let mut m = 1usize;
    loop {
        let x = p2 * (m * m) as f64 / (a * a);
        if x + p2 / (b * b) > cutoff {
            break;
        }
        let mut n = 1usize;
        loop {
            let l = p2 * ((m * m) as f64 / (a * a) + (n * n) as f64 / (b * b));
            if l > cutoff {
                break;
            }
            out.push((l, 1));
            n += 1;
        }
        m += 1;
    }
    out
}

/// Cutoff `Λ²` meeting the tail policy at time `t` and tolerance `eps`:
/// `Λ²t >= 36` and `2 (|Ω|/4π) e^{−Λ²t}/t < eps`.
pub fn tail_cutoff(d: DomainSpec, t: f64, eps: f64) -> Result<f64> {
    d.validate()?;
    if !(t > 0.0) || !(eps > 0.0) {
        return Err(domain(format!("t and eps must be positive (t={t}, eps={eps})")));
    }
    let need = (2.0 * d.area() / (4.0 * PI) / (t * eps)).ln().max(0.0);
    Ok(MIN_CUTOFF_TIME.max(need * 1.0001) / t)
}

/// `(Σ e^{−λt}, tail bound)` with the cutoff chosen by [`tail_cutoff`].
pub fn heat_trace_with_bound(d: DomainSpec, t: f64, eps: f64) -> Result<(f64, f64)> {
    let s = eigenvalues_below(d, tail_cutoff(d, t, eps)?)?;
    Ok((s.partial_trace(t), s.tail_bound(t)))
}

pub fn heat_trace_partial(d: DomainSpec, t: f64, eps: f64) -> Result<f64> {
    Ok(heat_trace_with_bound(d, t, eps)?.0)
}

/// Traces at every `t` of `ts` from one enumeration at the smallest time.
pub fn heat_traces(d: DomainSpec, ts: &[f64], eps: f64) -> Result<Vec<(f64, f64, f64)>> {
    let tmin = ts.iter().copied().fold(f64::INFINITY, f64::min);
    if ts.is_empty() || !(tmin > 0.0) {
        return Err(domain("time grid must be non-empty and positive"));
    }
    let s = eigenvalues_below(d, tail_cutoff(d, tmin, eps)?)?;
    Ok(ts.iter().map(|&t| (t, s.partial_trace(t), s.tail_bound(t))).collect())
}

/// `n` points geometric in `[tmin, tmax]`.
pub fn geometric_grid(tmin: f64, tmax: f64, n: usize) -> Result<Vec<f64>> {
    if !(tmin > 0.0 && tmax > tmin) || n < 2 {
        return Err(domain("geometric grid needs 0 < tmin < tmax and n >= 2"));
    }
    let r = (tmax / tmin).ln() / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| tmin * (r * i as f64).exp()).collect();
    g[n - 1] = tmax;
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionFit {
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
    /// RMS of the relative residuals `(model − trace)/trace`.
    pub rms_residual: f64,
    /// Ratio of extreme singular values of the column-normalised weighted
    /// design matrix.
    pub condition_estimate: f64,
}

impl ExpansionFit {
    pub fn coefficient(&self, exponent: f64) -> Option<f64> {
        self.exponents
            .iter()
            .position(|&p| (p - exponent).abs() < 1e-12)
            .map(|i| self.coefficients[i])
    }
}

/// Exponents `{−1, −½, 0, ½}` plus the nuisance terms `{1, 3/2, …, 7/2}`.
pub fn standard_exponents() -> Vec<f64> {
    (0..10).map(|i| -1.0 + 0.5 * i as f64).collect()
}

/// Least squares `trace ≈ Σ c_p t^p`, each residual measured relative to the
/// first omitted order `t^{p_max + ½}`.
///
/// This weighting keeps the fit local to small `t`, where the expansion is
/// asymptotic; the exponentially small periodic-orbit terms (`e^{−L²/4t}`)
/// and the growing higher coefficients are suppressed at the top of the grid.
pub fn fit_expansion(samples: &[(f64, f64)], exponents: &[f64]) -> Result<ExpansionFit> {
    let next = exponents.last().map_or(0.0, |p| p + 0.5);
    fit_expansion_weighted(samples, exponents, -next)
}

/// Least squares with rows scaled by `t^{row_power}` (weights `t^{2·row_power}`).
pub fn fit_expansion_weighted(samples: &[(f64, f64)], exponents: &[f64], row_power: f64) -> Result<ExpansionFit> {
    if exponents.is_empty() || exponents.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("exponents must be non-empty and strictly increasing"));
    }
    if samples.len() < 2 * exponents.len() {
        return Err(domain(format!(
            "need at least {} samples for {} exponents, got {}",
            2 * exponents.len(),
            exponents.len(),
            samples.len()
        )));
    }
    if samples.iter().any(|s| !(s.0 > 0.0) || !s.1.is_finite()) {
        return Err(domain("samples need t > 0 and finite traces"));
    }
    let (n, p) = (samples.len(), exponents.len());
    let mut a = DMatrix::from_fn(n, p, |i, j| {
        let t = samples[i].0;
        t.powf(exponents[j] + row_power)
    });
    let y = DVector::from_iterator(n, samples.iter().map(|&(t, v)| t.powf(row_power) * v));
    let norms: Vec<f64> = (0..p).map(|j| a.column(j).norm()).collect();
    for (j, &nrm) in norms.iter().enumerate() {
        if !(nrm > 0.0) {
            return Err(Error::Conditioning(f64::INFINITY));
        }
        a.column_mut(j).scale_mut(1.0 / nrm);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond < 1e12) {
        return Err(Error::Conditioning(cond));
    }
    let solve = |rhs: &DVector<f64>| {
        svd.solve(rhs, 0.0)
            .map_err(|e| domain(format!("expansion fit failed: {e}")))
    };
    let mut scaled = solve(&y)?;
    // One step of iterative refinement on the residual.
    scaled += solve(&(&y - &a * &scaled))?;
    let coefficients: Vec<f64> = scaled.iter().zip(&norms).map(|(c, nrm)| c / nrm).collect();
    let rms = (samples
        .iter()
        .map(|&(t, v)| {
            let model: f64 = exponents.iter().zip(&coefficients).map(|(p, c)| c * t.powf(*p)).sum();
            ((model - v) / v.abs().max(f64::MIN_POSITIVE)).powi(2)
        })
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(ExpansionFit {
        exponents: exponents.to_vec(),
        coefficients,
        rms_residual: rms,
        condition_estimate: cond,
    })
}

/// The standard protocol: 40 geometric times on `[1e-3, 0.2]`, exponents
/// [`standard_exponents`].
pub fn fit_domain(d: DomainSpec, eps: f64) -> Result<ExpansionFit> {
    fit_domain_on(d, 1e-3, 0.2, 40, eps)
}

pub fn fit_domain_on(d: DomainSpec, tmin: f64, tmax: f64, points: usize, eps: f64) -> Result<ExpansionFit> {
    let ts = geometric_grid(tmin, tmax, points)?;
    let samples: Vec<(f64, f64)> = heat_traces(d, &ts, eps)?.into_iter().map(|(t, v, _)| (t, v)).collect();
    fit_expansion(&samples, &standard_exponents())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_low_spectrum() {
        let s = eigenvalues_below(DomainSpec::Disk { radius: 1.0 }, 30.0).unwrap();
        assert_eq!(s.count(), 5);
        let e = [(5.7832, 1), (14.6820, 2), (26.3746, 2)];
        assert_eq!(s.values.len(), 3);
        for ((l, m), (el, em)) in s.values.iter().zip(e) {
            assert!((l - el).abs() < 1e-4, "{l} vs {el}");
            assert_eq!(*m, em);
        }
    }

    #[test]
    fn unit_half_disk_low_spectrum() {
        let s = eigenvalues_below(DomainSpec::HalfDisk { radius: 1.0 }, 30.0).unwrap();
        let l: Vec<f64> = s.values.iter().map(|v| v.0).collect();
        assert_eq!(s.count(), 2);
        assert!((l[0] - 14.6820).abs() < 1e-4 && (l[1] - 26.3746).abs() < 1e-4);
    }

    #[test]
    fn unit_square_low_spectrum() {
        let s = eigenvalues_below(DomainSpec::Rectangle { a: 1.0, b: 1.0 }, 30.0).unwrap();
        assert_eq!(s.values.len(), 1);
        assert!((s.values[0].0 - 19.739).abs() < 1e-3 && s.values[0].1 == 1);
        let s = eigenvalues_below(DomainSpec::Rectangle { a: 1.0, b: 1.0 }, 50.0).unwrap();
        assert!((s.values[1].0 - 5.0 * PI * PI).abs() < 1e-12 && s.values[1].1 == 2);
    }

    #[test]
    fn half_disk_is_unit_sector_of_angle_pi() {
        let a = eigenvalues_below(DomainSpec::HalfDisk { radius: 1.0 }, 400.0).unwrap();
        let b = eigenvalues_below(DomainSpec::CircularSector { radius: 1.0, beta: PI }, 400.0).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn radius_scales_eigenvalues() {
        let a = eigenvalues_below(DomainSpec::Disk { radius: 1.0 }, 200.0).unwrap();
        let b = eigenvalues_below(DomainSpec::Disk { radius: 2.0 }, 50.0).unwrap();
        assert_eq!(a.values.len(), b.values.len());
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x.0 - 4.0 * y.0).abs() < 1e-11 * x.0);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let r = eigenvalues_below_with_budget(DomainSpec::Disk { radius: 1.0 }, 1e6, 1000);
        assert!(matches!(r, Err(Error::Resource(_))));
        assert!(eigenvalues_below(DomainSpec::Disk { radius: 1.0 }, -1.0).is_err());
    }

    #[test]
    fn large_time_trace_is_ground_state() {
        let d = DomainSpec::Disk { radius: 1.0 };
        let t = 3.0;
        let l1 = 2.404_825_557_695_773f64.powi(2);
        let v = heat_trace_partial(d, t, 1e-14).unwrap();
        assert!((v - (-l1 * t).exp()).abs() < 1e-9 * v);
    }

    #[test]
    fn square_trace_matches_product_formula() {
        // Tr = (Σ_n e^{−π²n²t})² on the unit square.
        let t = 0.05;
        let one: f64 = (1..200).map(|n| (-PI * PI * (n * n) as f64 * t).exp()).sum();
        let v = heat_trace_partial(DomainSpec::Rectangle { a: 1.0, b: 1.0 }, t, 1e-12).unwrap();
        assert!((v - one * one).abs() < 1e-11);
    }

    #[test]
    fn synthetic_fit_recovery() {
        let synth = |c: &[f64], ex: &[f64]| -> Vec<(f64, f64)> {
            geometric_grid(1e-3, 0.2, 40)
                .unwrap()
                .into_iter()
                .map(|t| (t, ex.iter().zip(c).map(|(p, c)| c * t.powf(*p)).sum()))
                .collect()
        };
        let ex = [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5];
        let c = [0.3, -0.2, 0.1, 0.05, -0.4, 0.7];
        let f = fit_expansion_weighted(&synth(&c, &ex), &ex, 1.0).unwrap();
        for (x, y) in f.coefficients.iter().zip(c) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
        let f = fit_expansion(&synth(&c, &ex), &ex).unwrap();
        for (x, y) in f.coefficients.iter().zip(c).take(4) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
        // The full ladder is worse conditioned; the geometric terms still
        // come back to 1e-4.
        let ex = standard_exponents();
        let c = [0.3, -0.2, 0.1, 0.05, -0.4, 0.7, 0.2, -1.1, 0.6, 2.0];
        let f = fit_expansion(&synth(&c, &ex), &ex).unwrap();
        for (x, y) in f.coefficients.iter().zip(c).take(4) {
            assert!((x - y).abs() < 1e-4 * y.abs(), "{x} vs {y}");
        }
        assert!(f.condition_estimate > 1.0 && f.rms_residual < 1e-5);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let s = vec![(0.1, 1.0); 5];
        assert!(fit_expansion(&s, &[-1.0, 0.0, 1.0]).is_err());
        assert!(fit_expansion(&[(0.1, 1.0), (0.2, f64::NAN)], &[0.0]).is_err());
        let s: Vec<(f64, f64)> = (1..20).map(|i| (0.01 * i as f64, 1.0)).collect();
        assert!(fit_expansion(&s, &[0.0, -1.0]).is_err());
        assert!(matches!(fit_expansion(&[(0.1, 1.0); 10], &[0.0, 1.0]), Err(Error::Conditioning(_))));
    }
}
