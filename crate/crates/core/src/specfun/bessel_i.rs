//! Exponentially scaled modified Bessel function `e^{-x} I_ν(x)`.
//!
//! Three regimes:
//! - ascending series for `x <= 30`,
//! - Hankel large-argument expansion once `x > 30` and `ν² <= 2x`, where the
//!   term ratios are bounded by `1/k`,
//! - otherwise Steed's continued fractions (CF1 for `I'_ν/I_ν`, CF2 for the
//!   scaled `K_μ`) normalised through the Wronskian.

use std::f64::consts::PI;

use super::{log_gamma, Accuracy};
use crate::error::{domain, Error, Result};

const SERIES_LIMIT: f64 = 30.0;
const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-290;

/// `e^{-x} I_ν(x)` for `ν >= 0`, `x >= 0`.
pub fn bessel_i_scaled(nu: f64, x: f64, acc: Accuracy) -> Result<f64> {
    if !(nu >= 0.0) || !(x >= 0.0) || !nu.is_finite() || !x.is_finite() {
        return Err(domain(format!(
            "bessel_i_scaled requires nu >= 0 and finite x >= 0 (nu={nu}, x={x})"
        )));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if x <= SERIES_LIMIT {
        ascending_series(nu, x, acc)
    } else if nu * nu <= 2.0 * x {
        hankel_asymptotic(nu, x, acc)
    } else {
        steed_scaled(nu, x, acc)
    }
}

/// `(e^{-x} I_ν(x), e^{-x} I_{ν+1}(x))`.
pub fn bessel_i_scaled_pair(nu: f64, x: f64, acc: Accuracy) -> Result<(f64, f64)> {
    Ok((bessel_i_scaled(nu, x, acc)?, bessel_i_scaled(nu + 1.0, x, acc)?))
}

fn ascending_series(nu: f64, x: f64, acc: Accuracy) -> Result<f64> {
    let log_lead = nu * (0.5 * x).ln() - log_gamma(nu + 1.0)? - x;
    let lead = log_lead.exp();
    if lead == 0.0 {
        return Ok(0.0);
    }
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=acc.max_terms() {
        let kf = k as f64;
        let ratio = q / (kf * (kf + nu));
        term *= ratio;
        sum += term;
        if ratio < 0.5 && term < 1e-2 * acc.rel_tol() * sum {
            return Ok(lead * sum);
        }
    }
    Err(Error::Accuracy {
        what: format!("I_{nu}({x}) ascending series did not converge"),
        partial: lead * sum,
    })
}

fn hankel_asymptotic(nu: f64, x: f64, acc: Accuracy) -> Result<f64> {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..=acc.max_terms() {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (8.0 * kf * x);
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-2 * acc.rel_tol() * sum.abs() {
            return Ok(sum / (2.0 * PI * x).sqrt());
        }
    }
    if last <= acc.rel_tol() * sum.abs() {
        Ok(sum / (2.0 * PI * x).sqrt())
    } else {
        Err(Error::Accuracy {
            what: format!("I_{nu}({x}) asymptotic series stalled"),
            partial: sum / (2.0 * PI * x).sqrt(),
        })
    }
}

fn steed_scaled(nu: f64, x: f64, acc: Accuracy) -> Result<f64> {
    let max_iter = acc.max_terms().max((20.0 * x) as usize);
    let nl = (nu + 0.5).floor() as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    // CF1: I'_ν / I_ν by modified Lentz.
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..max_iter {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Accuracy {
            what: format!("I_{nu}({x}) continued fraction CF1 did not converge"),
            partial: f64::NAN,
        });
    }

    // Downward recurrence from ν to μ with rescaling against overflow.
    let mut ril = FPMIN;
    let mut ripl = h * ril;
    let mut ril1 = ril;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let ritemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * ritemp + ril;
        ril = ritemp;
        if ril.abs() > 1e250 {
            ril *= 1e-250;
            ripl *= 1e-250;
            ril1 *= 1e-250;
        }
    }
    let f = ripl / ril;

    // CF2 (Steed) for e^{x} K_μ and e^{x} K_{μ+1}.
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h2 = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - xmu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    converged = false;
    for i in 2..max_iter {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h2 += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Accuracy {
            what: format!("K_{xmu}({x}) continued fraction CF2 did not converge"),
            partial: f64::NAN,
        });
    }
    let h2 = a1 * h2;
    let kmu = (PI / (2.0 * x)).sqrt() / s;
    let k1 = kmu * (xmu + x + 0.5 - h2) * xi;
    let kmup = xmu * xi * kmu - k1;
    let imu = xi / (f * kmu - kmup);
    Ok(imu * ril1 / ril)
}
