//! Bessel functions of the first kind of real order and their positive zeros.

use std::f64::consts::PI;

use super::{log_gamma, Accuracy};
use crate::error::{domain, Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-290;
const SERIES_LIMIT: f64 = 2.0;
const SCAN_STEP: f64 = 1.0;

/// `J_ν(x)` for `ν >= 0`, `x >= 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_j_and_derivative(nu, x)?.0)
}

/// `(J_ν(x), J'_ν(x))`.
///
/// Ascending series below `x = 2`, Steed's CF1/CF2 method above.
pub fn bessel_j_and_derivative(nu: f64, x: f64) -> Result<(f64, f64)> {
    if !(nu >= 0.0) || !(x >= 0.0) || !nu.is_finite() || !x.is_finite() {
        return Err(domain(format!(
            "bessel_j requires nu >= 0 and finite x >= 0 (nu={nu}, x={x})"
        )));
    }
    if x == 0.0 {
        let j = if nu == 0.0 { 1.0 } else { 0.0 };
        let jp = if nu == 1.0 {
            0.5
        } else if nu > 0.0 && nu < 1.0 {
            f64::INFINITY
        } else {
            0.0
        };
        return Ok((j, jp));
    }
    if x < SERIES_LIMIT {
        let j = series(nu, x)?;
        let j1 = series(nu + 1.0, x)?;
        return Ok((j, nu / x * j - j1));
    }
    steed(nu, x)
}

fn series(nu: f64, x: f64) -> Result<f64> {
    let lead = (nu * (0.5 * x).ln() - log_gamma(nu + 1.0)?).exp();
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    Ok(lead * sum)
}

fn steed(nu: f64, x: f64) -> Result<(f64, f64)> {
    let max_iter = 10_000usize.max((20.0 * x) as usize);
    let nl = (nu - x + 1.5).floor().max(0.0) as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: J'_ν / J_ν, keeping track of the sign of J_ν.
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0f64;
    let mut c = h;
    let mut converged = false;
    for _ in 0..max_iter {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Accuracy {
            what: format!("J_{nu}({x}) continued fraction CF1 did not converge"),
            partial: f64::NAN,
        });
    }

    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let mut rjl1 = rjl;
    let mut rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if rjl.abs() > 1e250 {
            rjl *= 1e-250;
            rjpl *= 1e-250;
            rjl1 *= 1e-250;
            rjp1 *= 1e-250;
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    // CF2: p + iq = (J'_μ + i Y'_μ) / (J_μ + i Y_μ), complex Lentz.
    let mut a = 0.25 - xmu2;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fact = a * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    converged = false;
    for i in 2..max_iter {
        a += 2.0 * (i as f64 - 1.0);
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Accuracy {
            what: format!("J_{nu}({x}) continued fraction CF2 did not converge"),
            partial: f64::NAN,
        });
    }
    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    let scale = rjmu / rjl;
    Ok((rjl1 * scale, rjp1 * scale))
}

/// Two-term McMahon expansion `β - (4ν² - 1)/(8β)`, `β = (k + ν/2 - 1/4)π`.
pub fn mcmahon_seed(nu: f64, k: usize) -> f64 {
    let beta = (k as f64 + 0.5 * nu - 0.25) * PI;
    beta - (4.0 * nu * nu - 1.0) / (8.0 * beta)
}

fn scan_start(nu: f64) -> f64 {
    // j_{ν,1} > max(ν, 2.40...) for every ν >= 0.
    nu.max(SERIES_LIMIT)
}

/// Safeguarded Newton inside a sign-change bracket.
fn refine(nu: f64, mut lo: f64, mut hi: f64, start: f64) -> Result<f64> {
    let mut flo = bessel_j(nu, lo)?;
    let mut x = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let (f, fp) = bessel_j_and_derivative(nu, x)?;
        if f == 0.0 {
            return Ok(x);
        }
        if (f < 0.0) == (flo < 0.0) {
            lo = x;
            flo = f;
        } else {
            hi = x;
        }
        let step = f / fp;
        let mut next = x - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let moved = (next - x).abs();
        x = next;
        if moved <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * x {
            return Ok(x);
        }
    }
    Ok(x)
}

/// The `k`-th positive zero `j_{ν,k}` of `J_ν`.
///
/// The zero is bracketed by a sign-change scan (zeros are more than one unit
/// apart for every `ν >= 0`) and polished by Newton from the McMahon seed,
/// falling back to bisection when the Newton step leaves the bracket.
pub fn bessel_j_zero(nu: f64, k: usize, acc: Accuracy) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(domain(format!("bessel_j_zero requires nu >= 0, got {nu}")));
    }
    if k == 0 {
        return Err(domain("zero index k must be at least 1"));
    }
    let seed = mcmahon_seed(nu, k);
    let limit = seed.max(nu) + PI * (k as f64 + 2.0) + 10.0;
    let mut lo = scan_start(nu);
    let mut flo = bessel_j(nu, lo)?;
    let mut found = 0usize;
    let mut steps = 0usize;
    while lo < limit {
        steps += 1;
        if steps > acc.max_terms().max(1000) * 10 {
            break;
        }
        let hi = lo + SCAN_STEP;
        let fhi = bessel_j(nu, hi)?;
        if fhi == 0.0 || (fhi < 0.0) != (flo < 0.0) {
            found += 1;
            if found == k {
                if fhi == 0.0 {
                    return Ok(hi);
                }
                return refine(nu, lo, hi, seed);
            }
        }
        lo = hi;
        flo = fhi;
    }
    Err(Error::Bracket {
        nu,
        k,
        lo: scan_start(nu),
        hi: limit,
    })
}

/// All positive zeros of `J_ν` not exceeding `xmax`, ascending.
pub fn bessel_j_zeros_below(nu: f64, xmax: f64) -> Result<Vec<f64>> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(domain(format!("bessel_j_zeros_below requires nu >= 0, got {nu}")));
    }
    let mut zeros = Vec::new();
    let mut lo = scan_start(nu);
    if lo >= xmax {
        return Ok(zeros);
    }
    let mut flo = bessel_j(nu, lo)?;
    let mut k = 0usize;
    while lo < xmax {
        let hi = lo + SCAN_STEP;
        let fhi = bessel_j(nu, hi)?;
        if fhi == 0.0 || (fhi < 0.0) != (flo < 0.0) {
            k += 1;
            let z = if fhi == 0.0 { hi } else { refine(nu, lo, hi, mcmahon_seed(nu, k))? };
            if z > xmax {
                break;
            }
            zeros.push(z);
        }
        lo = hi;
        flo = fhi;
    }
    Ok(zeros)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acc() -> Accuracy {
        Accuracy::default()
    }

    /// Newton iteration on the ascending power series of J_0 alone,
    /// independent of the continued-fraction path.
    fn j0_series_zero(mut x: f64) -> f64 {
        let j0 = |x: f64| {
            let q = -0.25 * x * x;
            let (mut t, mut s) = (1.0, 1.0);
            for k in 1..80 {
                t *= q / (k as f64 * k as f64);
                s += t;
            }
            s
        };
        let j1 = |x: f64| {
            let q = -0.25 * x * x;
            let (mut t, mut s) = (0.5 * x, 0.5 * x);
            for k in 1..80 {
                t *= q / (k as f64 * (k as f64 + 1.0));
                s += t;
            }
            s
        };
        for _ in 0..50 {
            x += j0(x) / j1(x);
        }
        assert!(j0(x - 1e-6) > 0.0 && j0(x + 1e-6) < 0.0);
        x
    }

    #[test]
    fn first_zero_of_j0_matches_series_newton() {
        let oracle = j0_series_zero(2.4);
        assert!((oracle - 2.404_825_557_7).abs() < 1e-10);
        let z = bessel_j_zero(0.0, 1, acc()).unwrap();
        assert!((z - oracle).abs() < 1e-11, "{z} vs {oracle}");
    }

    #[test]
    fn half_order_zeros_are_multiples_of_pi() {
        for k in 1..=12 {
            let z = bessel_j_zero(0.5, k, acc()).unwrap();
            assert!((z - k as f64 * PI).abs() < 1e-11, "k={k}: {z}");
        }
    }

    #[test]
    fn reference_zero_values() {
        let z = bessel_j_zero(0.0, 10, acc()).unwrap();
        assert!((z - 30.634_606_468_431_975).abs() < 1e-11);
        let (j, _) = bessel_j_and_derivative(0.3, 5.5).unwrap();
        assert!((j + 0.157_915_382_920_949_62).abs() < 1e-13);
        let (j, _) = bessel_j_and_derivative(150.2, 170.3).unwrap();
        assert!((j - 0.076_804_260_325_751_74).abs() < 1e-12);
    }

    #[test]
    fn series_and_continued_fraction_agree_near_two() {
        for nu in [0.0, 0.25, 1.0, 3.5] {
            let s = series(nu, 1.999_999).unwrap();
            let (c, _) = steed(nu, 1.999_999).unwrap();
            assert!((s - c).abs() < 1e-13, "nu={nu}: {s} vs {c}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for (nu, x) in [(0.0, 3.3), (2.7, 9.1), (12.0, 14.0), (0.4, 1.2)] {
            let (_, d) = bessel_j_and_derivative(nu, x).unwrap();
            let h = 1e-5;
            let fd = (bessel_j(nu, x + h).unwrap() - bessel_j(nu, x - h).unwrap()) / (2.0 * h);
            assert!((d - fd).abs() < 1e-8, "nu={nu} x={x}");
        }
    }

    #[test]
    fn zeros_below_matches_indexed_zeros() {
        let zs = bessel_j_zeros_below(2.0, 30.0).unwrap();
        for (i, z) in zs.iter().enumerate() {
            let zk = bessel_j_zero(2.0, i + 1, acc()).unwrap();
            assert!((z - zk).abs() < 1e-12);
        }
        assert!(bessel_j_zero(2.0, zs.len() + 1, acc()).unwrap() > 30.0);
    }

    #[test]
    fn interlacing_and_monotonicity() {
        for nu in [0.0, 0.5, 1.0, 2.0, 7.5] {
            let mut prev = 0.0;
            for k in 1..=30 {
                let a = bessel_j_zero(nu, k, acc()).unwrap();
                let b = bessel_j_zero(nu + 1.0, k, acc()).unwrap();
                let c = bessel_j_zero(nu, k + 1, acc()).unwrap();
                assert!(a > prev);
                assert!(a < b && b < c, "nu={nu} k={k}: {a} {b} {c}");
                prev = a;
            }
        }
    }

    #[test]
    fn mcmahon_envelope_for_j0() {
        let mut worst = 0.0f64;
        for k in 5..=50 {
            let z = bessel_j_zero(0.0, k, acc()).unwrap();
            let b = (k as f64 - 0.25) * PI;
            let d = (z - (b + 1.0 / (8.0 * b))).abs() * (k as f64).powi(3);
            worst = worst.max(d);
        }
        assert!(worst <= 0.01, "worst scaled remainder {worst}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(bessel_j_zero(0.0, 0, acc()).is_err());
        assert!(bessel_j_zero(-1.0, 1, acc()).is_err());
        assert!(bessel_j(-0.5, 1.0).is_err());
    }
}
