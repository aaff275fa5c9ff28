use std::f64::consts::PI;
use std::path::Path;

use sectorheat::conformal::{c12_right_angle, heat_trace_coefficients, CornerData, DomainDescription};
use sectorheat::corner::c12;
use sectorheat::sector::{wedge_order, KernelSource};
use sectorheat::spectra::{fit_expansion, geometric_grid, heat_traces, standard_exponents, DomainSpec};

use crate::args::{C12Args, Command, DomainName, FitArgs, Format, Kernel, Profile, Suite, TraceArgs, VerifyArgs};
use crate::report::Report;
use crate::suites::{self, finite_part_config, Check, DEFAULT_SEED};
use crate::{CliError, CliResult};

/// Angles this close to `π/m` are taken as exactly `π/m`.
pub const WEDGE_SNAP: f64 = 1e-5;

/// Relative window around `1/(16√π)` reported for `α = π/2`.
pub const RIGHT_ANGLE_WINDOW: f64 = 0.03;

/// Result of a command: the report, its default format, and an optional
/// quality failure that still lets the report be written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub default_format: Format,
    pub failure: Option<CliError>,
}

pub fn run(command: &Command) -> CliResult<Outcome> {
    match command {
        Command::C12(a) => cmd_c12(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

pub fn snap_to_wedge(alpha: f64) -> f64 {
    let m = (PI / alpha).round();
    if m >= 1.0 && (alpha - PI / m).abs() <= WEDGE_SNAP {
        PI / m
    } else {
        alpha
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        usage(format!("--{name} must be positive and finite, got {v}"))
    }
}

pub fn cmd_c12(a: &C12Args) -> CliResult<Outcome> {
    let Some(alpha) = a.alpha else {
        return usage("c12 needs --alpha");
    };
    if !(alpha > 0.0 && alpha < 2.0 * PI) {
        return usage(format!("--alpha must lie in (0, 2π), got {alpha}"));
    }
    let alpha = snap_to_wedge(alpha);
    let profile = a.profile.unwrap_or(Profile::Fast);
    let kernel = a.kernel.unwrap_or(Kernel::Auto);
    let source = match kernel {
        Kernel::Images => KernelSource::Images,
        Kernel::Series => KernelSource::Series,
        Kernel::Auto if wedge_order(alpha).is_ok() => KernelSource::Images,
        Kernel::Auto => KernelSource::Series,
    };
    let mut cfg = finite_part_config(profile, source);
    cfg.theta0 = a.theta0;
    let res = c12(alpha, &cfg)?;

    let mut r = Report::new(&["rmax", "integral"]);
    r.scalar("alpha", alpha)
        .scalar("theta0", cfg.orientation(alpha))
        .scalar("profile", format!("{profile:?}").to_lowercase())
        .scalar("kernel", format!("{source:?}").to_lowercase())
        .scalar("value", res.value)
        .scalar("error_bar", res.error_bar)
        .scalar("slope", res.slope)
        .scalar("quadratic", res.quadratic)
        .scalar("residual", res.residual)
        .scalar("divergence_mismatch", res.divergence_mismatch);
    if alpha == PI / 2.0 && a.theta0.is_none() {
        let reference = c12_right_angle();
        let dev = (res.value - reference) / reference;
        r.scalar("reference", reference)
            .scalar("relative_deviation", dev)
            .scalar("pass", dev.abs() <= RIGHT_ANGLE_WINDOW);
    }
    for &(rmax, v) in &res.per_cutoff {
        r.row(vec![rmax.into(), v.into()]);
    }
    Ok(Outcome { report: r, default_format: Format::Json, failure: None })
}

struct DomainParams {
    name: Option<DomainName>,
    radius: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    beta: Option<f64>,
}

impl DomainParams {
    fn spec(&self) -> CliResult<(DomainName, DomainSpec)> {
        let Some(name) = self.name else {
            return usage("a domain is required (disk, half-disk, square, rectangle, sector)");
        };
        let radius = positive("radius", self.radius.unwrap_or(1.0))?;
        let a = positive("a", self.a.unwrap_or(1.0))?;
        let spec = match name {
            DomainName::Disk => DomainSpec::Disk { radius },
            DomainName::HalfDisk => DomainSpec::HalfDisk { radius },
            DomainName::Square => DomainSpec::Rectangle { a, b: a },
            DomainName::Rectangle => DomainSpec::Rectangle { a, b: positive("b", self.b.unwrap_or(1.0))? },
            DomainName::Sector => {
                let Some(beta) = self.beta else {
                    return usage("sector needs --beta");
                };
                DomainSpec::CircularSector { radius, beta }
            }
        };
        spec.validate()?;
        Ok((name, spec))
    }
}

fn domain_label(name: DomainName) -> &'static str {
    match name {
        DomainName::Disk => "disk",
        DomainName::HalfDisk => "half-disk",
        DomainName::Square => "square",
        DomainName::Rectangle => "rectangle",
        DomainName::Sector => "sector",
    }
}

pub fn cmd_trace(a: &TraceArgs) -> CliResult<Outcome> {
    let params = DomainParams { name: a.domain, radius: a.radius, a: a.a, b: a.b, beta: a.beta };
    let (name, spec) = params.spec()?;
    let tmin = positive("tmin", a.tmin.unwrap_or(1e-3))?;
    let tmax = positive("tmax", a.tmax.unwrap_or(0.2))?;
    let eps = positive("eps", a.eps.unwrap_or(suites::TRACE_EPS))?;
    let points = a.points.unwrap_or(40);
    let grid = geometric_grid(tmin, tmax, points)?;
    let traces = heat_traces(spec, &grid, eps)?;

    let mut r = Report::new(&["t", "trace", "tail_bound"]);
    r.scalar("domain", domain_label(name)).scalar("eps", eps);
    for (t, v, b) in traces {
        r.row(vec![t.into(), v.into(), b.into()]);
    }
    Ok(Outcome { report: r, default_format: Format::Csv, failure: None })
}

/// Geometric data of the model domains for the coefficient assembly.
pub fn describe(spec: DomainSpec) -> CliResult<DomainDescription> {
    let right = |k: f64| CornerData::new(PI / 2.0, k, 0.0);
    Ok(match spec {
        DomainSpec::Disk { radius } => DomainDescription {
            area: PI * radius * radius,
            perimeter: 2.0 * PI * radius,
            kappa_integral: 2.0 * PI,
            kappa_sq_integral: 2.0 * PI / radius,
            corners: vec![],
        },
        DomainSpec::HalfDisk { radius } => DomainDescription {
            area: 0.5 * PI * radius * radius,
            perimeter: (PI + 2.0) * radius,
            kappa_integral: PI,
            kappa_sq_integral: PI / radius,
            corners: vec![right(1.0 / radius)?; 2],
        },
        DomainSpec::CircularSector { radius, beta } => DomainDescription {
            area: 0.5 * beta * radius * radius,
            perimeter: (beta + 2.0) * radius,
            kappa_integral: beta,
            kappa_sq_integral: beta / radius,
            corners: vec![CornerData::new(beta, 0.0, 0.0)?, right(1.0 / radius)?, right(1.0 / radius)?],
        },
        DomainSpec::Rectangle { a, b } => DomainDescription::rectangle(a, b),
    })
}

/// `(t, trace)` pairs from a trace CSV; `#` lines are comments.
pub fn read_trace_csv(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::Usage(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("{} has no '{name}' column", path.display())))
    };
    let (it, iv) = (col("t")?, col("trace")?);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(e.to_string()))?;
        let parse = |i: usize| -> CliResult<f64> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| CliError::Usage(format!("bad number in data row {}", line + 1)))
        };
        out.push((parse(it)?, parse(iv)?));
    }
    if out.is_empty() {
        return usage(format!("{} holds no data rows", path.display()));
    }
    Ok(out)
}

pub fn cmd_fit(a: &FitArgs) -> CliResult<Outcome> {
    let Some(input) = &a.input else {
        return usage("fit needs --input");
    };
    let samples = read_trace_csv(input)?;
    let exponents = a.exponents.clone().unwrap_or_else(standard_exponents);
    let fit = fit_expansion(&samples, &exponents)?;

    let predicted = match a.predict {
        Some(name) => {
            let params = DomainParams { name: Some(name), radius: a.radius, a: a.a, b: a.b, beta: a.beta };
            let (_, spec) = params.spec()?;
            let table = [(PI / 2.0, a.c12.unwrap_or_else(c12_right_angle))];
            Some(heat_trace_coefficients(&describe(spec)?, &table)?)
        }
        None => None,
    };
    let mut r = Report::new(&["exponent", "coefficient", "predicted", "relative_deviation"]);
    r.scalar("points", samples.len())
        .scalar("rms_residual", fit.rms_residual)
        .scalar("condition_estimate", fit.condition_estimate)
        .scalar("predict", a.predict.map(domain_label));
    for (&p, &c) in fit.exponents.iter().zip(&fit.coefficients) {
        let pred = predicted.and_then(|v| {
            let k = ((p + 1.0) * 2.0).round();
            ((0.0..4.0).contains(&k) && ((p + 1.0) * 2.0 - k).abs() < 1e-12).then(|| v[k as usize])
        });
        let dev = pred.map(|q| if q != 0.0 { (c - q) / q.abs() } else { c - q });
        r.row(vec![p.into(), c.into(), pred.into(), dev.into()]);
    }
    Ok(Outcome { report: r, default_format: Format::Json, failure: None })
}

pub fn run_suite(suite: Suite, profile: Profile, seed: u64) -> CliResult<Vec<Check>> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Polarops {
        out.extend(suites::polarops(seed));
    }
    if all || suite == Suite::ConicScaling {
        out.extend(suites::conic_scaling(seed)?);
    }
    if all || suite == Suite::KernelOracle {
        out.extend(suites::kernel_oracle()?);
    }
    if all || suite == Suite::TdSubleading {
        out.extend(suites::td_subleading()?);
    }
    if all || suite == Suite::Zeta {
        out.extend(suites::zeta()?);
    }
    if all || suite == Suite::Mcmahon {
        out.extend(suites::mcmahon()?);
    }
    if all || suite == Suite::Fits {
        out.extend(suites::fits()?);
    }
    if all || suite == Suite::Pi2 {
        out.extend(suites::pi2(profile)?);
    }
    Ok(out)
}

pub fn cmd_verify(a: &VerifyArgs) -> CliResult<Outcome> {
    let Some(suite) = a.suite else {
        return usage("verify needs a suite name");
    };
    let checks = run_suite(suite, a.profile.unwrap_or(Profile::Fast), a.seed.unwrap_or(DEFAULT_SEED))?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let mut r = Report::new(&["check", "value", "target", "tolerance", "mode", "pass"]);
    let label = serde_json::to_value(suite).ok().and_then(|v| v.as_str().map(str::to_string));
    r.scalar("suite", label)
        .scalar("passed", failed == 0)
        .scalar("summary", if failed == 0 { "PASS".to_string() } else { format!("FAIL ({failed} of {})", checks.len()) });
    for c in &checks {
        r.row(vec![
            c.name.as_str().into(),
            c.value.into(),
            c.target.into(),
            c.tolerance.into(),
            c.mode.label().into(),
            c.pass.into(),
        ]);
    }
    let failure = (failed > 0).then(|| CliError::Numerical(format!("{failed} check(s) failed")));
    Ok(Outcome { report: r, default_format: Format::Csv, failure })
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    #[test]
    fn snapping_is_local() {
        assert_eq!(snap_to_wedge(1.5707963), PI / 2.0);
        assert_eq!(snap_to_wedge(1.0471976), PI / 3.0);
        assert_eq!(snap_to_wedge(3.14159), PI);
        assert_eq!(snap_to_wedge(1.3), 1.3);
    }

    #[test]
    fn descriptions_match_built_in_ones() {
        let h = describe(DomainSpec::HalfDisk { radius: 1.0 }).unwrap();
        assert_eq!(h, DomainDescription::unit_half_disk());
        let d = describe(DomainSpec::Disk { radius: 1.0 }).unwrap();
        assert_eq!(d, DomainDescription::unit_disk());
    }

    #[test]
    fn sector_of_angle_pi_predicts_half_disk() {
        let t = [(PI / 2.0, c12_right_angle())];
        let s = heat_trace_coefficients(&describe(DomainSpec::CircularSector { radius: 1.0, beta: PI }).unwrap(), &t)
            .unwrap();
        let h = heat_trace_coefficients(&DomainDescription::unit_half_disk(), &t).unwrap();
        for (x, y) in s.iter().zip(h) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn missing_arguments_are_usage_errors() {
        assert_eq!(cmd_c12(&C12Args::default()).unwrap_err().exit_code(), 1);
        assert_eq!(cmd_trace(&TraceArgs::default()).unwrap_err().exit_code(), 1);
        assert_eq!(cmd_fit(&FitArgs::default()).unwrap_err().exit_code(), 1);
        assert_eq!(cmd_verify(&VerifyArgs::default()).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn straight_angle_is_rejected() {
        let a = C12Args { alpha: Some(3.14159), ..Default::default() };
        let e = cmd_c12(&a).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("alpha = pi"), "{e}");
    }
}
