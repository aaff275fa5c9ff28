//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use sectorheat::conformal::c12_right_angle;
use sectorheat::spectra::{fit_domain, DomainSpec};
use sectorheat_cli::args::Profile;
use sectorheat_cli::suites::{self, Check, DEFAULT_SEED, TRACE_EPS};

struct Criterion {
    id: u32,
    title: &'static str,
    checks: Vec<Check>,
    error: Option<String>,
    seconds: f64,
    time_limit: Option<f64>,
}

impl Criterion {
    fn pass(&self) -> bool {
        self.error.is_none()
            && !self.checks.is_empty()
            && self.checks.iter().all(|c| c.pass)
            && self.time_limit.is_none_or(|l| self.seconds <= l)
    }

    fn print(&self) {
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        println!("criterion {:>2}: {verdict}  {}  ({:.1} s)", self.id, self.title, self.seconds);
        for c in &self.checks {
            println!(
                "    [{}] {:<32} value {:>+.9e}  target {:>+.9e}  tol {:.1e} ({})",
                if c.pass { "ok" } else { "!!" },
                c.name,
                c.value,
                c.target,
                c.tolerance,
                c.mode.label()
            );
        }
        if let Some(e) = &self.error {
            println!("    error: {e}");
        }
        if let Some(l) = self.time_limit {
            if self.seconds > l {
                println!("    runtime {:.1} s exceeds {l:.0} s", self.seconds);
            }
        }
    }
}

fn run<F>(id: u32, title: &'static str, time_limit: Option<f64>, f: F) -> Criterion
where
    F: FnOnce() -> Result<Vec<Check>, String>,
{
    let start = Instant::now();
    let (checks, error) = match f() {
        Ok(c) => (c, None),
        Err(e) => (vec![], Some(e)),
    };
    let c = Criterion { id, title, checks, error, seconds: start.elapsed().as_secs_f64(), time_limit };
    c.print();
    c
}

fn main() -> ExitCode {
    let s = |e: sectorheat::error::Error| e.to_string();
    let mut all = Vec::new();

    let mut quadrature = None;
    all.push(run(1, "c½(π/2) from the finite part (images, accurate)", Some(900.0), || {
        let r = suites::c12_right(Profile::Accurate).map_err(s)?;
        quadrature = Some(r.value);
        println!(
            "    c12(pi/2) = {:.7} ± {:.1e}, closed form {:.7}",
            r.value,
            r.error_bar,
            c12_right_angle()
        );
        Ok(vec![Check::abs("c12(pi/2)", r.value, 0.5 * (0.0342 + 0.0363), 0.5 * (0.0363 - 0.0342))])
    }));

    let mut half_disk = None;
    all.push(run(2, "three-way π/2 consistency", None, || {
        let q = quadrature.ok_or("criterion 1 produced no value")?;
        let fit = fit_domain(DomainSpec::HalfDisk { radius: 1.0 }, TRACE_EPS).map_err(s)?;
        let a = fit.coefficient(0.5).ok_or("no t^1/2 coefficient")?;
        half_disk = Some(fit);
        Ok(suites::pi2_checks(q, a).into_iter().skip(1).collect())
    }));

    all.push(run(3, "half-disk expansion fit", Some(300.0), || {
        let fit = match half_disk.take() {
            Some(f) => f,
            None => fit_domain(DomainSpec::HalfDisk { radius: 1.0 }, TRACE_EPS).map_err(s)?,
        };
        Ok(suites::half_disk_fit_checks(&fit))
    }));

    all.push(run(4, "disk expansion fit", None, || {
        Ok(suites::disk_fit_checks(&fit_domain(DomainSpec::Disk { radius: 1.0 }, TRACE_EPS).map_err(s)?))
    }));

    all.push(run(5, "unit-square expansion fit", None, || {
        let fit = fit_domain(DomainSpec::Rectangle { a: 1.0, b: 1.0 }, TRACE_EPS).map_err(s)?;
        Ok(suites::square_fit_checks(&fit))
    }));

    all.push(run(6, "series kernel vs image kernel", Some(60.0), || suites::kernel_oracle().map_err(s)));

    all.push(run(7, "polar-operator identities and conic scaling", None, || {
        let mut c = suites::polarops(DEFAULT_SEED);
        c.extend(suites::conic_scaling(DEFAULT_SEED).map_err(s)?);
        Ok(c)
    }));

    all.push(run(8, "td-symbol closed form", None, || suites::td_subleading().map_err(s)));

    all.push(run(9, "zeta pipeline", None, || suites::zeta().map_err(s)));

    all.push(run(10, "McMahon envelope", None, || suites::mcmahon().map_err(s)));

    let failed: Vec<u32> = all.iter().filter(|c| !c.pass()).map(|c| c.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", all.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
